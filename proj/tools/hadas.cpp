// hadas: command-line access to the repository, analysis and configuration
// generation. Exit codes: 0 ok, 1 usage, 2 repository, 3 domain,
// 4 unknown entity, 5 conflict.

#include <pthread.h>

#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hadas/analysis.hpp"
#include "hadas/assistant.hpp"
#include "hadas/dataset_check.hpp"
#include "hadas/http_api.hpp"
#include "hadas/materialize.hpp"
#include "hadas/repository.hpp"

#ifndef HADAS_DEFAULT_REPO
#define HADAS_DEFAULT_REPO "data/media-store"
#endif

namespace {

enum Exit { kOk = 0, kUsage = 1, kRepository = 2, kDomain = 3, kUnknown = 4, kConflict = 5 };

int exit_code(hadas::ErrorCode code) {
  using hadas::ErrorCode;
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::schema_error:
    case ErrorCode::integrity_error:
    case ErrorCode::ambiguous_provider: return kRepository;
    case ErrorCode::out_of_domain: return kDomain;
    case ErrorCode::unknown_concern:
    case ErrorCode::unknown_variant:
    case ErrorCode::unknown_choice:
    case ErrorCode::unknown_session:
    case ErrorCode::no_energy_data:
    case ErrorCode::variant_excluded: return kUnknown;
    case ErrorCode::conflict:
    case ErrorCode::invalid_resolution:
    case ErrorCode::partial_resolution: return kConflict;
    case ErrorCode::invalid_step:
    case ErrorCode::invalid_argument: return kUsage;
  }
  return kUsage;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::filesystem::path repo_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("HADAS_REPO"); env && *env) return env;
  return HADAS_DEFAULT_REPO;
}

hadas::Repository open_repo(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw UsageError("repository directory not found: " + dir.string());
  return hadas::load_repository(dir);
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--range must be lo:hi, got " + text);
  try {
    std::size_t used_lo = 0, used_hi = 0;
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    const double lo = std::stod(a, &used_lo);
    const double hi = std::stod(b, &used_hi);
    if (used_lo != a.size() || used_hi != b.size()) throw std::invalid_argument("trailing text");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError("--range must be lo:hi, got " + text);
  }
}

hadas::Resolution parse_selections(const std::vector<std::string>& items) {
  hadas::Resolution r;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--select must be choice=true|false, got " + item);
    const std::string choice = item.substr(0, eq), value = item.substr(eq + 1);
    if (value == "true") r.set(choice, true);
    else if (value == "false") r.set(choice, false);
    else throw UsageError("--select must be choice=true|false, got " + item);
  }
  return r;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw UsageError("cannot write " + path);
}

void print_error(const hadas::Error& e) {
  std::cerr << "error [" << hadas::code_name(e.code()) << "]: " << e.what() << "\n";
  if (auto* d = dynamic_cast<const hadas::OutOfDomainError*>(&e); d && !std::isnan(d->valid_lo()))
    std::cerr << "  valid domain: [" << hadas::format_sig6(d->valid_lo()) << ", "
              << hadas::format_sig6(d->valid_hi()) << "] MB\n";
  for (const auto& line : e.details()) std::cerr << "  " << line << "\n";
}

// --- commands ---------------------------------------------------------------

int cmd_repo_validate(const std::string& path) {
  const hadas::Repository repo = open_repo(path);
  int problems = 0;
  for (const auto& f : hadas::validate_tree(repo.tree).findings) {
    std::cerr << "tree: " << f.message << "\n";
    ++problems;
  }
  const auto report = hadas::validate_dataset(repo);
  for (const auto& c : report.checks) {
    std::cout << c.id << " " << (c.passed ? "pass" : "FAIL") << (c.passed ? "" : ": " + c.detail) << "\n";
    if (!c.passed) {
      std::cerr << c.id << ": " << c.detail << "\n";
      ++problems;
    }
  }
  if (problems) return kRepository;
  std::cout << "repository " << repo.name << " ok: " << repo.tree.choices.size() << " choices, "
            << repo.concerns.size() << " concerns, " << repo.variants.size() << " variants\n";
  return kOk;
}

int cmd_concerns(const hadas::Repository& repo) {
  for (const auto& c : hadas::list_concerns(repo)) {
    std::cout << c.id << "\t" << c.name << "\t";
    for (std::size_t i = 0; i < c.keywords.size(); ++i) std::cout << (i ? "," : "") << c.keywords[i];
    std::cout << "\n";
  }
  return kOk;
}

int cmd_match(const hadas::Repository& repo, const std::vector<std::string>& words) {
  std::string text;
  for (const auto& w : words) text += w + " ";
  for (const auto& m : hadas::match_keywords(repo, text)) {
    std::cout << m.concern << "\t";
    for (std::size_t i = 0; i < m.matched.size(); ++i) std::cout << (i ? "," : "") << m.matched[i];
    std::cout << "\n";
  }
  return kOk;
}

int cmd_variants(const hadas::Repository& repo, const std::string& concern) {
  for (const auto& v : hadas::variants_of(repo, concern))
    std::cout << v.id << "\t" << v.choice << "\t" << (v.energy ? "energy" : "-") << "\t"
              << (v.fragment ? *v.fragment : "-") << "\n";
  return kOk;
}

struct AnalyzeFlags {
  std::string concern;
  std::vector<std::string> variants;
  bool with_dependencies = false;
  std::string range = "5:950";
  std::size_t points = 32;
  std::string spacing = "log";
  std::string out;
};

int cmd_analyze(const hadas::Repository& repo, const AnalyzeFlags& f) {
  std::vector<hadas::VariantId> variants = f.variants;
  if (!f.concern.empty()) {
    const auto& concern = repo.concern(f.concern);
    if (variants.empty()) {
      for (const auto& v : concern.variants)
        if (repo.variant(v).energy) variants.push_back(v);
    } else {
      for (const auto& v : variants)
        if (repo.variant(v).concern != f.concern)
          throw UsageError("variant " + v + " does not belong to concern " + f.concern);
    }
  }
  if (variants.empty()) throw UsageError("analyze needs --concern or at least one --variant");
  const auto [lo, hi] = parse_range(f.range);
  const auto spacing = hadas::parse_spacing(f.spacing);

  const hadas::Downstream down = f.with_dependencies ? hadas::all_downstream(repo, variants) : hadas::Downstream{};
  const auto pipelines = hadas::build_pipelines(repo, variants, down);
  const auto table = hadas::sweep(pipelines, lo, hi, f.points, spacing);
  const std::string csv = hadas::to_csv(table);

  std::ostringstream ranking;
  ranking << "rank,label,integrated_score,best_at_count\n";
  int position = 1;
  for (const auto& e : hadas::rank(table))
    ranking << position++ << "," << hadas::csv_field(e.label) << "," << hadas::format_sig6(e.integrated_score)
            << "," << e.best_at_count << "\n";

  if (f.out.empty()) {
    std::cout << csv;
    std::cerr << ranking.str();
  } else {
    write_file(f.out, csv);
    std::cout << ranking.str();
  }
  return kOk;
}

struct ResolveFlags {
  std::vector<std::string> select;
  std::string out;
  std::string format = "native";
};

hadas::ConfigFormat parse_format(const std::string& s) {
  if (s == "native") return hadas::ConfigFormat::native;
  if (s == "dot") return hadas::ConfigFormat::dot;
  throw UsageError("--format must be native or dot, got " + s);
}

int cmd_resolve(const hadas::Repository& repo, const ResolveFlags& f, bool print_resolution) {
  const auto format = parse_format(f.format);
  const hadas::Resolution total = hadas::resolve(repo.tree, parse_selections(f.select));
  std::optional<std::string> config;
  if (!print_resolution || !f.out.empty())
    config = hadas::export_configuration(hadas::materialize(repo, total), format);
  if (print_resolution)
    for (const auto& [choice, value] : total.decided()) std::cout << choice << "=" << (value ? "true" : "false") << "\n";
  if (config) {
    if (f.out.empty()) std::cout << *config;
    else write_file(f.out, *config);
  }
  return kOk;
}

struct ServeFlags {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string snapshot;
  std::string cors = "*";
};

int cmd_serve(const hadas::Repository& repo, const ServeFlags& f) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto assistant = std::make_shared<hadas::Assistant>(std::make_shared<const hadas::Repository>(repo));
  hadas::ApiOptions options;
  options.cors_origin = f.cors;
  if (!f.snapshot.empty()) options.snapshot = f.snapshot;
  hadas::ApiServer api(assistant, options);

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    api.stop();
  });
  std::cerr << "listening on http://" << f.host << ":" << f.port << "/api/v1\n";
  const bool ok = api.listen(f.host, f.port);
  if (!ok) {
    std::cerr << "cannot listen on " << f.host << ":" << f.port << "\n";
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  return ok ? kOk : kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware architecture design assistant"};
  app.require_subcommand(1);
  std::string repo_flag;
  app.add_option("--repo", repo_flag, "Repository directory (default: $HADAS_REPO, then the bundled dataset)");

  auto* repo_cmd = app.add_subcommand("repo", "Repository maintenance");
  repo_cmd->require_subcommand(1);
  std::string validate_path;
  auto* validate = repo_cmd->add_subcommand("validate", "Check a repository and its dataset constraints");
  validate->add_option("path", validate_path, "Repository directory")->required();

  auto* concerns = app.add_subcommand("concerns", "List concerns with their keywords");

  std::vector<std::string> words;
  auto* match = app.add_subcommand("match", "Suggest concerns for requirement text");
  match->add_option("text", words, "Requirement text")->required();

  std::string variants_concern;
  auto* variants = app.add_subcommand("variants", "List the variants of a concern");
  variants->add_option("concern", variants_concern, "Concern id")->required();

  AnalyzeFlags af;
  auto* analyze = app.add_subcommand("analyze", "Sweep energy pipelines over a size range");
  analyze->add_option("--concern", af.concern, "Analyze every variant of this concern");
  analyze->add_option("--variant", af.variants, "Variant to analyze (repeatable)");
  analyze->add_flag("--with-dependencies", af.with_dependencies, "Compose with the concerns each variant feeds");
  analyze->add_option("--range", af.range, "Size range lo:hi in MB")->capture_default_str();
  analyze->add_option("--points", af.points, "Grid points")->check(CLI::Range(2, 100000))->capture_default_str();
  analyze->add_option("--spacing", af.spacing, "log or linear")->capture_default_str();
  analyze->add_option("--out", af.out, "Write the CSV here; the ranking goes to stdout");

  ResolveFlags rf;
  auto* resolve = app.add_subcommand("resolve", "Complete selections into a total resolution");
  auto* generate = app.add_subcommand("generate", "Resolve selections and export the configuration");
  for (auto* cmd : {resolve, generate}) {
    cmd->add_option("--select", rf.select, "choice=true|false (repeatable)");
    cmd->add_option("--out", rf.out, "Configuration output file");
    cmd->add_option("--format", rf.format, "native or dot")->capture_default_str();
  }

  ServeFlags sf;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--host", sf.host)->capture_default_str();
  serve->add_option("--port", sf.port)->capture_default_str();
  serve->add_option("--snapshot", sf.snapshot, "Session snapshot file, restored at start and written on shutdown");
  serve->add_option("--cors-origin", sf.cors, "Allowed browser origin")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_repo_validate(validate_path);
    const hadas::Repository repo = open_repo(repo_path(repo_flag));
    if (*concerns) return cmd_concerns(repo);
    if (*match) return cmd_match(repo, words);
    if (*variants) return cmd_variants(repo, variants_concern);
    if (*analyze) return cmd_analyze(repo, af);
    if (*resolve) return cmd_resolve(repo, rf, true);
    if (*generate) return cmd_resolve(repo, rf, false);
    if (*serve) return cmd_serve(repo, sf);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const hadas::Error& e) {
    print_error(e);
    return exit_code(e.code());
  }
  return kUsage;
}
