#pragma once

// The five-step design workflow as stateful sessions over a shared,
// read-only repository:
//   1 describe requirements  2 pick concerns  3 pick variants
//   4 analyze alternatives   5 configuration generated
// Each session is guarded by its own mutex; the session table by a
// shared_mutex, so requests on different sessions run in parallel.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "hadas/analysis.hpp"
#include "hadas/architecture.hpp"
#include "hadas/energy.hpp"
#include "hadas/error.hpp"
#include "hadas/materialize.hpp"
#include "hadas/repository.hpp"
#include "hadas/variability.hpp"

namespace hadas {

inline constexpr int kFirstStep = 1;
inline constexpr int kLastStep = 5;
inline constexpr double kCrossoverTolerance = 0.01;  // MB

struct AnalysisRequest {
  std::vector<VariantId> variants;
  double lo = 5.0;
  double hi = 950.0;
  std::size_t points = 32;
  Spacing spacing = Spacing::logarithmic;

  friend bool operator==(const AnalysisRequest&, const AnalysisRequest&) = default;
};

struct Session {
  std::string id;
  int step = kFirstStep;
  std::set<ConcernId> selected_concerns;
  Resolution selections;
  std::set<ConcernId> derived_concerns;
  std::vector<AnalysisRequest> history;
  std::optional<ArchitectureConfiguration> config;

  friend bool operator==(const Session&, const Session&) = default;
};

enum class OptionState { selected, excluded, open };

struct VariantOption {
  VariantId variant;
  ChoiceId choice;
  OptionState state = OptionState::open;
};

/// The variant form of one concern as the user sees it after propagation.
struct ConcernForm {
  ConcernId concern;
  std::string name;
  bool derived = false;
  std::vector<VariantOption> options;
};

struct VariantSelection {
  Session session;
  Resolution propagated;
  std::vector<ConcernForm> derived_forms;
};

struct AnalysisResult {
  std::vector<Pipeline> pipelines;
  SweepTable sweep;
  std::vector<RankEntry> ranking;
  std::string reference;                                   // cheapest by integrated score
  std::map<std::string, std::vector<double>> crossovers;  // label -> sizes vs reference
  std::map<std::string, std::vector<Composition>> per_stage;  // label -> one per grid size
};

/// 128 random bits as 32 lowercase hex digits.
inline std::string make_token() {
  static thread_local std::random_device rd;
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (int word = 0; word < 4; ++word) {
    std::uint32_t bits = rd();
    for (int nib = 0; nib < 8; ++nib, bits >>= 4) out += hex[bits & 0xF];
  }
  return out;
}

/// Unselected concerns owning a choice that is true in `propagated`.
inline std::set<ConcernId> derive_concerns(const Repository& repo, const std::set<ConcernId>& selected,
                                           const Resolution& propagated) {
  std::set<ConcernId> out;
  for (const auto& choice : propagated.true_choices()) {
    auto owner = repo.concern_of_choice(choice);
    if (owner && !selected.count(*owner)) out.insert(*owner);
  }
  return out;
}

inline ConcernForm concern_form(const Repository& repo, const ConcernId& id, const Resolution& propagated,
                                bool derived) {
  const Concern& c = repo.concern(id);
  ConcernForm form{id, c.name, derived, {}};
  for (const auto& vid : c.variants) {
    const Variant& v = repo.variant(vid);
    OptionState s = OptionState::open;
    if (propagated.is_true(v.choice)) s = OptionState::selected;
    else if (propagated.is_false(v.choice)) s = OptionState::excluded;
    form.options.push_back({vid, v.choice, s});
  }
  return form;
}

class Assistant {
 private:
  struct Entry {
    std::mutex mu;
    Session session;
  };

  static void require_step(const Session& s, const char* op, std::initializer_list<int> allowed) {
    if (std::find(allowed.begin(), allowed.end(), s.step) != allowed.end()) return;
    throw Error(ErrorCode::invalid_step,
                std::string(op) + " is not allowed at step " + std::to_string(s.step));
  }

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::shared_lock lock(table_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::unknown_session, "unknown session " + id);
    return it->second;
  }

  // Runs `fn` on a copy of the session and commits the copy only if `fn`
  // returns normally, so a failed step leaves the session untouched.
  template <class Fn>
  auto with(const std::string& id, Fn fn) const {
    auto entry = find(id);
    std::lock_guard lock(entry->mu);
    Session work = entry->session;
    auto out = fn(work);
    entry->session = std::move(work);
    return out;
  }

 public:
  explicit Assistant(std::shared_ptr<const Repository> repo) : repo_(std::move(repo)) {
    if (!repo_) throw Error(ErrorCode::invalid_argument, "assistant needs a repository");
  }

  const Repository& repository() const { return *repo_; }
  std::shared_ptr<const Repository> repository_ptr() const { return repo_; }

  Session create_session() {
    auto entry = std::make_shared<Entry>();
    std::unique_lock lock(table_mu_);
    do entry->session.id = make_token();
    while (sessions_.count(entry->session.id));
    sessions_.emplace(entry->session.id, entry);
    return entry->session;
  }

  Session get(const std::string& id) const {
    return with(id, [](Session& s) { return s; });
  }

  std::vector<std::string> session_ids() const {
    std::shared_lock lock(table_mu_);
    std::vector<std::string> out;
    for (const auto& [id, e] : sessions_) out.push_back(id);
    return out;
  }

  bool remove(const std::string& id) {
    std::unique_lock lock(table_mu_);
    return sessions_.erase(id) > 0;
  }

  std::vector<KeywordMatch> suggest_concerns(const std::string& id, const std::string& text) const {
    return with(id, [&](Session& s) {
      require_step(s, "suggest", {1});
      return match_keywords(*repo_, text);
    });
  }

  Session select_concerns(const std::string& id, const std::set<ConcernId>& concerns) {
    return with(id, [&](Session& s) {
      require_step(s, "select concerns", {1, 2});
      for (const auto& c : concerns) repo_->concern(c);
      s.selected_concerns = concerns;
      s.selections = {};
      s.derived_concerns.clear();
      s.history.clear();
      s.config.reset();
      s.step = 2;
      return s;
    });
  }

  /// Replaces the session's selections with `assignments`.
  VariantSelection select_variants(const std::string& id, const Resolution& assignments) {
    return with(id, [&](Session& s) {
      require_step(s, "select variants", {2, 3});
      const Resolution propagated = propagate(repo_->tree, assignments);
      const auto derived = derive_concerns(*repo_, s.selected_concerns, propagated);
      s.selections = assignments;
      s.derived_concerns = derived;
      s.history.clear();
      s.config.reset();
      s.step = 3;
      VariantSelection out{s, propagated, {}};
      for (const auto& c : derived) out.derived_forms.push_back(concern_form(*repo_, c, propagated, true));
      return out;
    });
  }

  /// Forms for every selected and derived concern under the current selections.
  std::vector<ConcernForm> forms(const std::string& id) const {
    return with(id, [&](Session& s) {
      const Resolution propagated = propagate(repo_->tree, s.selections);
      std::vector<ConcernForm> out;
      for (const auto& c : s.selected_concerns) out.push_back(concern_form(*repo_, c, propagated, false));
      for (const auto& c : s.derived_concerns) out.push_back(concern_form(*repo_, c, propagated, true));
      return out;
    });
  }

  AnalysisResult analyze(const std::string& id, const AnalysisRequest& request) {
    return with(id, [&](Session& s) {
      require_step(s, "analyze", {3, 4});
      AnalysisResult result = run_analysis(s, request);
      s.history.push_back(request);
      s.step = 4;
      return result;
    });
  }

  ArchitectureConfiguration generate_configuration(const std::string& id, const Resolution& final_selections) {
    return with(id, [&](Session& s) {
      require_step(s, "generate", {4});
      auto config = materialize(*repo_, resolve(repo_->tree, final_selections));
      s.config = config;
      s.step = 5;
      return config;
    });
  }

  /// Returns to an earlier step and drops everything decided after it.
  Session back(const std::string& id, int step) {
    return with(id, [&](Session& s) {
      if (step < kFirstStep || step >= s.step)
        throw Error(ErrorCode::invalid_step, "cannot go back from step " + std::to_string(s.step) +
                                                 " to step " + std::to_string(step));
      if (step < 5) s.config.reset();
      if (step < 4) s.history.clear();
      if (step < 3) {
        s.selections = {};
        s.derived_concerns.clear();
      }
      if (step < 2) s.selected_concerns.clear();
      s.step = step;
      return s;
    });
  }

  /// Inserts a session as-is (used when restoring a snapshot).
  void restore(Session session) {
    if (session.id.empty()) throw Error(ErrorCode::invalid_argument, "session without id");
    auto entry = std::make_shared<Entry>();
    entry->session = std::move(session);
    std::unique_lock lock(table_mu_);
    sessions_[entry->session.id] = std::move(entry);
  }

  std::vector<Session> snapshot() const {
    std::vector<std::shared_ptr<Entry>> entries;
    {
      std::shared_lock lock(table_mu_);
      for (const auto& [id, e] : sessions_) entries.push_back(e);
    }
    std::vector<Session> out;
    for (const auto& e : entries) {
      std::lock_guard lock(e->mu);
      out.push_back(e->session);
    }
    return out;
  }

 private:
  AnalysisResult run_analysis(const Session& s, const AnalysisRequest& request) const {
    if (request.variants.empty()) throw Error(ErrorCode::invalid_argument, "no variants to analyze");
    const Resolution propagated = propagate(repo_->tree, s.selections);
    for (const auto& vid : request.variants) {
      const Variant& v = repo_->variant(vid);
      if (propagated.is_false(v.choice))
        throw Error(ErrorCode::variant_excluded, "variant " + vid + " is excluded by the current selections",
                    {v.choice + "=false"});
    }
    AnalysisResult r;
    r.pipelines = build_pipelines(*repo_, request.variants, active_downstream(*repo_, request.variants, propagated));
    r.sweep = sweep(r.pipelines, request.lo, request.hi, request.points, request.spacing);
    r.ranking = rank(r.sweep);
    r.reference = r.ranking.front().label;
    const Pipeline* ref = nullptr;
    for (const auto& p : r.pipelines)
      if (p.label == r.reference) ref = &p;
    for (const auto& p : r.pipelines) {
      auto& rows = r.per_stage[p.label];
      for (double x : r.sweep.sizes) rows.push_back(compose_pipeline(p, x));
      if (&p != ref) r.crossovers[p.label] = crossovers(*ref, p, request.lo, request.hi, kCrossoverTolerance);
    }
    return r;
  }

  std::shared_ptr<const Repository> repo_;
  mutable std::shared_mutex table_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace hadas
