#pragma once

// The green repository: concern catalog, variants, energy data, architecture
// fragments and the variability tree, loaded from a directory of JSON files.
//
//   manifest.json    schema_version + dataset name
//   tree.json        VSpec tree (choices, groups, cross-tree constraints)
//   concerns.json    concerns with keywords and variant lists
//   variants.json    variant -> choice / energy / transform / fragment
//   energy.json      sampled energy functions
//   transforms.json  sampled size transforms
//   fragments.json   interfaces, components, fragments
//
// docs/repository-format.md describes every field.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hadas/architecture.hpp"
#include "hadas/energy.hpp"
#include "hadas/error.hpp"
#include "hadas/variability.hpp"

namespace hadas {

using ConcernId = std::string;
using VariantId = std::string;

inline constexpr const char* kSchemaVersion = "1";

/// Output of one concern's variants feeds the size parameter of another
/// concern (compress, then send). `baseline_label` names the series that
/// skips the upstream stage.
struct Feed {
  ConcernId concern;
  std::string baseline_label;

  friend bool operator==(const Feed&, const Feed&) = default;
};

struct Concern {
  ConcernId id;
  std::string name;
  ChoiceId root_choice;
  std::vector<std::string> keywords;
  std::vector<VariantId> variants;
  std::optional<Feed> feeds;

  friend bool operator==(const Concern&, const Concern&) = default;
};

struct Variant {
  VariantId id;
  ConcernId concern;
  ChoiceId choice;
  std::optional<std::string> energy;
  std::optional<std::string> size_transform;
  std::optional<FragmentId> fragment;

  friend bool operator==(const Variant&, const Variant&) = default;
};

struct Repository {
  std::string version = kSchemaVersion;
  std::string name;
  VSpecTree tree;
  std::map<ConcernId, Concern> concerns;
  std::map<VariantId, Variant> variants;
  std::map<std::string, EnergyFunction> energy_functions;
  std::map<std::string, SizeTransform> size_transforms;
  std::map<InterfaceId, Interface> interfaces;
  std::map<ComponentId, Component> components;
  std::map<FragmentId, ArchitectureFragment> fragments;

  const Concern& concern(const ConcernId& id) const {
    auto it = concerns.find(id);
    if (it == concerns.end()) throw Error(ErrorCode::unknown_concern, "unknown concern " + id);
    return it->second;
  }

  const Variant& variant(const VariantId& id) const {
    auto it = variants.find(id);
    if (it == variants.end()) throw Error(ErrorCode::unknown_variant, "unknown variant " + id);
    return it->second;
  }

  /// Concern whose root choice is `choice` or one of its ancestors.
  std::optional<ConcernId> concern_of_choice(const ChoiceId& choice) const {
    for (const auto& [id, c] : concerns)
      if (tree.is_descendant_or_self(choice, c.root_choice)) return id;
    return std::nullopt;
  }

  /// Choice -> fragment binding derived from the variants.
  std::map<ChoiceId, FragmentId> binding() const {
    std::map<ChoiceId, FragmentId> out;
    for (const auto& [id, v] : variants)
      if (v.fragment) out.emplace(v.choice, *v.fragment);
    return out;
  }

  friend bool operator==(const Repository&, const Repository&) = default;
};

// ---------------------------------------------------------------------------
// JSON decoding

namespace detail {

// Locates a JSON value for error messages: "concerns.json: concerns[2].keywords".
struct Where {
  std::string file;
  std::string path;

  Where operator/(const std::string& key) const { return {file, path.empty() ? key : path + "." + key}; }
  Where operator[](std::size_t i) const { return {file, path + "[" + std::to_string(i) + "]"}; }
  std::string str() const { return file + (path.empty() ? "" : ": " + path); }
};

[[noreturn]] inline void parse_fail(const Where& w, const std::string& what) {
  throw Error(ErrorCode::parse_error, w.str() + ": " + what, {w.file, w.path});
}

inline const nlohmann::json& member(const nlohmann::json& j, const char* key, const Where& w) {
  if (!j.is_object()) parse_fail(w, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(w / key, "missing field");
  return *it;
}

inline std::string get_string(const nlohmann::json& j, const char* key, const Where& w) {
  const auto& v = member(j, key, w);
  if (!v.is_string()) parse_fail(w / key, "expected a string");
  return v.get<std::string>();
}

inline std::optional<std::string> get_opt_string(const nlohmann::json& j, const char* key, const Where& w) {
  if (!j.contains(key)) return std::nullopt;
  return get_string(j, key, w);
}

inline std::size_t get_count(const nlohmann::json& j, const char* key, const Where& w) {
  const auto& v = member(j, key, w);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    parse_fail(w / key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

inline const nlohmann::json& get_array(const nlohmann::json& j, const char* key, const Where& w) {
  const auto& v = member(j, key, w);
  if (!v.is_array()) parse_fail(w / key, "expected an array");
  return v;
}

inline std::vector<std::string> get_strings(const nlohmann::json& j, const char* key, const Where& w) {
  const auto& arr = get_array(j, key, w);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) parse_fail((w / key)[i], "expected a string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

inline std::vector<Sample> get_samples(const nlohmann::json& j, const Where& w) {
  const auto& arr = get_array(j, "samples", w);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& p = arr[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      parse_fail((w / "samples")[i], "expected a [size, value] pair of numbers");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

inline nlohmann::json read_json(const std::filesystem::path& dir, const std::string& file) {
  const auto path = dir / file;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, file + ": cannot read " + path.string(), {file});
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw Error(ErrorCode::parse_error, file + ": line " + std::to_string(line) + ": " + e.what(),
                {file, "line " + std::to_string(line)});
  }
}

template <class Map>
void insert_unique(Map& map, typename Map::mapped_type value, const std::string& family,
                   std::vector<std::string>& problems) {
  const auto id = value.id;
  if (!map.emplace(id, std::move(value)).second) problems.push_back("duplicate " + family + " id " + id);
}

}  // namespace detail

inline VSpecTree tree_from_json(const nlohmann::json& doc, const std::string& file,
                                std::vector<std::string>& problems) {
  using detail::Where;
  const Where top{file, ""};
  VSpecTree tree;
  tree.root = detail::get_string(doc, "root", top);
  const auto& choices = detail::get_array(doc, "choices", top);
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const auto w = (top / "choices")[i];
    const auto& j = choices[i];
    Choice c;
    c.id = detail::get_string(j, "id", w);
    c.name = detail::get_string(j, "name", w);
    c.parent = detail::get_opt_string(j, "parent", w);
    const auto kind = detail::get_string(j, "kind", w);
    if (kind == "mandatory") c.kind = ChoiceKind::mandatory;
    else if (kind == "optional") c.kind = ChoiceKind::optional;
    else detail::parse_fail(w / "kind", "expected mandatory or optional, got " + kind);
    if (j.contains("group")) {
      const auto& g = j.at("group");
      const auto gw = w / "group";
      c.group = Group{detail::get_strings(g, "members", gw), detail::get_count(g, "min", gw),
                      detail::get_count(g, "max", gw)};
    }
    detail::insert_unique(tree.choices, std::move(c), "choice", problems);
  }
  const auto& constraints = detail::get_array(doc, "constraints", top);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto w = (top / "constraints")[i];
    const auto& j = constraints[i];
    CrossTreeConstraint k;
    k.id = detail::get_string(j, "id", w);
    const auto kind = detail::get_string(j, "kind", w);
    if (kind == "implies") k.kind = ConstraintKind::implies;
    else if (kind == "excludes") k.kind = ConstraintKind::excludes;
    else detail::parse_fail(w / "kind", "expected implies or excludes, got " + kind);
    k.antecedent = detail::get_string(j, "antecedent", w);
    k.consequent = detail::get_string(j, "consequent", w);
    tree.constraints.push_back(std::move(k));
  }
  return tree;
}

// ---------------------------------------------------------------------------
// integrity

/// Cross-reference and invariant problems of an assembled repository.
inline std::vector<std::string> integrity_problems(const Repository& repo) {
  std::vector<std::string> out;
  for (const auto& f : validate_tree(repo.tree).findings) out.push_back("tree: " + f.message);

  for (const auto& [id, c] : repo.concerns) {
    if (c.keywords.empty()) out.push_back("concern " + id + " has no keywords");
    for (const auto& k : c.keywords) {
      const bool ok = !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char ch) {
        return std::islower(ch) || std::isdigit(ch);
      });
      if (!ok) out.push_back("concern " + id + " keyword '" + k + "' is not a lowercase word");
    }
    if (!repo.tree.contains(c.root_choice))
      out.push_back("concern " + id + " references unknown choice " + c.root_choice);
    for (const auto& v : c.variants) {
      auto it = repo.variants.find(v);
      if (it == repo.variants.end()) out.push_back("concern " + id + " references unknown variant " + v);
      else if (it->second.concern != id)
        out.push_back("concern " + id + " lists variant " + v + " owned by " + it->second.concern);
    }
    if (c.feeds && !repo.concerns.count(c.feeds->concern))
      out.push_back("concern " + id + " feeds unknown concern " + c.feeds->concern);
  }

  for (const auto& [id, v] : repo.variants) {
    auto concern = repo.concerns.find(v.concern);
    if (concern == repo.concerns.end()) {
      out.push_back("variant " + id + " references unknown concern " + v.concern);
    } else {
      const auto& listed = concern->second.variants;
      if (std::find(listed.begin(), listed.end(), id) == listed.end())
        out.push_back("variant " + id + " is not listed by concern " + v.concern);
      if (!repo.tree.contains(v.choice))
        out.push_back("variant " + id + " references unknown choice " + v.choice);
      else if (!repo.tree.is_descendant_or_self(v.choice, concern->second.root_choice))
        out.push_back("variant " + id + " choice " + v.choice + " is outside concern " + v.concern);
    }
    if (v.energy) {
      auto e = repo.energy_functions.find(*v.energy);
      if (e == repo.energy_functions.end()) out.push_back("variant " + id + " references unknown energy function " + *v.energy);
      else if (e->second.variant != id) out.push_back("energy function " + *v.energy + " belongs to " + e->second.variant + ", not " + id);
    }
    if (v.size_transform) {
      auto t = repo.size_transforms.find(*v.size_transform);
      if (t == repo.size_transforms.end()) out.push_back("variant " + id + " references unknown size transform " + *v.size_transform);
      else if (t->second.variant != id) out.push_back("size transform " + *v.size_transform + " belongs to " + t->second.variant + ", not " + id);
    }
    if (v.fragment && !repo.fragments.count(*v.fragment))
      out.push_back("variant " + id + " references unknown fragment " + *v.fragment);
  }

  for (const auto& [id, e] : repo.energy_functions) {
    if (!repo.variants.count(e.variant)) out.push_back("energy function " + id + " references unknown variant " + e.variant);
    for (const auto& m : check_samples(e.samples, false)) out.push_back("energy function " + id + ": " + m);
  }
  for (const auto& [id, t] : repo.size_transforms) {
    if (!repo.variants.count(t.variant)) out.push_back("size transform " + id + " references unknown variant " + t.variant);
    for (const auto& m : check_samples(t.samples, true)) out.push_back("size transform " + id + ": " + m);
  }
  for (const auto& [id, c] : repo.components) {
    for (const auto& i : c.provides)
      if (!repo.interfaces.count(i)) out.push_back("component " + id + " provides unknown interface " + i);
    for (const auto& i : c.requires_)
      if (!repo.interfaces.count(i)) out.push_back("component " + id + " requires unknown interface " + i);
  }
  for (const auto& [id, f] : repo.fragments)
    for (auto& m : check_fragment(f, repo.components)) out.push_back(std::move(m));
  return out;
}

// ---------------------------------------------------------------------------
// load_repository

/// Loads and validates a repository directory; all-or-nothing.
inline Repository load_repository(const std::filesystem::path& dir) {
  using detail::Where;
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::parse_error, "repository directory " + dir.string() + " not found");

  Repository repo;
  std::vector<std::string> problems;

  const auto manifest = detail::read_json(dir, "manifest.json");
  const Where mw{"manifest.json", ""};
  repo.version = detail::get_string(manifest, "schema_version", mw);
  if (repo.version != kSchemaVersion)
    throw Error(ErrorCode::schema_error, "manifest.json: unsupported schema_version " + repo.version +
                                             " (expected " + kSchemaVersion + ")");
  repo.name = detail::get_string(manifest, "name", mw);

  repo.tree = tree_from_json(detail::read_json(dir, "tree.json"), "tree.json", problems);

  {
    const auto doc = detail::read_json(dir, "concerns.json");
    const Where top{"concerns.json", ""};
    const auto& arr = detail::get_array(doc, "concerns", top);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto w = (top / "concerns")[i];
      Concern c;
      c.id = detail::get_string(arr[i], "id", w);
      c.name = detail::get_string(arr[i], "name", w);
      c.root_choice = detail::get_string(arr[i], "root_choice", w);
      c.keywords = detail::get_strings(arr[i], "keywords", w);
      c.variants = detail::get_strings(arr[i], "variants", w);
      if (arr[i].contains("feeds")) {
        const auto& f = arr[i].at("feeds");
        c.feeds = Feed{detail::get_string(f, "concern", w / "feeds"),
                       detail::get_string(f, "baseline_label", w / "feeds")};
      }
      detail::insert_unique(repo.concerns, std::move(c), "concern", problems);
    }
  }
  {
    const auto doc = detail::read_json(dir, "variants.json");
    const Where top{"variants.json", ""};
    const auto& arr = detail::get_array(doc, "variants", top);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto w = (top / "variants")[i];
      Variant v;
      v.id = detail::get_string(arr[i], "id", w);
      v.concern = detail::get_string(arr[i], "concern", w);
      v.choice = detail::get_string(arr[i], "choice", w);
      v.energy = detail::get_opt_string(arr[i], "energy", w);
      v.size_transform = detail::get_opt_string(arr[i], "size_transform", w);
      v.fragment = detail::get_opt_string(arr[i], "fragment", w);
      detail::insert_unique(repo.variants, std::move(v), "variant", problems);
    }
  }
  {
    const auto doc = detail::read_json(dir, "energy.json");
    const Where top{"energy.json", ""};
    const auto& arr = detail::get_array(doc, "energy_functions", top);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto w = (top / "energy_functions")[i];
      EnergyFunction e;
      e.id = detail::get_string(arr[i], "id", w);
      e.variant = detail::get_string(arr[i], "variant", w);
      e.parameter = detail::get_string(arr[i], "parameter", w);
      e.unit = detail::get_string(arr[i], "unit", w);
      e.samples = detail::get_samples(arr[i], w);
      detail::insert_unique(repo.energy_functions, std::move(e), "energy function", problems);
    }
  }
  {
    const auto doc = detail::read_json(dir, "transforms.json");
    const Where top{"transforms.json", ""};
    const auto& arr = detail::get_array(doc, "size_transforms", top);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto w = (top / "size_transforms")[i];
      SizeTransform t;
      t.id = detail::get_string(arr[i], "id", w);
      t.variant = detail::get_string(arr[i], "variant", w);
      t.samples = detail::get_samples(arr[i], w);
      if (t.id == "identity") problems.push_back("size transform id 'identity' is reserved");
      detail::insert_unique(repo.size_transforms, std::move(t), "size transform", problems);
    }
  }
  {
    const auto doc = detail::read_json(dir, "fragments.json");
    const Where top{"fragments.json", ""};
    const auto& ifaces = detail::get_array(doc, "interfaces", top);
    for (std::size_t i = 0; i < ifaces.size(); ++i) {
      const auto w = (top / "interfaces")[i];
      detail::insert_unique(repo.interfaces,
                            Interface{detail::get_string(ifaces[i], "id", w), detail::get_string(ifaces[i], "name", w)},
                            "interface", problems);
    }
    const auto& comps = detail::get_array(doc, "components", top);
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const auto w = (top / "components")[i];
      detail::insert_unique(repo.components,
                            Component{detail::get_string(comps[i], "id", w), detail::get_string(comps[i], "name", w),
                                      detail::get_strings(comps[i], "provides", w),
                                      detail::get_strings(comps[i], "requires", w)},
                            "component", problems);
    }
    const auto& frags = detail::get_array(doc, "fragments", top);
    for (std::size_t i = 0; i < frags.size(); ++i) {
      const auto w = (top / "fragments")[i];
      ArchitectureFragment f;
      f.id = detail::get_string(frags[i], "id", w);
      f.components = detail::get_strings(frags[i], "components", w);
      const auto& conns = detail::get_array(frags[i], "connectors", w);
      for (std::size_t k = 0; k < conns.size(); ++k) {
        const auto cw = (w / "connectors")[k];
        f.connectors.push_back({detail::get_string(conns[k], "from", cw), detail::get_string(conns[k], "interface", cw),
                                detail::get_string(conns[k], "to", cw)});
      }
      detail::insert_unique(repo.fragments, std::move(f), "fragment", problems);
    }
  }

  for (auto& p : integrity_problems(repo)) problems.push_back(std::move(p));
  if (!problems.empty()) {
    std::string message = "repository integrity: " + problems.front();
    throw Error(ErrorCode::integrity_error, std::move(message), std::move(problems));
  }
  return repo;
}

// ---------------------------------------------------------------------------
// serialization (canonical form: 2-space indented JSON plus trailing newline)

inline nlohmann::ordered_json tree_to_json(const VSpecTree& tree) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["root"] = tree.root;
  ordered_json choices = ordered_json::array();
  for (const auto& [id, c] : tree.choices) {
    ordered_json j;
    j["id"] = c.id;
    j["name"] = c.name;
    if (c.parent) j["parent"] = *c.parent;
    j["kind"] = std::string(to_string(c.kind));
    if (c.group) j["group"] = ordered_json{{"members", c.group->members}, {"min", c.group->min}, {"max", c.group->max}};
    choices.push_back(std::move(j));
  }
  doc["choices"] = std::move(choices);
  ordered_json constraints = ordered_json::array();
  for (const auto& k : tree.constraints)
    constraints.push_back(ordered_json{{"id", k.id},
                                       {"kind", std::string(to_string(k.kind))},
                                       {"antecedent", k.antecedent},
                                       {"consequent", k.consequent}});
  doc["constraints"] = std::move(constraints);
  return doc;
}

namespace detail {

inline nlohmann::ordered_json samples_to_json(const std::vector<Sample>& samples) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& s : samples) out.push_back(nlohmann::ordered_json::array({s.x, s.y}));
  return out;
}

inline std::string canonical(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// File name -> canonical file contents.
inline std::map<std::string, std::string> serialize_repository(const Repository& repo) {
  using nlohmann::ordered_json;
  std::map<std::string, std::string> files;
  files["manifest.json"] = detail::canonical(ordered_json{{"schema_version", repo.version}, {"name", repo.name}});
  files["tree.json"] = detail::canonical(tree_to_json(repo.tree));

  ordered_json concerns = ordered_json::array();
  for (const auto& [id, c] : repo.concerns) {
    ordered_json j;
    j["id"] = c.id;
    j["name"] = c.name;
    j["root_choice"] = c.root_choice;
    j["keywords"] = c.keywords;
    j["variants"] = c.variants;
    if (c.feeds) j["feeds"] = ordered_json{{"concern", c.feeds->concern}, {"baseline_label", c.feeds->baseline_label}};
    concerns.push_back(std::move(j));
  }
  files["concerns.json"] = detail::canonical(ordered_json{{"concerns", std::move(concerns)}});

  ordered_json variants = ordered_json::array();
  for (const auto& [id, v] : repo.variants) {
    ordered_json j;
    j["id"] = v.id;
    j["concern"] = v.concern;
    j["choice"] = v.choice;
    if (v.energy) j["energy"] = *v.energy;
    if (v.size_transform) j["size_transform"] = *v.size_transform;
    if (v.fragment) j["fragment"] = *v.fragment;
    variants.push_back(std::move(j));
  }
  files["variants.json"] = detail::canonical(ordered_json{{"variants", std::move(variants)}});

  ordered_json energy = ordered_json::array();
  for (const auto& [id, e] : repo.energy_functions)
    energy.push_back(ordered_json{{"id", e.id},
                                  {"variant", e.variant},
                                  {"parameter", e.parameter},
                                  {"unit", e.unit},
                                  {"samples", detail::samples_to_json(e.samples)}});
  files["energy.json"] = detail::canonical(ordered_json{{"energy_functions", std::move(energy)}});

  ordered_json transforms = ordered_json::array();
  for (const auto& [id, t] : repo.size_transforms)
    transforms.push_back(ordered_json{{"id", t.id}, {"variant", t.variant}, {"samples", detail::samples_to_json(t.samples)}});
  files["transforms.json"] = detail::canonical(ordered_json{{"size_transforms", std::move(transforms)}});

  ordered_json interfaces = ordered_json::array();
  for (const auto& [id, i] : repo.interfaces) interfaces.push_back(ordered_json{{"id", i.id}, {"name", i.name}});
  ordered_json components = ordered_json::array();
  for (const auto& [id, c] : repo.components)
    components.push_back(ordered_json{{"id", c.id}, {"name", c.name}, {"provides", c.provides}, {"requires", c.requires_}});
  ordered_json fragments = ordered_json::array();
  for (const auto& [id, f] : repo.fragments) {
    ordered_json conns = ordered_json::array();
    for (const auto& k : f.connectors)
      conns.push_back(ordered_json{{"from", k.from}, {"interface", k.interface_id}, {"to", k.to}});
    fragments.push_back(ordered_json{{"id", f.id}, {"components", f.components}, {"connectors", std::move(conns)}});
  }
  files["fragments.json"] = detail::canonical(ordered_json{
      {"interfaces", std::move(interfaces)}, {"components", std::move(components)}, {"fragments", std::move(fragments)}});
  return files;
}

inline void save_repository(const Repository& repo, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : serialize_repository(repo)) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::parse_error, "cannot write " + (dir / name).string());
    out << text;
  }
}

// ---------------------------------------------------------------------------
// catalog queries

struct ConcernSummary {
  ConcernId id;
  std::string name;
  std::vector<std::string> keywords;

  friend bool operator==(const ConcernSummary&, const ConcernSummary&) = default;
};

/// All concerns in id order.
inline std::vector<ConcernSummary> list_concerns(const Repository& repo) {
  std::vector<ConcernSummary> out;
  for (const auto& [id, c] : repo.concerns) out.push_back({id, c.name, c.keywords});
  return out;
}

/// Lowercased alphanumeric runs.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      cur += static_cast<char>(std::tolower(ch));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

struct KeywordMatch {
  ConcernId concern;
  std::vector<std::string> matched;  // distinct keywords, sorted

  friend bool operator==(const KeywordMatch&, const KeywordMatch&) = default;
};

/// Concerns with at least one keyword in `text`, most hits first, then by id.
/// Each distinct keyword counts once.
inline std::vector<KeywordMatch> match_keywords(const Repository& repo, std::string_view text) {
  const auto tokens = tokenize(text);
  const std::set<std::string> words(tokens.begin(), tokens.end());
  std::vector<KeywordMatch> out;
  for (const auto& [id, c] : repo.concerns) {
    std::set<std::string> hit;
    for (const auto& k : c.keywords)
      if (words.count(k)) hit.insert(k);
    if (!hit.empty()) out.push_back({id, {hit.begin(), hit.end()}});
  }
  std::stable_sort(out.begin(), out.end(), [](const KeywordMatch& a, const KeywordMatch& b) {
    if (a.matched.size() != b.matched.size()) return a.matched.size() > b.matched.size();
    return a.concern < b.concern;
  });
  return out;
}

/// Variants of a concern in declaration order.
inline std::vector<Variant> variants_of(const Repository& repo, const ConcernId& concern) {
  std::vector<Variant> out;
  for (const auto& v : repo.concern(concern).variants) out.push_back(repo.variant(v));
  return out;
}

}  // namespace hadas
