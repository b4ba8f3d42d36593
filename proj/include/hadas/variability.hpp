#pragma once

// Propositional feature model: a tree of choices with cardinality groups and
// implies/excludes cross-tree constraints, plus unit propagation over it.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hadas/error.hpp"

namespace hadas {

using ChoiceId = std::string;

enum class ChoiceKind { mandatory, optional };
enum class ConstraintKind { implies, excludes };

/// Cardinality group over children of the owning choice.
struct Group {
  std::vector<ChoiceId> members;
  std::size_t min = 0;
  std::size_t max = 0;

  friend bool operator==(const Group&, const Group&) = default;
};

struct Choice {
  ChoiceId id;
  std::string name;
  std::optional<ChoiceId> parent;
  ChoiceKind kind = ChoiceKind::optional;
  std::optional<Group> group;

  friend bool operator==(const Choice&, const Choice&) = default;
};

struct CrossTreeConstraint {
  std::string id;
  ChoiceId antecedent;
  ChoiceId consequent;
  ConstraintKind kind = ConstraintKind::implies;

  friend bool operator==(const CrossTreeConstraint&, const CrossTreeConstraint&) = default;
};

struct VSpecTree {
  ChoiceId root;
  std::map<ChoiceId, Choice> choices;
  std::vector<CrossTreeConstraint> constraints;

  bool contains(const ChoiceId& id) const { return choices.count(id) != 0; }

  const Choice& at(const ChoiceId& id) const {
    auto it = choices.find(id);
    if (it == choices.end()) throw Error(ErrorCode::unknown_choice, "unknown choice " + id);
    return it->second;
  }

  /// Children in id order.
  std::vector<ChoiceId> children(const ChoiceId& id) const {
    std::vector<ChoiceId> out;
    for (const auto& [cid, c] : choices)
      if (c.parent && *c.parent == id) out.push_back(cid);
    return out;
  }

  /// True when `id` equals `ancestor` or lies below it. Stops on parent cycles.
  bool is_descendant_or_self(const ChoiceId& id, const ChoiceId& ancestor) const {
    std::set<ChoiceId> seen;
    std::optional<ChoiceId> cur = id;
    while (cur && seen.insert(*cur).second) {
      if (*cur == ancestor) return true;
      auto it = choices.find(*cur);
      if (it == choices.end()) return false;
      cur = it->second.parent;
    }
    return false;
  }

  friend bool operator==(const VSpecTree&, const VSpecTree&) = default;
};

/// Truth assignment over choices. Absent keys are undecided.
class Resolution {
 public:
  Resolution() = default;
  Resolution(std::initializer_list<std::pair<const ChoiceId, bool>> init) : values_(init) {}
  explicit Resolution(std::map<ChoiceId, bool> values) : values_(std::move(values)) {}

  void set(const ChoiceId& id, bool value) { values_[id] = value; }
  void erase(const ChoiceId& id) { values_.erase(id); }

  std::optional<bool> get(const ChoiceId& id) const {
    auto it = values_.find(id);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  bool is_true(const ChoiceId& id) const { return get(id) == std::optional<bool>(true); }
  bool is_false(const ChoiceId& id) const { return get(id) == std::optional<bool>(false); }

  const std::map<ChoiceId, bool>& decided() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  bool is_total(const VSpecTree& tree) const {
    return std::all_of(tree.choices.begin(), tree.choices.end(),
                       [&](const auto& kv) { return values_.count(kv.first) != 0; });
  }

  /// Every decision in `other` is present here with the same value.
  bool extends(const Resolution& other) const {
    return std::all_of(other.values_.begin(), other.values_.end(), [&](const auto& kv) {
      auto it = values_.find(kv.first);
      return it != values_.end() && it->second == kv.second;
    });
  }

  std::vector<ChoiceId> true_choices() const {
    std::vector<ChoiceId> out;
    for (const auto& [id, v] : values_)
      if (v) out.push_back(id);
    return out;
  }

  friend bool operator==(const Resolution&, const Resolution&) = default;

 private:
  std::map<ChoiceId, bool> values_;
};

inline std::string_view to_string(ChoiceKind k) {
  return k == ChoiceKind::mandatory ? "mandatory" : "optional";
}
inline std::string_view to_string(ConstraintKind k) {
  return k == ConstraintKind::implies ? "implies" : "excludes";
}

// ---------------------------------------------------------------------------
// validate_tree

inline ValidationReport validate_tree(const VSpecTree& tree) {
  ValidationReport report;
  if (!tree.contains(tree.root)) {
    report.add(tree.root, "unknown choice " + tree.root + " (root)");
  }

  for (const auto& [id, c] : tree.choices) {
    if (c.id != id) report.add(id, "choice key " + id + " does not match id " + c.id);
    if (id == tree.root) {
      if (c.parent) report.add(id, "root choice has a parent");
      continue;
    }
    if (!c.parent) {
      report.add(id, "non-root choice " + id + " has no parent");
    } else if (!tree.contains(*c.parent)) {
      report.add(id, "unknown choice " + *c.parent + " (parent of " + id + ")");
    } else if (!tree.is_descendant_or_self(id, tree.root)) {
      report.add(id, "choice " + id + " is not reachable from the root (parent cycle)");
    }
  }

  std::map<ChoiceId, ChoiceId> group_of;
  for (const auto& [id, c] : tree.choices) {
    if (!c.group) continue;
    const Group& g = *c.group;
    if (g.min > g.max) report.add(id, "group of " + id + " has min > max");
    if (g.max > g.members.size()) report.add(id, "group of " + id + " has max > member count");
    std::set<ChoiceId> seen;
    for (const auto& m : g.members) {
      if (!seen.insert(m).second) {
        report.add(id, "group of " + id + " lists " + m + " twice");
        continue;
      }
      auto it = tree.choices.find(m);
      if (it == tree.choices.end()) {
        report.add(id, "unknown choice " + m + " (member of group of " + id + ")");
        continue;
      }
      if (it->second.parent != std::optional<ChoiceId>(id))
        report.add(m, "group member " + m + " is not a child of " + id);
      auto [pos, inserted] = group_of.emplace(m, id);
      if (!inserted) report.add(m, "choice " + m + " belongs to more than one group");
    }
  }

  std::set<std::string> constraint_ids;
  for (const auto& k : tree.constraints) {
    if (!constraint_ids.insert(k.id).second) report.add(k.id, "duplicate constraint id " + k.id);
    if (!tree.contains(k.antecedent))
      report.add(k.id, "unknown choice " + k.antecedent + " (constraint " + k.id + ")");
    if (!tree.contains(k.consequent))
      report.add(k.id, "unknown choice " + k.consequent + " (constraint " + k.id + ")");
    if (k.antecedent == k.consequent)
      report.add(k.id, "constraint " + k.id + " relates " + k.antecedent + " to itself");
  }
  return report;
}

namespace detail {

/// Index-based view of a tree; choice indices follow lexicographic id order.
struct CompiledTree {
  struct CompiledGroup {
    int owner;
    std::vector<int> members;
    std::size_t min;
    std::size_t max;
  };
  struct Edge {
    int target;
    int constraint;
  };

  std::vector<const Choice*> choices;
  std::unordered_map<std::string, int> index;
  int root = -1;
  std::vector<int> parent;
  std::vector<std::vector<int>> children;
  std::vector<bool> mandatory;
  std::vector<CompiledGroup> groups;
  std::vector<int> owned_group;   // group owned by choice i, or -1
  std::vector<int> member_group;  // group containing choice i, or -1
  std::vector<std::vector<Edge>> implies_from;
  std::vector<std::vector<Edge>> excludes_from;
  const VSpecTree* tree;

  explicit CompiledTree(const VSpecTree& t) : tree(&t) {
    const auto n = t.choices.size();
    choices.reserve(n);
    for (const auto& [id, c] : t.choices) {
      index.emplace(id, static_cast<int>(choices.size()));
      choices.push_back(&c);
    }
    parent.assign(n, -1);
    children.assign(n, {});
    mandatory.assign(n, false);
    owned_group.assign(n, -1);
    member_group.assign(n, -1);
    implies_from.assign(n, {});
    excludes_from.assign(n, {});

    root = lookup(t.root);
    for (std::size_t i = 0; i < n; ++i) {
      const Choice& c = *choices[i];
      mandatory[i] = c.kind == ChoiceKind::mandatory;
      if (c.parent && static_cast<int>(i) != root) {
        parent[i] = lookup(*c.parent);
        children[parent[i]].push_back(static_cast<int>(i));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Choice& c = *choices[i];
      if (!c.group) continue;
      CompiledGroup g{static_cast<int>(i), {}, c.group->min, c.group->max};
      for (const auto& m : c.group->members) {
        int mi = lookup(m);
        g.members.push_back(mi);
        member_group[mi] = static_cast<int>(groups.size());
      }
      owned_group[i] = static_cast<int>(groups.size());
      groups.push_back(std::move(g));
    }
    for (std::size_t k = 0; k < t.constraints.size(); ++k) {
      const auto& con = t.constraints[k];
      Edge e{lookup(con.consequent), static_cast<int>(k)};
      auto& bucket = con.kind == ConstraintKind::implies ? implies_from : excludes_from;
      bucket[lookup(con.antecedent)].push_back(e);
    }
  }

  int lookup(const ChoiceId& id) const {
    auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorCode::unknown_choice, "unknown choice " + id);
    return it->second;
  }

  const ChoiceId& id(int i) const { return choices[i]->id; }
  std::size_t size() const { return choices.size(); }
};

/// Least-fixpoint unit propagation that remembers why every value was set.
class Propagator {
 public:
  enum class Rule { input, root, parent_of_true, mandatory_child, implies, excludes, group_min };
  struct Reason {
    Rule rule = Rule::input;
    int source = -1;
    int constraint = -1;
  };

  explicit Propagator(const CompiledTree& t)
      : t_(t), value_(t.size(), kUndecided), reason_(t.size()) {}

  void assign(int c, bool v, Reason r) {
    const signed char want = v ? 1 : 0;
    if (value_[c] == want) return;
    if (value_[c] != kUndecided) throw conflict(c, v, r);
    value_[c] = want;
    reason_[c] = r;
    queue_.push_back(c);
  }

  void run() {
    while (!queue_.empty()) {
      const int c = queue_.front();
      queue_.pop_front();
      if (value_[c] == 1) on_true(c);
      else on_false(c);
    }
  }

  Resolution result() const {
    Resolution r;
    for (std::size_t i = 0; i < value_.size(); ++i)
      if (value_[i] != kUndecided) r.set(t_.id(static_cast<int>(i)), value_[i] == 1);
    return r;
  }

 private:
  static constexpr signed char kUndecided = -1;

  void on_true(int c) {
    if (t_.parent[c] >= 0) assign(t_.parent[c], true, {Rule::parent_of_true, c});
    for (int ch : t_.children[c])
      if (t_.mandatory[ch]) assign(ch, true, {Rule::mandatory_child, c});
    for (const auto& e : t_.implies_from[c]) assign(e.target, true, {Rule::implies, c, e.constraint});
    for (const auto& e : t_.excludes_from[c]) assign(e.target, false, {Rule::excludes, c, e.constraint});
    if (t_.owned_group[c] >= 0) check_group(t_.owned_group[c]);
    if (t_.member_group[c] >= 0) check_group(t_.member_group[c]);
  }

  void on_false(int c) {
    if (t_.member_group[c] >= 0) check_group(t_.member_group[c]);
  }

  // Group minimum equal to the members still possible forces the rest true.
  // Fewer possible members than the minimum means the owner cannot be true;
  // without this the fixpoint would shrink as decisions are added.
  void check_group(int gi) {
    const auto& g = t_.groups[gi];
    if (value_[g.owner] != 1 || g.min == 0) return;
    std::size_t possible = 0;
    for (int m : g.members)
      if (value_[m] != 0) ++possible;
    if (possible < g.min) throw unreachable(gi, possible);
    if (possible != g.min) return;
    for (int m : g.members)
      if (value_[m] == kUndecided) assign(m, true, {Rule::group_min, g.owner});
  }

  std::string describe(int c, bool v, const Reason& r) const {
    std::string line = t_.id(c) + (v ? "=true" : "=false") + " (";
    switch (r.rule) {
      case Rule::input: line += "selected"; break;
      case Rule::root: line += "root"; break;
      case Rule::parent_of_true: line += "parent of " + t_.id(r.source); break;
      case Rule::mandatory_child: line += "mandatory child of " + t_.id(r.source); break;
      case Rule::implies:
      case Rule::excludes: {
        const auto& k = t_.tree->constraints[r.constraint];
        line += k.id + ": " + k.antecedent + " " + std::string(to_string(k.kind)) + " " +
                k.consequent;
        break;
      }
      case Rule::group_min:
        line += "group of " + t_.id(r.source) + " needs at least " +
                std::to_string(t_.groups[t_.owned_group[r.source]].min);
        break;
    }
    return line + ")";
  }

  void explain(int c, bool v, const Reason& r, std::vector<std::string>& out,
               std::vector<bool>& seen) const {
    if (r.source >= 0 && !seen[r.source]) {
      seen[r.source] = true;
      explain(r.source, value_[r.source] == 1, reason_[r.source], out, seen);
    }
    out.push_back(describe(c, v, r));
  }

  ConflictError unreachable(int gi, std::size_t possible) const {
    const auto& g = t_.groups[gi];
    std::vector<std::string> chain;
    std::vector<bool> seen(t_.size(), false);
    seen[g.owner] = true;
    explain(g.owner, true, reason_[g.owner], chain, seen);
    for (int m : g.members) {
      if (value_[m] != 0 || seen[m]) continue;
      seen[m] = true;
      explain(m, false, reason_[m], chain, seen);
    }
    chain.push_back(t_.id(g.owner) + "=false (group of " + t_.id(g.owner) + " needs at least " +
                    std::to_string(g.min) + ", only " + std::to_string(possible) + " still possible)");
    return ConflictError(t_.id(g.owner), std::move(chain));
  }

  ConflictError conflict(int c, bool v, const Reason& r) const {
    std::vector<std::string> chain;
    std::vector<bool> seen(t_.size(), false);
    seen[c] = true;
    explain(c, value_[c] == 1, reason_[c], chain, seen);
    explain(c, v, r, chain, seen);
    return ConflictError(t_.id(c), std::move(chain));
  }

  const CompiledTree& t_;
  std::vector<signed char> value_;
  std::vector<Reason> reason_;
  std::deque<int> queue_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// propagate

/// Closes `partial` under: true child => parent true; true parent => mandatory
/// children true; A implies B; A excludes B; and group minimum forcing. The
/// root is always true. Throws ConflictError when a choice would be both.
inline Resolution propagate(const VSpecTree& tree, const Resolution& partial) {
  const detail::CompiledTree compiled(tree);
  detail::Propagator prop(compiled);
  using Rule = detail::Propagator::Rule;
  prop.assign(compiled.root, true, {Rule::root});
  for (const auto& [id, v] : partial.decided()) prop.assign(compiled.lookup(id), v, {Rule::input});
  prop.run();
  return prop.result();
}

// ---------------------------------------------------------------------------
// is_valid

/// Human-readable list of violated rules under a total resolution.
inline std::vector<std::string> violations(const VSpecTree& tree, const Resolution& resolution) {
  for (const auto& [id, v] : resolution.decided())
    if (!tree.contains(id)) throw Error(ErrorCode::unknown_choice, "unknown choice " + id);
  std::vector<std::string> undecided;
  for (const auto& [id, c] : tree.choices)
    if (!resolution.get(id)) undecided.push_back(id);
  if (!undecided.empty())
    throw Error(ErrorCode::partial_resolution,
                "resolution leaves " + std::to_string(undecided.size()) + " choice(s) undecided",
                undecided);

  std::vector<std::string> out;
  if (!resolution.is_true(tree.root)) out.push_back("root " + tree.root + " must be true");
  for (const auto& [id, c] : tree.choices) {
    if (!c.parent || id == tree.root) continue;
    const bool on = resolution.is_true(id);
    const bool parent_on = resolution.is_true(*c.parent);
    if (on && !parent_on) out.push_back(id + " is true but its parent " + *c.parent + " is false");
    if (parent_on && c.kind == ChoiceKind::mandatory && !on)
      out.push_back("mandatory " + id + " is false under true parent " + *c.parent);
  }
  for (const auto& [id, c] : tree.choices) {
    if (!c.group || !resolution.is_true(id)) continue;
    const auto count = static_cast<std::size_t>(
        std::count_if(c.group->members.begin(), c.group->members.end(),
                      [&](const ChoiceId& m) { return resolution.is_true(m); }));
    if (count < c.group->min)
      out.push_back("group of " + id + " has " + std::to_string(count) + " selected, minimum " +
                    std::to_string(c.group->min));
    if (count > c.group->max)
      out.push_back("group of " + id + " has " + std::to_string(count) + " selected, maximum " +
                    std::to_string(c.group->max));
  }
  for (const auto& k : tree.constraints) {
    const bool a = resolution.is_true(k.antecedent);
    const bool b = resolution.is_true(k.consequent);
    if (k.kind == ConstraintKind::implies && a && !b)
      out.push_back(k.id + ": " + k.antecedent + " implies " + k.consequent + " violated");
    if (k.kind == ConstraintKind::excludes && a && b)
      out.push_back(k.id + ": " + k.antecedent + " excludes " + k.consequent + " violated");
  }
  return out;
}

inline bool is_valid(const VSpecTree& tree, const Resolution& resolution) {
  return violations(tree, resolution).empty();
}

// ---------------------------------------------------------------------------
// enumerate_valid

struct Enumeration {
  std::vector<Resolution> resolutions;
  bool truncated = false;
};

namespace detail {

// Structural rule over choice indices; checked once its last variable is set.
struct EnumRule {
  enum class Kind { root_true, child_parent, mandatory, group, implies, excludes } kind;
  int a = -1;
  int b = -1;
  int group = -1;
};

inline bool holds(const CompiledTree& t, const EnumRule& r, const std::vector<char>& v) {
  switch (r.kind) {
    case EnumRule::Kind::root_true: return v[r.a] != 0;
    case EnumRule::Kind::child_parent: return !v[r.a] || v[r.b];
    case EnumRule::Kind::mandatory: return !v[r.b] || v[r.a];
    case EnumRule::Kind::implies: return !v[r.a] || v[r.b];
    case EnumRule::Kind::excludes: return !(v[r.a] && v[r.b]);
    case EnumRule::Kind::group: {
      const auto& g = t.groups[r.group];
      if (!v[g.owner]) return true;
      std::size_t n = 0;
      for (int m : g.members) n += v[m] ? 1 : 0;
      return n >= g.min && n <= g.max;
    }
  }
  return true;
}

}  // namespace detail

/// All valid total resolutions, choices taken in id order with false tried
/// before true. Stops after `limit` results and flags truncation when at
/// least one more valid resolution exists.
inline Enumeration enumerate_valid(const VSpecTree& tree, std::size_t limit) {
  if (limit == 0) throw Error(ErrorCode::invalid_argument, "enumeration limit must be positive");
  const detail::CompiledTree t(tree);
  const int n = static_cast<int>(t.size());
  using detail::EnumRule;
  std::vector<std::vector<EnumRule>> due(n);
  auto add = [&](EnumRule r, std::initializer_list<int> vars) {
    due[std::max(vars)].push_back(r);
  };
  add({EnumRule::Kind::root_true, t.root}, {t.root});
  for (int i = 0; i < n; ++i) {
    if (t.parent[i] < 0) continue;
    add({EnumRule::Kind::child_parent, i, t.parent[i]}, {i, t.parent[i]});
    if (t.mandatory[i]) add({EnumRule::Kind::mandatory, i, t.parent[i]}, {i, t.parent[i]});
  }
  for (int gi = 0; gi < static_cast<int>(t.groups.size()); ++gi) {
    int last = t.groups[gi].owner;
    for (int m : t.groups[gi].members) last = std::max(last, m);
    due[last].push_back({EnumRule::Kind::group, -1, -1, gi});
  }
  for (int i = 0; i < n; ++i) {
    for (const auto& e : t.implies_from[i]) add({EnumRule::Kind::implies, i, e.target}, {i, e.target});
    for (const auto& e : t.excludes_from[i]) add({EnumRule::Kind::excludes, i, e.target}, {i, e.target});
  }

  Enumeration out;
  std::vector<char> value(n, 0);
  bool stop = false;
  std::function<void(int)> search = [&](int depth) {
    if (stop) return;
    if (depth == n) {
      if (out.resolutions.size() == limit) {
        out.truncated = true;
        stop = true;
        return;
      }
      Resolution r;
      for (int i = 0; i < n; ++i) r.set(t.id(i), value[i] != 0);
      out.resolutions.push_back(std::move(r));
      return;
    }
    for (char v : {char{0}, char{1}}) {
      value[depth] = v;
      const bool ok = std::all_of(due[depth].begin(), due[depth].end(),
                                  [&](const EnumRule& r) { return detail::holds(t, r, value); });
      if (ok) search(depth + 1);
      if (stop) return;
    }
    value[depth] = 0;
  };
  search(0);
  return out;
}

// ---------------------------------------------------------------------------
// resolve

/// Propagates `selections`, sets every remaining undecided choice to false and
/// checks validity. Throws ConflictError or Error(invalid_resolution) listing
/// the violated rules.
inline Resolution resolve(const VSpecTree& tree, const Resolution& selections) {
  Resolution total = propagate(tree, selections);
  for (const auto& [id, c] : tree.choices)
    if (!total.get(id)) total.set(id, false);
  auto broken = violations(tree, total);
  if (!broken.empty()) {
    std::string message = "completed resolution is invalid: " + broken.front();
    throw Error(ErrorCode::invalid_resolution, std::move(message), std::move(broken));
  }
  return total;
}

}  // namespace hadas
