#pragma once

// Builds labeled pipelines from repository variants. A variant whose concern
// feeds another concern (compression feeds communication) is composed with
// that concern's variants when they are active, and a baseline series that
// skips the upstream stage is added once per downstream variant.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hadas/energy.hpp"
#include "hadas/error.hpp"
#include "hadas/repository.hpp"
#include "hadas/variability.hpp"

namespace hadas {

/// Upstream concern -> downstream variants to compose after it.
using Downstream = std::map<ConcernId, std::vector<VariantId>>;

inline Stage stage_for(const Repository& repo, const VariantId& id) {
  const Variant& v = repo.variant(id);
  if (!v.energy) throw Error(ErrorCode::no_energy_data, "variant " + id + " has no energy data");
  Stage s{id, repo.energy_functions.at(*v.energy), SizeTransform::make_identity()};
  if (v.size_transform) s.transform = repo.size_transforms.at(*v.size_transform);
  return s;
}

namespace detail {

template <class Keep>
Downstream downstream_where(const Repository& repo, const std::vector<VariantId>& variants, Keep keep) {
  Downstream out;
  for (const auto& id : variants) {
    const Concern& c = repo.concern(repo.variant(id).concern);
    if (!c.feeds || out.count(c.id)) continue;
    std::vector<VariantId> chosen;
    for (const auto& d : repo.concern(c.feeds->concern).variants)
      if (repo.variant(d).energy && keep(repo.variant(d))) chosen.push_back(d);
    if (!chosen.empty()) out.emplace(c.id, std::move(chosen));
  }
  return out;
}

}  // namespace detail

/// Every energy-bearing variant of each fed concern.
inline Downstream all_downstream(const Repository& repo, const std::vector<VariantId>& variants) {
  return detail::downstream_where(repo, variants, [](const Variant&) { return true; });
}

/// Downstream variants active under a propagated resolution: the fed concern
/// must be true; its true variants are used, or every variant not forced
/// false when none is true yet.
inline Downstream active_downstream(const Repository& repo, const std::vector<VariantId>& variants,
                                    const Resolution& propagated) {
  Downstream out;
  for (const auto& id : variants) {
    const Concern& c = repo.concern(repo.variant(id).concern);
    if (!c.feeds || out.count(c.id)) continue;
    const Concern& fed = repo.concern(c.feeds->concern);
    if (!propagated.is_true(fed.root_choice)) continue;
    std::vector<VariantId> on, open;
    for (const auto& d : fed.variants) {
      const Variant& dv = repo.variant(d);
      if (!dv.energy) continue;
      if (propagated.is_true(dv.choice)) on.push_back(d);
      else if (!propagated.is_false(dv.choice)) open.push_back(d);
    }
    auto& use = on.empty() ? open : on;
    if (!use.empty()) out.emplace(c.id, std::move(use));
  }
  return out;
}

inline std::vector<Pipeline> build_pipelines(const Repository& repo, const std::vector<VariantId>& variants,
                                             const Downstream& downstream) {
  if (variants.empty()) throw Error(ErrorCode::invalid_argument, "no variants requested");
  std::set<VariantId> seen;
  std::vector<Pipeline> out;
  std::set<std::string> baselines;
  for (const auto& id : variants) {
    if (!seen.insert(id).second) throw Error(ErrorCode::invalid_argument, "variant " + id + " requested twice");
    const Variant& v = repo.variant(id);
    const Stage upstream = stage_for(repo, id);
    auto next = downstream.find(v.concern);
    if (next == downstream.end()) {
      out.push_back({id, {upstream}});
      continue;
    }
    const Concern& c = repo.concern(v.concern);
    for (const auto& d : next->second) {
      out.push_back({id + "+" + d, {upstream, stage_for(repo, d)}});
      const std::string base = c.feeds->baseline_label + "+" + d;
      if (baselines.insert(base).second) out.push_back({base, {stage_for(repo, d)}});
    }
  }
  return out;
}

inline Spacing parse_spacing(const std::string& s) {
  if (s == "log" || s == "logarithmic") return Spacing::logarithmic;
  if (s == "linear") return Spacing::linear;
  throw Error(ErrorCode::invalid_argument, "spacing must be log or linear, got " + s);
}

}  // namespace hadas
