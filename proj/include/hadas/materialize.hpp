#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hadas/architecture.hpp"
#include "hadas/error.hpp"
#include "hadas/repository.hpp"
#include "hadas/variability.hpp"

namespace hadas {

/// Union of the fragments bound to true choices. Explicit fragment connectors
/// are kept; every other required interface is wired to its unique provider
/// among the included components, or recorded as an open port when there is
/// none. Two or more candidate providers raise AmbiguousProviderError.
inline ArchitectureConfiguration materialize(const Repository& repo, const Resolution& resolution) {
  if (!resolution.is_total(repo.tree))
    throw Error(ErrorCode::invalid_resolution, "materialize needs a total resolution");
  if (auto broken = violations(repo.tree, resolution); !broken.empty()) {
    std::string message = "resolution is invalid: " + broken.front();
    throw Error(ErrorCode::invalid_resolution, std::move(message), std::move(broken));
  }

  ArchitectureConfiguration config;
  std::set<Connector> connectors;
  for (const auto& [choice, fragment_id] : repo.binding()) {
    if (!resolution.is_true(choice)) continue;
    const auto& fragment = repo.fragments.at(fragment_id);
    for (const auto& cid : fragment.components) {
      config.components.emplace(cid, repo.components.at(cid));
      config.provenance.emplace(cid, choice);  // first choice in id order wins
    }
    connectors.insert(fragment.connectors.begin(), fragment.connectors.end());
  }

  for (const auto& [id, c] : config.components) {
    for (const auto& req : c.requires_) {
      const bool wired = std::any_of(connectors.begin(), connectors.end(),
                                     [&](const Connector& k) { return k.from == id && k.interface_id == req; });
      if (wired) continue;
      std::vector<ComponentId> providers;
      for (const auto& [pid, p] : config.components)
        if (pid != id && p.provides_interface(req)) providers.push_back(pid);
      if (providers.empty()) config.open_ports.insert({id, req});
      else if (providers.size() == 1) connectors.insert({id, req, providers.front()});
      else throw AmbiguousProviderError(req, id, providers);
    }
  }
  config.connectors.assign(connectors.begin(), connectors.end());
  return config;
}

}  // namespace hadas
