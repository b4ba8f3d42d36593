#pragma once

// Minimal component-connector model: interfaces, components that provide or
// require them, fragments bound to variability choices, and the materialized
// configuration with its native (JSON) and DOT serializations.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hadas/error.hpp"

namespace hadas {

using ComponentId = std::string;
using InterfaceId = std::string;
using FragmentId = std::string;

struct Interface {
  InterfaceId id;
  std::string name;

  friend bool operator==(const Interface&, const Interface&) = default;
};

struct Component {
  ComponentId id;
  std::string name;
  std::vector<InterfaceId> provides;
  std::vector<InterfaceId> requires_;

  bool provides_interface(const InterfaceId& i) const {
    return std::find(provides.begin(), provides.end(), i) != provides.end();
  }
  bool requires_interface(const InterfaceId& i) const {
    return std::find(requires_.begin(), requires_.end(), i) != requires_.end();
  }

  friend bool operator==(const Component&, const Component&) = default;
};

/// `from` requires `interface_id`, `to` provides it.
struct Connector {
  ComponentId from;
  InterfaceId interface_id;
  ComponentId to;

  friend auto operator<=>(const Connector&, const Connector&) = default;
};

struct ArchitectureFragment {
  FragmentId id;
  std::vector<ComponentId> components;
  std::vector<Connector> connectors;

  friend bool operator==(const ArchitectureFragment&, const ArchitectureFragment&) = default;
};

/// A required interface left for the rest of the application.
struct OpenPort {
  ComponentId component;
  InterfaceId interface_id;

  friend auto operator<=>(const OpenPort&, const OpenPort&) = default;
};

struct ArchitectureConfiguration {
  std::map<ComponentId, Component> components;
  std::vector<Connector> connectors;  // sorted by materialize and export
  std::map<ComponentId, std::string> provenance;  // component -> choice that pulled it in
  std::set<OpenPort> open_ports;

  bool empty() const { return components.empty(); }

  friend bool operator==(const ArchitectureConfiguration&, const ArchitectureConfiguration&) = default;
};

/// Fragment well-formedness against a component catalog.
inline std::vector<std::string> check_fragment(const ArchitectureFragment& f,
                                               const std::map<ComponentId, Component>& catalog) {
  std::vector<std::string> out;
  std::set<ComponentId> members(f.components.begin(), f.components.end());
  for (const auto& c : f.components)
    if (!catalog.count(c)) out.push_back("fragment " + f.id + " references unknown component " + c);
  for (const auto& k : f.connectors) {
    if (!members.count(k.from) || !members.count(k.to)) {
      out.push_back("fragment " + f.id + " connector " + k.from + " -" + k.interface_id + "-> " +
                    k.to + " leaves the fragment");
      continue;
    }
    auto from = catalog.find(k.from);
    auto to = catalog.find(k.to);
    if (from != catalog.end() && !from->second.requires_interface(k.interface_id))
      out.push_back("fragment " + f.id + ": " + k.from + " does not require " + k.interface_id);
    if (to != catalog.end() && !to->second.provides_interface(k.interface_id))
      out.push_back("fragment " + f.id + ": " + k.to + " does not provide " + k.interface_id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// check_wellformed

inline ValidationReport check_wellformed(const ArchitectureConfiguration& config) {
  ValidationReport report;
  std::set<std::tuple<ComponentId, InterfaceId, ComponentId>> seen;
  for (const auto& k : config.connectors) {
    const std::string name = k.from + " -" + k.interface_id + "-> " + k.to;
    if (!seen.emplace(k.from, k.interface_id, k.to).second)
      report.add(name, "duplicate connector " + name);
    auto from = config.components.find(k.from);
    auto to = config.components.find(k.to);
    if (from == config.components.end()) report.add(name, "connector source " + k.from + " missing");
    if (to == config.components.end()) report.add(name, "connector target " + k.to + " missing");
    if (from != config.components.end() && !from->second.requires_interface(k.interface_id))
      report.add(name, k.from + " does not require " + k.interface_id);
    if (to != config.components.end() && !to->second.provides_interface(k.interface_id))
      report.add(name, k.to + " does not provide " + k.interface_id);
  }
  for (const auto& [id, c] : config.components) {
    for (const auto& req : c.requires_) {
      const bool wired = std::any_of(config.connectors.begin(), config.connectors.end(),
                                     [&](const Connector& k) { return k.from == id && k.interface_id == req; });
      if (!wired && !config.open_ports.count({id, req}))
        report.add(id, id + " requires " + req + " but nothing provides it");
    }
  }
  for (const auto& p : config.open_ports)
    if (!config.components.count(p.component))
      report.add(p.component, "open port on missing component " + p.component);
  return report;
}

// ---------------------------------------------------------------------------
// serialization

enum class ConfigFormat { native, dot };

inline constexpr const char* kConfigurationFormat = "hadas-configuration";
inline constexpr const char* kConfigurationSchemaVersion = "1";

inline nlohmann::ordered_json configuration_to_json(const ArchitectureConfiguration& config) {
  using nlohmann::ordered_json;
  ordered_json components = ordered_json::array();
  for (const auto& [id, c] : config.components) {
    ordered_json j;
    j["id"] = c.id;
    j["name"] = c.name;
    j["provides"] = c.provides;
    j["requires"] = c.requires_;
    auto prov = config.provenance.find(id);
    if (prov != config.provenance.end()) j["choice"] = prov->second;
    components.push_back(std::move(j));
  }
  std::vector<Connector> sorted = config.connectors;
  std::sort(sorted.begin(), sorted.end());
  ordered_json connectors = ordered_json::array();
  for (const auto& k : sorted)
    connectors.push_back(ordered_json{{"from", k.from}, {"interface", k.interface_id}, {"to", k.to}});
  ordered_json open = ordered_json::array();
  for (const auto& p : config.open_ports)
    open.push_back(ordered_json{{"component", p.component}, {"interface", p.interface_id}});

  ordered_json doc;
  doc["format"] = kConfigurationFormat;
  doc["schema_version"] = kConfigurationSchemaVersion;
  doc["components"] = std::move(components);
  doc["connectors"] = std::move(connectors);
  doc["open_ports"] = std::move(open);
  return doc;
}

inline ArchitectureConfiguration configuration_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kConfigurationFormat)
      throw Error(ErrorCode::schema_error, "not a configuration document");
    if (doc.at("schema_version").get<std::string>() != kConfigurationSchemaVersion)
      throw Error(ErrorCode::schema_error, "unsupported configuration schema version " +
                                               doc.at("schema_version").get<std::string>());
    ArchitectureConfiguration config;
    for (const auto& j : doc.at("components")) {
      Component c{j.at("id").get<std::string>(), j.at("name").get<std::string>(),
                  j.at("provides").get<std::vector<std::string>>(),
                  j.at("requires").get<std::vector<std::string>>()};
      if (j.contains("choice")) config.provenance[c.id] = j.at("choice").get<std::string>();
      config.components.emplace(c.id, std::move(c));
    }
    for (const auto& j : doc.at("connectors"))
      config.connectors.push_back({j.at("from").get<std::string>(),
                                   j.at("interface").get<std::string>(), j.at("to").get<std::string>()});
    for (const auto& j : doc.at("open_ports"))
      config.open_ports.insert({j.at("component").get<std::string>(), j.at("interface").get<std::string>()});
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed configuration: ") + e.what());
  }
}

inline ArchitectureConfiguration parse_configuration(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed configuration: ") + e.what());
  }
  return configuration_from_json(doc);
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string dot_quote(const std::string& s) { return "\"" + dot_escape(s) + "\""; }

}  // namespace detail

inline std::string export_configuration(const ArchitectureConfiguration& config, ConfigFormat format) {
  if (format == ConfigFormat::native) return configuration_to_json(config).dump(2) + "\n";

  std::string out = "digraph configuration {\n";
  if (!config.components.empty()) out += "  node [shape=box];\n";
  for (const auto& [id, c] : config.components) {
    std::string label = detail::dot_escape(c.name.empty() ? id : c.name);
    auto prov = config.provenance.find(id);
    if (prov != config.provenance.end()) label += "\\n[" + detail::dot_escape(prov->second) + "]";
    out += "  " + detail::dot_quote(id) + " [label=\"" + label + "\"];\n";
  }
  std::vector<Connector> sorted = config.connectors;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& k : sorted)
    out += "  " + detail::dot_quote(k.from) + " -> " + detail::dot_quote(k.to) +
           " [label=" + detail::dot_quote(k.interface_id) + "];\n";
  for (const auto& p : config.open_ports) {
    const std::string port = "open:" + p.component + ":" + p.interface_id;
    out += "  " + detail::dot_quote(port) + " [shape=plaintext, label=" + detail::dot_quote(p.interface_id) + "];\n";
    out += "  " + detail::dot_quote(p.component) + " -> " + detail::dot_quote(port) + " [style=dashed];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace hadas
