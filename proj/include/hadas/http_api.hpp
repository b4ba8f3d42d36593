#pragma once

// HTTP/JSON front end for the assistant, versioned under /api/v1.
// Errors are returned as {"code", "message", "details"} with a status
// derived from the error code.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hadas/assistant.hpp"

namespace hadas {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON codecs

inline json resolution_to_json(const Resolution& r) {
  json j = json::object();
  for (const auto& [choice, value] : r.decided()) j[choice] = value;
  return j;
}

/// Object of choice -> true | false. null leaves the choice undecided.
inline Resolution resolution_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse_error, "selections must be an object of choice -> boolean");
  Resolution r;
  for (const auto& [choice, value] : j.items()) {
    if (value.is_null()) continue;
    if (!value.is_boolean()) throw Error(ErrorCode::parse_error, "selection for " + choice + " must be a boolean");
    r.set(choice, value.get<bool>());
  }
  return r;
}

inline std::string spacing_name(Spacing s) { return s == Spacing::linear ? "linear" : "log"; }

inline json request_to_json(const AnalysisRequest& r) {
  return {{"variants", r.variants}, {"range", {r.lo, r.hi}}, {"points", r.points}, {"spacing", spacing_name(r.spacing)}};
}

inline AnalysisRequest request_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse_error, "analysis request must be an object");
  AnalysisRequest r;
  r.variants = j.at("variants").get<std::vector<VariantId>>();
  if (j.contains("range")) {
    const auto& range = j.at("range");
    if (!range.is_array() || range.size() != 2) throw Error(ErrorCode::parse_error, "range must be [lo, hi]");
    r.lo = range[0].get<double>();
    r.hi = range[1].get<double>();
  }
  if (j.contains("points")) r.points = j.at("points").get<std::size_t>();
  if (j.contains("spacing")) r.spacing = parse_spacing(j.at("spacing").get<std::string>());
  return r;
}

inline json session_to_json(const Session& s) {
  json history = json::array();
  for (const auto& r : s.history) history.push_back(request_to_json(r));
  json j = {{"id", s.id},
            {"step", s.step},
            {"selected_concerns", s.selected_concerns},
            {"selections", resolution_to_json(s.selections)},
            {"derived_concerns", s.derived_concerns},
            {"analysis_requests", std::move(history)}};
  j["configuration"] = s.config ? json(configuration_to_json(*s.config)) : json(nullptr);
  return j;
}

inline Session session_from_json(const json& j) {
  Session s;
  s.id = j.at("id").get<std::string>();
  s.step = j.at("step").get<int>();
  if (s.step < kFirstStep || s.step > kLastStep) throw Error(ErrorCode::parse_error, "step out of range");
  s.selected_concerns = j.at("selected_concerns").get<std::set<ConcernId>>();
  s.selections = resolution_from_json(j.at("selections"));
  s.derived_concerns = j.at("derived_concerns").get<std::set<ConcernId>>();
  for (const auto& r : j.at("analysis_requests")) s.history.push_back(request_from_json(r));
  if (!j.at("configuration").is_null()) s.config = configuration_from_json(j.at("configuration"));
  return s;
}

inline const char* option_state_name(OptionState s) {
  switch (s) {
    case OptionState::selected: return "selected";
    case OptionState::excluded: return "excluded";
    case OptionState::open: return "open";
  }
  return "open";
}

inline json form_to_json(const ConcernForm& f) {
  json options = json::array();
  for (const auto& o : f.options)
    options.push_back({{"variant", o.variant}, {"choice", o.choice}, {"state", option_state_name(o.state)}});
  return {{"concern", f.concern}, {"name", f.name}, {"derived", f.derived}, {"options", std::move(options)}};
}

inline json sweep_to_json(const SweepTable& t) {
  json series = json::object();
  for (const auto& [label, values] : t.series) series[label] = values;
  return {{"sizes", t.sizes}, {"series", std::move(series)}};
}

inline json analysis_to_json(const AnalysisResult& r) {
  json pipelines = json::array();
  for (const auto& p : r.pipelines) {
    json stages = json::array();
    for (const auto& s : p.stages) stages.push_back(s.label);
    pipelines.push_back({{"label", p.label}, {"stages", std::move(stages)}});
  }
  json ranking = json::array();
  for (const auto& e : r.ranking)
    ranking.push_back({{"label", e.label}, {"integrated_score", e.integrated_score}, {"best_at_count", e.best_at_count}});
  json crossings = json::object();
  for (const auto& [label, xs] : r.crossovers) crossings[label] = xs;
  json per_stage = json::object();
  for (const auto& [label, rows] : r.per_stage) {
    json out = json::array();
    for (const auto& c : rows) {
      json stages = json::array();
      for (const auto& s : c.stages)
        stages.push_back({{"label", s.label}, {"input_size", s.input_size}, {"consumption", s.consumption}});
      out.push_back({{"total", c.total}, {"stages", std::move(stages)}});
    }
    per_stage[label] = std::move(out);
  }
  return {{"pipelines", std::move(pipelines)}, {"sweep", sweep_to_json(r.sweep)},
          {"ranking", std::move(ranking)},     {"reference", r.reference},
          {"crossovers", std::move(crossings)}, {"per_stage", std::move(per_stage)}};
}

inline json error_to_json(const Error& e) {
  json details = json::object();
  details["lines"] = e.details();
  if (auto* c = dynamic_cast<const ConflictError*>(&e)) {
    details["choice"] = c->choice();
    details["chain"] = c->chain();
  } else if (auto* d = dynamic_cast<const OutOfDomainError*>(&e)) {
    details["stage"] = d->stage();
    details["size"] = d->size();
    if (!std::isnan(d->valid_lo())) details["valid_domain"] = {d->valid_lo(), d->valid_hi()};
  } else if (auto* a = dynamic_cast<const AmbiguousProviderError*>(&e)) {
    details["interface"] = a->interface_id();
    details["candidates"] = a->candidates();
  }
  return {{"code", code_name(e.code())}, {"message", e.what()}, {"details", std::move(details)}};
}

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::schema_error:
    case ErrorCode::invalid_argument:
    case ErrorCode::partial_resolution: return 400;
    case ErrorCode::unknown_concern:
    case ErrorCode::unknown_variant:
    case ErrorCode::unknown_choice:
    case ErrorCode::unknown_session: return 404;
    case ErrorCode::conflict:
    case ErrorCode::invalid_resolution:
    case ErrorCode::invalid_step:
    case ErrorCode::variant_excluded:
    case ErrorCode::ambiguous_provider: return 409;
    case ErrorCode::out_of_domain:
    case ErrorCode::no_energy_data: return 422;
    case ErrorCode::integrity_error: return 500;
  }
  return 500;
}

// ---------------------------------------------------------------------------
// server

struct ApiOptions {
  std::string cors_origin = "*";
  std::optional<std::filesystem::path> snapshot;  // read at start, written by save_snapshot()
};

class ApiServer {
 public:
  explicit ApiServer(std::shared_ptr<Assistant> assistant, ApiOptions options = {})
      : assistant_(std::move(assistant)), options_(std::move(options)) {
    if (options_.snapshot && std::filesystem::exists(*options_.snapshot)) load_snapshot(*options_.snapshot);
    routes();
  }

  httplib::Server& server() { return server_; }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }
  int bind_to_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

  void stop() {
    server_.stop();
    if (options_.snapshot) save_snapshot(*options_.snapshot);
  }

  void save_snapshot(const std::filesystem::path& path) const {
    json sessions = json::array();
    for (const auto& s : assistant_->snapshot()) sessions.push_back(session_to_json(s));
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << json{{"sessions", sessions}}.dump(2) << "\n";
      if (!out) throw Error(ErrorCode::invalid_argument, "cannot write snapshot " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

  void load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    try {
      const json doc = json::parse(in);
      for (const auto& s : doc.at("sessions")) assistant_->restore(session_from_json(s));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error, "bad snapshot " + path.string() + ": " + e.what());
    }
  }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::parse_error, std::string("request body is not JSON: ") + e.what());
    }
  }

  static Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        send(res, http_status(e.code()), error_to_json(e));
      } catch (const json::exception& e) {
        send(res, 400, error_to_json(Error(ErrorCode::parse_error, std::string("bad request body: ") + e.what())));
      } catch (const std::exception& e) {
        send(res, 500, {{"code", "internal"}, {"message", e.what()}, {"details", json::object()}});
      }
    };
  }

  void routes() {
    auto& a = *assistant_;
    server_.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                                 {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
    server_.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    const std::string session = R"(/api/v1/sessions/([^/]+))";

    server_.Post("/api/v1/sessions", guarded([&a](const httplib::Request&, httplib::Response& res) {
      send(res, 201, session_to_json(a.create_session()));
    }));

    server_.Get("/api/v1/concerns", guarded([&a](const httplib::Request&, httplib::Response& res) {
      const Repository& repo = a.repository();
      json out = json::array();
      for (const auto& [id, c] : repo.concerns) {
        json variants = json::array();
        for (const auto& vid : c.variants) {
          const Variant& v = repo.variant(vid);
          variants.push_back({{"id", v.id}, {"choice", v.choice}, {"has_energy", v.energy.has_value()}});
        }
        out.push_back({{"id", id}, {"name", c.name}, {"keywords", c.keywords}, {"variants", std::move(variants)}});
      }
      send(res, 200, out);
    }));

    server_.Get(session, guarded([&a](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      json out = session_to_json(a.get(id));
      json forms = json::array();
      for (const auto& f : a.forms(id)) forms.push_back(form_to_json(f));
      out["forms"] = std::move(forms);
      send(res, 200, out);
    }));

    server_.Post(session + "/suggest", guarded([&a](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      const std::string text = body.value("text", std::string());
      json out = json::array();
      for (const auto& m : a.suggest_concerns(req.matches[1], text))
        out.push_back({{"concern", m.concern}, {"name", a.repository().concern(m.concern).name}, {"matched", m.matched}});
      send(res, 200, {{"suggestions", std::move(out)}});
    }));

    server_.Put(session + "/concerns", guarded([&a](const httplib::Request& req, httplib::Response& res) {
      const auto concerns = body_of(req).at("concerns").get<std::set<ConcernId>>();
      send(res, 200, session_to_json(a.select_concerns(req.matches[1], concerns)));
    }));

    server_.Put(session + "/variants", guarded([&a](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      const Resolution r = resolution_from_json(body.value("selections", json::object()));
      const auto out = a.select_variants(req.matches[1], r);
      json forms = json::array();
      for (const auto& f : out.derived_forms) forms.push_back(form_to_json(f));
      send(res, 200, {{"session", session_to_json(out.session)},
                      {"propagated", resolution_to_json(out.propagated)},
                      {"derived_forms", std::move(forms)}});
    }));

    server_.Post(session + "/analyze", guarded([&a](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, analysis_to_json(a.analyze(req.matches[1], request_from_json(body_of(req)))));
    }));

    server_.Post(session + "/configuration", guarded([&a](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      const Resolution r = resolution_from_json(body.value("selections", json::object()));
      const auto config = a.generate_configuration(req.matches[1], r);
      send(res, 201, configuration_to_json(config));
    }));

    server_.Get(session + "/configuration", guarded([&a](const httplib::Request& req, httplib::Response& res) {
      const Session s = a.get(req.matches[1]);
      if (!s.config) throw Error(ErrorCode::invalid_step, "no configuration generated yet");
      const std::string format = req.has_param("format") ? req.get_param_value("format") : "native";
      if (format == "native") {
        res.set_content(export_configuration(*s.config, ConfigFormat::native), "application/json");
      } else if (format == "dot") {
        res.set_content(export_configuration(*s.config, ConfigFormat::dot), "text/vnd.graphviz");
      } else {
        throw Error(ErrorCode::invalid_argument, "format must be native or dot, got " + format);
      }
    }));

    server_.Post(session + "/back", guarded([&a](const httplib::Request& req, httplib::Response& res) {
      const int step = body_of(req).at("step").get<int>();
      send(res, 200, session_to_json(a.back(req.matches[1], step)));
    }));
  }

  std::shared_ptr<Assistant> assistant_;
  ApiOptions options_;
  httplib::Server server_;
};

}  // namespace hadas
