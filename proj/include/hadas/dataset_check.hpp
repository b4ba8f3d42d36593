#pragma once

// Qualitative orderings the shipped Media-Store energy data must reproduce:
// compression alone, compression followed by upload, and how the picture
// changes for short clips versus long recordings.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hadas/analysis.hpp"
#include "hadas/energy.hpp"
#include "hadas/repository.hpp"

namespace hadas {

struct ConstraintCheck {
  std::string id;
  bool passed = false;
  std::string detail;
};

struct ConstraintReport {
  std::vector<ConstraintCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.passed; });
  }
  std::vector<std::string> failed_ids() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c.id);
    return out;
  }
};

struct DatasetNames {
  std::string compression = "Compression";
  std::string lame = "LAME";
  std::string vorbis = "Vorbis";
  std::string flac = "jFLAC";
  std::string speex = "JSpeex";
};

inline constexpr double kLameCeiling = 0.3;     // W, compression alone
inline constexpr double kOthersFloor = 0.6;     // W, compression alone
inline constexpr double kSimilarSpread = 1.15;  // max/min at 30 MB

inline ConstraintReport validate_dataset(const Repository& repo, const DatasetNames& names = {}) {
  ConstraintReport report;
  const std::vector<std::string> ids{"C1", "C2", "C3", "C4", "C5", "C6"};
  const std::vector<VariantId> codecs{names.lame, names.vorbis, names.flac, names.speex};

  std::map<VariantId, Pipeline> alone, total;
  std::optional<Pipeline> uncompressed;
  try {
    const auto down = all_downstream(repo, codecs);
    if (!down.count(names.compression) || down.at(names.compression).empty())
      throw Error(ErrorCode::no_energy_data, names.compression + " feeds no concern with energy data");
    const VariantId send = down.at(names.compression).front();
    const Downstream one{{names.compression, {send}}};
    for (const auto& c : codecs) {
      alone[c] = build_pipelines(repo, {c}, {}).front();
      auto built = build_pipelines(repo, {c}, one);
      total[c] = built[0];
      uncompressed = built[1];
    }
  } catch (const Error& e) {
    for (const auto& id : ids) report.checks.push_back({id, false, e.what()});
    return report;
  }

  auto at = [](const Pipeline& p, double s) { return compose_pipeline(p, s).total; };
  auto fmt = [](const char* pattern, auto... args) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return std::string(buf);
  };
  // Runs `body` and turns a domain failure into a failed check.
  auto check = [&](const std::string& id, const std::function<std::string()>& body) {
    try {
      std::string failure = body();
      report.checks.push_back({id, failure.empty(), failure.empty() ? "ok" : failure});
    } catch (const Error& e) {
      report.checks.push_back({id, false, e.what()});
    }
  };
  // Strict extremum among the four codec pipelines.
  auto extreme = [&](double s, bool minimum) {
    std::string best;
    double value = 0.0;
    bool tie = false;
    for (const auto& c : codecs) {
      const double v = at(total.at(c), s);
      if (best.empty() || (minimum ? v < value : v > value)) {
        best = c;
        value = v;
        tie = false;
      } else if (v == value) {
        tie = true;
      }
    }
    return tie ? std::string() : best;
  };

  check("C1", [&]() -> std::string {
    for (double s : {15.0, 25.0, 35.0}) {
      const double lame = at(alone.at(names.lame), s);
      if (!(lame < kLameCeiling)) return names.lame + fmt(" compression at %g MB = %.6g, not < 0.3", s, lame);
      for (const auto& c : {names.vorbis, names.flac, names.speex}) {
        const double v = at(alone.at(c), s);
        if (!(v > kOthersFloor)) return c + fmt(" compression at %g MB = %.6g, not > 0.6", s, v);
      }
    }
    return {};
  });
  check("C2", [&]() -> std::string {
    for (double s : {5.0, 10.0, 15.0}) {
      const double u = at(*uncompressed, s);
      for (const auto& c : {names.flac, names.speex}) {
        const double v = at(total.at(c), s);
        if (!(u < v)) return fmt("at %g MB uncompressed send %.6g is not below ", s, u) + c + fmt(" %.6g", v);
      }
    }
    return {};
  });
  check("C3", [&]() -> std::string {
    std::vector<double> v;
    for (const auto& c : {names.lame, names.vorbis, names.speex}) v.push_back(at(total.at(c), 30.0));
    const double spread = *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
    if (spread > kSimilarSpread) return fmt("spread at 30 MB is %.6g (limit %.3g)", spread, kSimilarSpread);
    return {};
  });
  check("C4", [&]() -> std::string {
    for (double s : {5.0, 8.0, 10.0}) {
      const auto best = extreme(s, true);
      if (best != names.flac) return fmt("at %g MB the cheapest pipeline is ", s) + (best.empty() ? "a tie" : best);
    }
    return {};
  });
  check("C5", [&]() -> std::string {
    for (double s : {500.0, 950.0}) {
      const auto worst = extreme(s, false);
      if (worst != names.flac) return fmt("at %g MB the most expensive pipeline is ", s) + (worst.empty() ? "a tie" : worst);
    }
    return {};
  });
  check("C6", [&]() -> std::string {
    for (double s : {500.0, 950.0}) {
      const auto best = extreme(s, true);
      if (best != names.speex) return fmt("at %g MB the cheapest pipeline is ", s) + (best.empty() ? "a tie" : best);
    }
    return {};
  });
  return report;
}

}  // namespace hadas
