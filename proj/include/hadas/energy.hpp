#pragma once

// Sampled energy functions, size transforms and their composition into
// pipelines, with grid sweeps, rankings and crossover search on top.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hadas/error.hpp"

namespace hadas {

/// One knot: x is an input size in MB, y a consumption (W) or an output size.
struct Sample {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct EnergyFunction {
  std::string id;
  std::string variant;
  std::string parameter = "size";
  std::string unit = "MB";
  std::vector<Sample> samples;

  double lo() const { return samples.front().x; }
  double hi() const { return samples.back().x; }

  friend bool operator==(const EnergyFunction&, const EnergyFunction&) = default;
};

struct SizeTransform {
  std::string id;
  std::string variant;
  std::vector<Sample> samples;
  bool identity = false;

  static SizeTransform make_identity() { return SizeTransform{"identity", "", {}, true}; }

  friend bool operator==(const SizeTransform&, const SizeTransform&) = default;
};

/// Shared sampling rules: >= 2 knots, x > 0 strictly increasing, y >= 0
/// (y > 0 when `positive_y`). Returns the findings as messages.
inline std::vector<std::string> check_samples(std::span<const Sample> s, bool positive_y) {
  std::vector<std::string> out;
  if (s.size() < 2) out.push_back("needs at least 2 samples");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i].x > 0.0) || !std::isfinite(s[i].x)) out.push_back("sample size must be positive and finite");
    if (i > 0 && !(s[i].x > s[i - 1].x)) out.push_back("sample sizes must be strictly increasing");
    if (!std::isfinite(s[i].y) || s[i].y < 0.0) out.push_back("sample values must be nonnegative and finite");
    else if (positive_y && !(s[i].y > 0.0)) out.push_back("sample values must be positive");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

// Piecewise-linear in log(x)-log(y); a segment touching y == 0 is linear in x-y.
// Knots are hit exactly. Caller guarantees s[0].x <= x <= s.back().x.
inline double interpolate(std::span<const Sample> s, double x) {
  auto upper = std::lower_bound(s.begin(), s.end(), x,
                                [](const Sample& k, double v) { return k.x < v; });
  if (upper == s.end()) --upper;
  if (upper->x == x) return upper->y;
  const Sample& b = *upper;
  const Sample& a = *(upper - 1);
  if (a.y == 0.0 || b.y == 0.0) return a.y + (x - a.x) / (b.x - a.x) * (b.y - a.y);
  const double t = (std::log(x) - std::log(a.x)) / (std::log(b.x) - std::log(a.x));
  return std::exp(std::log(a.y) + t * (std::log(b.y) - std::log(a.y)));
}

inline bool within(std::span<const Sample> s, double x) {
  return x > 0.0 && x >= s.front().x && x <= s.back().x;
}

}  // namespace detail

/// Consumption at `size`. No extrapolation outside the sampled domain.
inline double eval(const EnergyFunction& fn, double size) {
  if (!detail::within(fn.samples, size))
    throw OutOfDomainError("size " + std::to_string(size) + " MB outside domain of " + fn.id,
                           fn.id, size, fn.lo(), fn.hi());
  return detail::interpolate(fn.samples, size);
}

/// Output size for `size`; the identity transform is defined everywhere.
inline double apply(const SizeTransform& t, double size) {
  if (t.identity) return size;
  if (!detail::within(t.samples, size))
    throw OutOfDomainError("size " + std::to_string(size) + " MB outside domain of transform " + t.id,
                           t.id, size, t.samples.front().x, t.samples.back().x);
  return detail::interpolate(t.samples, size);
}

// ---------------------------------------------------------------------------
// pipelines

struct Stage {
  std::string label;
  EnergyFunction energy;
  SizeTransform transform = SizeTransform::make_identity();
};

/// Stage i's transform feeds the size of stage i + 1; the last transform is unused.
struct Pipeline {
  std::string label;
  std::vector<Stage> stages;
};

struct StageResult {
  std::string label;
  double input_size = 0.0;
  double consumption = 0.0;
};

struct Composition {
  double total = 0.0;
  std::vector<StageResult> stages;
};

inline Composition compose_pipeline(const Pipeline& p, double size) {
  if (p.stages.empty())
    throw Error(ErrorCode::invalid_argument, "pipeline " + p.label + " has no stages");
  Composition out;
  double input = size;
  for (std::size_t i = 0; i < p.stages.size(); ++i) {
    const Stage& st = p.stages[i];
    if (!detail::within(st.energy.samples, input))
      throw OutOfDomainError("pipeline " + p.label + ": stage " + st.label + " input " +
                                 std::to_string(input) + " MB outside [" +
                                 std::to_string(st.energy.lo()) + ", " +
                                 std::to_string(st.energy.hi()) + "]",
                             st.label, input, std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN());
    const double w = detail::interpolate(st.energy.samples, input);
    out.stages.push_back({st.label, input, w});
    out.total += w;
    if (i + 1 < p.stages.size()) input = apply(st.transform, input);
  }
  return out;
}

namespace detail {

inline bool defined_at(const Pipeline& p, double s) {
  try {
    compose_pipeline(p, s);
    return true;
  } catch (const OutOfDomainError&) {
    return false;
  }
}

}  // namespace detail

/// Sizes where every stage is in domain, as [lo, hi]. Assumes the valid set is
/// an interval inside the first stage's domain (true for monotone transforms).
inline std::optional<std::pair<double, double>> valid_domain(const Pipeline& p) {
  if (p.stages.empty()) return std::nullopt;
  const double lo = p.stages.front().energy.lo();
  const double hi = p.stages.front().energy.hi();
  constexpr int kProbe = 1024;
  std::optional<int> first, last;
  std::vector<double> grid(kProbe);
  for (int i = 0; i < kProbe; ++i) {
    grid[i] = i == 0 ? lo : i == kProbe - 1 ? hi : lo * std::pow(hi / lo, double(i) / (kProbe - 1));
    if (detail::defined_at(p, grid[i])) {
      if (!first) first = i;
      last = i;
    }
  }
  if (!first) return std::nullopt;
  auto refine = [&](double bad, double good) {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (bad + good);
      (detail::defined_at(p, mid) ? good : bad) = mid;
    }
    return good;
  };
  const double a = *first == 0 ? lo : refine(grid[*first - 1], grid[*first]);
  const double b = *last == kProbe - 1 ? hi : refine(grid[*last + 1], grid[*last]);
  return std::make_pair(a, b);
}

// ---------------------------------------------------------------------------
// sweeps

enum class Spacing { linear, logarithmic };

/// Inclusive grid with exact endpoints.
inline std::vector<double> make_grid(double lo, double hi, std::size_t points, Spacing spacing) {
  if (!(lo < hi)) throw Error(ErrorCode::invalid_argument, "range must satisfy lo < hi");
  if (points < 2) throw Error(ErrorCode::invalid_argument, "a sweep needs at least 2 points");
  if (spacing == Spacing::logarithmic && !(lo > 0.0))
    throw Error(ErrorCode::invalid_argument, "logarithmic spacing needs lo > 0");
  std::vector<double> g(points);
  const double n = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / n;
    g[i] = spacing == Spacing::linear ? lo + (hi - lo) * t
                                      : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * t);
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

struct SweepTable {
  std::vector<double> sizes;
  std::map<std::string, std::vector<double>> series;

  friend bool operator==(const SweepTable&, const SweepTable&) = default;
};

namespace detail {

inline void check_labels(std::span<const Pipeline> pipelines) {
  std::set<std::string> seen;
  for (const auto& p : pipelines)
    if (!seen.insert(p.label).second)
      throw Error(ErrorCode::invalid_argument, "duplicate pipeline label " + p.label);
}

// Rethrows a domain failure with the intersection of all pipeline domains.
[[noreturn]] inline void throw_domain(std::span<const Pipeline> pipelines, double lo, double hi,
                                      const OutOfDomainError& cause) {
  double a = -std::numeric_limits<double>::infinity();
  double b = std::numeric_limits<double>::infinity();
  for (const auto& p : pipelines) {
    auto d = valid_domain(p);
    if (!d) {
      a = b = std::numeric_limits<double>::quiet_NaN();
      break;
    }
    a = std::max(a, d->first);
    b = std::min(b, d->second);
  }
  if (!(a <= b)) a = b = std::numeric_limits<double>::quiet_NaN();
  throw OutOfDomainError("range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] leaves the valid domain: " + cause.what(),
                         cause.stage(), cause.size(), a, b);
}

}  // namespace detail

inline SweepTable sweep(std::span<const Pipeline> pipelines, double lo, double hi,
                        std::size_t points, Spacing spacing) {
  detail::check_labels(pipelines);
  SweepTable table;
  table.sizes = make_grid(lo, hi, points, spacing);
  try {
    for (const auto& p : pipelines) {
      auto& column = table.series[p.label];
      column.reserve(points);
      for (double s : table.sizes) column.push_back(compose_pipeline(p, s).total);
    }
  } catch (const OutOfDomainError& e) {
    detail::throw_domain(pipelines, lo, hi, e);
  }
  return table;
}

// ---------------------------------------------------------------------------
// ranking

struct RankEntry {
  std::string label;
  double integrated_score = 0.0;  // trapezoidal W*MB over the grid
  std::size_t best_at_count = 0;  // grid points where strictly minimal

  friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

inline std::vector<RankEntry> rank(const SweepTable& table) {
  std::vector<RankEntry> out;
  std::vector<const std::vector<double>*> columns;
  for (const auto& [label, values] : table.series) {
    RankEntry e{label, 0.0, 0};
    for (std::size_t i = 1; i < table.sizes.size(); ++i)
      e.integrated_score += 0.5 * (values[i] + values[i - 1]) * (table.sizes[i] - table.sizes[i - 1]);
    out.push_back(std::move(e));
    columns.push_back(&values);
  }
  for (std::size_t i = 0; i < table.sizes.size() && !columns.empty(); ++i) {
    std::size_t best = 0;
    bool tie = false;
    for (std::size_t k = 1; k < columns.size(); ++k) {
      const double v = (*columns[k])[i];
      const double m = (*columns[best])[i];
      if (v < m) {
        best = k;
        tie = false;
      } else if (v == m) {
        tie = true;
      }
    }
    if (!tie) ++out[best].best_at_count;
  }
  std::stable_sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.integrated_score != b.integrated_score) return a.integrated_score < b.integrated_score;
    return a.label < b.label;
  });
  return out;
}

inline std::vector<RankEntry> rank(std::span<const Pipeline> pipelines, double lo, double hi,
                                   std::size_t points, Spacing spacing) {
  return rank(sweep(pipelines, lo, hi, points, spacing));
}

// ---------------------------------------------------------------------------
// crossovers

/// Sizes in [lo, hi] where total(a) - total(b) changes sign: a 256-point log
/// scan, then bisection of each bracketing interval down to width <= tol.
inline std::vector<double> crossovers(const Pipeline& a, const Pipeline& b, double lo, double hi,
                                      double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be positive");
  constexpr std::size_t kScan = 256;
  const auto grid = make_grid(lo, hi, kScan, Spacing::logarithmic);
  const std::vector<Pipeline> pair{a, b};
  auto diff = [&](double s) {
    try {
      return compose_pipeline(a, s).total - compose_pipeline(b, s).total;
    } catch (const OutOfDomainError& e) {
      detail::throw_domain(pair, lo, hi, e);
    }
  };
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };

  std::vector<double> values(kScan);
  for (std::size_t i = 0; i < kScan; ++i) values[i] = diff(grid[i]);

  std::vector<double> found;
  std::size_t prev = kScan;  // last grid index with nonzero sign
  for (std::size_t i = 0; i < kScan; ++i) {
    const int si = sign(values[i]);
    if (si == 0) continue;
    if (prev != kScan && sign(values[prev]) != si) {
      if (prev + 1 < i) {
        found.push_back(grid[prev + 1]);  // exact zero on the grid
      } else {
        double left = grid[prev], right = grid[i];
        const int sl = sign(values[prev]);
        while (right - left > tol) {
          const double mid = 0.5 * (left + right);
          const int sm = sign(diff(mid));
          if (sm == 0) {
            left = right = mid;
            break;
          }
          (sm == sl ? left : right) = mid;
        }
        found.push_back(0.5 * (left + right));
      }
    }
    prev = i;
  }
  std::vector<double> out;
  for (double s : found)
    if (out.empty() || s - out.back() > tol) out.push_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// CSV export

/// Decimal with 6 significant digits, trailing zeros trimmed, no exponent.
inline std::string format_sig6(double v) {
  if (!std::isfinite(v)) return std::to_string(v);
  char sci[32];
  std::snprintf(sci, sizeof sci, "%.5e", v);  // rounds to 6 significant digits
  const double rounded = std::strtod(sci, nullptr);
  const int exponent = std::atoi(std::strchr(sci, 'e') + 1);
  char buf[400];
  std::snprintf(buf, sizeof buf, "%.*f", std::max(0, 5 - exponent), rounded);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

inline std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\n") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Header `size,<label>...` then one row per grid point.
inline std::string to_csv(const SweepTable& table) {
  std::string out = "size";
  for (const auto& [label, values] : table.series) out += "," + csv_field(label);
  out += "\n";
  for (std::size_t i = 0; i < table.sizes.size(); ++i) {
    out += format_sig6(table.sizes[i]);
    for (const auto& [label, values] : table.series) out += "," + format_sig6(values[i]);
    out += "\n";
  }
  return out;
}

}  // namespace hadas
