#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "firmlab/core.hpp"
#include "firmlab/point.hpp"
#include "firmlab/sampler.hpp"

namespace firmlab {

/// Orbit iteration escaped the representable range.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(int step, double coordinate)
      : std::runtime_error("orbit diverged at step " + std::to_string(step) +
                           " (coordinate magnitude " + std::to_string(coordinate) + ")"),
        step_(step) {}

  int step() const { return step_; }

 private:
  int step_;
};

/// Iterates T^n x0 with the cached distance tables used by the rate
/// estimators: step_table[k-1][n] = delta(T^n x0, T^{n+k} x0) and
/// from_base[n] = delta(x0, T^n x0).
struct OrbitTrace {
  Point x0;
  int horizon = 0;  // N
  int max_k = 1;    // K
  std::vector<Point> iterates;                  // size N + 1
  std::vector<std::vector<double>> step_table;  // [k-1][n], n <= N - k
  std::vector<double> from_base;                // size N + 1

  double step(int k, int n) const {
    return step_table[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(n)];
  }
};

inline constexpr double kDivergenceLimit = 1e300;

template <MetricSpaceLike S, SelfMapLike M>
OrbitTrace iterate_orbit(const S& space, const M& map, const Point& x0, int n_steps,
                         int max_k) {
  if (n_steps < 1 || max_k < 1 || max_k > n_steps) {
    throw std::invalid_argument("iterate_orbit: need N >= K >= 1");
  }
  detail::require_dimension(x0, map.dimension(), "iterate_orbit");
  detail::require_dimension(x0, space.dimension(), "iterate_orbit");

  OrbitTrace trace;
  trace.x0 = x0;
  trace.horizon = n_steps;
  trace.max_k = max_k;
  trace.iterates.reserve(static_cast<std::size_t>(n_steps) + 1);
  trace.iterates.push_back(x0);
  for (int n = 0; n < n_steps; ++n) {
    Point next = map.apply(trace.iterates.back());
    for (double c : next.coords) {
      if (!(std::abs(c) <= kDivergenceLimit)) throw divergence_error(n + 1, c);
    }
    trace.iterates.push_back(std::move(next));
  }

  trace.from_base.resize(static_cast<std::size_t>(n_steps) + 1);
  trace.from_base[0] = 0.0;
  for (int n = 1; n <= n_steps; ++n) {
    trace.from_base[static_cast<std::size_t>(n)] =
        space.delta(x0, trace.iterates[static_cast<std::size_t>(n)]);
  }

  trace.step_table.resize(static_cast<std::size_t>(max_k));
  for (int k = 1; k <= max_k; ++k) {
    auto& row = trace.step_table[static_cast<std::size_t>(k - 1)];
    row.resize(static_cast<std::size_t>(n_steps - k) + 1);
    for (int n = 0; n + k <= n_steps; ++n) {
      row[static_cast<std::size_t>(n)] =
          space.delta(trace.iterates[static_cast<std::size_t>(n)],
                      trace.iterates[static_cast<std::size_t>(n + k)]);
    }
  }
  return trace;
}

struct SigmaEstimate {
  double value = 0.0;
  double cauchy_width = 0.0;  // max - min over the averaging window
  int window = 0;
};

/// Tail-window mean of delta(T^n x, T^{n+k} x). All k share the window
/// ending at n = N - K, so the chain bound
/// delta(T^n, T^{n+k}) <= k delta(T^n, T^{n+1}) carries over to the
/// estimates entrywise.
inline SigmaEstimate sigma_estimate(const OrbitTrace& trace, int k) {
  if (k < 1 || k > trace.max_k) {
    throw std::invalid_argument("sigma_estimate: k must lie in [1, K]");
  }
  const int window = std::max(10, trace.horizon / 10);
  const int last = trace.horizon - trace.max_k;
  const int first = last - window + 1;
  if (first < 0) {
    throw std::invalid_argument("sigma_estimate: averaging window exceeds the horizon");
  }
  double sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int n = first; n <= last; ++n) {
    const double v = trace.step(k, n);
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {sum / window, hi - lo, window};
}

struct RhoEstimate {
  double value = 0.0;  // from_base(N) / N
  // (n, from_base(n) / n) at n = N/4, N/2, 3N/4, N; exposes slow convergence.
  std::vector<std::pair<int, double>> trend;
};

inline RhoEstimate rho_estimate(const OrbitTrace& trace) {
  if (trace.horizon < 100) {
    throw std::invalid_argument("rho_estimate: need a horizon of at least 100");
  }
  RhoEstimate est;
  const int n_total = trace.horizon;
  est.value = trace.from_base[static_cast<std::size_t>(n_total)] / n_total;
  for (int quarter = 1; quarter <= 4; ++quarter) {
    const int n = (n_total * quarter) / 4;
    est.trend.emplace_back(n, trace.from_base[static_cast<std::size_t>(n)] / n);
  }
  return est;
}

struct DisplacementBound {
  double upper_bound = std::numeric_limits<double>::infinity();
  Point argmin;
  int evaluations = 0;
};

/// Upper bound on inf_w delta(w, Tw) over the region: a deterministic grid
/// pass followed by coordinate descent with step halving down to 1e-9.
/// The result is always a valid upper bound for the region.
template <MetricSpaceLike S, SelfMapLike M>
DisplacementBound min_displacement_search(const S& space, const M& map, const Box& region,
                                          int budget) {
  if (budget < 1) throw std::invalid_argument("min_displacement_search: budget must be >= 1");
  if (region.dimension() != map.dimension()) {
    throw std::invalid_argument("min_displacement_search: region dimension mismatch");
  }
  const int d = region.dimension();
  DisplacementBound out;

  const auto displacement = [&](const Point& w) { return space.delta(w, map.apply(w)); };

  // Grid pass with endpoints included.
  int per_axis = std::max(1, static_cast<int>(std::floor(std::pow(
                                  static_cast<double>(budget), 1.0 / d))));
  std::vector<int> index(static_cast<std::size_t>(d), 0);
  const auto grid_coord = [&](int axis, int i) {
    if (per_axis == 1) return 0.5 * (region.lo[static_cast<std::size_t>(axis)] +
                                     region.hi[static_cast<std::size_t>(axis)]);
    return region.lo[static_cast<std::size_t>(axis)] +
           region.span(axis) * static_cast<double>(i) / (per_axis - 1);
  };
  bool done = false;
  while (!done) {
    Point w = Point::zeros(d);
    for (int axis = 0; axis < d; ++axis) w[axis] = grid_coord(axis, index[static_cast<std::size_t>(axis)]);
    const double v = displacement(w);
    ++out.evaluations;
    if (v < out.upper_bound) {
      out.upper_bound = v;
      out.argmin = w;
    }
    int axis = 0;
    for (;; ++axis) {
      if (axis == d) {
        done = true;
        break;
      }
      if (++index[static_cast<std::size_t>(axis)] < per_axis) break;
      index[static_cast<std::size_t>(axis)] = 0;
    }
  }

  // Coordinate descent from the best grid point, clamped to the region.
  Point best = out.argmin;
  double best_value = out.upper_bound;
  double step = 0.5 * region.max_span();
  const int max_moves = 100000;
  while (step >= 1e-9 && out.evaluations < max_moves) {
    bool improved = false;
    for (int axis = 0; axis < d; ++axis) {
      for (double dir : {1.0, -1.0}) {
        Point cand = best;
        cand[axis] = std::clamp(cand[axis] + dir * step, region.lo[static_cast<std::size_t>(axis)],
                                region.hi[static_cast<std::size_t>(axis)]);
        if (cand[axis] == best[axis]) continue;
        const double v = displacement(cand);
        ++out.evaluations;
        if (v < best_value) {
          best_value = v;
          best = cand;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  out.upper_bound = best_value;
  out.argmin = best;
  return out;
}

struct RateReport {
  std::vector<SigmaEstimate> sigma;  // index k-1
  RhoEstimate rho;
  DisplacementBound rho_bar;
  Box search_region;
  double tol = 0.0;
  // sigma_k / k <= sigma_1 within 1e-9 (holds unconditionally for
  // non-expansive maps thanks to the shared estimation window).
  bool chain_bound_ok = false;
  double max_chain_gap = 0.0;  // max_k sigma_k / k - sigma_1
  // search upper bound on the minimal displacement stays above the escape
  // rate estimate minus tol.
  bool displacement_vs_rate_ok = false;
  double displacement_rate_gap = 0.0;  // rho_bar - rho (signed diagnostic)
};

/// Bounding box of the orbit, used as the default displacement search
/// region.
inline Box orbit_bounding_box(const OrbitTrace& trace) {
  const int d = trace.x0.dimension();
  std::vector<double> lo(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
  for (const auto& p : trace.iterates) {
    for (int i = 0; i < d; ++i) {
      lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], p[i]);
      hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], p[i]);
    }
  }
  return Box(std::move(lo), std::move(hi));
}

template <MetricSpaceLike S, SelfMapLike M>
RateReport rate_report(const S& space, const M& map, const OrbitTrace& trace, double tol,
                       std::optional<Box> region = std::nullopt, int budget = 4096) {
  RateReport report;
  report.tol = tol;
  for (int k = 1; k <= trace.max_k; ++k) report.sigma.push_back(sigma_estimate(trace, k));
  report.rho = rho_estimate(trace);
  report.search_region = region.has_value() ? *region : orbit_bounding_box(trace);
  report.rho_bar = min_displacement_search(space, map, report.search_region, budget);

  report.max_chain_gap = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= trace.max_k; ++k) {
    report.max_chain_gap = std::max(
        report.max_chain_gap,
        report.sigma[static_cast<std::size_t>(k - 1)].value / k - report.sigma[0].value);
  }
  report.chain_bound_ok = report.max_chain_gap <= 1e-9;
  report.displacement_rate_gap = report.rho_bar.upper_bound - report.rho.value;
  report.displacement_vs_rate_ok = report.displacement_rate_gap >= -tol;
  return report;
}

template <MetricSpaceLike S, SelfMapLike M>
RateReport rate_report(const S& space, const M& map, const Point& x0, int n_steps, int max_k,
                       double tol, std::optional<Box> region = std::nullopt,
                       int budget = 4096) {
  const OrbitTrace trace = iterate_orbit(space, map, x0, n_steps, max_k);
  return rate_report(space, map, trace, tol, std::move(region), budget);
}

/// Largest increase along any step-table row; <= 0 (up to rounding) for
/// non-expansive maps.
inline double max_step_table_increase(const OrbitTrace& trace) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : trace.step_table) {
    for (std::size_t n = 0; n + 1 < row.size(); ++n) {
      worst = std::max(worst, row[n + 1] - row[n]);
    }
  }
  return worst;
}

/// Largest excess of delta(T^n, T^{n+k}) over k * delta(T^n, T^{n+1}) across
/// the whole table; <= 0 (up to rounding) for non-expansive maps.
inline double max_chain_excess(const OrbitTrace& trace) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 2; k <= trace.max_k; ++k) {
    const auto& row = trace.step_table[static_cast<std::size_t>(k - 1)];
    for (std::size_t n = 0; n < row.size(); ++n) {
      worst = std::max(worst, row[n] - k * trace.step_table[0][n]);
    }
  }
  return worst;
}

struct RateEqualityReport {
  RateReport rates;
  double max_sigma_ratio_gap = 0.0;  // max_k |sigma_k / k - sigma_1|
  double sigma_rho_gap = 0.0;        // |sigma_1 - rho|
  double rho_bar_sigma_gap = 0.0;    // |rho_bar - sigma_1|
  double trend_instability = 0.0;    // max_i |trend_i - rho|
  double base_independence_gap = 0.0;
  Point second_base;
  bool pass = false;
};

/// Checks numerically that the minimal displacement, the escape rate and
/// the per-k asymptotic step sizes agree within tol, with trend and
/// second-base diagnostics. The unconditional relations (chain bound,
/// displacement vs rate) are asserted regardless.
template <MetricSpaceLike S, SelfMapLike M>
RateEqualityReport check_rate_equalities(const S& space, const M& map, const Point& x0,
                                         int n_steps, int max_k, double tol,
                                         std::optional<Box> region = std::nullopt,
                                         int budget = 4096) {
  RateEqualityReport report;
  const OrbitTrace trace = iterate_orbit(space, map, x0, n_steps, max_k);
  report.rates = rate_report(space, map, trace, tol, std::move(region), budget);

  const double sigma1 = report.rates.sigma[0].value;
  report.max_sigma_ratio_gap = 0.0;
  for (int k = 1; k <= max_k; ++k) {
    report.max_sigma_ratio_gap =
        std::max(report.max_sigma_ratio_gap,
                 std::abs(report.rates.sigma[static_cast<std::size_t>(k - 1)].value / k - sigma1));
  }
  report.sigma_rho_gap = std::abs(sigma1 - report.rates.rho.value);
  report.rho_bar_sigma_gap = std::abs(report.rates.rho_bar.upper_bound - sigma1);
  report.trend_instability = 0.0;
  for (const auto& [n, v] : report.rates.rho.trend) {
    report.trend_instability = std::max(report.trend_instability,
                                        std::abs(v - report.rates.rho.value));
  }

  report.second_base = x0 + Point::constant(x0.dimension(), 0.5);
  const OrbitTrace second = iterate_orbit(space, map, report.second_base, n_steps, 1);
  report.base_independence_gap = std::abs(rho_estimate(second).value - report.rates.rho.value);

  report.pass = report.max_sigma_ratio_gap <= tol && report.sigma_rho_gap <= tol &&
                report.rho_bar_sigma_gap <= tol && report.trend_instability <= tol &&
                report.base_independence_gap <= tol && report.rates.chain_bound_ok &&
                report.rates.displacement_vs_rate_ok;
  return report;
}

}  // namespace firmlab
