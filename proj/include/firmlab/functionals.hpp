#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "firmlab/asymptotics.hpp"
#include "firmlab/core.hpp"
#include "firmlab/point.hpp"

namespace firmlab {

/// Finite-horizon approximation of a metric functional: anchors w_i with
/// evaluation h_i(x) = delta(x, w_i) - delta(x0, w_i). Evaluation away from
/// the probe set reports the largest-anchor value; convergence is certified
/// only at the probes (max oscillation across the last three anchors).
/// Requires a symmetric host.
template <MetricSpaceLike S>
class MetricFunctionalApprox {
 public:
  MetricFunctionalApprox(S space, Point base, std::vector<Point> anchors,
                         std::vector<long> horizons, std::vector<Point> probes,
                         double probe_tol, bool exact_element)
      : space_(std::move(space)),
        base_(std::move(base)),
        anchors_(std::move(anchors)),
        horizons_(std::move(horizons)),
        probes_(std::move(probes)),
        probe_tol_(probe_tol) {
    if (!space_.symmetric()) {
      throw std::invalid_argument(
          "MetricFunctionalApprox: host must be a symmetric (metric) space");
    }
    if (anchors_.empty()) {
      throw std::invalid_argument("MetricFunctionalApprox: at least one anchor required");
    }
    base_distances_.reserve(anchors_.size());
    for (const auto& w : anchors_) base_distances_.push_back(space_.delta(base_, w));

    if (exact_element) {
      converged_ = true;
      probe_oscillation_ = 0.0;
      return;
    }
    const std::size_t tail = std::min<std::size_t>(3, anchors_.size());
    if (anchors_.size() < 3 || probes_.empty()) {
      converged_ = false;
      probe_oscillation_ = std::numeric_limits<double>::infinity();
      return;
    }
    probe_oscillation_ = 0.0;
    for (const auto& p : probes_) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i = anchors_.size() - tail; i < anchors_.size(); ++i) {
        const double v = evaluate_at_anchor(static_cast<int>(i), p);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      probe_oscillation_ = std::max(probe_oscillation_, hi - lo);
    }
    converged_ = probe_oscillation_ < probe_tol_;
  }

  /// Largest-anchor evaluation.
  double evaluate(const Point& x) const {
    return evaluate_at_anchor(static_cast<int>(anchors_.size()) - 1, x);
  }

  double evaluate_at_anchor(int i, const Point& x) const {
    return space_.delta(x, anchors_[static_cast<std::size_t>(i)]) -
           base_distances_[static_cast<std::size_t>(i)];
  }

  int anchor_count() const { return static_cast<int>(anchors_.size()); }
  const std::vector<Point>& anchors() const { return anchors_; }
  const std::vector<long>& horizons() const { return horizons_; }
  const std::vector<Point>& probes() const { return probes_; }
  const Point& base() const { return base_; }
  const S& space() const { return space_; }
  bool converged() const { return converged_; }
  double probe_oscillation() const { return probe_oscillation_; }
  double probe_tol() const { return probe_tol_; }

 private:
  S space_;
  Point base_;
  std::vector<Point> anchors_;
  std::vector<double> base_distances_;
  std::vector<long> horizons_;
  std::vector<Point> probes_;
  double probe_tol_ = 0.0;
  double probe_oscillation_ = 0.0;
  bool converged_ = false;
};

/// The internal point h_w of the embedding: h_w(x) = delta(x, w) - delta(x0, w).
/// Exact, so it counts as converged.
template <MetricSpaceLike S>
MetricFunctionalApprox<S> phi(const S& space, Point x0, Point w) {
  detail::require_dimension(x0, space.dimension(), "phi");
  detail::require_dimension(w, space.dimension(), "phi");
  std::vector<Point> anchors{std::move(w)};
  return MetricFunctionalApprox<S>(space, std::move(x0), std::move(anchors), {0}, {},
                                   /*probe_tol=*/0.0, /*exact_element=*/true);
}

/// Functional anchored along the orbit: anchors T^{n_i} x0 for the given
/// strictly increasing horizons. Convergence is certified at the probes.
template <MetricSpaceLike S, SelfMapLike M>
MetricFunctionalApprox<S> orbit_limit_functional(const S& space, const M& map, Point x0,
                                                 const std::vector<long>& horizons,
                                                 std::vector<Point> probes,
                                                 double probe_tol = 1e-6) {
  if (horizons.empty()) {
    throw std::invalid_argument("orbit_limit_functional: at least one horizon required");
  }
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 0 || (i > 0 && horizons[i] <= horizons[i - 1])) {
      throw std::invalid_argument(
          "orbit_limit_functional: horizons must be strictly increasing and >= 0");
    }
  }
  detail::require_dimension(x0, map.dimension(), "orbit_limit_functional");

  std::vector<Point> anchors;
  anchors.reserve(horizons.size());
  Point current = x0;
  long n = 0;
  for (long target : horizons) {
    while (n < target) {
      Point next = map.apply(current);
      for (double c : next.coords) {
        if (!(std::abs(c) <= kDivergenceLimit)) {
          throw divergence_error(static_cast<int>(n + 1), c);
        }
      }
      current = std::move(next);
      ++n;
    }
    anchors.push_back(current);
  }
  return MetricFunctionalApprox<S>(space, std::move(x0), std::move(anchors), horizons,
                                   std::move(probes), probe_tol, /*exact_element=*/false);
}

struct EscapeBoundReport {
  // max over n <= N of h(T^n x0) + rho_hat n - tol (n + 1); <= 0 means the
  // linear escape bound holds along the whole traced orbit.
  double max_bound_excess = 0.0;
  bool bound_ok = false;
  // -h(T^N x) / N from a second base point, which should recover rho_hat.
  double secondary_rate = 0.0;
  double secondary_rate_gap = 0.0;
  bool rate_ok = false;

  bool pass() const { return bound_ok && rate_ok; }
};

/// Verifies h(T^n x0) <= -rho_hat n (with slack tol (n+1)) along the traced
/// orbit and that the functional recovers the escape rate from a secondary
/// orbit.
template <MetricSpaceLike S>
EscapeBoundReport check_escape_bound(const MetricFunctionalApprox<S>& functional,
                                     const OrbitTrace& trace, const OrbitTrace& secondary,
                                     double rho_hat, double tol) {
  if (!(functional.base() == trace.x0)) {
    throw std::invalid_argument(
        "check_escape_bound: functional and trace must share the base point");
  }
  EscapeBoundReport report;
  report.max_bound_excess = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= trace.horizon; ++n) {
    const double h = functional.evaluate(trace.iterates[static_cast<std::size_t>(n)]);
    report.max_bound_excess =
        std::max(report.max_bound_excess, h + rho_hat * n - tol * (n + 1));
  }
  report.bound_ok = report.max_bound_excess <= 0.0;

  const double h_end = functional.evaluate(secondary.iterates.back());
  report.secondary_rate = -h_end / secondary.horizon;
  report.secondary_rate_gap = std::abs(report.secondary_rate - rho_hat);
  report.rate_ok = report.secondary_rate_gap <= tol;
  return report;
}

enum class DescentStatus { kPass, kFail, kInconclusive };

struct DescentReport {
  DescentStatus status = DescentStatus::kInconclusive;
  int steps = 0;
  int violations = 0;
  // max over n of h(T^{n+1} x) - h(T^n x) - slack; <= tol when descent holds.
  double worst_margin = -std::numeric_limits<double>::infinity();
  double final_value = 0.0;
  std::optional<double> depth;  // required terminal depth, when requested
  bool depth_ok = true;
};

/// Checks h(T^{n+1} x) <= h(T^n x) + slack + tol along the orbit of x. When
/// a depth D is given, additionally requires h(T^N x) <= -D (divergence
/// evidence). A functional that has not converged at its probes yields an
/// inconclusive verdict rather than a failure.
template <MetricSpaceLike S, SelfMapLike M>
DescentReport check_monotone_descent(const M& map, const MetricFunctionalApprox<S>& functional,
                                     const Point& x, int n_steps, double slack,
                                     double tol = 1e-9, std::optional<double> depth = {}) {
  if (slack < 0.0) throw std::invalid_argument("check_monotone_descent: slack must be >= 0");
  if (n_steps < 1) throw std::invalid_argument("check_monotone_descent: need N >= 1");

  DescentReport report;
  report.steps = n_steps;
  report.depth = depth;

  Point current = x;
  double h_prev = functional.evaluate(current);
  for (int n = 0; n < n_steps; ++n) {
    Point next = map.apply(current);
    for (double c : next.coords) {
      if (!(std::abs(c) <= kDivergenceLimit)) throw divergence_error(n + 1, c);
    }
    const double h_next = functional.evaluate(next);
    report.worst_margin = std::max(report.worst_margin, h_next - h_prev - slack);
    if (h_next > h_prev + slack + tol) ++report.violations;
    current = std::move(next);
    h_prev = h_next;
  }
  report.final_value = h_prev;
  if (depth.has_value()) report.depth_ok = report.final_value <= -*depth;

  if (!functional.converged()) {
    report.status = DescentStatus::kInconclusive;
  } else if (report.violations == 0 && report.depth_ok) {
    report.status = DescentStatus::kPass;
  } else {
    report.status = DescentStatus::kFail;
  }
  return report;
}

}  // namespace firmlab
