#pragma once

#include <concepts>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "firmlab/detail/parallel.hpp"
#include "firmlab/point.hpp"
#include "firmlab/sampler.hpp"

namespace firmlab {

template <class S>
concept MetricSpaceLike = requires(const S& s, const Point& x, const Point& y) {
  { s.dimension() } -> std::convertible_to<int>;
  { s.symmetric() } -> std::convertible_to<bool>;
  { s.delta(x, y) } -> std::convertible_to<double>;
};

template <class S>
concept NormedSpaceLike = MetricSpaceLike<S> && requires(const S& s, const Point& v) {
  { s.norm(v) } -> std::convertible_to<double>;
};

template <class M>
concept SelfMapLike = requires(const M& m, const Point& x) {
  { m.dimension() } -> std::convertible_to<int>;
  { m.apply(x) } -> std::convertible_to<Point>;
};

/// delta(x, y) with explicit dimension validation.
template <MetricSpaceLike S>
double delta(const S& space, const Point& x, const Point& y) {
  detail::require_dimension(x, space.dimension(), "delta");
  detail::require_dimension(y, space.dimension(), "delta");
  return space.delta(x, y);
}

/// Tx with explicit dimension validation.
template <SelfMapLike M>
Point apply(const M& map, const Point& x) {
  detail::require_dimension(x, map.dimension(), "apply");
  return map.apply(x);
}

struct AxiomViolation {
  enum class Kind { kSelfDistance, kTriangle };
  Kind kind = Kind::kSelfDistance;
  std::vector<Point> points;
  double magnitude = 0.0;  // self-distance, or the negated triangle slack
};

struct AxiomReport {
  int samples_checked = 0;
  int triples_checked = 0;
  double max_self_distance = 0.0;
  // min over sampled triples of delta(x,y) + delta(y,z) - delta(x,z);
  // +inf when no triple was formed.
  double worst_triangle_slack = std::numeric_limits<double>::infinity();
  std::vector<AxiomViolation> violations;
  bool empty_sample = false;
  double tol = 0.0;

  bool passed() const { return violations.empty(); }
};

/// Checks delta(x, x) = 0 on every sampled point and the triangle
/// inequality on triples formed from consecutive sample blocks.
template <MetricSpaceLike S>
AxiomReport check_weak_metric_axioms(const S& space, const Sampler& sampler, double tol) {
  if (tol < 0.0) throw std::invalid_argument("check_weak_metric_axioms: tol must be >= 0");
  AxiomReport report;
  report.tol = tol;
  report.samples_checked = sampler.count;
  report.triples_checked = sampler.triple_count();
  if (sampler.count == 0) {
    report.empty_sample = true;
    return report;
  }

  struct SelfAcc {
    double max_self = 0.0;
    std::vector<AxiomViolation> violations;
  };
  SelfAcc self = detail::chunked_reduce(
      sampler.count, SelfAcc{},
      [&](int begin, int end) {
        SelfAcc acc;
        for (int i = begin; i < end; ++i) {
          const Point p = sampler.point(i);
          const double d = space.delta(p, p);
          acc.max_self = std::max(acc.max_self, d);
          if (d > tol) {
            acc.violations.push_back({AxiomViolation::Kind::kSelfDistance, {p}, d});
          }
        }
        return acc;
      },
      [](SelfAcc a, SelfAcc b) {
        a.max_self = std::max(a.max_self, b.max_self);
        a.violations.insert(a.violations.end(), b.violations.begin(), b.violations.end());
        return a;
      });
  report.max_self_distance = self.max_self;
  report.violations = std::move(self.violations);

  struct TriAcc {
    double worst_slack = std::numeric_limits<double>::infinity();
    std::vector<AxiomViolation> violations;
  };
  TriAcc tri = detail::chunked_reduce(
      sampler.triple_count(), TriAcc{},
      [&](int begin, int end) {
        TriAcc acc;
        for (int i = begin; i < end; ++i) {
          const auto [x, y, z] = sampler.triple(i);
          const double slack = space.delta(x, y) + space.delta(y, z) - space.delta(x, z);
          acc.worst_slack = std::min(acc.worst_slack, slack);
          if (slack < -tol) {
            acc.violations.push_back({AxiomViolation::Kind::kTriangle, {x, y, z}, -slack});
          }
        }
        return acc;
      },
      [](TriAcc a, TriAcc b) {
        a.worst_slack = std::min(a.worst_slack, b.worst_slack);
        a.violations.insert(a.violations.end(), b.violations.begin(), b.violations.end());
        return a;
      });
  report.worst_triangle_slack = tri.worst_slack;
  report.violations.insert(report.violations.end(), tri.violations.begin(), tri.violations.end());
  return report;
}

struct NonexpansiveReport {
  int pairs_checked = 0;
  // max over sampled pairs of delta(Tx, Ty) - delta(x, y).
  double max_excess = 0.0;
  std::optional<std::pair<Point, Point>> worst_pair;
  bool empty_sample = false;
  double tol = 0.0;

  bool within_tol() const { return max_excess <= tol; }
};

template <MetricSpaceLike S, SelfMapLike M>
NonexpansiveReport check_nonexpansive(const S& space, const M& map, const Sampler& sampler,
                                      double tol) {
  NonexpansiveReport report;
  report.tol = tol;
  report.pairs_checked = sampler.pair_count();
  if (report.pairs_checked == 0) {
    report.empty_sample = true;
    return report;
  }

  struct Acc {
    double excess = -std::numeric_limits<double>::infinity();
    int index = -1;
  };
  Acc best = detail::chunked_reduce(
      report.pairs_checked, Acc{},
      [&](int begin, int end) {
        Acc acc;
        for (int i = begin; i < end; ++i) {
          const auto [x, y] = sampler.pair(i);
          const double excess = space.delta(map.apply(x), map.apply(y)) - space.delta(x, y);
          if (excess > acc.excess) {
            acc.excess = excess;
            acc.index = i;
          }
        }
        return acc;
      },
      [](Acc a, Acc b) {
        // Ties resolve to the earlier pair so chunking cannot matter.
        if (b.index >= 0 && (a.index < 0 || b.excess > a.excess ||
                             (b.excess == a.excess && b.index < a.index))) {
          return b;
        }
        return a;
      });
  report.max_excess = best.excess;
  if (best.index >= 0) {
    const auto [x, y] = sampler.pair(best.index);
    report.worst_pair = std::make_pair(x, y);
  }
  return report;
}

}  // namespace firmlab
