#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "firmlab/core.hpp"
#include "firmlab/detail/simplex.hpp"
#include "firmlab/mappings.hpp"
#include "firmlab/sampler.hpp"
#include "firmlab/spaces.hpp"

namespace firmlab {

using CoeffFn = std::function<double(const Point&, const Point&)>;

/// Coefficient functions (q, r, s, t) weighting delta(x,y), delta(x,Tx),
/// delta(y,Ty) and delta(x,Ty) + delta(Tx,y) in the firmness inequality,
/// together with the claimed infimum of t and supremum of q + r + s + 2t.
struct Coefficients {
  CoeffFn q, r, s, t;
  double t_inf = 0.0;
  double sum_sup = 0.0;
  std::optional<std::array<double, 4>> constants;

  static Coefficients from_constants(double q, double r, double s, double t) {
    for (double v : {q, r, s, t}) {
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("Coefficients: constants must be finite and >= 0");
      }
    }
    Coefficients out;
    out.q = [q](const Point&, const Point&) { return q; };
    out.r = [r](const Point&, const Point&) { return r; };
    out.s = [s](const Point&, const Point&) { return s; };
    out.t = [t](const Point&, const Point&) { return t; };
    out.t_inf = t;
    out.sum_sup = q + r + s + 2.0 * t;
    out.constants = {{q, r, s, t}};
    return out;
  }
};

/// Constant coefficients induced by the averaging parameter of the firmly
/// non-expansive inequality: q = lambda / (2 - lambda), r = s = 0,
/// t = (1 - lambda) / (2 - lambda). Satisfies q + 2t = 1 identically.
inline Coefficients averaging_coefficients(double lambda) {
  if (!(lambda > 0.0) || !(lambda < 1.0)) {
    // lambda = 1 would give t = 0 and void the infimum condition.
    throw std::invalid_argument("averaging_coefficients: lambda must lie in ]0, 1[");
  }
  const double q = lambda / (2.0 - lambda);
  const double t = (1.0 - lambda) / (2.0 - lambda);
  return Coefficients::from_constants(q, 0.0, 0.0, t);
}

struct CoefficientBoundsReport {
  int pairs_checked = 0;
  double min_t = std::numeric_limits<double>::infinity();
  double max_sum = 0.0;
  bool infimum_ok = false;  // t_inf > 0 and every sampled t >= t_inf
  bool sum_ok = false;      // every sampled q + r + s + 2t <= 1

  bool passed() const { return infimum_ok && sum_ok; }
};

/// Verifies the two scalar coefficient bounds on sampled pairs.
inline CoefficientBoundsReport check_coefficient_bounds(const Coefficients& coeffs,
                                                        const Sampler& sampler) {
  CoefficientBoundsReport report;
  report.pairs_checked = sampler.pair_count();
  for (int i = 0; i < report.pairs_checked; ++i) {
    const auto [x, y] = sampler.pair(i);
    const double tv = coeffs.t(x, y);
    const double sum = coeffs.q(x, y) + coeffs.r(x, y) + coeffs.s(x, y) + 2.0 * tv;
    report.min_t = std::min(report.min_t, tv);
    report.max_sum = std::max(report.max_sum, sum);
  }
  if (report.pairs_checked == 0) {
    report.min_t = coeffs.t_inf;
    report.max_sum = coeffs.sum_sup;
  }
  report.infimum_ok = coeffs.t_inf > 0.0 && report.min_t >= coeffs.t_inf - 1e-12;
  report.sum_ok = report.max_sum <= 1.0 + 1e-12;
  return report;
}

struct FirmnessInequalityReport {
  int pairs_checked = 0;
  // max over sampled pairs of delta(Tx,Ty) minus the coefficient-weighted
  // right-hand side.
  double max_violation = -std::numeric_limits<double>::infinity();
  std::optional<std::pair<Point, Point>> worst_pair;
  double tol = 0.0;

  bool certified() const { return max_violation <= tol; }
};

/// Checks delta(Tx,Ty) <= q d(x,y) + r d(x,Tx) + s d(y,Ty) + t [d(x,Ty) + d(Tx,y)]
/// over sampled pairs. Certifies firmness on the sampled region only.
template <MetricSpaceLike S, SelfMapLike M>
FirmnessInequalityReport check_firmness_inequality(const S& space, const M& map,
                                                   const Coefficients& coeffs,
                                                   const Sampler& sampler, double tol) {
  FirmnessInequalityReport report;
  report.tol = tol;
  report.pairs_checked = sampler.pair_count();

  struct Acc {
    double violation = -std::numeric_limits<double>::infinity();
    int index = -1;
  };
  Acc best = detail::chunked_reduce(
      report.pairs_checked, Acc{},
      [&](int begin, int end) {
        Acc acc;
        for (int i = begin; i < end; ++i) {
          const auto [x, y] = sampler.pair(i);
          const Point tx = map.apply(x);
          const Point ty = map.apply(y);
          const double lhs = space.delta(tx, ty);
          const double rhs = coeffs.q(x, y) * space.delta(x, y) +
                             coeffs.r(x, y) * space.delta(x, tx) +
                             coeffs.s(x, y) * space.delta(y, ty) +
                             coeffs.t(x, y) * (space.delta(x, ty) + space.delta(tx, y));
          const double violation = lhs - rhs;
          if (violation > acc.violation) {
            acc.violation = violation;
            acc.index = i;
          }
        }
        return acc;
      },
      [](Acc a, Acc b) {
        if (b.index >= 0 && (a.index < 0 || b.violation > a.violation)) return b;
        return a;
      });
  if (best.index >= 0) {
    report.max_violation = best.violation;
    const auto [x, y] = sampler.pair(best.index);
    report.worst_pair = std::make_pair(x, y);
  } else {
    report.max_violation = 0.0;
  }
  return report;
}

/// ||Tx - Ty|| - ||(1 - lambda)(Tx - Ty) + lambda (x - y)||; positive values
/// witness failure of the firmly non-expansive inequality at this lambda.
template <NormedSpaceLike S, SelfMapLike M>
double firmly_nonexpansive_violation(const S& space, const M& map, const Point& x,
                                     const Point& y, double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw std::invalid_argument("firmly_nonexpansive_violation: lambda must lie in ]0, 1]");
  }
  const Point image_diff = map.apply(x) - map.apply(y);
  const Point base_diff = x - y;
  const Point blend = (1.0 - lambda) * image_diff + lambda * base_diff;
  return space.norm(image_diff) - space.norm(blend);
}

struct FirmlyNonexpansiveRow {
  double lambda = 0.0;
  double max_violation = 0.0;
  std::optional<std::pair<Point, Point>> worst_pair;
};

struct FirmlyNonexpansiveReport {
  std::vector<FirmlyNonexpansiveRow> rows;
  double tol = 0.0;

  bool holds_for_some_lambda() const {
    for (const auto& row : rows) {
      if (row.max_violation <= tol) return true;
    }
    return false;
  }
  bool holds_for_all_lambdas() const {
    for (const auto& row : rows) {
      if (row.max_violation > tol) return false;
    }
    return !rows.empty();
  }
};

/// Per-lambda worst violation of the firmly non-expansive inequality over
/// sampled pairs. Requires a vector-space (normed) host.
template <NormedSpaceLike S, SelfMapLike M>
FirmlyNonexpansiveReport check_firmly_nonexpansive(const S& space, const M& map,
                                                   const std::vector<double>& lambda_grid,
                                                   const Sampler& sampler, double tol) {
  FirmlyNonexpansiveReport report;
  report.tol = tol;
  for (double lambda : lambda_grid) {
    struct Acc {
      double violation = -std::numeric_limits<double>::infinity();
      int index = -1;
    };
    Acc best = detail::chunked_reduce(
        sampler.pair_count(), Acc{},
        [&](int begin, int end) {
          Acc acc;
          for (int i = begin; i < end; ++i) {
            const auto [x, y] = sampler.pair(i);
            const double v = firmly_nonexpansive_violation(space, map, x, y, lambda);
            if (v > acc.violation) {
              acc.violation = v;
              acc.index = i;
            }
          }
          return acc;
        },
        [](Acc a, Acc b) {
          if (b.index >= 0 && (a.index < 0 || b.violation > a.violation)) return b;
          return a;
        });
    FirmlyNonexpansiveRow row;
    row.lambda = lambda;
    row.max_violation = best.index >= 0 ? best.violation : 0.0;
    if (best.index >= 0) {
      const auto [x, y] = sampler.pair(best.index);
      row.worst_pair = std::make_pair(x, y);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

/// Default lambda grid {0.05, 0.10, ..., 0.95}.
inline std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

/// tau = (peak - image_dist) / (2 (peak - cross_avg)), where peak is the
/// largest of delta(x,y), delta(x,Tx), delta(y,Ty) and cross_avg is
/// (delta(x,Ty) + delta(Tx,y)) / 2. Undefined when the denominator is below
/// the guard eps_den * max(peak, 1).
struct TauRecord {
  Point x, y, tx, ty;
  double d_xy = 0.0, d_x_tx = 0.0, d_y_ty = 0.0;
  double peak = 0.0;        // largest of the three base distances
  double cross_avg = 0.0;   // (delta(x,Ty) + delta(Tx,y)) / 2
  double image_dist = 0.0;  // delta(Tx, Ty)
  std::optional<double> tau;
  bool passes_filter = false;  // cross_avg < image_dist - eps_den * peak
};

namespace detail {

template <MetricSpaceLike S>
TauRecord tau_from_points(const S& space, Point x, Point y, Point tx, Point ty,
                          double eps_den) {
  TauRecord rec;
  rec.d_xy = space.delta(x, y);
  rec.d_x_tx = space.delta(x, tx);
  rec.d_y_ty = space.delta(y, ty);
  rec.peak = std::max({rec.d_xy, rec.d_x_tx, rec.d_y_ty});
  rec.cross_avg = 0.5 * (space.delta(x, ty) + space.delta(tx, y));
  rec.image_dist = space.delta(tx, ty);
  const double guard = eps_den * std::max(rec.peak, 1.0);
  if (rec.peak - rec.cross_avg > guard) {
    rec.tau = (rec.peak - rec.image_dist) / (2.0 * (rec.peak - rec.cross_avg));
  }
  rec.passes_filter = rec.cross_avg < rec.image_dist - eps_den * rec.peak;
  rec.x = std::move(x);
  rec.y = std::move(y);
  rec.tx = std::move(tx);
  rec.ty = std::move(ty);
  return rec;
}

}  // namespace detail

template <MetricSpaceLike S, SelfMapLike M>
TauRecord tau(const S& space, const M& map, const Point& x, const Point& y,
              double eps_den = 1e-9) {
  return detail::tau_from_points(space, x, y, map.apply(x), map.apply(y), eps_den);
}

template <MetricSpaceLike S>
TauRecord tau(const S& space, const VirtualPair& pair, double eps_den = 1e-9) {
  return detail::tau_from_points(space, pair.x, pair.y, pair.tx, pair.ty, eps_den);
}

struct TauScanResult {
  // +inf when no sampled pair passes the filter.
  double inf_tau = std::numeric_limits<double>::infinity();
  std::optional<TauRecord> argmin;
  int pairs_scanned = 0;
  int passed_filter = 0;
  int degenerate = 0;  // pairs whose denominator fell below the guard
  double threshold = 0.0;

  /// Consistent with firmness iff the sampled infimum stays above threshold.
  bool firm_consistent() const { return inf_tau >= threshold; }
};

/// Infimum of tau over sampled pairs passing the strict filter
/// cross_avg < image_dist - eps_den * peak.
template <MetricSpaceLike S, SelfMapLike M>
TauScanResult tau_infimum_scan(const S& space, const M& map, const Sampler& sampler,
                               double eps_den = 1e-9, double threshold = 1e-3) {
  TauScanResult result;
  result.pairs_scanned = sampler.pair_count();
  result.threshold = threshold;

  struct Acc {
    double inf_tau = std::numeric_limits<double>::infinity();
    int argmin_index = -1;
    int passed = 0;
    int degenerate = 0;
  };
  Acc best = detail::chunked_reduce(
      result.pairs_scanned, Acc{},
      [&](int begin, int end) {
        Acc acc;
        for (int i = begin; i < end; ++i) {
          const auto [x, y] = sampler.pair(i);
          const TauRecord rec = tau(space, map, x, y, eps_den);
          if (!rec.tau.has_value()) {
            ++acc.degenerate;
            continue;
          }
          if (!rec.passes_filter) continue;
          ++acc.passed;
          if (*rec.tau < acc.inf_tau) {
            acc.inf_tau = *rec.tau;
            acc.argmin_index = i;
          }
        }
        return acc;
      },
      [](Acc a, Acc b) {
        a.passed += b.passed;
        a.degenerate += b.degenerate;
        if (b.argmin_index >= 0 && (a.argmin_index < 0 || b.inf_tau < a.inf_tau)) {
          a.inf_tau = b.inf_tau;
          a.argmin_index = b.argmin_index;
        }
        return a;
      });
  result.passed_filter = best.passed;
  result.degenerate = best.degenerate;
  result.inf_tau = best.inf_tau;
  if (best.argmin_index >= 0) {
    const auto [x, y] = sampler.pair(best.argmin_index);
    result.argmin = tau(space, map, x, y, eps_den);
  }
  return result;
}

/// The six distances entering the firmness inequality for one pair.
struct PairDistances {
  double d_xy = 0.0;
  double d_x_tx = 0.0;
  double d_y_ty = 0.0;
  double d_tx_ty = 0.0;
  double d_x_ty = 0.0;
  double d_tx_y = 0.0;
};

template <MetricSpaceLike S, SelfMapLike M>
std::vector<PairDistances> evaluate_pairs(const S& space, const M& map,
                                          const Sampler& sampler) {
  std::vector<PairDistances> out;
  out.reserve(static_cast<std::size_t>(sampler.pair_count()));
  for (int i = 0; i < sampler.pair_count(); ++i) {
    const auto [x, y] = sampler.pair(i);
    const Point tx = map.apply(x);
    const Point ty = map.apply(y);
    out.push_back({space.delta(x, y), space.delta(x, tx), space.delta(y, ty),
                   space.delta(tx, ty), space.delta(x, ty), space.delta(tx, y)});
  }
  return out;
}

template <MetricSpaceLike S>
PairDistances evaluate_pair(const S& space, const VirtualPair& pair) {
  return {space.delta(pair.x, pair.y),   space.delta(pair.x, pair.tx),
          space.delta(pair.y, pair.ty),  space.delta(pair.tx, pair.ty),
          space.delta(pair.x, pair.ty),  space.delta(pair.tx, pair.y)};
}

struct CertifyResult {
  bool feasible = false;
  std::optional<Coefficients> certificate;
  double t_value = 0.0;
  std::string method;       // "lp" or "grid"
  int constraints_total = 0;    // non-trivial pair constraints after pruning
  int constraints_active = 0;   // LP: generated subset size; grid: same as total
  double max_residual = 0.0;    // worst remaining violation of the returned point
};

namespace detail {

// One pair constraint, scaled so the required right-hand side is 1:
//   a q + b r + c s + e t >= 1.
struct CertConstraint {
  double a, b, c, e;
};

inline std::vector<CertConstraint> build_certificate_constraints(
    std::span<const PairDistances> pairs) {
  std::vector<CertConstraint> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!(p.d_tx_ty > 0.0)) continue;  // trivially satisfied
    const double inv = 1.0 / p.d_tx_ty;
    out.push_back({p.d_xy * inv, p.d_x_tx * inv, p.d_y_ty * inv,
                   (p.d_x_ty + p.d_tx_y) * inv});
  }
  return out;
}

// Keeps only Pareto-minimal constraints: if every coefficient of i is <=
// the matching coefficient of j, then i binding implies j on the
// non-negative orthant, so j can be dropped. Exact; no tolerance.
inline std::vector<CertConstraint> prune_dominated(std::vector<CertConstraint> cons) {
  std::sort(cons.begin(), cons.end(), [](const CertConstraint& l, const CertConstraint& r) {
    const double ls = l.a + l.b + l.c + l.e;
    const double rs = r.a + r.b + r.c + r.e;
    if (ls != rs) return ls < rs;
    if (l.a != r.a) return l.a < r.a;
    if (l.b != r.b) return l.b < r.b;
    if (l.c != r.c) return l.c < r.c;
    return l.e < r.e;
  });
  std::vector<CertConstraint> kept;
  for (const auto& c : cons) {
    bool dominated = false;
    for (const auto& k : kept) {
      if (k.a <= c.a && k.b <= c.b && k.c <= c.c && k.e <= c.e) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(c);
  }
  return kept;
}

inline double constraint_violation(const CertConstraint& c, double q, double r, double s,
                                   double t) {
  return 1.0 - (c.a * q + c.b * r + c.c * s + c.e * t);
}

}  // namespace detail

/// Searches constant coefficients witnessing the firmness inequality on the
/// given pairs: maximize t subject to q,r,s >= 0, t >= t_min,
/// q + r + s + 2t <= 1 and every pair constraint. Solved by a small dense
/// LP with constraint generation; the binding subset is tiny in practice.
/// Infeasibility is a value (evidence of non-firmness on the samples).
inline CertifyResult certify_firm_constant(std::span<const PairDistances> pairs,
                                           double t_min = 1e-3) {
  if (!(t_min > 0.0)) throw std::invalid_argument("certify_firm_constant: t_min must be > 0");
  CertifyResult result;
  result.method = "lp";
  if (2.0 * t_min > 1.0 + 1e-15) return result;

  const auto cons = detail::prune_dominated(detail::build_certificate_constraints(pairs));
  result.constraints_total = static_cast<int>(cons.size());

  std::vector<int> chosen;
  std::vector<char> in_chosen(cons.size(), 0);
  constexpr double kFeasTol = 1e-9;

  for (int round = 0; round < 256; ++round) {
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    rows.push_back({1.0, 1.0, 1.0, 2.0});
    rhs.push_back(1.0 - 2.0 * t_min);
    for (int idx : chosen) {
      const auto& c = cons[static_cast<std::size_t>(idx)];
      rows.push_back({-c.a, -c.b, -c.c, -c.e});
      rhs.push_back(-(1.0 - c.e * t_min));
    }
    const auto sol = detail::solve_lp_max(rows, rhs, {0.0, 0.0, 0.0, 1.0});
    if (sol.status == detail::LpStatus::kInfeasible) {
      result.constraints_active = static_cast<int>(chosen.size());
      return result;  // infeasible
    }
    if (sol.status != detail::LpStatus::kOptimal) {
      throw std::runtime_error("certify_firm_constant: unexpected LP status");
    }
    const double q = std::max(0.0, sol.x[0]);
    const double r = std::max(0.0, sol.x[1]);
    const double s = std::max(0.0, sol.x[2]);
    const double t = std::max(0.0, sol.x[3]) + t_min;

    struct Acc {
      double worst = -std::numeric_limits<double>::infinity();
      int index = -1;
    };
    Acc worst = detail::chunked_reduce(
        static_cast<int>(cons.size()), Acc{},
        [&](int begin, int end) {
          Acc acc;
          for (int i = begin; i < end; ++i) {
            const double v =
                detail::constraint_violation(cons[static_cast<std::size_t>(i)], q, r, s, t);
            if (v > acc.worst) {
              acc.worst = v;
              acc.index = i;
            }
          }
          return acc;
        },
        [](Acc a, Acc b) {
          if (b.index >= 0 && (a.index < 0 || b.worst > a.worst)) return b;
          return a;
        });

    const double residual = worst.index >= 0 ? worst.worst : 0.0;
    if (residual <= kFeasTol || in_chosen[static_cast<std::size_t>(worst.index)]) {
      result.feasible = residual <= 1e-7;
      if (result.feasible) {
        result.certificate = Coefficients::from_constants(q, r, s, t);
        result.t_value = t;
        result.max_residual = std::max(residual, 0.0);
      }
      result.constraints_active = static_cast<int>(chosen.size());
      return result;
    }
    chosen.push_back(worst.index);
    in_chosen[static_cast<std::size_t>(worst.index)] = 1;
  }
  throw std::runtime_error("certify_firm_constant: constraint generation did not settle");
}

/// Deterministic coarse grid search at the given resolution; the fallback
/// and cross-check oracle for the LP route. Scans t downward, then (q, r, s)
/// lexicographically, and returns the first admissible lattice point.
inline CertifyResult certify_firm_constant_grid(std::span<const PairDistances> pairs,
                                                double t_min = 1e-3,
                                                int resolution_denom = 64) {
  if (!(t_min > 0.0)) throw std::invalid_argument("certify_firm_constant_grid: t_min must be > 0");
  if (resolution_denom < 2) {
    throw std::invalid_argument("certify_firm_constant_grid: resolution_denom must be >= 2");
  }
  CertifyResult result;
  result.method = "grid";

  const auto cons = detail::prune_dominated(detail::build_certificate_constraints(pairs));
  result.constraints_total = static_cast<int>(cons.size());
  result.constraints_active = result.constraints_total;

  const double h = 1.0 / static_cast<double>(resolution_denom);
  const int kt_max = resolution_denom / 2;
  int kt_min = static_cast<int>(std::ceil((t_min - 1e-15) * resolution_denom));
  kt_min = std::max(kt_min, 1);
  constexpr double kGridTol = 1e-9;

  for (int kt = kt_max; kt >= kt_min; --kt) {
    const double t = kt * h;
    const int budget = resolution_denom - 2 * kt;  // q + r + s <= budget * h
    for (int kq = 0; kq <= budget; ++kq) {
      for (int kr = 0; kr + kq <= budget; ++kr) {
        for (int ks = 0; ks + kr + kq <= budget; ++ks) {
          const double q = kq * h;
          const double r = kr * h;
          const double s = ks * h;
          bool ok = true;
          for (const auto& c : cons) {
            if (detail::constraint_violation(c, q, r, s, t) > kGridTol) {
              ok = false;
              break;
            }
          }
          if (ok) {
            result.feasible = true;
            result.certificate = Coefficients::from_constants(q, r, s, t);
            result.t_value = t;
            return result;
          }
        }
      }
    }
  }
  return result;
}

template <MetricSpaceLike S, SelfMapLike M>
CertifyResult certify_firm_constant(const S& space, const M& map, const Sampler& sampler,
                                    double t_min = 1e-3) {
  const auto pairs = evaluate_pairs(space, map, sampler);
  return certify_firm_constant(std::span<const PairDistances>(pairs), t_min);
}

template <MetricSpaceLike S, SelfMapLike M>
CertifyResult certify_firm_constant_grid(const S& space, const M& map, const Sampler& sampler,
                                         double t_min = 1e-3, int resolution_denom = 64) {
  const auto pairs = evaluate_pairs(space, map, sampler);
  return certify_firm_constant_grid(std::span<const PairDistances>(pairs), t_min,
                                    resolution_denom);
}

/// A sampled pair whose images sit within relative distance epsilon of the
/// swap configuration Tx = y, Ty = z; witnesses failure of firmness.
struct SwapWitness {
  double x = 0.0;
  double y = 0.0;
  double tx_to_y = 0.0;   // ||Tx - y||
  double ty_to_z = 0.0;   // ||Ty - z_xy||
  double scale = 0.0;     // ||y - x||
  int pair_index = -1;
};

namespace detail {

inline std::optional<SwapWitness> swap_witness_at(const AsymNorm1D& space, double x, double y,
                                                  double tx, double ty, double epsilon,
                                                  int index) {
  if (x == y) return std::nullopt;
  const double scale = space.norm1(y - x);
  const double z = asym_reflection(space, x, y);
  const double lhs1 = space.norm1(tx - y);
  const double lhs2 = space.norm1(ty - z);
  if (lhs1 < epsilon * scale && lhs2 < epsilon * scale) {
    return SwapWitness{x, y, lhs1, lhs2, scale, index};
  }
  return std::nullopt;
}

}  // namespace detail

/// Scans sampled distinct pairs for a swap witness at tolerance epsilon;
/// returns the first one in sampler order, if any.
template <SelfMapLike M>
std::optional<SwapWitness> non_firmness_witness_scan(const AsymNorm1D& space, const M& map,
                                                     double epsilon, const Sampler& sampler) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("non_firmness_witness_scan: epsilon must be > 0");
  }
  struct Acc {
    std::optional<SwapWitness> witness;
  };
  Acc found = detail::chunked_reduce(
      sampler.pair_count(), Acc{},
      [&](int begin, int end) {
        Acc acc;
        for (int i = begin; i < end; ++i) {
          const auto [px, py] = sampler.pair(i);
          const double x = px[0];
          const double y = py[0];
          if (x == y) continue;
          const auto w = detail::swap_witness_at(space, x, y, map.apply(px)[0],
                                                 map.apply(py)[0], epsilon, i);
          if (w.has_value()) {
            acc.witness = w;
            return acc;  // first in this chunk; chunks merge in order
          }
        }
        return acc;
      },
      [](Acc a, Acc b) {
        if (!a.witness.has_value()) return b;
        if (!b.witness.has_value()) return a;
        return a.witness->pair_index <= b.witness->pair_index ? a : b;
      });
  return found.witness;
}

/// Swap-witness test for a pinned two-point configuration.
inline std::optional<SwapWitness> non_firmness_witness_check(const AsymNorm1D& space,
                                                             const VirtualPair& pair,
                                                             double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("non_firmness_witness_check: epsilon must be > 0");
  }
  return detail::swap_witness_at(space, pair.x[0], pair.y[0], pair.tx[0], pair.ty[0],
                                 epsilon, 0);
}

}  // namespace firmlab
