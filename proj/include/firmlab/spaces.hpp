#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "firmlab/detail/simplex.hpp"
#include "firmlab/point.hpp"
#include "firmlab/sampler.hpp"

namespace firmlab {

/// The real line with the absolute-value metric.
struct RealLineAbs {
  static constexpr std::string_view kName = "real_line_abs";

  int dimension() const { return 1; }
  bool symmetric() const { return true; }

  double norm(const Point& v) const {
    detail::require_dimension(v, 1, "RealLineAbs::norm");
    return std::abs(v[0]);
  }

  double delta(const Point& x, const Point& y) const {
    detail::require_dimension(x, 1, "RealLineAbs::delta");
    detail::require_dimension(y, 1, "RealLineAbs::delta");
    return std::abs(y[0] - x[0]);
  }
};

/// Asymmetric norm ||v|| = max(-alpha v, beta v) on the real line, with the
/// distance convention delta(x, y) = ||y - x||.
struct AsymNorm1D {
  static constexpr std::string_view kName = "asym_r";

  double alpha = 1.0;
  double beta = 1.0;

  AsymNorm1D(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha <= 0.0 || beta <= 0.0) {
      throw std::invalid_argument("AsymNorm1D: alpha and beta must be positive and finite");
    }
  }

  int dimension() const { return 1; }
  bool symmetric() const { return alpha == beta; }

  double norm1(double v) const { return std::max(-alpha * v, beta * v); }

  double norm(const Point& v) const {
    detail::require_dimension(v, 1, "AsymNorm1D::norm");
    return norm1(v[0]);
  }

  double delta(const Point& x, const Point& y) const {
    detail::require_dimension(x, 1, "AsymNorm1D::delta");
    detail::require_dimension(y, 1, "AsymNorm1D::delta");
    return norm1(y[0] - x[0]);
  }
};

/// The unique z with ||z - y|| = ||y - x|| and (y - x)(z - y) < 0.
///
/// For y > x the sign condition forces z < y, where the norm is alpha-sided,
/// so alpha (y - z) = beta (y - x). For y < x it is beta-sided:
/// beta (z - y) = alpha (x - y).
inline double asym_reflection(const AsymNorm1D& space, double x, double y) {
  if (x == y) throw std::domain_error("asym_reflection: undefined for x == y");
  if (y > x) return y - (space.beta / space.alpha) * (y - x);
  return y + (space.alpha / space.beta) * (x - y);
}

enum class LpExponent { kOne, kTwo, kInf };

/// R^d with the l1, l2 or l-infinity norm.
struct LpSpace {
  static constexpr std::string_view kName = "rn_lp";

  LpExponent p = LpExponent::kTwo;
  int dim = 1;

  LpSpace(LpExponent p_, int dim_) : p(p_), dim(dim_) {
    if (dim < 1) throw std::invalid_argument("LpSpace: dimension must be >= 1");
  }

  int dimension() const { return dim; }
  bool symmetric() const { return true; }

  double norm(const Point& v) const {
    detail::require_dimension(v, dim, "LpSpace::norm");
    switch (p) {
      case LpExponent::kOne: {
        double s = 0.0;
        for (double c : v.coords) s += std::abs(c);
        return s;
      }
      case LpExponent::kTwo: {
        double s = 0.0;
        for (double c : v.coords) s += c * c;
        return std::sqrt(s);
      }
      case LpExponent::kInf: {
        double s = 0.0;
        for (double c : v.coords) s = std::max(s, std::abs(c));
        return s;
      }
    }
    return 0.0;
  }

  double delta(const Point& x, const Point& y) const { return norm(y - x); }
};

struct PolyhedralValidation {
  bool exact = false;          // true when the exact facewise LP check ran (d <= 3)
  double min_directional = 0;  // exact minimum when exact, else sampled minimum
  int samples = 0;
};

/// Asymmetric polyhedral norm ||v|| = max_i <a_i, v> on R^d. Positivity of
/// the maximum away from the origin is validated at construction: exactly
/// for d <= 3 (LP minimization over each face of the unit cube), by dense
/// directional sampling otherwise (flagged as approximate in the report).
class PolyhedralAsymNorm {
 public:
  static constexpr std::string_view kName = "poly_asym";

  static PolyhedralAsymNorm create(std::vector<std::vector<double>> generators) {
    if (generators.empty()) {
      throw std::invalid_argument("PolyhedralAsymNorm: at least one generator required");
    }
    const int d = static_cast<int>(generators.front().size());
    if (d < 1) throw std::invalid_argument("PolyhedralAsymNorm: generators must be non-empty vectors");
    for (const auto& g : generators) {
      if (static_cast<int>(g.size()) != d) {
        throw std::invalid_argument("PolyhedralAsymNorm: generators must share a dimension");
      }
      for (double c : g) {
        if (!std::isfinite(c)) throw std::invalid_argument("PolyhedralAsymNorm: generators must be finite");
      }
    }

    PolyhedralValidation report;
    report.samples = 4096;
    double sampled_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < report.samples; ++k) {
      std::vector<double> v(static_cast<std::size_t>(d));
      double mag = 0.0;
      for (int j = 0; j < d; ++j) {
        const double u = detail::keyed_unit(0x9042fULL, static_cast<std::uint64_t>(k * d + j));
        v[static_cast<std::size_t>(j)] = 2.0 * u - 1.0;
        mag = std::max(mag, std::abs(v[static_cast<std::size_t>(j)]));
      }
      if (mag < 1e-6) continue;
      for (double& c : v) c /= mag;  // project onto the cube surface
      sampled_min = std::min(sampled_min, directional_max(generators, v));
    }

    if (d <= 3) {
      report.exact = true;
      report.min_directional = exact_min_on_cube(generators, d);
    } else {
      report.min_directional = sampled_min;
    }

    double scale = 0.0;
    for (const auto& g : generators) {
      for (double c : g) scale = std::max(scale, std::abs(c));
    }
    const double tol = 1e-12 * std::max(1.0, scale);
    if (!(report.min_directional > tol) || !(sampled_min > tol)) {
      throw std::invalid_argument(
          "PolyhedralAsymNorm: max_i <a_i, v> is not positive for every v != 0");
    }
    return PolyhedralAsymNorm(std::move(generators), d, report);
  }

  int dimension() const { return dim_; }

  // Symmetric only when the generator set is closed under negation.
  bool symmetric() const {
    for (const auto& g : generators_) {
      bool found = false;
      for (const auto& h : generators_) {
        bool neg = true;
        for (std::size_t j = 0; j < g.size(); ++j) {
          if (h[j] != -g[j]) {
            neg = false;
            break;
          }
        }
        if (neg) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  }

  double norm(const Point& v) const {
    detail::require_dimension(v, dim_, "PolyhedralAsymNorm::norm");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& g : generators_) {
      double dot = 0.0;
      for (int j = 0; j < dim_; ++j) dot += g[static_cast<std::size_t>(j)] * v[j];
      best = std::max(best, dot);
    }
    return std::max(best, 0.0);
  }

  double delta(const Point& x, const Point& y) const { return norm(y - x); }

  const std::vector<std::vector<double>>& generators() const { return generators_; }
  const PolyhedralValidation& validation() const { return validation_; }

 private:
  PolyhedralAsymNorm(std::vector<std::vector<double>> generators, int dim,
                     PolyhedralValidation validation)
      : generators_(std::move(generators)), dim_(dim), validation_(validation) {}

  static double directional_max(const std::vector<std::vector<double>>& generators,
                                const std::vector<double>& v) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& g : generators) {
      double dot = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) dot += g[j] * v[j];
      best = std::max(best, dot);
    }
    return best;
  }

  // Exact min over the cube surface of v -> max_i <a_i, v>. On each face one
  // coordinate is pinned to +-1 and the rest range over [-1, 1]; minimizing
  // the max of linear functions over that box is a small LP.
  static double exact_min_on_cube(const std::vector<std::vector<double>>& generators, int d) {
    double overall = std::numeric_limits<double>::infinity();
    for (int fixed = 0; fixed < d; ++fixed) {
      for (double sign : {1.0, -1.0}) {
        overall = std::min(overall, face_min(generators, d, fixed, sign));
      }
    }
    return overall;
  }

  // minimize zp - zn  s.t.  <a_i, u> <= zp - zn on the face, u_j in [-1, 1].
  // Free coordinates are shifted to w_j = u_j + 1 in [0, 2].
  static double face_min(const std::vector<std::vector<double>>& generators, int d,
                         int fixed, double sign) {
    std::vector<int> free_axes;
    for (int j = 0; j < d; ++j) {
      if (j != fixed) free_axes.push_back(j);
    }
    const int nf = static_cast<int>(free_axes.size());
    const int n = nf + 2;  // w..., zp, zn

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (const auto& g : generators) {
      std::vector<double> row(static_cast<std::size_t>(n), 0.0);
      double shift = 0.0;
      for (int k = 0; k < nf; ++k) {
        const double coef = g[static_cast<std::size_t>(free_axes[static_cast<std::size_t>(k)])];
        row[static_cast<std::size_t>(k)] = coef;
        shift += coef;  // from u_j = w_j - 1
      }
      row[static_cast<std::size_t>(nf)] = -1.0;     // zp
      row[static_cast<std::size_t>(nf + 1)] = 1.0;  // zn
      rhs.push_back(shift - sign * g[static_cast<std::size_t>(fixed)]);
      rows.push_back(std::move(row));
    }
    for (int k = 0; k < nf; ++k) {
      std::vector<double> row(static_cast<std::size_t>(n), 0.0);
      row[static_cast<std::size_t>(k)] = 1.0;
      rows.push_back(std::move(row));
      rhs.push_back(2.0);
    }
    std::vector<double> objective(static_cast<std::size_t>(n), 0.0);
    objective[static_cast<std::size_t>(nf)] = -1.0;     // minimize zp - zn
    objective[static_cast<std::size_t>(nf + 1)] = 1.0;

    const auto sol = detail::solve_lp_max(rows, rhs, objective);
    if (sol.status != detail::LpStatus::kOptimal) {
      throw std::runtime_error("PolyhedralAsymNorm: face LP did not solve");
    }
    return -sol.objective;
  }

  std::vector<std::vector<double>> generators_;
  int dim_ = 1;
  PolyhedralValidation validation_;
};

/// Immutable descriptor over the built-in space kinds. Satisfies the same
/// interface as the concrete kinds, so generic scans accept either.
class Space {
 public:
  using Variant = std::variant<RealLineAbs, AsymNorm1D, LpSpace, PolyhedralAsymNorm>;

  Space(RealLineAbs kind) : kind_(std::move(kind)) {}
  Space(AsymNorm1D kind) : kind_(std::move(kind)) {}
  Space(LpSpace kind) : kind_(std::move(kind)) {}
  Space(PolyhedralAsymNorm kind) : kind_(std::move(kind)) {}

  int dimension() const {
    return std::visit([](const auto& k) { return k.dimension(); }, kind_);
  }
  bool symmetric() const {
    return std::visit([](const auto& k) { return k.symmetric(); }, kind_);
  }
  double delta(const Point& x, const Point& y) const {
    return std::visit([&](const auto& k) { return k.delta(x, y); }, kind_);
  }
  double norm(const Point& v) const {
    return std::visit([&](const auto& k) { return k.norm(v); }, kind_);
  }
  /// Every built-in kind is induced by a (possibly asymmetric) norm.
  bool has_norm() const { return true; }

  std::string_view kind_name() const {
    return std::visit([](const auto& k) { return std::decay_t<decltype(k)>::kName; }, kind_);
  }

  const Variant& kind() const { return kind_; }

  template <class K>
  const K* as() const {
    return std::get_if<K>(&kind_);
  }

 private:
  Variant kind_;
};

}  // namespace firmlab
