#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "firmlab/point.hpp"
#include "firmlab/spaces.hpp"

namespace firmlab {

class Map;

/// Tx = |x| + 1 on the real line.
struct AbsPlusOne {
  static constexpr std::string_view kName = "abs_plus_one";
  int dimension() const { return 1; }
  Point apply(const Point& x) const {
    detail::require_dimension(x, 1, "AbsPlusOne::apply");
    return Point{std::abs(x[0]) + 1.0};
  }
};

/// Tx = -x + 1 for x < 0 and Tx = x + exp(-x) for x >= 0.
struct ReflectExp {
  static constexpr std::string_view kName = "reflect_exp";
  int dimension() const { return 1; }
  Point apply(const Point& x) const {
    detail::require_dimension(x, 1, "ReflectExp::apply");
    const double v = x[0];
    return Point{v < 0.0 ? -v + 1.0 : v + std::exp(-v)};
  }
};

/// Tx = x + c.
struct Translation {
  static constexpr std::string_view kName = "translation";
  Point offset;

  explicit Translation(Point offset_) : offset(std::move(offset_)) {
    if (offset.dimension() < 1 || !offset.all_finite()) {
      throw std::invalid_argument("Translation: offset must be finite and non-empty");
    }
  }

  int dimension() const { return offset.dimension(); }
  Point apply(const Point& x) const {
    detail::require_dimension(x, dimension(), "Translation::apply");
    return x + offset;
  }
};

/// Tx = A x + b with a dense row-major matrix A.
struct AffineMap {
  static constexpr std::string_view kName = "affine";
  std::vector<double> matrix;  // row-major dim x dim
  Point offset;

  AffineMap(std::vector<double> matrix_, Point offset_)
      : matrix(std::move(matrix_)), offset(std::move(offset_)) {
    const int d = offset.dimension();
    if (d < 1 || !offset.all_finite()) {
      throw std::invalid_argument("AffineMap: offset must be finite and non-empty");
    }
    if (static_cast<int>(matrix.size()) != d * d) {
      throw std::invalid_argument("AffineMap: matrix must be dim x dim");
    }
    for (double c : matrix) {
      if (!std::isfinite(c)) throw std::invalid_argument("AffineMap: matrix must be finite");
    }
  }

  static AffineMap scaling_1d(double factor) { return AffineMap({factor}, Point{0.0}); }

  int dimension() const { return offset.dimension(); }
  Point apply(const Point& x) const {
    const int d = dimension();
    detail::require_dimension(x, d, "AffineMap::apply");
    Point out = Point::zeros(d);
    for (int i = 0; i < d; ++i) {
      double acc = offset[i];
      for (int j = 0; j < d; ++j) {
        acc += matrix[static_cast<std::size_t>(i * d + j)] * x[j];
      }
      out[i] = acc;
    }
    return out;
  }
};

/// Continuous piecewise-linear self-map of the real line. Construction
/// validates continuity at every breakpoint and that each segment slope is
/// admissible for the hosting 1-D norm.
///
/// For a segment of slope s and displacement v = y - x > 0 the host norm
/// gives ||s v|| = v max(-alpha s, beta s) against ||v|| = beta v, so s must
/// satisfy -alpha s <= beta and beta s <= beta. For v < 0 the same argument
/// gives alpha s <= alpha and -beta s <= alpha. Combining both signs, the
/// admissible slope interval is
///   -min(alpha / beta, beta / alpha) <= s <= 1.
/// Segmentwise admissibility plus continuity yields the bound on the whole
/// line because crossing displacements split into per-segment pieces and the
/// norm is subadditive.
struct PiecewiseLinear1D {
  static constexpr std::string_view kName = "piecewise_linear_1d";
  std::vector<double> breakpoints;  // strictly increasing; may be empty
  std::vector<double> slopes;       // one per segment (breakpoints.size() + 1)
  std::vector<double> intercepts;   // one per segment

  PiecewiseLinear1D(double host_alpha, double host_beta, std::vector<double> breakpoints_,
                    std::vector<double> slopes_, std::vector<double> intercepts_)
      : breakpoints(std::move(breakpoints_)),
        slopes(std::move(slopes_)),
        intercepts(std::move(intercepts_)) {
    if (!(host_alpha > 0.0) || !(host_beta > 0.0)) {
      throw std::invalid_argument("PiecewiseLinear1D: host norm weights must be positive");
    }
    if (slopes.size() != breakpoints.size() + 1 || intercepts.size() != slopes.size()) {
      throw std::invalid_argument(
          "PiecewiseLinear1D: need one slope and intercept per segment");
    }
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
      if (!(breakpoints[i] < breakpoints[i + 1])) {
        throw std::invalid_argument("PiecewiseLinear1D: breakpoints must be strictly increasing");
      }
    }
    const double slope_min = -std::min(host_alpha / host_beta, host_beta / host_alpha);
    for (double s : slopes) {
      if (!std::isfinite(s) || s < slope_min - 1e-12 || s > 1.0 + 1e-12) {
        throw std::invalid_argument(
            "PiecewiseLinear1D: segment slope outside the admissible interval "
            "[-min(alpha/beta, beta/alpha), 1]");
      }
    }
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
      const double b = breakpoints[i];
      const double left = slopes[i] * b + intercepts[i];
      const double right = slopes[i + 1] * b + intercepts[i + 1];
      if (std::abs(left - right) > 1e-9 * std::max(1.0, std::abs(left))) {
        throw std::invalid_argument("PiecewiseLinear1D: discontinuous at a breakpoint");
      }
    }
  }

  int dimension() const { return 1; }
  Point apply(const Point& x) const {
    detail::require_dimension(x, 1, "PiecewiseLinear1D::apply");
    const double v = x[0];
    const std::size_t seg = static_cast<std::size_t>(
        std::upper_bound(breakpoints.begin(), breakpoints.end(), v) - breakpoints.begin());
    return Point{slopes[seg] * v + intercepts[seg]};
  }
};

/// x -> (1 - lambda) x + lambda Tx on a vector-space host.
struct KrasnoselskiiAverage {
  static constexpr std::string_view kName = "km_average";
  std::shared_ptr<const Map> inner;
  double lambda = 1.0;

  int dimension() const;
  Point apply(const Point& x) const;
};

/// Immutable descriptor over the built-in map kinds.
class Map {
 public:
  using Variant = std::variant<AbsPlusOne, ReflectExp, Translation, AffineMap,
                               PiecewiseLinear1D, KrasnoselskiiAverage>;

  Map(AbsPlusOne kind) : kind_(std::move(kind)) {}
  Map(ReflectExp kind) : kind_(std::move(kind)) {}
  Map(Translation kind) : kind_(std::move(kind)) {}
  Map(AffineMap kind) : kind_(std::move(kind)) {}
  Map(PiecewiseLinear1D kind) : kind_(std::move(kind)) {}
  Map(KrasnoselskiiAverage kind) : kind_(std::move(kind)) {}

  int dimension() const {
    return std::visit([](const auto& k) { return k.dimension(); }, kind_);
  }
  Point apply(const Point& x) const {
    return std::visit([&](const auto& k) { return k.apply(x); }, kind_);
  }
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

inline int KrasnoselskiiAverage::dimension() const { return inner->dimension(); }

inline Point KrasnoselskiiAverage::apply(const Point& x) const {
  const int d = dimension();
  detail::require_dimension(x, d, "KrasnoselskiiAverage::apply");
  const Point tx = inner->apply(x);
  Point out = Point::zeros(d);
  for (int i = 0; i < d; ++i) out[i] = (1.0 - lambda) * x[i] + lambda * tx[i];
  return out;
}

/// Averaged map builder; lambda = 1 reproduces the inner map.
inline Map krasnoselskii_average(Map inner, double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw std::invalid_argument("krasnoselskii_average: lambda must lie in ]0, 1]");
  }
  KrasnoselskiiAverage averaged;
  averaged.inner = std::make_shared<const Map>(std::move(inner));
  averaged.lambda = lambda;
  return Map(std::move(averaged));
}

/// Builds a piecewise-linear map validated against the hosting 1-D norm.
inline Map make_piecewise_linear(const Space& host, std::vector<double> breakpoints,
                                 std::vector<double> slopes, std::vector<double> intercepts) {
  double alpha = 1.0;
  double beta = 1.0;
  if (const auto* asym = host.as<AsymNorm1D>()) {
    alpha = asym->alpha;
    beta = asym->beta;
  } else if (host.as<RealLineAbs>() == nullptr) {
    throw std::invalid_argument("make_piecewise_linear: host must be a 1-D norm kind");
  }
  return Map(PiecewiseLinear1D(alpha, beta, std::move(breakpoints), std::move(slopes),
                               std::move(intercepts)));
}

/// A map constrained at exactly two points: Tx and Ty are pinned, nothing
/// else is. Enough to evaluate tau and the certificate constraints without
/// extending to a global map.
struct VirtualPair {
  Point x, y, tx, ty;

  VirtualPair(Point x_, Point y_, Point tx_, Point ty_)
      : x(std::move(x_)), y(std::move(y_)), tx(std::move(tx_)), ty(std::move(ty_)) {
    detail::require_same_dimension(x, y, "VirtualPair");
    detail::require_same_dimension(x, tx, "VirtualPair");
    detail::require_same_dimension(x, ty, "VirtualPair");
  }

  int dimension() const { return x.dimension(); }
};

inline VirtualPair virtual_pair(Point x, Point y, Point tx, Point ty) {
  return VirtualPair(std::move(x), std::move(y), std::move(tx), std::move(ty));
}

/// The two-point configuration Tx = y, Ty = z with z the far-side point of
/// equal asymmetric distance; the canonical non-firm witness on the line.
inline VirtualPair swap_pair(const AsymNorm1D& space, double x, double y) {
  const double z = asym_reflection(space, x, y);
  return VirtualPair(Point{x}, Point{y}, Point{y}, Point{z});
}

}  // namespace firmlab
