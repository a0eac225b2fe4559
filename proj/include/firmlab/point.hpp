#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace firmlab {

/// Dense point in R^d. The same type doubles as a displacement vector, so
/// norms and maps can share it.
struct Point {
  std::vector<double> coords;

  Point() = default;
  Point(std::initializer_list<double> values) : coords(values) {}
  explicit Point(std::vector<double> values) : coords(std::move(values)) {}

  static Point zeros(int dim) {
    return Point(std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  }
  static Point constant(int dim, double value) {
    return Point(std::vector<double>(static_cast<std::size_t>(dim), value));
  }

  int dimension() const { return static_cast<int>(coords.size()); }

  double operator[](int i) const { return coords[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return coords[static_cast<std::size_t>(i)]; }

  bool all_finite() const {
    for (double c : coords) {
      if (!std::isfinite(c)) return false;
    }
    return true;
  }

  /// Coordinate of a 1-D point; throws if the dimension is not 1.
  double scalar() const {
    if (coords.size() != 1) {
      throw std::invalid_argument("Point::scalar: point is not one-dimensional");
    }
    return coords[0];
  }

  friend bool operator==(const Point&, const Point&) = default;
};

namespace detail {

inline void require_dimension(const Point& p, int dim, const char* what) {
  if (p.dimension() != dim) {
    throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                std::to_string(dim) + ", got " +
                                std::to_string(p.dimension()));
  }
}

inline void require_same_dimension(const Point& a, const Point& b, const char* what) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.dimension()) + " vs " +
                                std::to_string(b.dimension()) + ")");
  }
}

}  // namespace detail

inline Point operator+(const Point& a, const Point& b) {
  detail::require_same_dimension(a, b, "Point::operator+");
  Point out = a;
  for (int i = 0; i < out.dimension(); ++i) out[i] += b[i];
  return out;
}

inline Point operator-(const Point& a, const Point& b) {
  detail::require_same_dimension(a, b, "Point::operator-");
  Point out = a;
  for (int i = 0; i < out.dimension(); ++i) out[i] -= b[i];
  return out;
}

inline Point operator*(double s, const Point& a) {
  Point out = a;
  for (double& c : out.coords) c *= s;
  return out;
}

}  // namespace firmlab
