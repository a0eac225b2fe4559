#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "firmlab/point.hpp"

namespace firmlab {

/// Axis-aligned box region in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_)
      : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size() || lo.empty()) {
      throw std::invalid_argument("Box: lo/hi must be non-empty and equally sized");
    }
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i]) {
        throw std::invalid_argument("Box: bounds must be finite with lo <= hi");
      }
    }
  }

  static Box cube(int dim, double lo_value, double hi_value) {
    return Box(std::vector<double>(static_cast<std::size_t>(dim), lo_value),
               std::vector<double>(static_cast<std::size_t>(dim), hi_value));
  }

  int dimension() const { return static_cast<int>(lo.size()); }

  double span(int axis) const {
    return hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)];
  }

  double max_span() const {
    double m = 0.0;
    for (int i = 0; i < dimension(); ++i) m = std::max(m, span(i));
    return m;
  }

  bool contains(const Point& p) const {
    if (p.dimension() != dimension()) return false;
    for (int i = 0; i < dimension(); ++i) {
      if (p[i] < lo[static_cast<std::size_t>(i)] || p[i] > hi[static_cast<std::size_t>(i)]) {
        return false;
      }
    }
    return true;
  }
};

namespace detail {

// SplitMix64 finalizer used as a keyed counter hash. Sample i is a pure
// function of (seed, i), so scans can be chunked arbitrarily without
// changing any sampled value.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double keyed_unit(std::uint64_t seed, std::uint64_t counter) {
  return unit_from_bits(splitmix64(seed + 0x9e3779b97f4a7c15ULL * (counter + 1)));
}

// Radical-inverse (Halton) coordinate; index 0 maps to radical inverse of 1
// so the box corner is never emitted.
inline double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0;
  double r = 0.0;
  std::uint64_t i = index + 1;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

inline std::vector<std::uint64_t> first_primes(int n) {
  std::vector<std::uint64_t> primes;
  std::uint64_t candidate = 2;
  while (static_cast<int>(primes.size()) < n) {
    bool is_prime = true;
    for (std::uint64_t p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        is_prime = false;
        break;
      }
    }
    if (is_prime) primes.push_back(candidate);
    ++candidate;
  }
  return primes;
}

}  // namespace detail

enum class SampleScheme {
  kUniformRandom,
  kLowDiscrepancyGrid,
};

/// Deterministic point source over a box. point(i) depends only on the
/// sampler fields and i; identical fields give identical sequences. The
/// low-discrepancy scheme is a Halton set and ignores the seed.
struct Sampler {
  Box region;
  int count = 0;
  std::uint64_t seed = 0;
  SampleScheme scheme = SampleScheme::kUniformRandom;

  Sampler() = default;
  Sampler(Box region_, int count_, std::uint64_t seed_,
          SampleScheme scheme_ = SampleScheme::kUniformRandom)
      : region(std::move(region_)), count(count_), seed(seed_), scheme(scheme_) {
    if (count < 0) throw std::invalid_argument("Sampler: count must be >= 0");
  }

  int dimension() const { return region.dimension(); }

  Point point(int i) const {
    const int d = dimension();
    Point p = Point::zeros(d);
    if (scheme == SampleScheme::kUniformRandom) {
      for (int j = 0; j < d; ++j) {
        const std::uint64_t counter =
            static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(d) +
            static_cast<std::uint64_t>(j);
        const double u = detail::keyed_unit(seed, counter);
        p[j] = region.lo[static_cast<std::size_t>(j)] + region.span(j) * u;
      }
    } else {
      static thread_local std::vector<std::uint64_t> primes;
      if (static_cast<int>(primes.size()) < d) primes = detail::first_primes(d);
      for (int j = 0; j < d; ++j) {
        const double u = detail::halton(static_cast<std::uint64_t>(i), primes[static_cast<std::size_t>(j)]);
        p[j] = region.lo[static_cast<std::size_t>(j)] + region.span(j) * u;
      }
    }
    return p;
  }

  std::vector<Point> points() const {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(point(i));
    return out;
  }

  // Pairs and triples are formed from consecutive sample blocks, so a single
  // seed reproduces them.
  int pair_count() const { return count / 2; }
  int triple_count() const { return count / 3; }

  std::pair<Point, Point> pair(int i) const { return {point(2 * i), point(2 * i + 1)}; }

  std::array<Point, 3> triple(int i) const {
    return {point(3 * i), point(3 * i + 1), point(3 * i + 2)};
  }
};

}  // namespace firmlab
