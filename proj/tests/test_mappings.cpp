#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "firmlab/core.hpp"
#include "firmlab/mappings.hpp"
#include "firmlab/spaces.hpp"

using namespace firmlab;

TEST_SUITE("mappings") {

TEST_CASE("built-in map values") {
  const Map abs1 = Map(AbsPlusOne{});
  CHECK(abs1.apply(Point{-3.0}) == Point{4.0});
  CHECK(abs1.apply(Point{0.0}) == Point{1.0});
  CHECK(abs1.apply(Point{2.0}) == Point{3.0});

  const Map refl = Map(ReflectExp{});
  CHECK(refl.apply(Point{-1.0}) == Point{2.0});
  CHECK(refl.apply(Point{0.0}) == Point{1.0});
  CHECK(refl.apply(Point{1.0})[0] == doctest::Approx(1.0 + std::exp(-1.0)).epsilon(1e-15));

  const Map shift = Map(Translation(Point{1.0, 1.0}));
  CHECK(shift.apply(Point{0.0, 0.0}) == Point{1.0, 1.0});

  const Map affine = Map(AffineMap({0.0, 1.0, -1.0, 0.0}, Point{1.0, 2.0}));
  CHECK(affine.apply(Point{3.0, 4.0}) == Point{5.0, -1.0});
  CHECK_THROWS_AS(AffineMap({1.0, 2.0, 3.0}, Point{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("translations are isometries of every norm kind") {
  Sampler pairs(Box::cube(2, -10.0, 10.0), 2000, 3);
  const Map shift = Map(Translation(Point{0.7, -2.3}));
  for (const Space& space : {Space(LpSpace(LpExponent::kTwo, 2)),
                             Space(LpSpace(LpExponent::kOne, 2)),
                             Space(LpSpace(LpExponent::kInf, 2))}) {
    for (int i = 0; i < pairs.pair_count(); ++i) {
      const auto [x, y] = pairs.pair(i);
      const double before = space.delta(x, y);
      const double after = space.delta(shift.apply(x), shift.apply(y));
      CHECK(std::abs(after - before) <= 1e-12 * std::max(1.0, before));
    }
  }
  Sampler line_pairs(Box::cube(1, -10.0, 10.0), 2000, 4);
  const AsymNorm1D asym(1.0, 2.0);
  const Map shift1 = Map(Translation(Point{1.5}));
  for (int i = 0; i < line_pairs.pair_count(); ++i) {
    const auto [x, y] = line_pairs.pair(i);
    const double before = asym.delta(x, y);
    const double after = asym.delta(shift1.apply(x), shift1.apply(y));
    CHECK(std::abs(after - before) <= 1e-12 * std::max(1.0, before));
  }
}

TEST_CASE("averaged map construction") {
  const Map inner = Map(AbsPlusOne{});
  CHECK_THROWS_AS(krasnoselskii_average(inner, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(krasnoselskii_average(inner, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(krasnoselskii_average(inner, -0.25), std::invalid_argument);

  // lambda = 1 reproduces the inner map exactly.
  const Map full = krasnoselskii_average(inner, 1.0);
  Sampler samples(Box::cube(1, -10.0, 10.0), 500, 9);
  for (int i = 0; i < samples.count; ++i) {
    const Point x = samples.point(i);
    CHECK(full.apply(x) == inner.apply(x));
  }

  // Averaging a translation halves the offset.
  const Map half_shift = krasnoselskii_average(Map(Translation(Point{2.0, -4.0})), 0.5);
  const Map quarter = Map(Translation(Point{1.0, -2.0}));
  Sampler plane(Box::cube(2, -5.0, 5.0), 400, 10);
  for (int i = 0; i < plane.count; ++i) {
    const Point x = plane.point(i);
    const Point a = half_shift.apply(x);
    const Point b = quarter.apply(x);
    CHECK(std::abs(a[0] - b[0]) <= 1e-12);
    CHECK(std::abs(a[1] - b[1]) <= 1e-12);
  }

  const Map half_abs = krasnoselskii_average(Map(AbsPlusOne{}), 0.5);
  CHECK(half_abs.apply(Point{-3.0}) == Point{0.5});  // ((-3) + 4) / 2
  CHECK(half_abs.kind_name() == "km_average");
}

TEST_CASE("piecewise-linear validation against the host norm") {
  const Space line = RealLineAbs{};
  // max(0.5 x + 1, x + 0.1): continuous at the breakpoint 1.8, slopes 0.5 and 1.
  const Map creep = make_piecewise_linear(line, {1.8}, {0.5, 1.0}, {1.0, 0.1});
  CHECK(creep.apply(Point{0.0}) == Point{1.0});
  CHECK(creep.apply(Point{1.8})[0] == doctest::Approx(1.9).epsilon(1e-15));
  CHECK(creep.apply(Point{4.0})[0] == doctest::Approx(4.1).epsilon(1e-15));

  // Slope above 1 is inadmissible for every host.
  CHECK_THROWS_AS(make_piecewise_linear(line, {}, {1.05}, {0.0}), std::invalid_argument);
  // On the symmetric line the admissible interval is [-1, 1].
  CHECK_NOTHROW(make_piecewise_linear(line, {}, {-1.0}, {0.0}));
  CHECK_THROWS_AS(make_piecewise_linear(line, {}, {-1.2}, {0.0}), std::invalid_argument);

  // Host (alpha, beta) = (1, 2): admissible slopes are [-1/2, 1].
  const Space asym = AsymNorm1D(1.0, 2.0);
  CHECK_NOTHROW(make_piecewise_linear(asym, {}, {-0.4}, {0.0}));
  CHECK_NOTHROW(make_piecewise_linear(asym, {}, {1.0}, {0.0}));
  CHECK_THROWS_AS(make_piecewise_linear(asym, {}, {-0.8}, {0.0}), std::invalid_argument);

  // Discontinuity and unsorted breakpoints are rejected.
  CHECK_THROWS_AS(make_piecewise_linear(line, {0.0}, {1.0, 1.0}, {0.0, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_piecewise_linear(line, {1.0, 1.0}, {0.5, 0.5, 0.5}, {0.0, 0.0, 0.0}),
                  std::invalid_argument);
  // Hosts other than the 1-D kinds are rejected.
  CHECK_THROWS_AS(make_piecewise_linear(Space(LpSpace(LpExponent::kTwo, 2)), {}, {0.5}, {0.0}),
                  std::invalid_argument);
}

TEST_CASE("admissible piecewise maps stay non-expansive on samples") {
  const Space asym = AsymNorm1D(1.0, 2.0);
  const Map zigzag = make_piecewise_linear(asym, {-1.0, 2.0}, {-0.5, 1.0, 0.25},
                                           {0.0, 1.5, 3.0});
  Sampler pairs(Box::cube(1, -10.0, 10.0), 20000, 77);
  const NonexpansiveReport report = check_nonexpansive(asym, zigzag, pairs, 1e-12);
  CHECK(report.max_excess <= 1e-12);
}

TEST_CASE("virtual pairs") {
  const VirtualPair vp = virtual_pair(Point{0.0}, Point{1.0}, Point{0.5}, Point{1.5});
  CHECK(vp.dimension() == 1);
  RealLineAbs line;
  CHECK(line.delta(vp.tx, vp.ty) == 1.0);
  CHECK_THROWS_AS(virtual_pair(Point{0.0}, Point{1.0, 2.0}, Point{0.0}, Point{0.0}),
                  std::invalid_argument);

  // Identity behavior on the pair keeps the base distance.
  const VirtualPair id_pair = virtual_pair(Point{0.0}, Point{1.0}, Point{0.0}, Point{1.0});
  CHECK(line.delta(id_pair.tx, id_pair.ty) == line.delta(id_pair.x, id_pair.y));

  const AsymNorm1D asym(1.0, 2.0);
  const VirtualPair swap = swap_pair(asym, 0.0, 1.0);
  CHECK(swap.tx == Point{1.0});
  CHECK(swap.ty == Point{-1.0});
}

}  // TEST_SUITE
