#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "firmlab/core.hpp"
#include "firmlab/mappings.hpp"
#include "firmlab/spaces.hpp"

using namespace firmlab;

namespace {

// Deliberately broken test-only kind: delta(x, y) = (y - x)^2 fails the
// triangle inequality on the line.
struct SquaredLine {
  int dimension() const { return 1; }
  bool symmetric() const { return true; }
  double delta(const Point& x, const Point& y) const {
    const double v = y[0] - x[0];
    return v * v;
  }
};

}  // namespace

TEST_SUITE("core") {

TEST_CASE("sampler determinism and block structure") {
  Sampler a(Box::cube(2, -1.0, 3.0), 60, 42);
  Sampler b(Box::cube(2, -1.0, 3.0), 60, 42);
  for (int i = 0; i < a.count; ++i) {
    CHECK(a.point(i) == b.point(i));
    CHECK(a.region.contains(a.point(i)));
  }
  CHECK(a.pair_count() == 30);
  CHECK(a.triple_count() == 20);
  CHECK(a.pair(3).first == a.point(6));
  CHECK(a.pair(3).second == a.point(7));
  CHECK(a.triple(2)[1] == a.point(7));

  Sampler c(Box::cube(2, -1.0, 3.0), 60, 43);
  bool any_different = false;
  for (int i = 0; i < c.count; ++i) {
    if (!(c.point(i) == a.point(i))) any_different = true;
  }
  CHECK(any_different);

  Sampler grid(Box::cube(2, -1.0, 3.0), 60, 0, SampleScheme::kLowDiscrepancyGrid);
  Sampler grid2(Box::cube(2, -1.0, 3.0), 60, 999, SampleScheme::kLowDiscrepancyGrid);
  for (int i = 0; i < grid.count; ++i) {
    CHECK(grid.region.contains(grid.point(i)));
    CHECK(grid.point(i) == grid2.point(i));  // the grid scheme ignores the seed
  }
}

TEST_CASE("axiom check passes on the built-in kinds") {
  Sampler sampler(Box::cube(1, -10.0, 10.0), 3000, 7);
  for (const Space& space :
       {Space(RealLineAbs{}), Space(AsymNorm1D(1.0, 2.0)), Space(AsymNorm1D(3.0, 0.4))}) {
    const AxiomReport report = check_weak_metric_axioms(space, sampler, 1e-12);
    CHECK(report.passed());
    CHECK(report.samples_checked == 3000);
    CHECK(report.triples_checked == 1000);
    CHECK(report.max_self_distance == 0.0);
    CHECK(report.worst_triangle_slack >= -1e-12);
  }
  Sampler plane(Box::cube(3, -5.0, 5.0), 3000, 7);
  const AxiomReport lp = check_weak_metric_axioms(LpSpace(LpExponent::kTwo, 3), plane, 1e-12);
  CHECK(lp.passed());
}

TEST_CASE("axiom check reports triangle violations of a broken kind") {
  SquaredLine broken;
  // Hand check: the triple (0, 1, 2) has slack 1 + 1 - 4 = -2.
  Sampler sampler(Box::cube(1, 0.0, 2.0), 3000, 13);
  const AxiomReport report = check_weak_metric_axioms(broken, sampler, 1e-9);
  CHECK_FALSE(report.passed());
  CHECK(report.worst_triangle_slack < 0.0);
  bool saw_triangle = false;
  for (const auto& v : report.violations) {
    if (v.kind == AxiomViolation::Kind::kTriangle) {
      saw_triangle = true;
      CHECK(v.points.size() == 3);
      CHECK(v.magnitude > 1e-9);
    }
  }
  CHECK(saw_triangle);
}

TEST_CASE("symmetric kinds are symmetric on sampled pairs") {
  Sampler line_pairs(Box::cube(1, -10.0, 10.0), 2000, 23);
  for (const Space& space : {Space(RealLineAbs{}), Space(AsymNorm1D(2.0, 2.0)),
                             Space(LpSpace(LpExponent::kOne, 1))}) {
    REQUIRE(space.symmetric());
    for (int i = 0; i < line_pairs.pair_count(); ++i) {
      const auto [x, y] = line_pairs.pair(i);
      CHECK(std::abs(space.delta(x, y) - space.delta(y, x)) <= 1e-12);
    }
  }
  Sampler plane_pairs(Box::cube(2, -5.0, 5.0), 2000, 24);
  const Space diamond = PolyhedralAsymNorm::create({{1, 1}, {1, -1}, {-1, 1}, {-1, -1}});
  REQUIRE(diamond.symmetric());
  for (int i = 0; i < plane_pairs.pair_count(); ++i) {
    const auto [x, y] = plane_pairs.pair(i);
    CHECK(std::abs(diamond.delta(x, y) - diamond.delta(y, x)) <= 1e-12);
  }
}

TEST_CASE("self-distance vanishes exactly on every built-in kind") {
  Sampler line_points(Box::cube(1, -10.0, 10.0), 500, 25);
  for (const Space& space : {Space(RealLineAbs{}), Space(AsymNorm1D(1.0, 2.0)),
                             Space(LpSpace(LpExponent::kInf, 1))}) {
    for (int i = 0; i < line_points.count; ++i) {
      const Point p = line_points.point(i);
      CHECK(space.delta(p, p) == 0.0);
    }
  }
  Sampler plane_points(Box::cube(2, -5.0, 5.0), 500, 26);
  const Space skew = PolyhedralAsymNorm::create({{2, 0}, {-1, 0}, {0, 1}, {0, -1}});
  const Space lp2 = LpSpace(LpExponent::kTwo, 2);
  for (int i = 0; i < plane_points.count; ++i) {
    const Point p = plane_points.point(i);
    CHECK(skew.delta(p, p) == 0.0);
    CHECK(lp2.delta(p, p) == 0.0);
  }
}

TEST_CASE("axiom check flags an empty sample") {
  Sampler empty(Box::cube(1, 0.0, 1.0), 0, 1);
  const AxiomReport report = check_weak_metric_axioms(RealLineAbs{}, empty, 1e-12);
  CHECK(report.passed());
  CHECK(report.empty_sample);
  CHECK(report.samples_checked == 0);
}

TEST_CASE("non-expansiveness scan agrees with a brute-force oracle") {
  RealLineAbs line;
  const Map map = Map(AbsPlusOne{});
  Sampler sampler(Box::cube(1, -10.0, 10.0), 20000, 5);

  double oracle = -1e300;
  for (int i = 0; i < sampler.pair_count(); ++i) {
    const auto [x, y] = sampler.pair(i);
    oracle = std::max(oracle, line.delta(map.apply(x), map.apply(y)) - line.delta(x, y));
  }

  const NonexpansiveReport report = check_nonexpansive(line, map, sampler, 1e-12);
  CHECK(report.pairs_checked == 10000);
  CHECK(report.max_excess == oracle);
  CHECK(std::abs(report.max_excess) <= 1e-12);
  CHECK(report.within_tol());
}

TEST_CASE("reflect_exp is non-expansive on samples") {
  RealLineAbs line;
  const Map map = Map(ReflectExp{});
  Sampler sampler(Box::cube(1, -10.0, 10.0), 20000, 6);
  const NonexpansiveReport report = check_nonexpansive(line, map, sampler, 1e-12);
  CHECK(report.max_excess <= 1e-12);
}

TEST_CASE("an expansive map is detected") {
  RealLineAbs line;
  const Map doubling = Map(AffineMap::scaling_1d(2.0));
  // The pair (0, 1) already has excess 1.
  CHECK(line.delta(doubling.apply(Point{0.0}), doubling.apply(Point{1.0})) -
            line.delta(Point{0.0}, Point{1.0}) ==
        1.0);
  Sampler sampler(Box::cube(1, -10.0, 10.0), 2000, 6);
  const NonexpansiveReport report = check_nonexpansive(line, doubling, sampler, 1e-12);
  CHECK(report.max_excess > 0.0);
  CHECK_FALSE(report.within_tol());
  CHECK(report.worst_pair.has_value());
}

TEST_CASE("scan results do not depend on the worker count") {
  RealLineAbs line;
  const Map map = Map(ReflectExp{});
  Sampler sampler(Box::cube(1, -10.0, 10.0), 20000, 17);

  set_max_threads(1);
  const NonexpansiveReport serial = check_nonexpansive(line, map, sampler, 1e-12);
  const AxiomReport axioms_serial = check_weak_metric_axioms(line, sampler, 1e-12);
  set_max_threads(4);
  const NonexpansiveReport threaded = check_nonexpansive(line, map, sampler, 1e-12);
  const AxiomReport axioms_threaded = check_weak_metric_axioms(line, sampler, 1e-12);
  set_max_threads(0);

  CHECK(serial.max_excess == threaded.max_excess);
  CHECK(serial.worst_pair == threaded.worst_pair);
  CHECK(axioms_serial.worst_triangle_slack == axioms_threaded.worst_triangle_slack);
  CHECK(axioms_serial.max_self_distance == axioms_threaded.max_self_distance);
}

TEST_CASE("delta and apply front doors validate dimensions") {
  const Space plane = LpSpace(LpExponent::kTwo, 2);
  CHECK_THROWS_AS(delta(plane, Point{0.0}, Point{0.0, 0.0}), std::invalid_argument);
  const Map shift = Map(Translation(Point{1.0, 1.0}));
  CHECK_THROWS_AS(apply(shift, Point{0.0}), std::invalid_argument);
  CHECK(apply(shift, Point{0.0, 0.0}) == Point{1.0, 1.0});
}

}  // TEST_SUITE
