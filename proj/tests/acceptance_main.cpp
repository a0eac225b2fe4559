// Acceptance suite: every case checks one contract of the artifact at its
// stated tolerance and prints a single PASS/FAIL line.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "firmlab/experiment.hpp"
#include "firmlab/firmlab.hpp"

using namespace firmlab;
using nlohmann::json;

namespace {

const RealLineAbs kLine{};

struct Criterion {
  int index;
  const char* name;
  bool ok = true;

  ~Criterion() { std::printf("[%s] %2d  %s\n", ok ? "PASS" : "FAIL", index, name); }
};

#define ACHECK(criterion, cond)        \
  do {                                 \
    const bool checked_ = (cond);      \
    CHECK(checked_);                   \
    (criterion).ok &= checked_;        \
  } while (0)

std::vector<Point> linspace_points(double lo, double hi, int count) {
  std::vector<Point> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(Point{lo + (hi - lo) * static_cast<double>(i) / (count - 1)});
  }
  return out;
}

json strip_timestamp(json report) {
  report.erase("timestamp");
  return report;
}

}  // namespace

TEST_CASE("rate equalities for abs_plus_one") {
  Criterion crit{1, "rate equalities for abs_plus_one (N=10^4, K=5, within 1e-2)"};
  const auto report =
      check_rate_equalities(kLine, Map(AbsPlusOne{}), Point{-3.0}, 10000, 5, 1e-2);
  ACHECK(crit, report.pass);
  for (int k = 1; k <= 5; ++k) {
    ACHECK(crit, std::abs(report.rates.sigma[static_cast<std::size_t>(k - 1)].value / k - 1.0) <= 1e-2);
  }
  ACHECK(crit, std::abs(report.rates.sigma[0].value - 1.0) <= 1e-2);
  ACHECK(crit, std::abs(report.rates.rho.value - 1.0) <= 1e-2);
  ACHECK(crit, std::abs(report.rates.rho_bar.upper_bound - 1.0) <= 1e-2);
  // The escape-rate estimate follows 1 + 6/n from this base point.
  ACHECK(crit, report.rates.rho.value == doctest::Approx(1.0006).epsilon(1e-12));
}

TEST_CASE("rate equalities for reflect_exp, vanishing displacement, no fixed point") {
  Criterion crit{2, "rate equalities for reflect_exp; displacement <= 1e-15; fixed-point free"};
  const auto report =
      check_rate_equalities(kLine, Map(ReflectExp{}), Point{0.0}, 10000, 5, 1e-2);
  ACHECK(crit, report.pass);
  for (int k = 1; k <= 5; ++k) {
    ACHECK(crit, report.rates.sigma[static_cast<std::size_t>(k - 1)].value / k <= 1e-2);
  }
  ACHECK(crit, report.rates.rho.value <= 1e-2);
  ACHECK(crit, report.rates.rho_bar.upper_bound <= 1e-2);

  const DisplacementBound deep =
      min_displacement_search(kLine, Map(ReflectExp{}), Box::cube(1, 0.0, 40.0), 4096);
  ACHECK(crit, deep.upper_bound <= 1e-15);

  const Map refl = Map(ReflectExp{});
  Sampler probes(Box::cube(1, -10.0, 20.0), 10000, 2026);
  bool displacement_positive = true;
  for (int i = 0; i < probes.count; ++i) {
    const Point w = probes.point(i);
    if (!(kLine.delta(w, refl.apply(w)) > 0.0)) displacement_positive = false;
  }
  ACHECK(crit, displacement_positive);
}

TEST_CASE("firmness certificates for reflect_exp") {
  Criterion crit{3, "certificate (0,0,0,1/2) within 1e-12; search finds t >= 1/2 - 1/64"};
  Sampler pairs(Box::cube(1, -10.0, 10.0), 20000, 31);
  const auto direct = check_firmness_inequality(kLine, Map(ReflectExp{}),
                                                Coefficients::from_constants(0, 0, 0, 0.5),
                                                pairs, 1e-12);
  ACHECK(crit, pairs.pair_count() == 10000);
  ACHECK(crit, direct.max_violation <= 1e-12);

  const auto lp = certify_firm_constant(kLine, Map(ReflectExp{}), pairs);
  const auto grid = certify_firm_constant_grid(kLine, Map(ReflectExp{}), pairs);
  ACHECK(crit, lp.feasible);
  ACHECK(crit, lp.t_value >= 0.5 - 1.0 / 64.0);
  ACHECK(crit, grid.feasible == lp.feasible);
  ACHECK(crit, grid.t_value <= lp.t_value + 1.0 / 64.0 + 1e-9);
}

TEST_CASE("abs_plus_one is not firmly non-expansive at (-1, 0)") {
  Criterion crit{4, "firmly-nonexpansive inequality fails at (-1,0) for every lambda in the grid"};
  const Map abs1 = Map(AbsPlusOne{});
  for (int i = 1; i <= 19; ++i) {
    const double lambda = 0.05 * i;
    const double violation =
        firmly_nonexpansive_violation(kLine, abs1, Point{-1.0}, Point{0.0}, lambda);
    ACHECK(crit, violation > 1e-9);
  }
}

TEST_CASE("tau vanishes on the swap configuration") {
  Criterion crit{5, "tau = 0 within 1e-12 on 100 random swap configurations"};
  Sampler params(Box::cube(2, 0.1, 10.0), 100, 51);
  Sampler xs(Box::cube(1, -10.0, 10.0), 100, 52);
  Sampler offsets(Box::cube(1, 0.1, 5.0), 100, 53);
  for (int i = 0; i < 100; ++i) {
    const Point ab = params.point(i);
    const AsymNorm1D asym(ab[0], ab[1]);
    const double x = xs.point(i)[0];
    const double sign = detail::keyed_unit(54, static_cast<std::uint64_t>(i)) < 0.5 ? -1.0 : 1.0;
    const double y = x + sign * offsets.point(i)[0];
    const TauRecord rec = tau(asym, swap_pair(asym, x, y));
    ACHECK(crit, rec.tau.has_value());
    if (rec.tau.has_value()) {
      ACHECK(crit, std::abs(*rec.tau) <= 1e-12);
    }
  }
}

TEST_CASE("reflection point postconditions") {
  Criterion crit{6, "||z - y|| = ||y - x|| within 1e-12 and (y-x)(z-y) < 0 on 10^4 draws"};
  Sampler params(Box::cube(2, 0.1, 10.0), 10000, 61);
  Sampler xs(Box::cube(1, -10.0, 10.0), 10000, 62);
  Sampler offsets(Box::cube(1, 0.05, 5.0), 10000, 63);
  for (int i = 0; i < 10000; ++i) {
    const Point ab = params.point(i);
    const AsymNorm1D asym(ab[0], ab[1]);
    const double x = xs.point(i)[0];
    const double sign = detail::keyed_unit(64, static_cast<std::uint64_t>(i)) < 0.5 ? -1.0 : 1.0;
    const double y = x + sign * offsets.point(i)[0];
    const double z = asym_reflection(asym, x, y);
    const double target = asym.norm1(y - x);
    if (std::abs(asym.norm1(z - y) - target) > 1e-12 * std::max(1.0, target)) crit.ok = false;
    if (!((y - x) * (z - y) < 0.0)) crit.ok = false;
  }
  CHECK(crit.ok);
}

TEST_CASE("unconditional relations on every built-in non-expansive map") {
  Criterion crit{7, "chain bound (1e-9), step monotonicity (1e-12), displacement >= rate - 1e-6"};
  struct Instance {
    Map map;
    Point x0;
    Box region;
  };
  const std::vector<Instance> instances = {
      {Map(AbsPlusOne{}), Point{0.0}, Box::cube(1, -10.0, 10.0)},
      {Map(ReflectExp{}), Point{0.0}, Box::cube(1, -5.0, 5.0)},
      {Map(Translation(Point{1.0})), Point{0.0}, Box::cube(1, -10.0, 10.0)},
      {Map(AffineMap::scaling_1d(0.5)), Point{0.0}, Box::cube(1, -1.0, 1.0)},
      {Map(AffineMap({-1.0}, Point{0.0})), Point{1.0}, Box::cube(1, -10.0, 10.0)},
      {krasnoselskii_average(Map(AbsPlusOne{}), 0.5), Point{0.0}, Box::cube(1, -10.0, 10.0)},
      {make_piecewise_linear(Space(RealLineAbs{}), {1.8}, {0.5, 1.0}, {1.0, 0.1}), Point{4.0},
       Box(std::vector<double>{2.0}, std::vector<double>{10.0})},
  };
  for (const auto& inst : instances) {
    const OrbitTrace trace = iterate_orbit(kLine, inst.map, inst.x0, 10000, 5);
    ACHECK(crit, max_step_table_increase(trace) <= 1e-12);
    const double sigma1 = sigma_estimate(trace, 1).value;
    for (int k = 1; k <= 5; ++k) {
      ACHECK(crit, sigma_estimate(trace, k).value / k <= sigma1 + 1e-9);
    }
    const double rho = rho_estimate(trace).value;
    const DisplacementBound bound = min_displacement_search(kLine, inst.map, inst.region, 4096);
    ACHECK(crit, bound.upper_bound >= rho - 1e-6);
  }
  const LpSpace plane(LpExponent::kTwo, 2);
  const Map slide = Map(Translation(Point{0.6, -0.8}));
  const OrbitTrace trace = iterate_orbit(plane, slide, Point{0.0, 0.0}, 10000, 5);
  ACHECK(crit, max_step_table_increase(trace) <= 1e-12);
  const double sigma1 = sigma_estimate(trace, 1).value;
  for (int k = 1; k <= 5; ++k) {
    ACHECK(crit, sigma_estimate(trace, k).value / k <= sigma1 + 1e-9);
  }
  const DisplacementBound bound =
      min_displacement_search(plane, slide, Box::cube(2, -5.0, 5.0), 4096);
  ACHECK(crit, bound.upper_bound >= rho_estimate(trace).value - 1e-6);
}

TEST_CASE("averaging identity and coefficient bounds") {
  Criterion crit{8, "q + 2t = 1 within 1e-15 for 1000 lambdas; bounds hold"};
  Sampler pairs(Box::cube(1, -10.0, 10.0), 200, 81);
  for (int i = 1; i <= 1000; ++i) {
    const double lambda = static_cast<double>(i) / 1001.0;
    const Coefficients c = averaging_coefficients(lambda);
    const auto& v = *c.constants;
    if (std::abs(v[0] + 2.0 * v[3] - 1.0) > 1e-15) crit.ok = false;
    if (v[1] != 0.0 || v[2] != 0.0) crit.ok = false;
    const auto bounds = check_coefficient_bounds(c, pairs);
    if (!bounds.passed()) crit.ok = false;
  }
  CHECK(crit.ok);
}

TEST_CASE("metric functional laws on the line and in rn_lp(2,3)") {
  Criterion crit{9, "h_w(x0) = 0, 1-Lipschitz, and the two-sided distance bounds on 10^4 triples"};
  {
    Sampler samples(Box::cube(1, -10.0, 10.0), 30000, 91);
    bool ok = true;
    for (int i = 0; i < samples.triple_count(); ++i) {
      const auto [w, x, y] = samples.triple(i);
      const auto h = phi(kLine, Point{0.0}, w);
      if (h.evaluate(Point{0.0}) != 0.0) ok = false;
      if (std::abs(h.evaluate(x) - h.evaluate(y)) > kLine.delta(x, y) + 1e-12) ok = false;
      if (h.evaluate(x) < -kLine.delta(Point{0.0}, x)) ok = false;
      if (h.evaluate(x) > kLine.delta(x, Point{0.0}) + 1e-12) ok = false;
    }
    ACHECK(crit, samples.triple_count() == 10000);
    ACHECK(crit, ok);
  }
  {
    const LpSpace space3(LpExponent::kTwo, 3);
    const Point origin = Point::zeros(3);
    Sampler samples(Box::cube(3, -5.0, 5.0), 30000, 92);
    bool ok = true;
    for (int i = 0; i < samples.triple_count(); ++i) {
      const auto [w, x, y] = samples.triple(i);
      const auto h = phi(space3, origin, w);
      if (h.evaluate(origin) != 0.0) ok = false;
      if (std::abs(h.evaluate(x) - h.evaluate(y)) > space3.delta(x, y) + 1e-12) ok = false;
      if (h.evaluate(x) < -space3.delta(origin, x)) ok = false;
      if (h.evaluate(x) > space3.delta(x, origin) + 1e-12) ok = false;
    }
    ACHECK(crit, ok);
  }
}

TEST_CASE("monotone descent and divergence for reflect_exp") {
  Criterion crit{10, "zero descent violations at slack 0 for 20 starts; h(T^N x) <= -5 at N=10^4"};
  const Map refl = Map(ReflectExp{});
  const auto h = orbit_limit_functional(kLine, refl, Point{0.0}, {25000, 50000, 100000},
                                        linspace_points(-10.0, 10.0, 41));
  ACHECK(crit, h.converged());

  const OrbitTrace trace = iterate_orbit(kLine, refl, Point{0.0}, 10000, 1);
  ACHECK(crit, rho_estimate(trace).value <= 1e-2);  // the zero-rate regime

  for (const Point& start : linspace_points(-5.0, 5.0, 20)) {
    const DescentReport short_run = check_monotone_descent(refl, h, start, 1000, 0.0, 1e-9);
    ACHECK(crit, short_run.status == DescentStatus::kPass);
    ACHECK(crit, short_run.violations == 0);
    const DescentReport deep = check_monotone_descent(refl, h, start, 10000, 0.0, 1e-9, 5.0);
    ACHECK(crit, deep.depth_ok);
    ACHECK(crit, deep.final_value <= -5.0);
  }
}

TEST_CASE("escape bounds along orbits") {
  Criterion crit{11, "translation: h(T^n 0) = -n exactly; abs_plus_one: <= -n + 1e-9, |h + n| <= 2"};
  const Map slide = Map(Translation(Point{1.0}));
  const auto h_slide = orbit_limit_functional(kLine, slide, Point{0.0}, {1500, 1750, 2000},
                                              {Point{-1.0}, Point{2.0}});
  ACHECK(crit, h_slide.converged());
  const OrbitTrace slide_trace = iterate_orbit(kLine, slide, Point{0.0}, 1000, 1);
  for (int n = 0; n <= 1000; ++n) {
    if (h_slide.evaluate(slide_trace.iterates[static_cast<std::size_t>(n)]) != -static_cast<double>(n)) {
      crit.ok = false;
    }
  }
  CHECK(crit.ok);

  const Map abs1 = Map(AbsPlusOne{});
  const auto h_abs = orbit_limit_functional(kLine, abs1, Point{0.0}, {1500, 1750, 2000},
                                            {Point{-1.0}, Point{2.0}});
  const OrbitTrace abs_trace = iterate_orbit(kLine, abs1, Point{0.0}, 1000, 1);
  bool bound_ok = true;
  bool tight_ok = true;
  for (int n = 0; n <= 1000; ++n) {
    const double value = h_abs.evaluate(abs_trace.iterates[static_cast<std::size_t>(n)]);
    if (value > -static_cast<double>(n) + 1e-9) bound_ok = false;
    if (std::abs(value + n) > 2.0) tight_ok = false;
  }
  ACHECK(crit, bound_ok);
  ACHECK(crit, tight_ok);
}

TEST_CASE("reports are deterministic for a fixed seed and any worker count") {
  Criterion crit{12, "byte-identical reports across reruns and --threads 1 vs 4"};
  using namespace firmlab::experiment;

  json thm;
  thm["space"] = {{"kind", "real_line_abs"}};
  thm["map"] = {{"kind", "reflect_exp"}};
  thm["task"] = "theorem1";
  thm["params"] = {{"N", 10000}, {"K", 5}, {"tol", 1e-2}, {"x0", {0.0}}, {"seed", 7}};

  json scan;
  scan["space"] = {{"kind", "real_line_abs"}};
  scan["map"] = {{"kind", "abs_plus_one"}};
  scan["task"] = "tau-scan";
  scan["params"] = {{"seed", 7}, {"count", 20000}};

  RunOverrides one;
  one.threads = 1;
  RunOverrides four;
  four.threads = 4;

  for (const json& cfg : {thm, scan}) {
    const std::string a = strip_timestamp(run_experiment_json(cfg, one).report).dump();
    const std::string b = strip_timestamp(run_experiment_json(cfg, one).report).dump();
    const std::string c = strip_timestamp(run_experiment_json(cfg, four).report).dump();
    ACHECK(crit, a == b);
    ACHECK(crit, a == c);
  }
  set_max_threads(0);
}
