#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "firmlab/firmlab.hpp"

namespace firmlab::experiment {

using nlohmann::json;

/// Configuration problem (malformed file, unknown key, bad value). Maps to
/// exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_keys(const json& obj, const std::string& ctx,
                       std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(ctx + ": unknown key \"" + key + "\"");
  }
}

inline const json& require_key(const json& obj, const std::string& ctx, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(ctx + ": missing required key \"" + key + "\"");
  return *it;
}

inline double as_number(const json& v, const std::string& ctx) {
  if (!v.is_number()) throw ConfigError(ctx + ": expected a number");
  return v.get<double>();
}

inline int as_int(const json& v, const std::string& ctx) {
  if (!v.is_number_integer()) throw ConfigError(ctx + ": expected an integer");
  return v.get<int>();
}

inline std::uint64_t as_seed(const json& v, const std::string& ctx) {
  if (!v.is_number_unsigned() && !v.is_number_integer()) {
    throw ConfigError(ctx + ": expected an integer seed");
  }
  const auto raw = v.get<std::int64_t>();
  if (raw < 0) throw ConfigError(ctx + ": seed must be non-negative");
  return static_cast<std::uint64_t>(raw);
}

inline std::string as_string(const json& v, const std::string& ctx) {
  if (!v.is_string()) throw ConfigError(ctx + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> as_vector(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty()) throw ConfigError(ctx + ": expected a non-empty array");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, ctx));
  return out;
}

inline Point as_point(const json& v, const std::string& ctx) {
  return Point(as_vector(v, ctx));
}

inline std::vector<Point> as_points(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw ConfigError(ctx + ": expected an array of points");
  std::vector<Point> out;
  for (const auto& e : v) out.push_back(as_point(e, ctx));
  return out;
}

inline json point_to_json(const Point& p) {
  json arr = json::array();
  for (double c : p.coords) arr.push_back(c);
  return arr;
}

inline json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline json pair_to_json(const std::pair<Point, Point>& pr) {
  return json::array({point_to_json(pr.first), point_to_json(pr.second)});
}

}  // namespace detail

inline Space parse_space(const json& node) {
  using detail::as_int;
  using detail::as_number;
  if (!node.is_object()) throw ConfigError("space: expected an object");
  const std::string kind = detail::as_string(detail::require_key(node, "space", "kind"), "space.kind");
  if (kind == "real_line_abs") {
    detail::check_keys(node, "space(real_line_abs)", {"kind"});
    return Space(RealLineAbs{});
  }
  if (kind == "asym_r") {
    detail::check_keys(node, "space(asym_r)", {"kind", "alpha", "beta"});
    const double alpha = as_number(detail::require_key(node, "space(asym_r)", "alpha"), "space.alpha");
    const double beta = as_number(detail::require_key(node, "space(asym_r)", "beta"), "space.beta");
    try {
      return Space(AsymNorm1D(alpha, beta));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("space(asym_r): ") + e.what());
    }
  }
  if (kind == "rn_lp") {
    detail::check_keys(node, "space(rn_lp)", {"kind", "p", "d"});
    const json& p = detail::require_key(node, "space(rn_lp)", "p");
    LpExponent exponent;
    if (p.is_string() && p.get<std::string>() == "inf") {
      exponent = LpExponent::kInf;
    } else if (p.is_number_integer() && p.get<int>() == 1) {
      exponent = LpExponent::kOne;
    } else if (p.is_number_integer() && p.get<int>() == 2) {
      exponent = LpExponent::kTwo;
    } else {
      throw ConfigError("space(rn_lp): p must be 1, 2 or \"inf\"");
    }
    const int d = as_int(detail::require_key(node, "space(rn_lp)", "d"), "space.d");
    if (d < 1) throw ConfigError("space(rn_lp): d must be >= 1");
    return Space(LpSpace(exponent, d));
  }
  if (kind == "poly_asym") {
    detail::check_keys(node, "space(poly_asym)", {"kind", "generators"});
    const json& gens = detail::require_key(node, "space(poly_asym)", "generators");
    if (!gens.is_array() || gens.empty()) {
      throw ConfigError("space(poly_asym): generators must be a non-empty array");
    }
    std::vector<std::vector<double>> rows;
    for (const auto& g : gens) rows.push_back(detail::as_vector(g, "space.generators"));
    try {
      return Space(PolyhedralAsymNorm::create(std::move(rows)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("space(poly_asym): ") + e.what());
    }
  }
  throw ConfigError("space: unknown kind \"" + kind + "\"");
}

inline Map parse_map(const json& node, const Space& space) {
  if (!node.is_object()) throw ConfigError("map: expected an object");
  const std::string kind = detail::as_string(detail::require_key(node, "map", "kind"), "map.kind");
  try {
    if (kind == "abs_plus_one") {
      detail::check_keys(node, "map(abs_plus_one)", {"kind"});
      return Map(AbsPlusOne{});
    }
    if (kind == "reflect_exp") {
      detail::check_keys(node, "map(reflect_exp)", {"kind"});
      return Map(ReflectExp{});
    }
    if (kind == "translation") {
      detail::check_keys(node, "map(translation)", {"kind", "c"});
      return Map(Translation(detail::as_point(detail::require_key(node, "map(translation)", "c"), "map.c")));
    }
    if (kind == "affine") {
      detail::check_keys(node, "map(affine)", {"kind", "matrix", "offset"});
      const json& m = detail::require_key(node, "map(affine)", "matrix");
      if (!m.is_array() || m.empty()) throw ConfigError("map(affine): matrix must be an array of rows");
      std::vector<double> flat;
      for (const auto& row : m) {
        for (double v : detail::as_vector(row, "map.matrix")) flat.push_back(v);
      }
      return Map(AffineMap(std::move(flat),
                           detail::as_point(detail::require_key(node, "map(affine)", "offset"), "map.offset")));
    }
    if (kind == "piecewise_linear_1d") {
      detail::check_keys(node, "map(piecewise_linear_1d)",
                         {"kind", "breakpoints", "slopes", "intercepts"});
      const json& bp = detail::require_key(node, "map(piecewise_linear_1d)", "breakpoints");
      std::vector<double> breakpoints;
      if (!bp.is_array()) throw ConfigError("map.breakpoints: expected an array");
      for (const auto& b : bp) breakpoints.push_back(detail::as_number(b, "map.breakpoints"));
      return make_piecewise_linear(
          space, std::move(breakpoints),
          detail::as_vector(detail::require_key(node, "map(piecewise_linear_1d)", "slopes"), "map.slopes"),
          detail::as_vector(detail::require_key(node, "map(piecewise_linear_1d)", "intercepts"),
                            "map.intercepts"));
    }
    if (kind == "km_average") {
      detail::check_keys(node, "map(km_average)", {"kind", "lambda", "inner"});
      const double lambda =
          detail::as_number(detail::require_key(node, "map(km_average)", "lambda"), "map.lambda");
      Map inner = parse_map(detail::require_key(node, "map(km_average)", "inner"), space);
      return krasnoselskii_average(std::move(inner), lambda);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("map(" + kind + "): " + e.what());
  }
  throw ConfigError("map: unknown kind \"" + kind + "\"");
}

inline VirtualPair parse_virtual_pair(const json& node) {
  detail::check_keys(node, "map(virtual_pair)", {"kind", "x", "y", "tx", "ty"});
  try {
    return VirtualPair(detail::as_point(detail::require_key(node, "map(virtual_pair)", "x"), "map.x"),
                       detail::as_point(detail::require_key(node, "map(virtual_pair)", "y"), "map.y"),
                       detail::as_point(detail::require_key(node, "map(virtual_pair)", "tx"), "map.tx"),
                       detail::as_point(detail::require_key(node, "map(virtual_pair)", "ty"), "map.ty"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("map(virtual_pair): ") + e.what());
  }
}

inline json space_to_json(const Space& space) {
  json out;
  out["kind"] = std::string(space.kind_name());
  if (const auto* asym = space.as<AsymNorm1D>()) {
    out["alpha"] = asym->alpha;
    out["beta"] = asym->beta;
  } else if (const auto* lp = space.as<LpSpace>()) {
    out["d"] = lp->dim;
    switch (lp->p) {
      case LpExponent::kOne: out["p"] = 1; break;
      case LpExponent::kTwo: out["p"] = 2; break;
      case LpExponent::kInf: out["p"] = "inf"; break;
    }
  } else if (const auto* poly = space.as<PolyhedralAsymNorm>()) {
    json gens = json::array();
    for (const auto& g : poly->generators()) {
      json row = json::array();
      for (double v : g) row.push_back(v);
      gens.push_back(row);
    }
    out["generators"] = gens;
  }
  return out;
}

inline json map_to_json(const Map& map) {
  json out;
  out["kind"] = std::string(map.kind_name());
  if (const auto* shift = map.as<Translation>()) {
    out["c"] = detail::point_to_json(shift->offset);
  } else if (const auto* affine = map.as<AffineMap>()) {
    const int d = affine->dimension();
    json rows = json::array();
    for (int i = 0; i < d; ++i) {
      json row = json::array();
      for (int j = 0; j < d; ++j) row.push_back(affine->matrix[static_cast<std::size_t>(i * d + j)]);
      rows.push_back(row);
    }
    out["matrix"] = rows;
    out["offset"] = detail::point_to_json(affine->offset);
  } else if (const auto* pwl = map.as<PiecewiseLinear1D>()) {
    out["breakpoints"] = pwl->breakpoints;
    out["slopes"] = pwl->slopes;
    out["intercepts"] = pwl->intercepts;
  } else if (const auto* km = map.as<KrasnoselskiiAverage>()) {
    out["lambda"] = km->lambda;
    out["inner"] = map_to_json(*km->inner);
  }
  return out;
}

inline json virtual_pair_to_json(const VirtualPair& vp) {
  json out;
  out["kind"] = "virtual_pair";
  out["x"] = detail::point_to_json(vp.x);
  out["y"] = detail::point_to_json(vp.y);
  out["tx"] = detail::point_to_json(vp.tx);
  out["ty"] = detail::point_to_json(vp.ty);
  return out;
}

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {"axioms",   "nonexp",   "firm-cert",
                                                 "tau-scan", "prop-scan", "rates",
                                                 "theorem1", "functional", "descent"};
  return names;
}

struct ParsedConfig {
  Space space = Space(RealLineAbs{});
  std::optional<Map> map;
  std::optional<VirtualPair> vpair;
  std::string task;

  std::uint64_t seed = 42;
  int count = 20000;
  SampleScheme scheme = SampleScheme::kUniformRandom;
  Box region;
  double tol = 0.0;

  // task-specific
  double t_min = 1e-3;
  std::string method = "lp";
  std::optional<std::array<double, 4>> coeffs;
  std::optional<std::vector<double>> lambda_grid;
  double eps_den = 1e-9;
  double threshold = 1e-3;
  double epsilon = 1e-3;
  Point x0;
  int n_steps = 10000;
  int max_k = 5;
  int budget = 4096;
  std::optional<Box> search_region;
  std::vector<long> horizons;
  std::vector<Point> probes;
  double probe_tol = 1e-6;
  std::vector<Point> starts;
  double slack = 0.0;
  std::optional<double> depth;

  std::optional<std::string> out_json;
  std::optional<std::string> out_csv;

  json echo;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

namespace detail {

inline double default_tol_for(const std::string& task) {
  if (task == "axioms" || task == "nonexp") return 1e-12;
  if (task == "firm-cert") return 1e-9;
  if (task == "tau-scan") return 1e-9;
  if (task == "theorem1" || task == "functional") return 1e-2;
  if (task == "descent") return 1e-9;
  return 1e-6;
}

inline Box parse_region(const json& v, int dim) {
  check_keys(v, "params.region", {"lo", "hi"});
  std::vector<double> lo = as_vector(require_key(v, "params.region", "lo"), "params.region.lo");
  std::vector<double> hi = as_vector(require_key(v, "params.region", "hi"), "params.region.hi");
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim) {
    throw ConfigError("params.region: bounds must match the space dimension");
  }
  try {
    return Box(std::move(lo), std::move(hi));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("params.region: ") + e.what());
  }
}

inline json box_to_json(const Box& box) {
  json out;
  out["lo"] = box.lo;
  out["hi"] = box.hi;
  return out;
}

}  // namespace detail

inline ParsedConfig parse_config(const json& root, const RunOverrides& overrides = {}) {
  if (!root.is_object()) throw ConfigError("config: expected a JSON object");
  detail::check_keys(root, "config", {"space", "map", "task", "params", "output"});

  ParsedConfig cfg;
  cfg.space = parse_space(detail::require_key(root, "config", "space"));
  cfg.task = detail::as_string(detail::require_key(root, "config", "task"), "task");
  if (std::find(task_names().begin(), task_names().end(), cfg.task) == task_names().end()) {
    throw ConfigError("task: unknown task \"" + cfg.task + "\"");
  }

  const json& map_spec = detail::require_key(root, "config", "map");
  const std::string map_kind =
      detail::as_string(detail::require_key(map_spec, "map", "kind"), "map.kind");
  if (map_kind == "virtual_pair") {
    if (cfg.task != "tau-scan" && cfg.task != "prop-scan" && cfg.task != "firm-cert") {
      throw ConfigError("map(virtual_pair): only usable with tau-scan, prop-scan or firm-cert");
    }
    cfg.vpair = parse_virtual_pair(map_spec);
    if (cfg.vpair->dimension() != cfg.space.dimension()) {
      throw ConfigError("map(virtual_pair): dimension mismatch with the space");
    }
  } else {
    cfg.map = parse_map(map_spec, cfg.space);
    if (cfg.map->dimension() != cfg.space.dimension()) {
      throw ConfigError("map: dimension mismatch with the space");
    }
  }

  const int dim = cfg.space.dimension();
  cfg.region = Box::cube(dim, -10.0, 10.0);
  cfg.x0 = Point::zeros(dim);
  cfg.tol = detail::default_tol_for(cfg.task);

  const json params = root.contains("params") ? root["params"] : json::object();
  if (!params.is_object()) throw ConfigError("params: expected an object");
  detail::check_keys(params, "params",
                     {"seed", "count", "scheme", "region", "tol", "t_min", "method", "coeffs",
                      "lambda_grid", "eps_den", "threshold", "epsilon", "x0", "N", "K", "budget",
                      "search_region", "horizons", "probes", "probe_tol", "starts", "slack",
                      "depth"});

  if (params.contains("seed")) cfg.seed = detail::as_seed(params["seed"], "params.seed");
  if (overrides.seed.has_value()) cfg.seed = *overrides.seed;
  if (params.contains("count")) {
    cfg.count = detail::as_int(params["count"], "params.count");
    if (cfg.count < 0) throw ConfigError("params.count: must be >= 0");
  }
  if (params.contains("scheme")) {
    const std::string scheme = detail::as_string(params["scheme"], "params.scheme");
    if (scheme == "uniform-random") {
      cfg.scheme = SampleScheme::kUniformRandom;
    } else if (scheme == "low-discrepancy-grid") {
      cfg.scheme = SampleScheme::kLowDiscrepancyGrid;
    } else {
      throw ConfigError("params.scheme: expected \"uniform-random\" or \"low-discrepancy-grid\"");
    }
  }
  if (params.contains("region")) cfg.region = detail::parse_region(params["region"], dim);
  if (params.contains("tol")) {
    cfg.tol = detail::as_number(params["tol"], "params.tol");
    if (cfg.tol < 0.0) throw ConfigError("params.tol: must be >= 0");
  }
  if (params.contains("t_min")) {
    cfg.t_min = detail::as_number(params["t_min"], "params.t_min");
    if (!(cfg.t_min > 0.0)) throw ConfigError("params.t_min: must be > 0");
  }
  if (params.contains("method")) {
    cfg.method = detail::as_string(params["method"], "params.method");
    if (cfg.method != "lp" && cfg.method != "grid" && cfg.method != "both") {
      throw ConfigError("params.method: expected \"lp\", \"grid\" or \"both\"");
    }
  }
  if (params.contains("coeffs")) {
    const json& c = params["coeffs"];
    detail::check_keys(c, "params.coeffs", {"q", "r", "s", "t"});
    cfg.coeffs = {{detail::as_number(detail::require_key(c, "params.coeffs", "q"), "coeffs.q"),
                   detail::as_number(detail::require_key(c, "params.coeffs", "r"), "coeffs.r"),
                   detail::as_number(detail::require_key(c, "params.coeffs", "s"), "coeffs.s"),
                   detail::as_number(detail::require_key(c, "params.coeffs", "t"), "coeffs.t")}};
  }
  if (params.contains("lambda_grid")) {
    cfg.lambda_grid = detail::as_vector(params["lambda_grid"], "params.lambda_grid");
    for (double l : *cfg.lambda_grid) {
      if (!(l > 0.0) || l > 1.0) throw ConfigError("params.lambda_grid: values must lie in ]0, 1]");
    }
  }
  if (cfg.coeffs.has_value() && cfg.lambda_grid.has_value()) {
    throw ConfigError("params: coeffs and lambda_grid are mutually exclusive");
  }
  if (params.contains("eps_den")) cfg.eps_den = detail::as_number(params["eps_den"], "params.eps_den");
  if (params.contains("threshold")) cfg.threshold = detail::as_number(params["threshold"], "params.threshold");
  if (params.contains("epsilon")) {
    cfg.epsilon = detail::as_number(params["epsilon"], "params.epsilon");
    if (!(cfg.epsilon > 0.0)) throw ConfigError("params.epsilon: must be > 0");
  }
  if (params.contains("x0")) {
    cfg.x0 = detail::as_point(params["x0"], "params.x0");
    if (cfg.x0.dimension() != dim) throw ConfigError("params.x0: dimension mismatch");
  }
  if (params.contains("N")) {
    cfg.n_steps = detail::as_int(params["N"], "params.N");
    if (cfg.n_steps < 1) throw ConfigError("params.N: must be >= 1");
  }
  if (params.contains("K")) {
    cfg.max_k = detail::as_int(params["K"], "params.K");
    if (cfg.max_k < 1) throw ConfigError("params.K: must be >= 1");
  }
  if (params.contains("budget")) {
    cfg.budget = detail::as_int(params["budget"], "params.budget");
    if (cfg.budget < 1) throw ConfigError("params.budget: must be >= 1");
  }
  if (params.contains("search_region")) {
    cfg.search_region = detail::parse_region(params["search_region"], dim);
  }
  if (params.contains("horizons")) {
    const json& h = params["horizons"];
    if (!h.is_array() || h.empty()) throw ConfigError("params.horizons: expected a non-empty array");
    for (const auto& e : h) cfg.horizons.push_back(detail::as_int(e, "params.horizons"));
  }
  if (params.contains("probes")) cfg.probes = detail::as_points(params["probes"], "params.probes");
  if (params.contains("probe_tol")) cfg.probe_tol = detail::as_number(params["probe_tol"], "params.probe_tol");
  if (params.contains("starts")) cfg.starts = detail::as_points(params["starts"], "params.starts");
  if (params.contains("slack")) {
    cfg.slack = detail::as_number(params["slack"], "params.slack");
    if (cfg.slack < 0.0) throw ConfigError("params.slack: must be >= 0");
  }
  if (params.contains("depth")) cfg.depth = detail::as_number(params["depth"], "params.depth");

  if (root.contains("output")) {
    const json& out = root["output"];
    detail::check_keys(out, "output", {"json", "csv"});
    if (out.contains("json")) cfg.out_json = detail::as_string(out["json"], "output.json");
    if (out.contains("csv")) cfg.out_csv = detail::as_string(out["csv"], "output.csv");
  }

  // Normalized echo of the effective configuration.
  json echo;
  echo["space"] = space_to_json(cfg.space);
  echo["map"] = cfg.vpair.has_value() ? virtual_pair_to_json(*cfg.vpair) : map_to_json(*cfg.map);
  echo["task"] = cfg.task;
  json p;
  p["seed"] = cfg.seed;
  p["count"] = cfg.count;
  p["scheme"] = cfg.scheme == SampleScheme::kUniformRandom ? "uniform-random" : "low-discrepancy-grid";
  p["region"] = detail::box_to_json(cfg.region);
  p["tol"] = cfg.tol;
  if (cfg.task == "firm-cert") {
    p["t_min"] = cfg.t_min;
    p["method"] = cfg.method;
    if (cfg.coeffs.has_value()) {
      p["coeffs"] = {{"q", (*cfg.coeffs)[0]}, {"r", (*cfg.coeffs)[1]}, {"s", (*cfg.coeffs)[2]},
                     {"t", (*cfg.coeffs)[3]}};
    }
    if (cfg.lambda_grid.has_value()) p["lambda_grid"] = *cfg.lambda_grid;
  }
  if (cfg.task == "tau-scan") {
    p["eps_den"] = cfg.eps_den;
    p["threshold"] = cfg.threshold;
  }
  if (cfg.task == "prop-scan") p["epsilon"] = cfg.epsilon;
  if (cfg.task == "rates" || cfg.task == "theorem1" || cfg.task == "functional" ||
      cfg.task == "descent") {
    p["x0"] = detail::point_to_json(cfg.x0);
    p["N"] = cfg.n_steps;
  }
  if (cfg.task == "rates" || cfg.task == "theorem1") {
    p["K"] = cfg.max_k;
    p["budget"] = cfg.budget;
    if (cfg.search_region.has_value()) p["search_region"] = detail::box_to_json(*cfg.search_region);
  }
  if (cfg.task == "functional" || cfg.task == "descent") {
    json hs = json::array();
    for (long h : cfg.horizons) hs.push_back(h);
    p["horizons"] = hs;
    json ps = json::array();
    for (const auto& probe : cfg.probes) ps.push_back(detail::point_to_json(probe));
    p["probes"] = ps;
    p["probe_tol"] = cfg.probe_tol;
  }
  if (cfg.task == "descent") {
    json ss = json::array();
    for (const auto& s : cfg.starts) ss.push_back(detail::point_to_json(s));
    p["starts"] = ss;
    p["slack"] = cfg.slack;
    if (cfg.depth.has_value()) p["depth"] = *cfg.depth;
  }
  echo["params"] = p;
  json out = json::object();
  if (cfg.out_json.has_value()) out["json"] = *cfg.out_json;
  if (cfg.out_csv.has_value()) out["csv"] = *cfg.out_csv;
  echo["output"] = out;
  cfg.echo = echo;
  return cfg;
}

struct ExperimentResult {
  int exit_code = 0;
  std::string verdict;
  json metrics;
  std::vector<std::string> warnings;
  // Deferred CSV writer; invoked only when a csv path is configured.
  std::function<void(const std::string&)> csv_writer;
};

namespace detail {

inline json axiom_report_to_json(const AxiomReport& report) {
  json out;
  out["samples_checked"] = report.samples_checked;
  out["triples_checked"] = report.triples_checked;
  out["max_self_distance"] = report.max_self_distance;
  out["worst_triangle_slack"] = finite_or_string(report.worst_triangle_slack);
  out["violation_count"] = report.violations.size();
  json rows = json::array();
  std::size_t shown = 0;
  for (const auto& v : report.violations) {
    if (++shown > 20) break;
    json row;
    row["kind"] = v.kind == AxiomViolation::Kind::kSelfDistance ? "self_distance" : "triangle";
    json pts = json::array();
    for (const auto& p : v.points) pts.push_back(point_to_json(p));
    row["points"] = pts;
    row["magnitude"] = v.magnitude;
    rows.push_back(row);
  }
  out["violations"] = rows;
  out["empty_sample"] = report.empty_sample;
  return out;
}

inline json certify_to_json(const CertifyResult& r) {
  json out;
  out["feasible"] = r.feasible;
  out["method"] = r.method;
  out["constraints_total"] = r.constraints_total;
  out["constraints_active"] = r.constraints_active;
  if (r.feasible) {
    const auto& c = *r.certificate->constants;
    out["q"] = c[0];
    out["r"] = c[1];
    out["s"] = c[2];
    out["t"] = c[3];
    out["max_residual"] = r.max_residual;
  }
  return out;
}

inline json sigma_to_json(const std::vector<SigmaEstimate>& sigma) {
  json rows = json::array();
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    json row;
    row["k"] = k + 1;
    row["value"] = sigma[k].value;
    row["cauchy_width"] = sigma[k].cauchy_width;
    row["window"] = sigma[k].window;
    rows.push_back(row);
  }
  return rows;
}

inline json rates_to_json(const RateReport& rates) {
  json out;
  out["sigma"] = sigma_to_json(rates.sigma);
  json rho;
  rho["value"] = rates.rho.value;
  json trend = json::array();
  for (const auto& [n, v] : rates.rho.trend) trend.push_back({{"n", n}, {"value", v}});
  rho["trend"] = trend;
  out["rho"] = rho;
  json bar;
  bar["upper_bound"] = rates.rho_bar.upper_bound;
  bar["argmin"] = point_to_json(rates.rho_bar.argmin);
  bar["evaluations"] = rates.rho_bar.evaluations;
  out["rho_bar"] = bar;
  out["search_region"] = box_to_json(rates.search_region);
  out["chain_bound_ok"] = rates.chain_bound_ok;
  out["max_chain_gap"] = rates.max_chain_gap;
  out["displacement_vs_rate_ok"] = rates.displacement_vs_rate_ok;
  out["displacement_rate_gap"] = rates.displacement_rate_gap;
  return out;
}

}  // namespace detail

inline ExperimentResult run_parsed(const ParsedConfig& cfg) {
  ExperimentResult result;
  const Sampler sampler(cfg.region, cfg.count, cfg.seed, cfg.scheme);

  auto pass_fail = [&](bool pass, const char* ok = "PASS", const char* bad = "FAIL") {
    result.verdict = pass ? ok : bad;
    result.exit_code = pass ? 0 : 1;
  };

  if (cfg.task == "axioms") {
    const AxiomReport report = check_weak_metric_axioms(cfg.space, sampler, cfg.tol);
    result.metrics = detail::axiom_report_to_json(report);
    if (report.empty_sample) result.warnings.push_back("empty sample: axioms hold vacuously");
    pass_fail(report.passed());
    return result;
  }

  if (cfg.task == "nonexp") {
    const NonexpansiveReport report = check_nonexpansive(cfg.space, *cfg.map, sampler, cfg.tol);
    result.metrics["pairs_checked"] = report.pairs_checked;
    result.metrics["max_excess"] = report.max_excess;
    if (report.worst_pair.has_value()) {
      result.metrics["worst_pair"] = detail::pair_to_json(*report.worst_pair);
    }
    if (report.empty_sample) result.warnings.push_back("empty sample: non-expansiveness holds vacuously");
    pass_fail(report.within_tol());
    return result;
  }

  if (cfg.task == "firm-cert") {
    if (cfg.coeffs.has_value()) {
      const auto& c = *cfg.coeffs;
      const Coefficients coeffs = Coefficients::from_constants(c[0], c[1], c[2], c[3]);
      const auto bounds = check_coefficient_bounds(coeffs, sampler);
      const auto inequality =
          check_firmness_inequality(cfg.space, *cfg.map, coeffs, sampler, cfg.tol);
      result.metrics["bounds"] = {{"min_t", bounds.min_t},
                                  {"max_sum", bounds.max_sum},
                                  {"infimum_ok", bounds.infimum_ok},
                                  {"sum_ok", bounds.sum_ok}};
      result.metrics["max_violation"] = inequality.max_violation;
      if (inequality.worst_pair.has_value()) {
        result.metrics["worst_pair"] = detail::pair_to_json(*inequality.worst_pair);
      }
      pass_fail(bounds.passed() && inequality.certified(), "CERTIFIED", "REFUTED");
      return result;
    }
    if (cfg.lambda_grid.has_value()) {
      const auto report =
          check_firmly_nonexpansive(cfg.space, *cfg.map, *cfg.lambda_grid, sampler, cfg.tol);
      json rows = json::array();
      for (const auto& row : report.rows) {
        json r;
        r["lambda"] = row.lambda;
        r["max_violation"] = row.max_violation;
        if (row.worst_pair.has_value()) r["worst_pair"] = detail::pair_to_json(*row.worst_pair);
        rows.push_back(r);
      }
      result.metrics["lambdas"] = rows;
      result.metrics["holds_for_all"] = report.holds_for_all_lambdas();
      result.metrics["holds_for_some"] = report.holds_for_some_lambda();
      pass_fail(report.holds_for_all_lambdas(), "FIRMLY_NONEXPANSIVE", "VIOLATED");
      return result;
    }
    std::vector<PairDistances> pairs;
    if (cfg.vpair.has_value()) {
      pairs.push_back(evaluate_pair(cfg.space, *cfg.vpair));
    } else {
      pairs = evaluate_pairs(cfg.space, *cfg.map, sampler);
    }
    const std::span<const PairDistances> view(pairs);
    std::optional<CertifyResult> lp;
    std::optional<CertifyResult> grid;
    if (cfg.method == "lp" || cfg.method == "both") lp = certify_firm_constant(view, cfg.t_min);
    if (cfg.method == "grid" || cfg.method == "both") {
      grid = certify_firm_constant_grid(view, cfg.t_min);
    }
    if (lp.has_value()) result.metrics["lp"] = detail::certify_to_json(*lp);
    if (grid.has_value()) result.metrics["grid"] = detail::certify_to_json(*grid);
    if (lp.has_value() && grid.has_value()) {
      result.metrics["methods_agree"] = lp->feasible == grid->feasible;
      if (lp->feasible != grid->feasible) {
        result.warnings.push_back("lp and grid searches disagree on feasibility");
      }
    }
    const CertifyResult& primary = lp.has_value() ? *lp : *grid;
    pass_fail(primary.feasible, "FEASIBLE", "INFEASIBLE");
    return result;
  }

  if (cfg.task == "tau-scan") {
    if (cfg.vpair.has_value()) {
      const TauRecord rec = tau(cfg.space, *cfg.vpair, cfg.eps_den);
      const double inf_tau =
          rec.passes_filter && rec.tau.has_value() ? *rec.tau
                                                   : std::numeric_limits<double>::infinity();
      result.metrics["inf_tau"] = detail::finite_or_string(inf_tau);
      result.metrics["peak"] = rec.peak;
      result.metrics["cross_avg"] = rec.cross_avg;
      result.metrics["image_dist"] = rec.image_dist;
      result.metrics["passes_filter"] = rec.passes_filter;
      result.metrics["tau"] = rec.tau.has_value() ? json(*rec.tau) : json("undefined");
      pass_fail(inf_tau >= cfg.threshold, "FIRM_CONSISTENT", "NOT_FIRM_CONSISTENT");
      return result;
    }
    const NonexpansiveReport nonexp = check_nonexpansive(cfg.space, *cfg.map, sampler, cfg.tol);
    result.metrics["nonexpansive_max_excess"] = nonexp.max_excess;
    if (!nonexp.within_tol()) {
      // tau diagnostics are only meaningful for non-expansive maps.
      const TauScanResult scan =
          tau_infimum_scan(cfg.space, *cfg.map, sampler, cfg.eps_den, cfg.threshold);
      result.metrics["inf_tau"] = detail::finite_or_string(scan.inf_tau);
      result.metrics["passed_filter"] = scan.passed_filter;
      result.warnings.push_back("map is expansive on samples; tau verdict not applicable");
      result.verdict = "NA_EXPANSIVE";
      result.exit_code = 1;
      return result;
    }
    const TauScanResult scan =
        tau_infimum_scan(cfg.space, *cfg.map, sampler, cfg.eps_den, cfg.threshold);
    result.metrics["inf_tau"] = detail::finite_or_string(scan.inf_tau);
    result.metrics["pairs_scanned"] = scan.pairs_scanned;
    result.metrics["passed_filter"] = scan.passed_filter;
    result.metrics["degenerate"] = scan.degenerate;
    result.metrics["threshold"] = scan.threshold;
    if (scan.argmin.has_value()) {
      result.metrics["argmin_pair"] =
          json::array({detail::point_to_json(scan.argmin->x), detail::point_to_json(scan.argmin->y)});
    }
    pass_fail(scan.firm_consistent(), "FIRM_CONSISTENT", "NOT_FIRM_CONSISTENT");
    return result;
  }

  if (cfg.task == "prop-scan") {
    AsymNorm1D host(1.0, 1.0);
    if (const auto* asym = cfg.space.as<AsymNorm1D>()) {
      host = *asym;
    } else if (cfg.space.as<RealLineAbs>() == nullptr) {
      throw ConfigError("prop-scan: space must be asym_r or real_line_abs");
    }
    std::optional<SwapWitness> witness;
    int scanned = 0;
    if (cfg.vpair.has_value()) {
      witness = non_firmness_witness_check(host, *cfg.vpair, cfg.epsilon);
      scanned = 1;
    } else {
      witness = non_firmness_witness_scan(host, *cfg.map, cfg.epsilon, sampler);
      scanned = sampler.pair_count();
    }
    result.metrics["epsilon"] = cfg.epsilon;
    result.metrics["pairs_scanned"] = scanned;
    if (witness.has_value()) {
      result.metrics["witness"] = {{"x", witness->x},
                                   {"y", witness->y},
                                   {"tx_to_y", witness->tx_to_y},
                                   {"ty_to_z", witness->ty_to_z},
                                   {"scale", witness->scale},
                                   {"pair_index", witness->pair_index}};
    } else {
      result.metrics["witness"] = nullptr;
    }
    // A witness refutes firmness, which is the "failure" side of the exit
    // contract.
    pass_fail(!witness.has_value(), "NO_WITNESS", "WITNESS_FOUND");
    return result;
  }

  if (cfg.task == "rates" || cfg.task == "theorem1") {
    const OrbitTrace trace = iterate_orbit(cfg.space, *cfg.map, cfg.x0, cfg.n_steps, cfg.max_k);
    if (cfg.out_csv.has_value()) {
      result.csv_writer = [trace](const std::string& path) { write_orbit_csv(trace, path); };
    }
    if (cfg.task == "rates") {
      const RateReport rates =
          rate_report(cfg.space, *cfg.map, trace, cfg.tol, cfg.search_region, cfg.budget);
      result.metrics = detail::rates_to_json(rates);
      pass_fail(rates.chain_bound_ok && rates.displacement_vs_rate_ok);
      return result;
    }
    const RateEqualityReport report = check_rate_equalities(
        cfg.space, *cfg.map, cfg.x0, cfg.n_steps, cfg.max_k, cfg.tol, cfg.search_region, cfg.budget);
    result.metrics = detail::rates_to_json(report.rates);
    result.metrics["max_sigma_ratio_gap"] = report.max_sigma_ratio_gap;
    result.metrics["sigma_rho_gap"] = report.sigma_rho_gap;
    result.metrics["rho_bar_sigma_gap"] = report.rho_bar_sigma_gap;
    result.metrics["trend_instability"] = report.trend_instability;
    result.metrics["base_independence_gap"] = report.base_independence_gap;
    result.metrics["second_base"] = detail::point_to_json(report.second_base);
    pass_fail(report.pass);
    return result;
  }

  if (cfg.task == "functional" || cfg.task == "descent") {
    if (!cfg.space.symmetric()) {
      throw ConfigError(cfg.task + ": requires a symmetric (metric) space");
    }
    if (cfg.horizons.empty()) throw ConfigError(cfg.task + ": params.horizons is required");
    const auto functional = orbit_limit_functional(cfg.space, *cfg.map, cfg.x0, cfg.horizons,
                                                   cfg.probes, cfg.probe_tol);
    if (cfg.out_csv.has_value()) {
      auto shared = std::make_shared<decltype(functional)>(functional);
      result.csv_writer = [shared](const std::string& path) {
        write_functional_csv(*shared, path);
      };
    }
    result.metrics["converged"] = functional.converged();
    result.metrics["probe_oscillation"] = detail::finite_or_string(functional.probe_oscillation());
    result.metrics["anchor_count"] = functional.anchor_count();

    if (cfg.task == "functional") {
      // The escape-rate estimate needs at least 100 steps, and the traced
      // orbit must stay within the anchored range.
      const int n_steps = std::min<int>(cfg.n_steps, static_cast<int>(cfg.horizons.back()));
      if (n_steps < 100) {
        throw ConfigError("functional: N and the largest horizon must be >= 100");
      }
      const OrbitTrace trace = iterate_orbit(cfg.space, *cfg.map, cfg.x0, n_steps, 1);
      const double rho = rho_estimate(trace).value;
      const OrbitTrace secondary = iterate_orbit(
          cfg.space, *cfg.map, cfg.x0 + Point::constant(cfg.x0.dimension(), 0.5), n_steps, 1);
      const auto escape = check_escape_bound(functional, trace, secondary, rho, cfg.tol);
      result.metrics["rho"] = rho;
      result.metrics["escape_bound"] = {{"max_bound_excess", escape.max_bound_excess},
                                        {"bound_ok", escape.bound_ok},
                                        {"secondary_rate", escape.secondary_rate},
                                        {"secondary_rate_gap", escape.secondary_rate_gap},
                                        {"rate_ok", escape.rate_ok}};
      if (!functional.converged()) {
        result.warnings.push_back("functional did not converge at the probes");
      }
      pass_fail(functional.converged() && escape.pass(), "PASS", "FAIL");
      return result;
    }

    std::vector<Point> starts = cfg.starts;
    if (starts.empty()) {
      Sampler start_sampler(cfg.region, 20, cfg.seed + 1, cfg.scheme);
      starts = start_sampler.points();
    }
    int total_violations = 0;
    double worst_margin = -std::numeric_limits<double>::infinity();
    double min_final = std::numeric_limits<double>::infinity();
    bool any_inconclusive = false;
    bool all_pass = true;
    json rows = json::array();
    for (const auto& start : starts) {
      const DescentReport report = check_monotone_descent(*cfg.map, functional, start,
                                                          cfg.n_steps, cfg.slack, cfg.tol, cfg.depth);
      total_violations += report.violations;
      worst_margin = std::max(worst_margin, report.worst_margin);
      min_final = std::min(min_final, report.final_value);
      if (report.status == DescentStatus::kInconclusive) any_inconclusive = true;
      if (report.status != DescentStatus::kPass) all_pass = false;
      if (rows.size() < 20) {
        rows.push_back({{"start", detail::point_to_json(start)},
                        {"violations", report.violations},
                        {"worst_margin", report.worst_margin},
                        {"final_value", report.final_value},
                        {"depth_ok", report.depth_ok}});
      }
    }
    result.metrics["starts"] = starts.size();
    result.metrics["total_violations"] = total_violations;
    result.metrics["worst_margin"] = detail::finite_or_string(worst_margin);
    result.metrics["min_final_value"] = detail::finite_or_string(min_final);
    result.metrics["per_start"] = rows;
    if (any_inconclusive) {
      result.verdict = "INCONCLUSIVE";
      result.exit_code = 1;
      result.warnings.push_back("functional did not converge at the probes");
      return result;
    }
    pass_fail(all_pass);
    return result;
  }

  throw ConfigError("task: unknown task \"" + cfg.task + "\"");
}

inline std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunOutcome {
  int exit_code = 0;
  json report;
};

/// Runs a configuration given as parsed JSON; produces the versioned report
/// object. File outputs (report JSON, CSV) are resolved against out_dir.
inline RunOutcome run_experiment_json(const json& config_json, const RunOverrides& overrides = {}) {
  if (overrides.threads.has_value()) set_max_threads(*overrides.threads);
  const ParsedConfig cfg = parse_config(config_json, overrides);

  json report;
  report["artifact_version"] = kVersion;
  report["schema_version"] = kReportSchemaVersion;
  report["task"] = cfg.task;
  report["config"] = cfg.echo;

  RunOutcome outcome;
  try {
    ExperimentResult result = run_parsed(cfg);
    report["verdict"] = result.verdict;
    report["metrics"] = result.metrics;
    report["warnings"] = result.warnings;
    outcome.exit_code = result.exit_code;

    if (result.csv_writer && cfg.out_csv.has_value()) {
      std::string csv_path = *cfg.out_csv;
      if (overrides.out_dir.has_value()) csv_path = *overrides.out_dir + "/" + csv_path;
      result.csv_writer(csv_path);
      report["csv"] = csv_path;
    }
  } catch (const divergence_error& e) {
    report["verdict"] = "DIVERGED";
    report["metrics"] = {{"diverged_at_step", e.step()}};
    report["warnings"] = json::array({e.what()});
    outcome.exit_code = 3;
  }
  report["timestamp"] = iso8601_utc_now();
  outcome.report = report;
  return outcome;
}

/// File-level front door used by the CLI: reads the config, runs it, writes
/// the report (to the configured path, the out_dir default, or stdout) and
/// returns the exit code.
inline int run_config_file(const std::string& path, const RunOverrides& overrides,
                           std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "firmlab: cannot read config file: " << path << "\n";
    return 2;
  }
  json config_json;
  try {
    config_json = json::parse(in);
  } catch (const json::parse_error& e) {
    err << "firmlab: config parse error: " << e.what() << "\n";
    return 2;
  }
  try {
    RunOutcome outcome = run_experiment_json(config_json, overrides);
    const ParsedConfig cfg = parse_config(config_json, overrides);
    std::optional<std::string> report_path = cfg.out_json;
    if (!report_path.has_value() && overrides.out_dir.has_value()) report_path = "report.json";
    if (report_path.has_value()) {
      std::string resolved = *report_path;
      if (overrides.out_dir.has_value()) resolved = *overrides.out_dir + "/" + resolved;
      std::ofstream report_file(resolved);
      if (!report_file) {
        err << "firmlab: cannot write report: " << resolved << "\n";
        return 2;
      }
      report_file << outcome.report.dump(2) << "\n";
      out << "verdict: " << outcome.report["verdict"].get<std::string>() << " (report: " << resolved
          << ")\n";
    } else {
      out << outcome.report.dump(2) << "\n";
    }
    return outcome.exit_code;
  } catch (const ConfigError& e) {
    err << "firmlab: config error: " << e.what() << "\n";
    return 2;
  }
}

/// Deterministic listing of the built-in space kinds, map kinds and tasks.
inline std::string list_builtins() {
  std::ostringstream out;
  out << "spaces:\n"
      << "  real_line_abs                  R with |y - x|\n"
      << "  asym_r(alpha,beta)             R with max(-alpha v, beta v), v = y - x\n"
      << "  rn_lp(p,d)                     R^d with the l1/l2/linf norm (p: 1, 2, \"inf\")\n"
      << "  poly_asym(generators)          R^d with max_i <a_i, v> (positivity validated)\n"
      << "maps:\n"
      << "  abs_plus_one                   x -> |x| + 1 on R\n"
      << "  reflect_exp                    x -> -x + 1 (x < 0), x + exp(-x) (x >= 0)\n"
      << "  translation(c)                 x -> x + c\n"
      << "  affine(matrix,offset)          x -> A x + b\n"
      << "  piecewise_linear_1d(...)       continuous segments, slopes validated vs host\n"
      << "  km_average(lambda,inner)       x -> (1 - lambda) x + lambda T x\n"
      << "  virtual_pair(x,y,tx,ty)        pinned two-point data (tau-scan, prop-scan, firm-cert)\n"
      << "tasks:\n"
      << "  axioms      weak-metric axioms on samples (params: seed,count,scheme,region,tol)\n"
      << "  nonexp      non-expansiveness scan (params: seed,count,scheme,region,tol)\n"
      << "  firm-cert   certificate search / verify coeffs / lambda grid\n"
      << "              (params: +t_min,method,coeffs{q,r,s,t},lambda_grid)\n"
      << "  tau-scan    infimum of tau over filtered pairs (params: +eps_den,threshold)\n"
      << "  prop-scan   swap-configuration witness search (params: +epsilon)\n"
      << "  rates       sigma_k, escape rate, displacement bound (params: +x0,N,K,budget)\n"
      << "  theorem1    equality of the four rate quantities (params: as rates, tol)\n"
      << "  functional  orbit-limit metric functional + escape bound\n"
      << "              (params: +x0,horizons,probes,probe_tol,N)\n"
      << "  descent     monotone descent along orbits (params: +starts,slack,depth)\n";
  return out.str();
}

}  // namespace firmlab::experiment
