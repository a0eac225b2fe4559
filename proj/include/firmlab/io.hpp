#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "firmlab/asymptotics.hpp"
#include "firmlab/functionals.hpp"

namespace firmlab {

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_for_write(const std::string& path, const char* what) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(std::string(what) + ": cannot write " + path);
  return out;
}

}  // namespace detail

/// Columns: n, the coordinates of T^n x0, delta(T^n, T^{n+1}) (empty on the
/// final row), delta(x0, T^n x0).
inline void write_orbit_csv(const OrbitTrace& trace, const std::string& path) {
  auto out = detail::open_for_write(path, "write_orbit_csv");
  const int d = trace.x0.dimension();
  out << "n";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  out << ",step_to_next,from_base\n";
  for (int n = 0; n <= trace.horizon; ++n) {
    out << n;
    for (int i = 0; i < d; ++i) {
      out << ',' << detail::format_double(trace.iterates[static_cast<std::size_t>(n)][i]);
    }
    out << ',';
    if (n < trace.horizon) out << detail::format_double(trace.step(1, n));
    out << ',' << detail::format_double(trace.from_base[static_cast<std::size_t>(n)]) << '\n';
  }
}

/// Columns: the probe coordinates, then one h_i(probe) column per anchor.
template <MetricSpaceLike S>
void write_functional_csv(const MetricFunctionalApprox<S>& functional,
                          const std::string& path) {
  auto out = detail::open_for_write(path, "write_functional_csv");
  const int d = functional.base().dimension();
  for (int i = 0; i < d; ++i) out << (i ? "," : "") << 'x' << i;
  for (int a = 0; a < functional.anchor_count(); ++a) out << ",h" << a;
  out << '\n';
  for (const auto& p : functional.probes()) {
    for (int i = 0; i < d; ++i) out << (i ? "," : "") << detail::format_double(p[i]);
    for (int a = 0; a < functional.anchor_count(); ++a) {
      out << ',' << detail::format_double(functional.evaluate_at_anchor(a, p));
    }
    out << '\n';
  }
}

}  // namespace firmlab
