#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace firmlab::detail {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
};

// Dense two-phase primal simplex with Bland's rule for
//   maximize c.x   subject to   A x <= b,  x >= 0.
// Meant for small instances (tens of rows and columns); deterministic.
class SimplexSolver {
 public:
  static constexpr double kPivotEps = 1e-11;
  static constexpr double kCostEps = 1e-9;

  LpSolution solve(const std::vector<std::vector<double>>& a,
                   const std::vector<double>& b,
                   const std::vector<double>& c) {
    const int m = static_cast<int>(b.size());
    const int n = static_cast<int>(c.size());

    // Normalize rows so every right-hand side is non-negative; rows that
    // started negative lose their slack basis and get an artificial.
    std::vector<int> slack_sign(static_cast<std::size_t>(m), 1);
    int num_art = 0;
    for (int i = 0; i < m; ++i) {
      if (b[static_cast<std::size_t>(i)] < 0.0) {
        slack_sign[static_cast<std::size_t>(i)] = -1;
        ++num_art;
      }
    }
    const int total = n + m + num_art;

    tableau_.assign(static_cast<std::size_t>(m),
                    std::vector<double>(static_cast<std::size_t>(total + 1), 0.0));
    basis_.assign(static_cast<std::size_t>(m), 0);
    num_cols_ = total;

    int art = 0;
    for (int i = 0; i < m; ++i) {
      auto& row = tableau_[static_cast<std::size_t>(i)];
      const double sign = slack_sign[static_cast<std::size_t>(i)] < 0 ? -1.0 : 1.0;
      for (int j = 0; j < n; ++j) {
        row[static_cast<std::size_t>(j)] = sign * a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      row[static_cast<std::size_t>(n + i)] = sign;
      row[static_cast<std::size_t>(total)] = sign * b[static_cast<std::size_t>(i)];
      if (slack_sign[static_cast<std::size_t>(i)] < 0) {
        row[static_cast<std::size_t>(n + m + art)] = 1.0;
        basis_[static_cast<std::size_t>(i)] = n + m + art;
        ++art;
      } else {
        basis_[static_cast<std::size_t>(i)] = n + i;
      }
    }

    LpSolution out;

    if (num_art > 0) {
      std::vector<double> phase1(static_cast<std::size_t>(total), 0.0);
      for (int j = n + m; j < total; ++j) phase1[static_cast<std::size_t>(j)] = -1.0;
      if (!run(phase1, /*entering_limit=*/total)) {
        throw std::runtime_error("simplex: phase-1 objective unbounded");
      }
      double infeas = 0.0;
      for (int i = 0; i < m; ++i) {
        if (basis_[static_cast<std::size_t>(i)] >= n + m) {
          infeas += tableau_[static_cast<std::size_t>(i)][static_cast<std::size_t>(total)];
        }
      }
      double scale = 1.0;
      for (double bi : b) scale = std::max(scale, std::abs(bi));
      if (infeas > 1e-8 * scale) {
        out.status = LpStatus::kInfeasible;
        return out;
      }
      // Pivot any leftover artificial out of the basis when possible; a row
      // with no usable pivot is redundant and stays at zero.
      for (int i = 0; i < m; ++i) {
        if (basis_[static_cast<std::size_t>(i)] < n + m) continue;
        for (int j = 0; j < n + m; ++j) {
          if (std::abs(tableau_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) > kPivotEps) {
            pivot(i, j);
            break;
          }
        }
      }
    }

    std::vector<double> phase2(static_cast<std::size_t>(total), 0.0);
    for (int j = 0; j < n; ++j) phase2[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
    if (!run(phase2, /*entering_limit=*/n + m)) {
      out.status = LpStatus::kUnbounded;
      return out;
    }

    out.status = LpStatus::kOptimal;
    out.x.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < m; ++i) {
      const int bi = basis_[static_cast<std::size_t>(i)];
      if (bi < n) {
        out.x[static_cast<std::size_t>(bi)] =
            tableau_[static_cast<std::size_t>(i)][static_cast<std::size_t>(total)];
      }
    }
    out.objective = 0.0;
    for (int j = 0; j < n; ++j) out.objective += c[static_cast<std::size_t>(j)] * out.x[static_cast<std::size_t>(j)];
    return out;
  }

 private:
  // Runs simplex for the given objective; columns >= entering_limit never
  // enter the basis (used to freeze artificials in phase 2). Returns false
  // when the objective is unbounded.
  bool run(const std::vector<double>& obj, int entering_limit) {
    const int m = static_cast<int>(tableau_.size());
    const int total = num_cols_;

    std::vector<double> z(static_cast<std::size_t>(total + 1), 0.0);
    for (int j = 0; j < total; ++j) z[static_cast<std::size_t>(j)] = -obj[static_cast<std::size_t>(j)];
    for (int i = 0; i < m; ++i) {
      const double cb = obj[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
      if (cb != 0.0) {
        for (int j = 0; j <= total; ++j) {
          z[static_cast<std::size_t>(j)] += cb * tableau_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
      }
    }
    zrow_ = &z;

    for (int iter = 0; iter < 100000; ++iter) {
      int enter = -1;
      for (int j = 0; j < entering_limit; ++j) {  // Bland: first improving column
        if (z[static_cast<std::size_t>(j)] < -kCostEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) {
        zrow_ = nullptr;
        return true;
      }
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double coef = tableau_[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
        if (coef > kPivotEps) {
          const double ratio = tableau_[static_cast<std::size_t>(i)][static_cast<std::size_t>(total)] / coef;
          if (ratio < best - 1e-12 ||
              (ratio < best + 1e-12 &&
               (leave < 0 || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) {
        zrow_ = nullptr;
        return false;
      }
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex: iteration limit reached");
  }

  void pivot(int leave, int enter) {
    const int total = num_cols_;
    auto& prow = tableau_[static_cast<std::size_t>(leave)];
    const double p = prow[static_cast<std::size_t>(enter)];
    for (int j = 0; j <= total; ++j) prow[static_cast<std::size_t>(j)] /= p;
    for (std::size_t i = 0; i < tableau_.size(); ++i) {
      if (static_cast<int>(i) == leave) continue;
      auto& row = tableau_[i];
      const double f = row[static_cast<std::size_t>(enter)];
      if (f != 0.0) {
        for (int j = 0; j <= total; ++j) row[static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
      }
    }
    if (zrow_ != nullptr) {
      auto& z = *zrow_;
      const double f = z[static_cast<std::size_t>(enter)];
      if (f != 0.0) {
        for (int j = 0; j <= total; ++j) z[static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
      }
    }
    basis_[static_cast<std::size_t>(leave)] = enter;
  }

  std::vector<std::vector<double>> tableau_;
  std::vector<int> basis_;
  std::vector<double>* zrow_ = nullptr;
  int num_cols_ = 0;
};

inline LpSolution solve_lp_max(const std::vector<std::vector<double>>& a,
                               const std::vector<double>& b,
                               const std::vector<double>& c) {
  SimplexSolver solver;
  return solver.solve(a, b, c);
}

}  // namespace firmlab::detail
