#pragma once

// Small dense linear programs solved with a two-phase tableau simplex using
// Bland's rule. Sized for the commitment and dominance problems in this
// library (tens of variables at most).

#include <cstddef>
#include <limits>
#include <vector>

namespace stacklab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// maximize objective . z
// subject to  ub_rows[k] . z <= ub_rhs[k]
//             eq_rows[k] . z == eq_rhs[k]
//             z[j] >= lower[j]   (lower may be -kInf; empty means all zero)
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> ub_rows;
  std::vector<double> ub_rhs;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<double> lower;

  std::size_t num_vars() const { return objective.size(); }
  void add_le(std::vector<double> row, double rhs) {
    ub_rows.push_back(std::move(row));
    ub_rhs.push_back(rhs);
  }
  void add_eq(std::vector<double> row, double rhs) {
    eq_rows.push_back(std::move(row));
    eq_rhs.push_back(rhs);
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> z;  // empty unless optimal
  double value = -kInf;
};

// Throws std::invalid_argument on inconsistent dimensions or non-finite data.
LpResult lp_solve(const LinearProgram& lp);

const char* to_string(LpStatus s);

}  // namespace stacklab
