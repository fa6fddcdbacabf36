#include "stacklab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "stacklab/kernels.hpp"

namespace stacklab {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-8;

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string("non-finite value in LP ") + what);
    }
  }
}

// Dense tableau over standard-form columns. Row i stores the constraint
// coefficients followed by the right-hand side; `cost` holds the reduced
// costs of the current phase objective (maximization, entering columns have
// positive reduced cost).
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), width_(cols + 1), a_(rows * (cols + 1), 0.0),
        cost_(cols + 1, 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return a_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * width_ + j]; }
  double& rhs(std::size_t i) { return a_[i * width_ + n_]; }
  double rhs(std::size_t i) const { return a_[i * width_ + n_]; }
  double* row(std::size_t i) { return a_.data() + i * width_; }
  std::vector<double>& cost() { return cost_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  void pivot(std::size_t r, std::size_t c) {
    const auto& k = kernels::active();
    const double inv = 1.0 / at(r, c);
    double* pr = row(r);
    for (std::size_t j = 0; j < width_; ++j) pr[j] *= inv;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f != 0.0) {
        k.axpy(-f, pr, row(i), width_);
        at(i, c) = 0.0;
      }
    }
    const double f = cost_[c];
    if (f != 0.0) {
      k.axpy(-f, pr, cost_.data(), width_);
      cost_[c] = 0.0;
    }
    basis_[r] = c;
  }

  // Sets cost_ to the reduced costs of objective `obj` (length n_) given the
  // current basis.
  void load_objective(const std::vector<double>& obj) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = obj[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = obj[basis_[i]];
      if (cb != 0.0) kernels::active().axpy(-cb, row(i), cost_.data(), width_);
    }
  }

  // Runs Bland's-rule iterations over columns [0, allowed). Returns false on
  // an unbounded direction.
  bool optimize(std::size_t allowed) {
    for (;;) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (cost_[j] > kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return true;
      std::size_t leave = m_;
      double best = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = rhs(i) / a;
        if (leave == m_ || ratio < best - 1e-12 ||
            (std::abs(ratio - best) <= 1e-12 && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

 private:
  std::size_t m_, n_, width_;
  std::vector<double> a_;
  std::vector<double> cost_;
  std::vector<std::size_t> basis_;
};

}  // namespace

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

LpResult lp_solve(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  if (n == 0) throw std::invalid_argument("LP has no variables");
  if (lp.ub_rows.size() != lp.ub_rhs.size() || lp.eq_rows.size() != lp.eq_rhs.size()) {
    throw std::invalid_argument("LP row count does not match right-hand side length");
  }
  if (!lp.lower.empty() && lp.lower.size() != n) {
    throw std::invalid_argument("LP lower-bound vector has the wrong length");
  }
  check_finite(lp.objective, "objective");
  check_finite(lp.ub_rhs, "right-hand side");
  check_finite(lp.eq_rhs, "right-hand side");
  for (const auto* rows : {&lp.ub_rows, &lp.eq_rows}) {
    for (const auto& r : *rows) {
      if (r.size() != n) throw std::invalid_argument("LP constraint row has the wrong length");
      check_finite(r, "constraint row");
    }
  }
  for (double l : lp.lower) {
    if (std::isnan(l) || l == kInf) throw std::invalid_argument("invalid LP lower bound");
  }

  // Map each original variable to standard-form columns: z = l + z' with a
  // finite bound, z = z+ - z- when unbounded below.
  std::vector<double> shift(n, 0.0);
  std::vector<std::size_t> pos_col(n), neg_col(n, SIZE_MAX);
  std::size_t ncols = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double l = lp.lower.empty() ? 0.0 : lp.lower[j];
    pos_col[j] = ncols++;
    if (l == -kInf) {
      neg_col[j] = ncols++;
    } else {
      shift[j] = l;
    }
  }
  const std::size_t n_struct = ncols;
  const std::size_t m_ub = lp.ub_rows.size();
  const std::size_t m = m_ub + lp.eq_rows.size();

  // Row data in structural columns, rhs adjusted for shifts.
  struct Row {
    std::vector<double> coef;
    double rhs;
    bool is_le;
  };
  std::vector<Row> rows;
  rows.reserve(m);
  auto convert = [&](const std::vector<double>& r, double b, bool le) {
    Row out{std::vector<double>(n_struct, 0.0), b, le};
    for (std::size_t j = 0; j < n; ++j) {
      out.coef[pos_col[j]] = r[j];
      if (neg_col[j] != SIZE_MAX) out.coef[neg_col[j]] = -r[j];
      out.rhs -= r[j] * shift[j];
    }
    rows.push_back(std::move(out));
  };
  for (std::size_t k = 0; k < m_ub; ++k) convert(lp.ub_rows[k], lp.ub_rhs[k], true);
  for (std::size_t k = 0; k < lp.eq_rows.size(); ++k) convert(lp.eq_rows[k], lp.eq_rhs[k], false);

  // Column layout: structural | slacks (one per <= row) | artificials.
  std::size_t n_art = 0;
  for (const Row& r : rows) {
    if (!r.is_le || r.rhs < 0.0) ++n_art;
  }
  const std::size_t slack0 = n_struct;
  const std::size_t art0 = slack0 + m_ub;
  const std::size_t total = art0 + n_art;
  Tableau tab(m, total);
  std::size_t art = art0;
  for (std::size_t i = 0; i < m; ++i) {
    const Row& r = rows[i];
    const double sign = r.rhs < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n_struct; ++j) tab.at(i, j) = sign * r.coef[j];
    tab.rhs(i) = sign * r.rhs;
    if (r.is_le) tab.at(i, slack0 + i) = sign;
    if (r.is_le && sign > 0.0) {
      tab.basis()[i] = slack0 + i;
    } else {
      tab.at(i, art) = 1.0;
      tab.basis()[i] = art++;
    }
  }

  // Phase 1: maximize -(sum of artificials).
  if (n_art > 0) {
    std::vector<double> phase1(total, 0.0);
    for (std::size_t j = art0; j < total; ++j) phase1[j] = -1.0;
    tab.load_objective(phase1);
    tab.optimize(total);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis()[i] >= art0) infeas += tab.rhs(i);
    }
    if (infeas > kFeasTol) return {LpStatus::infeasible, {}, -kInf};
    // Drive zero-level artificials out of the basis where possible; rows
    // where no non-artificial pivot exists are redundant and stay inert.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis()[i] < art0) continue;
      for (std::size_t j = 0; j < art0; ++j) {
        if (std::abs(tab.at(i, j)) > kPivotTol) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  // Phase 2 over structural and slack columns only.
  std::vector<double> phase2(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    phase2[pos_col[j]] = lp.objective[j];
    if (neg_col[j] != SIZE_MAX) phase2[neg_col[j]] = -lp.objective[j];
  }
  tab.load_objective(phase2);
  if (!tab.optimize(art0)) return {LpStatus::unbounded, {}, kInf};

  std::vector<double> col_value(total, 0.0);
  for (std::size_t i = 0; i < m; ++i) col_value[tab.basis()[i]] = tab.rhs(i);
  LpResult res;
  res.status = LpStatus::optimal;
  res.z.assign(n, 0.0);
  res.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double v = shift[j] + col_value[pos_col[j]];
    if (neg_col[j] != SIZE_MAX) v -= col_value[neg_col[j]];
    res.z[j] = v;
    res.value += lp.objective[j] * v;
  }
  return res;
}

}  // namespace stacklab
