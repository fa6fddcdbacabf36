#include "stacklab/solve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stacklab/errors.hpp"
#include "stacklab/kernels.hpp"

namespace stacklab {
namespace {

constexpr double kDominanceTol = 1e-9;
constexpr double kValueTieTol = 1e-9;

// Normalizes an LP solution over the simplex, clipping roundoff negatives.
MixedStrategy to_strategy(const std::vector<double>& z, std::size_t n) {
  std::vector<double> p(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
  double total = 0.0;
  for (double& v : p) {
    v = std::max(v, 0.0);
    total += v;
  }
  for (double& v : p) v /= total;
  return MixedStrategy(std::move(p));
}

std::vector<double> simplex_row(std::size_t n, std::size_t extra) {
  std::vector<double> row(n + extra, 0.0);
  std::fill(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(n), 1.0);
  return row;
}

}  // namespace

std::vector<std::size_t> best_response_set(const GameMatrix& g, int responder,
                                           const MixedStrategy& opponent, double tie_tol) {
  check_player(responder);
  if (!(tie_tol >= 0.0)) throw std::invalid_argument("tie_tol must be nonnegative");
  const Matrix& m = g.own_payoffs(responder);
  if (opponent.size() != m.cols()) {
    throw std::invalid_argument("opponent strategy dimension does not match the game");
  }
  std::vector<double> values(m.rows());
  kernels::active().gemv(m.data().data(), m.rows(), m.cols(), opponent.probs().data(),
                         values.data());
  const double best = *std::max_element(values.begin(), values.end());
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < values.size(); ++a) {
    if (values[a] >= best - tie_tol) out.push_back(a);
  }
  return out;
}

std::size_t best_response(const GameMatrix& g, int responder, const MixedStrategy& opponent,
                          double tie_tol) {
  return best_response_set(g, responder, opponent, tie_tol).front();
}

StackelbergSolution stackelberg_value(const GameMatrix& g, int leader) {
  check_player(leader);
  const Matrix& ul = g.own_payoffs(leader);       // [leader action][follower action]
  const Matrix& uf = g.opponent_payoffs(leader);  // follower utility, same indexing
  const std::size_t nl = ul.rows();
  const std::size_t nf = ul.cols();

  StackelbergSolution sol;
  sol.per_follower_action_values.assign(nf, -kInf);
  std::optional<MixedStrategy> best_x;
  double best = -kInf;
  for (std::size_t y = 0; y < nf; ++y) {
    LinearProgram lp;
    lp.objective.resize(nl);
    for (std::size_t i = 0; i < nl; ++i) lp.objective[i] = ul(i, y);
    lp.add_eq(simplex_row(nl, 0), 1.0);
    for (std::size_t yp = 0; yp < nf; ++yp) {
      if (yp == y) continue;
      std::vector<double> row(nl);
      for (std::size_t i = 0; i < nl; ++i) row[i] = uf(i, yp) - uf(i, y);
      lp.add_le(std::move(row), 0.0);
    }
    const LpResult res = lp_solve(lp);
    if (res.status != LpStatus::optimal) continue;
    sol.per_follower_action_values[y] = res.value;
    if (!best_x || res.value > best + kValueTieTol) {
      best = res.value;
      best_x = to_strategy(res.z, nl);
      sol.follower_action = y;
    }
  }
  if (!best_x) throw std::logic_error("no follower action admits a commitment");
  sol.value = best;
  sol.leader_strategy = std::move(*best_x);
  return sol;
}

double stackval_prior(const Prior& prior, int player) {
  double total = 0.0;
  for (const Prior::Entry& e : prior.entries()) {
    total += e.weight * stackelberg_value(e.game, player).value;
  }
  return total;
}

DominanceResult weakly_dominated(const GameMatrix& g, int player, std::size_t action) {
  check_player(player);
  const Matrix& u = g.own_payoffs(player);
  const std::size_t n = u.rows();
  const std::size_t nopp = u.cols();
  if (action >= n) throw std::invalid_argument("action index out of range");
  if (n == 1) return {};

  // Variables: weights over the other actions, then a free slack s.
  // maximize s  s.t.  sum_k w_k u[k][b] - u[action][b] >= s  for every b.
  std::vector<std::size_t> others;
  for (std::size_t k = 0; k < n; ++k) {
    if (k != action) others.push_back(k);
  }
  const std::size_t nw = others.size();
  LinearProgram lp;
  lp.objective.assign(nw + 1, 0.0);
  lp.objective[nw] = 1.0;
  lp.lower.assign(nw + 1, 0.0);
  lp.lower[nw] = -kInf;
  lp.add_eq(simplex_row(nw, 1), 1.0);
  for (std::size_t b = 0; b < nopp; ++b) {
    std::vector<double> row(nw + 1);
    for (std::size_t k = 0; k < nw; ++k) row[k] = -u(others[k], b);
    row[nw] = 1.0;
    lp.add_le(std::move(row), -u(action, b));
  }
  const LpResult res = lp_solve(lp);
  if (res.status != LpStatus::optimal || res.z[nw] < -kDominanceTol) return {};
  std::vector<double> w(n, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < nw; ++k) {
    w[others[k]] = std::max(res.z[k], 0.0);
    total += w[others[k]];
  }
  for (double& v : w) v /= total;
  return {true, MixedStrategy(std::move(w))};
}

double maximin_value(const GameMatrix& g, int player) {
  check_player(player);
  const Matrix& u = g.own_payoffs(player);
  const std::size_t n = u.rows();
  LinearProgram lp;
  lp.objective.assign(n + 1, 0.0);
  lp.objective[n] = 1.0;
  lp.lower.assign(n + 1, 0.0);
  lp.lower[n] = -kInf;
  lp.add_eq(simplex_row(n, 1), 1.0);
  for (std::size_t b = 0; b < u.cols(); ++b) {
    std::vector<double> row(n + 1);
    for (std::size_t i = 0; i < n; ++i) row[i] = -u(i, b);
    row[n] = 1.0;
    lp.add_le(std::move(row), 0.0);
  }
  const LpResult res = lp_solve(lp);
  if (res.status != LpStatus::optimal) throw std::logic_error("maximin LP failed");
  return res.value;
}

CommitmentComponents commitment_components(const GameMatrix& g, int leader) {
  CommitmentComponents out;
  out.stackelberg = stackelberg_value(g, leader);
  const Matrix& uf = g.opponent_payoffs(leader);
  const std::size_t nl = uf.rows();
  const std::size_t nf = uf.cols();
  const std::size_t ystar = out.stackelberg.follower_action;
  if (nf == 1) {
    out.margin_strategy = out.stackelberg.leader_strategy;
    out.margin = kInf;
    return out;
  }
  // maximize c  s.t.  uf(x, y') - uf(x, y*) + c <= 0  for every y' != y*.
  LinearProgram lp;
  lp.objective.assign(nl + 1, 0.0);
  lp.objective[nl] = 1.0;
  lp.lower.assign(nl + 1, 0.0);
  lp.lower[nl] = -kInf;
  lp.add_eq(simplex_row(nl, 1), 1.0);
  for (std::size_t yp = 0; yp < nf; ++yp) {
    if (yp == ystar) continue;
    std::vector<double> row(nl + 1);
    for (std::size_t i = 0; i < nl; ++i) row[i] = uf(i, yp) - uf(i, ystar);
    row[nl] = 1.0;
    lp.add_le(std::move(row), 0.0);
  }
  const LpResult res = lp_solve(lp);
  if (res.status != LpStatus::optimal) throw std::logic_error("margin LP failed");
  out.margin_strategy = to_strategy(res.z, nl);
  out.margin = res.z[nl];
  return out;
}

PerturbedCommitment perturbed_commitment(const CommitmentComponents& c, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  if (c.margin == kInf) return {c.stackelberg.leader_strategy, kInf};
  if (!(c.margin > 0.0)) {
    throw AssumptionViolated("follower action " + std::to_string(c.stackelberg.follower_action) +
                             " is weakly dominated; no positive commitment margin exists");
  }
  return {MixedStrategy::blend(c.stackelberg.leader_strategy, c.margin_strategy, delta),
          delta * c.margin};
}

PerturbedCommitment perturbed_commitment(const GameMatrix& g, int leader, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  return perturbed_commitment(commitment_components(g, leader), delta);
}

}  // namespace stacklab
