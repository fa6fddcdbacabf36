#include "stacklab/regret.hpp"

#include <algorithm>
#include <stdexcept>

#include "stacklab/kernels.hpp"

namespace stacklab {

RegretAccumulator::RegretAccumulator(const GameMatrix& g, int player)
    : payoff_(&g.own_payoffs(player)),
      n_(g.num_actions(player)),
      v_(n_, 0.0),
      cum_v_(n_, 0.0),
      s_(n_ * n_, 0.0) {}

void RegretAccumulator::add(std::span<const double> own, std::span<const double> opponent) {
  if (own.size() != n_ || opponent.size() != payoff_->cols()) {
    throw std::invalid_argument("regret accumulator: strategy dimension mismatch");
  }
  const auto& k = kernels::active();
  k.gemv(payoff_->data().data(), n_, payoff_->cols(), opponent.data(), v_.data());
  k.axpy(1.0, v_.data(), cum_v_.data(), n_);
  k.outer_acc(s_.data(), own.data(), n_, v_.data(), n_, 1.0);
  ++rounds_;
}

double RegretAccumulator::external() const {
  double realized = 0.0;
  for (std::size_t a = 0; a < n_; ++a) realized += s_[a * n_ + a];
  return *std::max_element(cum_v_.begin(), cum_v_.end()) - realized;
}

double RegretAccumulator::swap() const {
  double total = 0.0;
  for (std::size_t a = 0; a < n_; ++a) {
    const double* row = s_.data() + a * n_;
    total += *std::max_element(row, row + n_) - row[a];
  }
  return total;
}

RegretReport RegretAccumulator::report() const {
  RegretReport r;
  r.external_regret = external();
  r.swap_regret = swap();
  r.swap_targets.resize(n_);
  for (std::size_t a = 0; a < n_; ++a) {
    const double* row = s_.data() + a * n_;
    // Keep the identity on ties so untouched actions map to themselves.
    std::size_t best = a;
    for (std::size_t b = 0; b < n_; ++b) {
      if (row[b] > row[best]) best = b;
    }
    r.swap_targets[a] = best;
  }
  return r;
}

namespace {

RegretAccumulator accumulate(const Trajectory& traj, const GameMatrix& g, int player) {
  check_player(player);
  RegretAccumulator acc(g, player);
  for (const StrategyProfile& r : traj.rounds) {
    const MixedStrategy& own = player == 1 ? r.x : r.y;
    const MixedStrategy& opp = player == 1 ? r.y : r.x;
    acc.add(own.probs(), opp.probs());
  }
  return acc;
}

}  // namespace

double external_regret(const Trajectory& traj, const GameMatrix& g, int player) {
  return accumulate(traj, g, player).external();
}

RegretReport swap_regret(const Trajectory& traj, const GameMatrix& g, int player) {
  return accumulate(traj, g, player).report();
}

}  // namespace stacklab
