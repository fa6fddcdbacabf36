#pragma once

// External and swap regret of one player's play, measured against the
// opponent's recorded strategies in a fixed game. Totals, not per-round
// averages.

#include <cstddef>
#include <vector>

#include "stacklab/game.hpp"

namespace stacklab {

struct RegretReport {
  double external_regret = 0.0;
  double swap_regret = 0.0;
  // swap_targets[a] is the best replacement for own action a.
  std::vector<std::size_t> swap_targets;
};

// Streaming form: fold rounds in one at a time, query at any point.
class RegretAccumulator {
 public:
  RegretAccumulator(const GameMatrix& g, int player);

  void add(std::span<const double> own, std::span<const double> opponent);
  std::size_t rounds() const { return rounds_; }
  double external() const;
  double swap() const;
  RegretReport report() const;

 private:
  const Matrix* payoff_;  // [own action][opponent action]
  std::size_t n_;
  std::size_t rounds_ = 0;
  std::vector<double> v_;       // scratch: utility of each own action this round
  std::vector<double> cum_v_;   // sum_t v_t
  std::vector<double> s_;       // n x n, s[a][b] = sum_t own_t[a] * v_t[b]
};

double external_regret(const Trajectory& traj, const GameMatrix& g, int player);
RegretReport swap_regret(const Trajectory& traj, const GameMatrix& g, int player);

}  // namespace stacklab
