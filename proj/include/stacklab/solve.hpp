#pragma once

// Best responses, optimistic Stackelberg commitments, weak dominance and the
// margin-perturbed commitment that makes the target follower response strict.

#include <cstddef>
#include <optional>
#include <vector>

#include "stacklab/game.hpp"
#include "stacklab/lp.hpp"

namespace stacklab {

inline constexpr double kTieTol = 1e-7;

// Actions of `responder` within tie_tol of the best expected utility against
// the opponent's mixed strategy, in increasing index order.
std::vector<std::size_t> best_response_set(const GameMatrix& g, int responder,
                                           const MixedStrategy& opponent,
                                           double tie_tol = kTieTol);

// Lowest-index best response.
std::size_t best_response(const GameMatrix& g, int responder, const MixedStrategy& opponent,
                          double tie_tol = kTieTol);

struct StackelbergSolution {
  double value = 0.0;
  MixedStrategy leader_strategy;
  std::size_t follower_action = 0;
  // One entry per follower action; -kInf where that action can never be a
  // best response.
  std::vector<double> per_follower_action_values;
};

// Optimistic Stackelberg commitment for `leader`: one LP per follower action,
// keeping the best; ties go to the lowest follower action.
StackelbergSolution stackelberg_value(const GameMatrix& g, int leader);

// Prior-weighted average of per-game Stackelberg values.
double stackval_prior(const Prior& prior, int player);

struct DominanceResult {
  bool dominated = false;
  std::optional<MixedStrategy> witness;  // over the player's full action set
};

// Whether some mixture of the player's other actions does at least as well as
// `action` against every opponent pure action.
DominanceResult weakly_dominated(const GameMatrix& g, int player, std::size_t action);

// The leader's security level.
double maximin_value(const GameMatrix& g, int player);

struct CommitmentComponents {
  StackelbergSolution stackelberg;
  // Maximizes the follower's advantage of the Stackelberg follower action
  // over every alternative; equals the commitment when the follower has one
  // action.
  MixedStrategy margin_strategy;
  double margin = kInf;
};

// Solves both LPs. Does not throw when the margin is nonpositive.
CommitmentComponents commitment_components(const GameMatrix& g, int leader);

struct PerturbedCommitment {
  MixedStrategy strategy;
  double margin = kInf;  // delta * c, or +inf with a single follower action
};

// (1 - delta) * commitment + delta * margin_strategy. Throws
// AssumptionViolated when the best achievable margin is not positive.
PerturbedCommitment perturbed_commitment(const GameMatrix& g, int leader, double delta);
PerturbedCommitment perturbed_commitment(const CommitmentComponents& c, double delta);

}  // namespace stacklab
