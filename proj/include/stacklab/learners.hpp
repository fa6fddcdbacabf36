#pragma once

// Repeated-game algorithms. Each learner is told its role, the prior and its
// private signal, then alternates act() / observe() once per round.
//
// Kinds and parameters (all optional unless noted):
//   constant_action              action (required)
//   multiplicative_weights       eta (fixed rate; default sqrt(ln n / t))      full feedback
//   bandit_exp3                  eta, exploration (default sqrt(n ln n / t))
//   no_swap_regret_full          eta                                           full feedback
//   no_swap_regret_bandit        eta, exploration
//   stackelberg_leader           b, a, initial_horizon
//   best_responder                                                             full feedback
//   mimic_deviation              base (required), fixed_signal (required)
//   reveal_then_follow_leader    player 1 only                                 full feedback
//   infer_then_commit_follower   player 2 only                                 full feedback
//   external_signal_leader       b, a, initial_horizon
//
// Counterfactual utilities are computed in the signaled game; losses are
// normalized by the player's utility range over the prior.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stacklab/game.hpp"
#include "stacklab/rng.hpp"
#include "stacklab/solve.hpp"

namespace stacklab {

enum class FeedbackMode { full, bandit };
const char* to_string(FeedbackMode m);
FeedbackMode parse_feedback_mode(std::string_view s);

enum class LearnerKind {
  constant_action,
  multiplicative_weights,
  bandit_exp3,
  no_swap_regret_full,
  no_swap_regret_bandit,
  stackelberg_leader,
  best_responder,
  mimic_deviation,
  reveal_then_follow_leader,
  infer_then_commit_follower,
  external_signal_leader,
};
const char* to_string(LearnerKind k);
LearnerKind parse_learner_kind(std::string_view s);

struct LearnerSpec;

struct LearnerParams {
  std::optional<std::size_t> action;
  std::optional<double> eta;
  std::optional<double> exploration;
  double b = 0.25;
  double a = 0.5;
  std::size_t initial_horizon = 64;
  std::optional<int> fixed_signal;
  std::shared_ptr<const LearnerSpec> base;
};

struct LearnerSpec {
  LearnerKind kind = LearnerKind::constant_action;
  LearnerParams params;

  static LearnerSpec constant(std::size_t action);
  static LearnerSpec of(LearnerKind kind);
  static LearnerSpec mimic(const LearnerSpec& base, int fixed_signal);
};

// Whether the kind needs the opponent's strategy in its feedback.
bool requires_full_information(const LearnerSpec& spec);
// Throws std::invalid_argument when parameters are out of range or the kind
// cannot play `role`.
void validate_spec(const LearnerSpec& spec, int role, const Prior& prior);

// Per-round side information q_t about the realized game, correct with
// probability 1 - 1/t and otherwise drawn from the remaining games in
// proportion to their prior weights.
class SideSignalSource {
 public:
  SideSignalSource(const Prior& prior, int realized_index, std::uint64_t seed);
  int draw(std::size_t t);

 private:
  const Prior* prior_;
  int realized_;
  Rng rng_;
  std::vector<double> others_;  // prior weights with the realized game zeroed
};

struct LearnerContext {
  int role = 1;
  const Prior* prior = nullptr;
  int signal = 0;
  FeedbackMode feedback = FeedbackMode::full;
  std::uint64_t seed = 0;
  SideSignalSource* side = nullptr;  // only read by external_signal_leader
};

class Learner {
 public:
  virtual ~Learner() = default;

  // Strategy for the next round. Must alternate with observe().
  const MixedStrategy& act();
  void observe(const FeedbackRecord& fb);

  int role() const { return ctx_.role; }
  int signal() const { return ctx_.signal; }
  // Rounds completed so far.
  std::size_t rounds() const { return t_; }
  // Side signal consumed in the latest act(), or -1.
  virtual int last_side_signal() const { return -1; }

 protected:
  Learner(const LearnerContext& ctx, bool needs_full);

  // t is the 1-based index of the round being played.
  virtual MixedStrategy do_act(std::size_t t) = 0;
  virtual void do_observe(std::size_t t, const FeedbackRecord& fb) = 0;

  const LearnerContext& ctx() const { return ctx_; }
  const Prior& prior() const { return *ctx_.prior; }
  std::size_t num_own() const { return prior().game(0).num_actions(ctx_.role); }
  std::size_t num_opp() const { return prior().game(0).num_actions(opponent_of(ctx_.role)); }

 private:
  LearnerContext ctx_;
  bool needs_full_;
  bool awaiting_observe_ = false;
  std::size_t t_ = 0;
  MixedStrategy current_;
};

// Validates the spec and constructs the learner.
std::unique_ptr<Learner> learner_init(const LearnerSpec& spec, const LearnerContext& ctx);

// Round-t epoch horizon of the doubling schedule: starts at `initial` and
// doubles whenever t reaches it.
std::size_t doubling_horizon(std::size_t t, std::size_t initial);

// Stationary distribution p = p Q of a row-stochastic n x n matrix; power
// iteration from `warm` to an L1 residual of 1e-10, with a direct linear solve
// when iteration stalls.
std::vector<double> stationary_distribution(const std::vector<double>& q, std::size_t n,
                                            const std::vector<double>& warm);

}  // namespace stacklab
