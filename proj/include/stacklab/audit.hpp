#pragma once

// Meta-game checks built on the engine: approximate pure-equilibrium audits
// against a library of algorithm deviations, the fig1 CSP claims verifier,
// one-round revelation analysis and belief meters.
//
// An audit pass is finite-horizon evidence against a finite deviation list,
// not a proof of equilibrium.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stacklab/engine.hpp"

namespace stacklab {

struct Deviation {
  std::string label;  // e.g. "mimic:G1", "constant:A", "best_responder"
  int player = 1;
  LearnerSpec spec;
};

struct DeviationLibrary {
  std::vector<Deviation> deviations;
  // Deviations left out because the configured feedback or role rules them out.
  std::vector<std::string> skipped;

  // Per player, in order: mimic of the player's own spec for each signal,
  // each constant action, best_responder, stackelberg_leader, and for
  // player 2 infer_then_commit_follower.
  static DeviationLibrary standard(const ExperimentConfig& cfg);
};

struct DeviationResult {
  Deviation deviation;
  MeanCI utility;
  MeanCI gain;  // deviated minus baseline utility of the deviating player
};

struct AuditReport {
  double epsilon = 0.0;
  bool common_random_numbers = true;
  MeanCI baseline_u1, baseline_u2;
  std::vector<DeviationResult> results;
  std::vector<std::string> skipped;
  // Index into results of the largest gain per player, or -1.
  int best1 = -1;
  int best2 = -1;
  bool pass = true;
  int fail_player = 0;
  std::string fail_deviation;
};

// Re-runs the experiment with each deviation substituted. With common random
// numbers every run shares the master seed and gains are paired per trial;
// otherwise each deviation gets its own derived seed. A deviation fails the
// audit when its gain's lower 95% bound exceeds epsilon; the reported failure
// is the largest such gain (earliest on ties).
AuditReport audit_pne(const ExperimentConfig& cfg, const DeviationLibrary& lib, double epsilon,
                      bool common_random_numbers = true);

struct MassEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double lower = 0.0;  // one-sided 95%
  double upper = 0.0;
};

struct ClaimsReport {
  double p_star = 0.0;
  double gamma = 0.0;
  double tol = 0.0;
  MassEstimate csp1_BD, csp1_AD, csp2_BD;
  bool csp1_BD_ok = false;  // upper <= gamma / 8 + tol
  bool csp1_AD_ok = false;  // upper <= gamma / 8 + tol
  bool csp2_BD_ok = false;  // lower >= 1/2 - tol
  MeanCI avg_u2;
  double benchmark = 0.0;  // prior Stackelberg value of player 2
  bool benchmark_achieved = false;  // avg_u2 >= benchmark - tol
  MeanCI mimic_gain;  // player 1 always playing as if the game were the first
  bool contradiction = false;
};

// Requires the prior to be the uniform fig1 pair at gamma = (1-p*)/(1+p*) and
// p2 <= p*; throws std::invalid_argument otherwise.
ClaimsReport verify_claims(const ExperimentConfig& cfg, double p_star, double tol = 0.05);

struct ActionRevelation {
  std::size_t action = 0;
  std::string label;
  std::vector<std::pair<double, double>> ranges;  // per game
  bool revealing = false;
};

struct RevelationReport {
  int player = 1;
  std::vector<ActionRevelation> actions;
  bool any_revealing = false;
};

RevelationReport revelation_analysis(const Prior& prior, int player);

enum class BeliefKind { nearest_best_response, utility_likelihood, external_signal };
const char* to_string(BeliefKind k);
BeliefKind parse_belief_kind(std::string_view s);

struct BeliefPoint {
  std::size_t t = 0;
  double error = 0.0;
};

struct BeliefTraceReport {
  BeliefKind kind = BeliefKind::utility_likelihood;
  int player = 2;
  double tau = 0.0;
  std::vector<BeliefPoint> checkpoints;
  double final_error = 0.0;
  bool success = false;
};

// Belief of `player` about the realized game at each checkpoint t, computed
// from rounds before t (external_signal reads the side signal of round t).
// With no usable history the belief is the prior mode.
BeliefTraceReport belief_trace(const ExperimentConfig& cfg, BeliefKind kind, double tau,
                               int player = 2);

}  // namespace stacklab
