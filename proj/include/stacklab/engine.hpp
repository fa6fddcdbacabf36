#pragma once

// Trial simulation and Monte-Carlo aggregation.
//
// Seeding: trial k uses derive_seed(master_seed, k). Inside a trial, signal
// draws use sub-stream 0, learner i sub-stream i, pure-action realization
// sub-stream 3 and player i's side-signal source sub-stream 10 + i. The
// realized game of trial k is the inverse prior CDF at frac(u + k / trials),
// with u a single uniform drawn from the master seed, so each trial's game is
// marginally prior-distributed and the realized counts across trials are
// balanced.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stacklab/game.hpp"
#include "stacklab/learners.hpp"

namespace stacklab {

struct ExperimentConfig {
  explicit ExperimentConfig(Prior p) : prior(std::move(p)) {}

  Prior prior;
  SignalModel signal_model;
  LearnerSpec spec1 = LearnerSpec::constant(0);
  LearnerSpec spec2 = LearnerSpec::constant(0);
  std::size_t horizon = 1000;
  std::size_t trials = 32;
  FeedbackMode feedback_mode = FeedbackMode::full;
  bool pure_realization = false;
  std::uint64_t master_seed = 0;
  // Empty means powers of two up to the horizon, plus the horizon itself.
  std::vector<std::size_t> checkpoints;
  // Worker count; 0 means one per hardware thread.
  std::size_t threads = 0;

  const LearnerSpec& spec(int player) const { return player == 1 ? spec1 : spec2; }
  LearnerSpec& spec(int player) { return player == 1 ? spec1 : spec2; }
  std::vector<std::size_t> effective_checkpoints() const;
  // Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

struct TrialSetup {
  std::size_t trial = 0;
  int realized = 0;
  int s1 = 0;
  int s2 = 0;
};

int realized_game_for_trial(const ExperimentConfig& cfg, std::size_t trial);
TrialSetup trial_setup(const ExperimentConfig& cfg, std::size_t trial);

// One round as recorded: strategies are the emitted ones, or the realized
// pure actions in pure-realization mode; utilities are what each player was
// told.
struct RoundRecord {
  std::size_t t = 0;
  const MixedStrategy* x = nullptr;
  const MixedStrategy* y = nullptr;
  double u1 = 0.0;
  double u2 = 0.0;
  int side1 = -1;
  int side2 = -1;
};
using RoundObserver = std::function<void(const RoundRecord&)>;

// Per-round averages at a checkpoint.
struct CheckpointRow {
  std::size_t t = 0;
  double avg_u1 = 0.0;
  double avg_u2 = 0.0;
  double ext_regret1 = 0.0;
  double ext_regret2 = 0.0;
  double swap_regret1 = 0.0;
  double swap_regret2 = 0.0;
};

struct TrialSummary {
  TrialSetup setup;
  std::vector<CheckpointRow> rows;
  CSP csp{Matrix(1, 1, 1.0)};
  const CheckpointRow& final_row() const { return rows.back(); }
};

// Plays one trial; `observer` (optional) sees every round in order.
TrialSummary run_trial_stream(const ExperimentConfig& cfg, std::size_t trial,
                              const RoundObserver& observer = nullptr);

// Plays one trial and keeps the full trajectory.
Trajectory run_trial(const ExperimentConfig& cfg, std::size_t trial);

// Calls fn(i) for i in [0, n) on up to `threads` workers (0 = hardware).
// Rethrows the first exception raised by any call.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

std::vector<TrialSummary> run_trials(const ExperimentConfig& cfg);

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ95OneSided = 1.6448536269514722;

// Sample mean with a 95% normal-approximation interval. When trials are
// grouped by realized game and every group has at least two members, the
// standard error is the stratified one.
struct MeanCI {
  double mean = 0.0;
  double std_error = 0.0;
  double half_width = 0.0;
  std::size_t n = 0;
  double lo() const { return mean - half_width; }
  double hi() const { return mean + half_width; }
};
MeanCI mean_ci(const std::vector<double>& values, const std::vector<int>& strata = {});

struct GroupMean {
  std::string key;
  int game = -1;
  int s1 = -1;
  int s2 = -1;
  std::size_t count = 0;
  double avg_u1 = 0.0;
  double avg_u2 = 0.0;
};

struct CurvePoint {
  std::size_t t = 0;
  MeanCI avg_u1, avg_u2, ext_regret1, ext_regret2, swap_regret1, swap_regret2;
};

struct EstimateReport {
  std::size_t trials = 0;
  std::size_t horizon = 0;
  MeanCI avg_u1, avg_u2;
  MeanCI ext_regret1, ext_regret2, swap_regret1, swap_regret2;
  std::vector<GroupMean> by_game;
  std::vector<GroupMean> by_signal_pair;
  std::vector<CurvePoint> curves;
  std::vector<TrialSummary> per_trial;
};

EstimateReport summarize(const ExperimentConfig& cfg, std::vector<TrialSummary> trials);
EstimateReport estimate(const ExperimentConfig& cfg);

// Mean joint distribution with per-cell standard errors.
struct CspEstimate {
  CSP csp{Matrix(1, 1, 1.0)};
  Matrix std_error;
  std::size_t count = 0;
};

struct CspReport {
  double p2 = 0.0;
  // Indexed [realized game][player 2's signal]; absent when no trial fell in
  // the bucket.
  std::vector<std::vector<std::optional<CspEstimate>>> by_signal_pair;
  // Per realized game i: sum_j w_ij * CSP_ij with w_ij = p2 * [i == j] +
  // (1 - p2) * prior(j); absent if a bucket with positive weight is empty.
  std::vector<std::optional<CspEstimate>> by_game;
  // Per realized game, averaging trials directly.
  std::vector<std::optional<CspEstimate>> direct_by_game;
};

CspReport csp_report(const ExperimentConfig& cfg, const std::vector<TrialSummary>& trials);
CspReport estimate_csps(const ExperimentConfig& cfg);

}  // namespace stacklab
