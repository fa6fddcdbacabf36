#include <doctest.h>

#include <atomic>
#include <cmath>
#include <map>

#include "stacklab/builtin_games.hpp"
#include "stacklab/engine.hpp"
#include "stacklab/errors.hpp"
#include "test_util.hpp"

namespace stacklab {
namespace {

ExperimentConfig constant_pair(Prior prior) {
  ExperimentConfig cfg(std::move(prior));
  cfg.spec1 = LearnerSpec::constant(0);
  cfg.spec2 = LearnerSpec::constant(0);
  cfg.horizon = 50;
  cfg.trials = 32;
  cfg.threads = 1;
  cfg.master_seed = 5;
  return cfg;
}

ExperimentConfig learning_pair() {
  ExperimentConfig cfg(fig1_prior(1.0));
  cfg.signal_model = SignalModel(1.0, 0.5);
  cfg.spec1 = LearnerSpec::of(LearnerKind::stackelberg_leader);
  cfg.spec2 = LearnerSpec::of(LearnerKind::no_swap_regret_bandit);
  cfg.feedback_mode = FeedbackMode::bandit;
  cfg.horizon = 2000;
  cfg.trials = 12;
  cfg.master_seed = 99;
  cfg.threads = 1;
  return cfg;
}

void check_identical(const EstimateReport& a, const EstimateReport& b) {
  REQUIRE(a.per_trial.size() == b.per_trial.size());
  for (std::size_t k = 0; k < a.per_trial.size(); ++k) {
    const TrialSummary& x = a.per_trial[k];
    const TrialSummary& y = b.per_trial[k];
    CHECK(x.setup.realized == y.setup.realized);
    CHECK(x.setup.s2 == y.setup.s2);
    CHECK(x.csp.mass() == y.csp.mass());
    REQUIRE(x.rows.size() == y.rows.size());
    for (std::size_t i = 0; i < x.rows.size(); ++i) {
      CHECK(x.rows[i].avg_u1 == y.rows[i].avg_u1);
      CHECK(x.rows[i].avg_u2 == y.rows[i].avg_u2);
      CHECK(x.rows[i].swap_regret2 == y.rows[i].swap_regret2);
    }
  }
  CHECK(a.avg_u1.mean == b.avg_u1.mean);
  CHECK(a.avg_u2.half_width == b.avg_u2.half_width);
}

TEST_SUITE("engine") {

TEST_CASE("config validation and checkpoints") {
  ExperimentConfig cfg = constant_pair(fig1_prior(1.0));
  cfg.horizon = 100;
  CHECK(cfg.effective_checkpoints() ==
        std::vector<std::size_t>{1, 2, 4, 8, 16, 32, 64, 100});
  cfg.horizon = 64;
  CHECK(cfg.effective_checkpoints().back() == 64);
  cfg.checkpoints = {10, 5};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.checkpoints = {65};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.checkpoints = {};
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.trials = 1;
  cfg.spec2 = LearnerSpec::of(LearnerKind::reveal_then_follow_leader);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("mean_ci") {
  const MeanCI a = mean_ci({1.0, 2.0, 3.0});
  CHECK(a.mean == doctest::Approx(2.0));
  CHECK(a.std_error == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(a.half_width == doctest::Approx(kZ95 / std::sqrt(3.0)));
  const MeanCI one = mean_ci({4.0});
  CHECK(one.mean == 4.0);
  CHECK(std::isnan(one.half_width));
  // Within-stratum spread only.
  const MeanCI s = mean_ci({0.0, 0.0, 10.0, 10.0}, {0, 0, 1, 1});
  CHECK(s.mean == doctest::Approx(5.0));
  CHECK(s.half_width == 0.0);
  CHECK_THROWS_AS(mean_ci({1.0, 2.0}, {0}), std::invalid_argument);
}

TEST_CASE("constant pair on a single game gives exact utilities") {
  const EstimateReport r = estimate(constant_pair(Prior::single(fig1_g1(1.0))));
  CHECK(r.avg_u1.mean == 16.0);
  CHECK(r.avg_u2.mean == 1.0);
  CHECK(r.avg_u1.half_width == 0.0);
  CHECK(r.avg_u2.half_width == 0.0);
  for (const TrialSummary& t : r.per_trial) CHECK(t.csp(0, 0) == 1.0);
}

TEST_CASE("constant pair on the uniform prior averages the two games") {
  const EstimateReport r = estimate(constant_pair(fig1_prior(1.0)));
  CHECK(r.avg_u1.mean == doctest::Approx((16.0 + 1.0) / 2));
  CHECK(r.avg_u2.mean == doctest::Approx(1.0));
  CHECK(std::isfinite(r.avg_u1.half_width));
}

TEST_CASE("trajectories of constant pairs are constant profiles") {
  ExperimentConfig cfg = constant_pair(fig1_prior(1.0));
  cfg.spec1 = LearnerSpec::constant(1);
  const Trajectory traj = run_trial(cfg, 3);
  REQUIRE(traj.horizon() == cfg.horizon);
  for (const StrategyProfile& p : traj.rounds) {
    CHECK(p.x == MixedStrategy::pure(2, 1));
    CHECK(p.y == MixedStrategy::pure(2, 0));
  }
}

TEST_CASE("perfect signals equal the realized game") {
  ExperimentConfig cfg = constant_pair(fig1_prior(1.0));
  cfg.signal_model = SignalModel(1.0, 1.0);
  for (std::size_t k = 0; k < 100; ++k) {
    const TrialSetup s = trial_setup(cfg, k);
    CHECK(s.s1 == s.realized);
    CHECK(s.s2 == s.realized);
  }
}

TEST_CASE("signal-pair frequencies follow the signal model") {
  for (double p2 : {0.0, 0.5, 0.9}) {
    ExperimentConfig cfg = constant_pair(fig1_prior(1.0));
    cfg.signal_model = SignalModel(1.0, p2);
    cfg.trials = 10000;
    std::map<std::pair<int, int>, int> counts;
    for (std::size_t k = 0; k < cfg.trials; ++k) {
      const TrialSetup s = trial_setup(cfg, k);
      ++counts[{s.realized, s.s2}];
    }
    for (int g : {0, 1}) {
      for (int s : {0, 1}) {
        const double expected = 0.5 * (g == s ? (1 + p2) / 2 : (1 - p2) / 2);
        const double sigma = std::sqrt(expected * (1 - expected) / cfg.trials);
        INFO("p2=" << p2 << " game=" << g << " signal=" << s);
        CHECK(std::abs(counts[{g, s}] / 10000.0 - expected) <= 3 * sigma + 1e-12);
      }
    }
  }
}

TEST_CASE("realized games are balanced across trials") {
  ExperimentConfig cfg = constant_pair(fig1_prior(1.0));
  int first = 0;
  for (std::size_t k = 0; k < cfg.trials; ++k) first += realized_game_for_trial(cfg, k) == 0;
  CHECK(first == 16);
}

TEST_CASE("reports are deterministic and independent of the worker count") {
  ExperimentConfig cfg = learning_pair();
  const EstimateReport a = estimate(cfg);
  const EstimateReport b = estimate(cfg);
  check_identical(a, b);
  cfg.threads = 3;
  check_identical(a, estimate(cfg));
  cfg.master_seed = 100;
  CHECK(estimate(cfg).avg_u2.mean != a.avg_u2.mean);
}

TEST_CASE("conditional means reproduce the unconditional mean") {
  const EstimateReport r = estimate(learning_pair());
  for (const auto* groups : {&r.by_game, &r.by_signal_pair}) {
    double u1 = 0.0, u2 = 0.0;
    std::size_t count = 0;
    for (const GroupMean& m : *groups) {
      u1 += m.avg_u1 * m.count;
      u2 += m.avg_u2 * m.count;
      count += m.count;
    }
    CHECK(count == r.trials);
    CHECK(std::abs(u1 / count - r.avg_u1.mean) <= 1e-9);
    CHECK(std::abs(u2 / count - r.avg_u2.mean) <= 1e-9);
  }
}

TEST_CASE("curves end at the final-round estimate") {
  const EstimateReport r = estimate(learning_pair());
  REQUIRE_FALSE(r.curves.empty());
  CHECK(r.curves.back().t == 2000);
  CHECK(r.curves.back().avg_u1.mean == r.avg_u1.mean);
}

TEST_CASE("pure realization records one-hot profiles") {
  ExperimentConfig cfg(fig1_prior(1.0));
  cfg.spec1 = LearnerSpec::of(LearnerKind::multiplicative_weights);
  cfg.spec2 = LearnerSpec::of(LearnerKind::no_swap_regret_full);
  cfg.pure_realization = true;
  cfg.horizon = 200;
  cfg.trials = 2;
  const Trajectory traj = run_trial(cfg, 0);
  for (const StrategyProfile& p : traj.rounds) {
    CHECK(p.x[p.x.argmax()] == 1.0);
    CHECK(p.y[p.y.argmax()] == 1.0);
  }
}

TEST_CASE("csp report of a constant pair") {
  ExperimentConfig cfg = constant_pair(fig1_prior(1.0));
  cfg.signal_model = SignalModel(1.0, 0.5);
  const CspReport r = estimate_csps(cfg);
  for (const auto& row : r.by_signal_pair)
    for (const auto& cell : row) {
      REQUIRE(cell.has_value());
      CHECK(cell->csp(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  for (const auto& g : r.by_game) {
    REQUIRE(g.has_value());
    CHECK(g->csp(0, 0) == doctest::Approx(1.0));
  }
}

TEST_CASE("empty buckets are absent") {
  ExperimentConfig cfg = constant_pair(fig1_prior(1.0));
  cfg.signal_model = SignalModel(1.0, 1.0);
  const CspReport r = estimate_csps(cfg);
  CHECK_FALSE(r.by_signal_pair[0][1].has_value());
  CHECK_FALSE(r.by_signal_pair[1][0].has_value());
  CHECK(r.by_game[0].has_value());  // off-diagonal weight is zero
}

TEST_CASE("a mimic leader makes the realized game irrelevant to the profile") {
  ExperimentConfig cfg(fig1_prior(1.0));
  cfg.signal_model = SignalModel(1.0, 0.5);
  cfg.spec1 = LearnerSpec::mimic(LearnerSpec::of(LearnerKind::stackelberg_leader), 0);
  cfg.spec2 = LearnerSpec::of(LearnerKind::no_swap_regret_full);
  cfg.horizon = 500;
  cfg.trials = 40;
  const CspReport r = estimate_csps(cfg);
  for (int j : {0, 1}) {
    REQUIRE(r.by_signal_pair[0][j].has_value());
    REQUIRE(r.by_signal_pair[1][j].has_value());
    const Matrix& a = r.by_signal_pair[0][j]->csp.mass();
    const Matrix& b = r.by_signal_pair[1][j]->csp.mass();
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < 2; ++k) CHECK(a(i, k) == doctest::Approx(b(i, k)).epsilon(1e-12));
  }
}

TEST_CASE("mixture weights") {
  ExperimentConfig cfg(fig1_prior(1.0));
  cfg.signal_model = SignalModel(1.0, 0.5);
  cfg.spec1 = LearnerSpec::of(LearnerKind::stackelberg_leader);
  cfg.spec2 = LearnerSpec::of(LearnerKind::no_swap_regret_full);
  cfg.horizon = 300;
  cfg.trials = 40;
  const CspReport r = estimate_csps(cfg);
  for (int i : {0, 1}) {
    double expected = 0.0;
    for (int j : {0, 1}) {
      const double w = 0.5 * (i == j) + 0.5 * 0.5;
      expected += w * r.by_signal_pair[i][j]->csp(1, 1);
    }
    CHECK(r.by_game[i]->csp(1, 1) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("protocol violations propagate out of the engine") {
  ExperimentConfig cfg = constant_pair(fig1_prior(1.0));
  cfg.spec2 = LearnerSpec::of(LearnerKind::best_responder);
  cfg.feedback_mode = FeedbackMode::bandit;
  cfg.threads = 2;
  CHECK_THROWS_AS(estimate(cfg), ProtocolError);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace stacklab
