#include <doctest.h>

#include <sstream>

#include "stacklab/builtin_games.hpp"
#include "stacklab/io.hpp"
#include "test_util.hpp"

namespace stacklab {
namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

TEST_SUITE("io") {

TEST_CASE("parse errors carry line and column") {
  const std::string msg =
      error_of([] { parse_json_text("{\n  \"a\": 1,\n  \"b\": ]\n}", "cfg.json"); });
  CHECK(msg.rfind("cfg.json:3:", 0) == 0);
  CHECK(error_of([] { load_json_file("/nonexistent/file.json"); }) != "");
}

TEST_CASE("games round-trip") {
  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    const GameMatrix g = testing::random_int_game(rng, 1 + k % 3, 1 + k % 4);
    const GameMatrix back = game_from_json(game_to_json(g));
    CHECK(back.u1() == g.u1());
    CHECK(back.u2() == g.u2());
    CHECK(back.labels1() == g.labels1());
    CHECK(back.labels2() == g.labels2());
  }
  const GameMatrix g = fig1_g1(0.5);
  const GameMatrix back = game_from_json(game_to_json(g));
  CHECK(back.u1() == g.u1());
  CHECK(back.name() == g.name());
}

TEST_CASE("game validation through json") {
  CHECK_THROWS_AS(game_from_json(json::parse(R"({"u1": [[1, 2]], "u2": [[1]]})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(game_from_json(json::parse(R"({"u1": [[1]], "u2": [[1]], "extra": 1})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(game_from_json(json::parse(R"({"u1": [["x"]], "u2": [[1]]})")),
                  std::invalid_argument);
  const GameMatrix g = game_from_json(json::parse(R"({"u1": [[3]], "u2": [[4]]})"));
  CHECK(g.labels1() == std::vector<std::string>{"A"});
  CHECK(g.labels2() == std::vector<std::string>{"B"});
}

TEST_CASE("priors accept builtin references and explicit lists") {
  CHECK(prior_from_json("fig1:gamma=1").size() == 2);
  CHECK(prior_from_json("example41").game(1).u2() == example41_g2().u2());
  CHECK(prior_from_json("fig1_g2:gamma=1").size() == 1);
  const Prior p = prior_from_json(json::parse(
      R"({"games": [{"weight": 0.25, "game": "example41_g1"}, {"weight": 0.75, "game": "example41_g2"}]})"));
  CHECK(p.weight(1) == 0.75);
  const Prior back = prior_from_json(prior_to_json(p));
  CHECK(back.weights() == p.weights());
  CHECK(back.game(0).u1() == p.game(0).u1());
  CHECK_THROWS_AS(prior_from_json("nope"), std::invalid_argument);
  CHECK_THROWS_AS(prior_from_json(json::parse(
                      R"({"games": [{"weight": 0.2, "game": "example41_g1"}]})")),
                  std::invalid_argument);
}

TEST_CASE("specs round-trip, including nested mimic") {
  LearnerSpec s = LearnerSpec::of(LearnerKind::stackelberg_leader);
  s.params.b = 0.2;
  s.params.initial_horizon = 32;
  const LearnerSpec m = LearnerSpec::mimic(s, 1);
  const LearnerSpec back = learner_spec_from_json(learner_spec_to_json(m));
  CHECK(back.kind == LearnerKind::mimic_deviation);
  CHECK(back.params.fixed_signal == 1);
  REQUIRE(back.params.base);
  CHECK(back.params.base->params.b == 0.2);
  CHECK(back.params.base->params.initial_horizon == 32);
  CHECK(learner_spec_from_json(json::parse(R"({"kind": "constant_action", "params": {"action": 1}})"))
            .params.action == 1u);
  CHECK_THROWS_AS(learner_spec_from_json(json::parse(R"({"kind": "constant_action", "params": {"speed": 1}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(learner_spec_from_json(json::parse(R"({"kind": "wizard"})")), std::invalid_argument);
}

TEST_CASE("shipped configs load and round-trip") {
  for (const char* name : {"commit_vs_bandit.json", "reveal_follow.json"}) {
    const json doc = load_json_file(std::string(STACKLAB_SOURCE_DIR) + "/configs/" + name);
    const ExperimentConfig cfg = config_from_json(doc);
    CHECK_NOTHROW(cfg.validate());
    const ExperimentConfig back = config_from_json(config_to_json(cfg));
    CHECK(back.horizon == cfg.horizon);
    CHECK(back.trials == cfg.trials);
    CHECK(back.master_seed == cfg.master_seed);
    CHECK(back.checkpoints == cfg.checkpoints);
    CHECK(back.spec1.kind == cfg.spec1.kind);
    CHECK(back.spec2.kind == cfg.spec2.kind);
    CHECK(back.feedback_mode == cfg.feedback_mode);
    CHECK(back.signal_model.p2 == cfg.signal_model.p2);
    CHECK(back.prior.weights() == cfg.prior.weights());
  }
}

TEST_CASE("config rejects unknown keys") {
  json doc = config_to_json(ExperimentConfig(fig1_prior(1.0)));
  doc["horizn"] = 10;
  CHECK_THROWS_AS(config_from_json(doc), std::invalid_argument);
}

TEST_CASE("dotted overrides") {
  json doc = config_to_json(ExperimentConfig(fig1_prior(1.0)));
  apply_override(doc, "signal_model.p2=0.5");
  apply_override(doc, "horizon=77");
  apply_override(doc, "feedback_mode=bandit");
  apply_override(doc, "learner2.params.eta=0.1");
  const ExperimentConfig cfg = config_from_json(doc);
  CHECK(cfg.signal_model.p2 == 0.5);
  CHECK(cfg.horizon == 77);
  CHECK(cfg.feedback_mode == FeedbackMode::bandit);
  CHECK(cfg.spec2.params.eta == 0.1);
  CHECK_THROWS_AS(apply_override(doc, "signal_model.p3=0.5"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(doc, "horizon"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(doc, "nothing.here=1"), std::invalid_argument);
}

TEST_CASE("trial csv layout") {
  ExperimentConfig cfg(fig1_prior(1.0));
  cfg.horizon = 4;
  cfg.trials = 2;
  cfg.threads = 1;
  std::ostringstream out;
  write_trials_csv(out, estimate(cfg));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "trial,realized_game,s1,s2,t,avg_u1,avg_u2,ext_regret1,ext_regret2,swap_regret1,swap_regret2");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 * 3);  // checkpoints 1, 2, 4 per trial
}

TEST_CASE("report json shapes") {
  const json s = stackelberg_to_json(stackelberg_value(fig1_g2(1.0), 2), fig1_g2(1.0), 2);
  CHECK(s["value"].get<double>() == doctest::Approx(2.0));
  CHECK(s["commitment"]["D"].get<double>() == doctest::Approx(1.0));
  CHECK(s["follower_action"] == "B");
  CHECK(stackval_prior_to_json(fig1_prior(1.0), 2)["value"].get<double>() == doctest::Approx(1.5));
  const json m = mean_ci_to_json(mean_ci({1.0}));
  CHECK(m["half_width"].is_null());
  const json r = revelation_to_json(revelation_analysis(example41_prior(), 2), example41_prior());
  CHECK(r["any_revealing"] == true);
  CHECK(r["actions"][0]["action"] == "C");
}

}  // TEST_SUITE

}  // namespace
}  // namespace stacklab
