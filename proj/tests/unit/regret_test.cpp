#include <doctest.h>

#include <cmath>

#include "stacklab/builtin_games.hpp"
#include "stacklab/regret.hpp"
#include "stacklab/solve.hpp"
#include "test_util.hpp"

namespace stacklab {
namespace {

using testing::random_int_game;
using testing::random_strategy;

Trajectory make_trajectory(std::vector<StrategyProfile> rounds) {
  Trajectory traj;
  traj.rounds = std::move(rounds);
  return traj;
}

const MixedStrategy& own_of(const StrategyProfile& p, int player) {
  return player == 1 ? p.x : p.y;
}
const MixedStrategy& opp_of(const StrategyProfile& p, int player) {
  return player == 1 ? p.y : p.x;
}

// u_player(a, opp) for a pure own action against a mixed opponent.
double pure_utility(const GameMatrix& g, int player, std::size_t a, const MixedStrategy& opp) {
  const std::size_t n = g.num_actions(player);
  const MixedStrategy own = MixedStrategy::pure(n, a);
  return player == 1 ? expected_utility(g, own, opp, 1) : expected_utility(g, opp, own, 2);
}

double realized(const Trajectory& traj, const GameMatrix& g, int player) {
  double total = 0.0;
  for (const StrategyProfile& p : traj.rounds) total += expected_utility(g, p.x, p.y, player);
  return total;
}

double brute_external(const Trajectory& traj, const GameMatrix& g, int player) {
  double best = -INFINITY;
  for (std::size_t a = 0; a < g.num_actions(player); ++a) {
    double total = 0.0;
    for (const StrategyProfile& p : traj.rounds) total += pure_utility(g, player, a, opp_of(p, player));
    best = std::max(best, total);
  }
  return best - realized(traj, g, player);
}

// Enumerates every map f from own actions to own actions.
double brute_swap(const Trajectory& traj, const GameMatrix& g, int player) {
  const std::size_t n = g.num_actions(player);
  std::size_t maps = 1;
  for (std::size_t i = 0; i < n; ++i) maps *= n;
  double best = -INFINITY;
  std::vector<std::size_t> f(n);
  for (std::size_t code = 0; code < maps; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = c % n;
      c /= n;
    }
    double total = 0.0;
    for (const StrategyProfile& p : traj.rounds) {
      const MixedStrategy& own = own_of(p, player);
      for (std::size_t a = 0; a < n; ++a) {
        total += own[a] * pure_utility(g, player, f[a], opp_of(p, player));
      }
    }
    best = std::max(best, total);
  }
  return best - realized(traj, g, player);
}

Trajectory random_trajectory(Rng& rng, const GameMatrix& g, std::size_t rounds) {
  std::vector<StrategyProfile> r;
  for (std::size_t t = 0; t < rounds; ++t) {
    r.push_back({random_strategy(rng, g.n1()), random_strategy(rng, g.n2())});
  }
  return make_trajectory(std::move(r));
}

TEST_SUITE("regret") {

TEST_CASE("two-round example in the first fig1 game") {
  const GameMatrix g = fig1_g1(1.0);
  const MixedStrategy a = MixedStrategy::pure(2, 0);
  const Trajectory traj =
      make_trajectory({{a, MixedStrategy::pure(2, 0)}, {a, MixedStrategy::pure(2, 1)}});
  CHECK(external_regret(traj, g, 2) == doctest::Approx(33.0));
  const RegretReport r = swap_regret(traj, g, 2);
  CHECK(r.swap_regret == doctest::Approx(33.0));
  CHECK(r.swap_targets == std::vector<std::size_t>{0, 0});
  CHECK(brute_swap(traj, g, 2) == doctest::Approx(33.0));
}

TEST_CASE("per-round best responses have no external regret") {
  Rng rng(3);
  const GameMatrix g = random_int_game(rng, 3, 3);
  std::vector<StrategyProfile> rounds;
  for (int t = 0; t < 20; ++t) {
    const MixedStrategy x = random_strategy(rng, 3);
    const MixedStrategy y = MixedStrategy::pure(3, best_response(g, 2, x));
    rounds.push_back({x, y});
  }
  const Trajectory traj = make_trajectory(rounds);
  // A per-round best reply dominates any fixed action round by round.
  CHECK(external_regret(traj, g, 2) <= 1e-9);
  CHECK(swap_regret(traj, g, 2).swap_regret <= 1e-9);
}

TEST_CASE("a fixed best reply to a constant opponent has no regret") {
  const GameMatrix g = fig1_g1(1.0);
  std::vector<StrategyProfile> rounds(
      10, StrategyProfile{MixedStrategy::pure(2, 0), MixedStrategy::pure(2, 0)});
  const Trajectory traj = make_trajectory(rounds);
  for (int player : {1, 2}) {
    CHECK(external_regret(traj, g, player) == doctest::Approx(0.0));
    CHECK(swap_regret(traj, g, player).swap_regret == doctest::Approx(0.0));
  }
}

TEST_CASE("matches brute-force enumeration on random trajectories") {
  Rng rng(99);
  for (int k = 0; k < 100; ++k) {
    const GameMatrix g = random_int_game(rng, 1 + rng.next_u64() % 3, 1 + rng.next_u64() % 3);
    const Trajectory traj = random_trajectory(rng, g, 1 + rng.next_u64() % 8);
    for (int player : {1, 2}) {
      const double ext = external_regret(traj, g, player);
      const double sw = swap_regret(traj, g, player).swap_regret;
      CHECK(ext == doctest::Approx(brute_external(traj, g, player)).epsilon(1e-9));
      CHECK(sw == doctest::Approx(brute_swap(traj, g, player)).epsilon(1e-9));
      CHECK(sw >= ext - 1e-9);
    }
  }
}

TEST_CASE("streaming accumulator agrees with the batch form at every prefix") {
  Rng rng(12);
  const GameMatrix g = random_int_game(rng, 3, 2);
  const Trajectory traj = random_trajectory(rng, g, 15);
  RegretAccumulator acc(g, 1);
  Trajectory prefix;
  for (const StrategyProfile& p : traj.rounds) {
    acc.add(p.x.probs(), p.y.probs());
    prefix.rounds.push_back(p);
    CHECK(acc.external() == doctest::Approx(external_regret(prefix, g, 1)).epsilon(1e-12));
    CHECK(acc.swap() == doctest::Approx(swap_regret(prefix, g, 1).swap_regret).epsilon(1e-12));
  }
  CHECK(acc.rounds() == 15);
}

}  // TEST_SUITE

}  // namespace
}  // namespace stacklab
