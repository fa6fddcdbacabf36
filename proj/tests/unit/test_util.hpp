#pragma once

// Generators and brute-force oracles shared by the unit tests.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "stacklab/game.hpp"
#include "stacklab/rng.hpp"

namespace stacklab::testing {

inline GameMatrix random_int_game(Rng& rng, std::size_t n1, std::size_t n2, int lo = -10,
                                  int hi = 10) {
  Matrix u1(n1, n2), u2(n1, n2);
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  for (double& v : u1.data()) v = lo + static_cast<int>(rng.next_u64() % span);
  for (double& v : u2.data()) v = lo + static_cast<int>(rng.next_u64() % span);
  return GameMatrix("random", std::move(u1), std::move(u2));
}

inline MixedStrategy random_strategy(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) {
    v = -std::log(1.0 - rng.uniform());
    total += v;
  }
  for (double& v : p) v /= total;
  return MixedStrategy(std::move(p));
}

// Optimistic Stackelberg value by scanning the leader's 1-simplex (leader has
// exactly two actions) on a uniform grid.
struct GridResult {
  double value = -std::numeric_limits<double>::infinity();
  double q = 0.0;  // weight on the leader's first action
  std::size_t follower = 0;
};

inline GridResult grid_stackelberg(const GameMatrix& g, int leader, double step = 1e-4,
                                   double tie_tol = 1e-7) {
  const Matrix& ul = leader == 1 ? g.u1() : g.u2();
  const Matrix& uf = leader == 1 ? g.u2() : g.u1();
  auto lu = [&](std::size_t i, std::size_t j) { return leader == 1 ? ul(i, j) : ul(j, i); };
  auto fu = [&](std::size_t i, std::size_t j) { return leader == 1 ? uf(i, j) : uf(j, i); };
  const std::size_t nf = leader == 1 ? g.n2() : g.n1();
  GridResult best;
  const long steps = std::lround(1.0 / step);
  for (long k = 0; k <= steps; ++k) {
    const double q = static_cast<double>(k) / static_cast<double>(steps);
    double fbest = -std::numeric_limits<double>::infinity();
    std::vector<double> fv(nf), lv(nf);
    for (std::size_t y = 0; y < nf; ++y) {
      fv[y] = q * fu(0, y) + (1 - q) * fu(1, y);
      lv[y] = q * lu(0, y) + (1 - q) * lu(1, y);
      fbest = std::max(fbest, fv[y]);
    }
    for (std::size_t y = 0; y < nf; ++y) {
      if (fv[y] >= fbest - tie_tol && lv[y] > best.value) {
        best.value = lv[y];
        best.q = q;
        best.follower = y;
      }
    }
  }
  return best;
}

}  // namespace stacklab::testing
