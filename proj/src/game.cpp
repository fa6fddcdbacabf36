#include "stacklab/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stacklab/kernels.hpp"

namespace stacklab {
namespace {

std::string default_label(std::size_t index) {
  if (index < 26) return std::string(1, static_cast<char>('A' + index));
  return "a" + std::to_string(index);
}

}  // namespace

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("matrix must have at least one row and column");
  }
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) {
      throw std::invalid_argument("matrix rows have inconsistent lengths");
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::min() const { return *std::min_element(data_.begin(), data_.end()); }
double Matrix::max() const { return *std::max_element(data_.begin(), data_.end()); }

void check_player(int player) {
  if (player != 1 && player != 2) {
    throw std::invalid_argument("player must be 1 or 2, got " + std::to_string(player));
  }
}

GameMatrix::GameMatrix(std::string name, Matrix u1, Matrix u2,
                       std::vector<std::string> labels1,
                       std::vector<std::string> labels2)
    : name_(std::move(name)),
      u1_(std::move(u1)),
      u2_(std::move(u2)),
      labels1_(std::move(labels1)),
      labels2_(std::move(labels2)) {
  if (u1_.rows() == 0 || u1_.cols() == 0) {
    throw std::invalid_argument("game '" + name_ + "' has an empty action set");
  }
  if (u1_.rows() != u2_.rows() || u1_.cols() != u2_.cols()) {
    throw std::invalid_argument("game '" + name_ + "': u1 and u2 dimensions differ");
  }
  for (const Matrix* m : {&u1_, &u2_}) {
    for (double v : m->data()) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("game '" + name_ + "' has a non-finite utility");
      }
    }
  }
  if (labels1_.empty()) {
    for (std::size_t i = 0; i < n1(); ++i) labels1_.push_back(default_label(i));
  }
  if (labels2_.empty()) {
    for (std::size_t j = 0; j < n2(); ++j) labels2_.push_back(default_label(n1() + j));
  }
  if (labels1_.size() != n1() || labels2_.size() != n2()) {
    throw std::invalid_argument("game '" + name_ + "': label count does not match actions");
  }
  u1_t_ = u1_.transposed();
  u2_t_ = u2_.transposed();
}

std::size_t GameMatrix::num_actions(int player) const {
  check_player(player);
  return player == 1 ? n1() : n2();
}

Prior::Prior(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("prior must have at least one game");
  double total = 0.0;
  for (const Entry& e : entries_) {
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw std::invalid_argument("prior weights must be nonnegative");
    }
    if (e.game.n1() != entries_.front().game.n1() ||
        e.game.n2() != entries_.front().game.n2()) {
      throw std::invalid_argument("all games in a prior must share the same action-set shape");
    }
    total += e.weight;
  }
  if (std::abs(total - 1.0) > kConstructionTol) {
    throw std::invalid_argument("prior weights must sum to 1");
  }
}

std::vector<double> Prior::weights() const {
  std::vector<double> w;
  w.reserve(entries_.size());
  for (const Entry& e : entries_) w.push_back(e.weight);
  return w;
}

int Prior::mode() const {
  int best = 0;
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].weight > entries_[best].weight) best = static_cast<int>(i);
  }
  return best;
}

std::pair<double, double> Prior::utility_range(int player) const {
  check_player(player);
  double lo = entries_.front().game.utility(player).min();
  double hi = entries_.front().game.utility(player).max();
  for (const Entry& e : entries_) {
    lo = std::min(lo, e.game.utility(player).min());
    hi = std::max(hi, e.game.utility(player).max());
  }
  return {lo, hi};
}

MixedStrategy::MixedStrategy(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("mixed strategy must be nonempty");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("mixed strategy has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > kConstructionTol) {
    throw std::invalid_argument("mixed strategy entries must sum to 1");
  }
}

MixedStrategy MixedStrategy::pure(std::size_t n, std::size_t action) {
  if (action >= n) throw std::invalid_argument("pure action index out of range");
  std::vector<double> p(n, 0.0);
  p[action] = 1.0;
  return MixedStrategy(std::move(p));
}

MixedStrategy MixedStrategy::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform strategy needs at least one action");
  return MixedStrategy(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

MixedStrategy MixedStrategy::blend(const MixedStrategy& a, const MixedStrategy& b,
                                   double alpha) {
  if (a.size() != b.size()) throw std::invalid_argument("blend: size mismatch");
  std::vector<double> p(a.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = (1.0 - alpha) * a[i] + alpha * b[i];
  }
  return MixedStrategy(std::move(p));
}

std::size_t MixedStrategy::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

SignalModel::SignalModel(double p1_in, double p2_in) : p1(p1_in), p2(p2_in) {
  for (double p : {p1, p2}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("signal precision must lie in [0, 1]");
    }
  }
}

CSP::CSP(Matrix mass) : mass_(std::move(mass)) {
  double total = 0.0;
  for (double v : mass_.data()) {
    if (!(v >= -kAggregateTol)) throw std::invalid_argument("CSP has a negative cell");
    total += v;
  }
  if (std::abs(total - 1.0) > kAggregateTol) {
    throw std::invalid_argument("CSP mass must sum to 1");
  }
}

int sample_signal(const Prior& prior, int realized_index, double precision, Rng& rng) {
  if (realized_index < 0 || static_cast<std::size_t>(realized_index) >= prior.size()) {
    throw std::invalid_argument("realized game index out of range");
  }
  if (rng.uniform() < precision) return realized_index;
  const std::vector<double> w = prior.weights();
  return rng.categorical(w);
}

double expected_utility(const GameMatrix& g, const MixedStrategy& x,
                        const MixedStrategy& y, int player) {
  check_player(player);
  if (x.size() != g.n1() || y.size() != g.n2()) {
    throw std::invalid_argument("strategy dimensions do not match the game");
  }
  const Matrix& u = g.utility(player);
  double uy[64];
  std::vector<double> heap;
  double* buf = uy;
  if (u.rows() > 64) {
    heap.resize(u.rows());
    buf = heap.data();
  }
  kernels::active().gemv(u.data().data(), u.rows(), u.cols(), y.probs().data(), buf);
  return kernels::active().dot(x.probs().data(), buf, u.rows());
}

double expected_utility(const GameMatrix& g, const CSP& csp, int player) {
  check_player(player);
  if (csp.mass().rows() != g.n1() || csp.mass().cols() != g.n2()) {
    throw std::invalid_argument("CSP dimensions do not match the game");
  }
  return kernels::dot(csp.mass().data(), g.utility(player).data());
}

CSP csp_from_trajectory(const Trajectory& traj) {
  if (traj.rounds.empty()) throw std::invalid_argument("trajectory is empty");
  const std::size_t n1 = traj.rounds.front().x.size();
  const std::size_t n2 = traj.rounds.front().y.size();
  Matrix acc(n1, n2);
  const double w = 1.0 / static_cast<double>(traj.rounds.size());
  for (const StrategyProfile& r : traj.rounds) {
    if (r.x.size() != n1 || r.y.size() != n2) {
      throw std::invalid_argument("trajectory strategies change dimension");
    }
    kernels::active().outer_acc(acc.data().data(), r.x.probs().data(), n1,
                                r.y.probs().data(), n2, w);
  }
  return CSP(std::move(acc));
}

CSP mix_csps(std::span<const std::pair<double, CSP>> parts) {
  if (parts.empty()) throw std::invalid_argument("mix_csps needs at least one part");
  double total = 0.0;
  const Matrix& first = parts.front().second.mass();
  Matrix acc(first.rows(), first.cols());
  for (const auto& [w, csp] : parts) {
    if (!(w >= 0.0)) throw std::invalid_argument("mixture weights must be nonnegative");
    if (csp.mass().rows() != acc.rows() || csp.mass().cols() != acc.cols()) {
      throw std::invalid_argument("mixture parts have different shapes");
    }
    total += w;
    kernels::axpy(w, csp.mass().data(), acc.data());
  }
  if (std::abs(total - 1.0) > kConstructionTol) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
  return CSP(std::move(acc));
}

}  // namespace stacklab
