#pragma once

// Value types for stage games, priors, signals, trajectories and correlated
// strategy profiles. Everything here is immutable after construction and safe
// to share read-only across trial workers.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stacklab/rng.hpp"

namespace stacklab {

inline constexpr double kConstructionTol = 1e-9;
inline constexpr double kAggregateTol = 1e-6;

// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  Matrix transposed() const;
  double min() const;
  double max() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Throws std::invalid_argument unless player is 1 or 2.
void check_player(int player);
inline int opponent_of(int player) { return 3 - player; }

// A bimatrix stage game. Player 1 picks rows, player 2 picks columns.
class GameMatrix {
 public:
  GameMatrix(std::string name, Matrix u1, Matrix u2,
             std::vector<std::string> labels1 = {},
             std::vector<std::string> labels2 = {});

  const std::string& name() const { return name_; }
  std::size_t n1() const { return u1_.rows(); }
  std::size_t n2() const { return u1_.cols(); }
  std::size_t num_actions(int player) const;
  const Matrix& u1() const { return u1_; }
  const Matrix& u2() const { return u2_; }
  const Matrix& utility(int player) const { return player == 1 ? u1_ : u2_; }
  const std::vector<std::string>& labels1() const { return labels1_; }
  const std::vector<std::string>& labels2() const { return labels2_; }
  const std::vector<std::string>& labels(int player) const {
    return player == 1 ? labels1_ : labels2_;
  }

  // The player's utilities indexed [own action][opponent action].
  const Matrix& own_payoffs(int player) const { return player == 1 ? u1_ : u2_t_; }
  // The opponent's utilities indexed [player's action][opponent action].
  const Matrix& opponent_payoffs(int player) const { return player == 1 ? u2_ : u1_t_; }

 private:
  std::string name_;
  Matrix u1_, u2_, u1_t_, u2_t_;
  std::vector<std::string> labels1_, labels2_;
};

// Finite-support distribution over games of one common shape.
class Prior {
 public:
  struct Entry {
    GameMatrix game;
    double weight;
  };
  explicit Prior(std::vector<Entry> entries);
  static Prior single(GameMatrix g) { return Prior({{std::move(g), 1.0}}); }

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const GameMatrix& game(std::size_t i) const { return entries_.at(i).game; }
  double weight(std::size_t i) const { return entries_.at(i).weight; }
  std::vector<double> weights() const;
  std::size_t n1() const { return entries_.front().game.n1(); }
  std::size_t n2() const { return entries_.front().game.n2(); }
  // Highest-weight index, lowest index on ties.
  int mode() const;
  // Range of the player's utilities over every supported game.
  std::pair<double, double> utility_range(int player) const;

 private:
  std::vector<Entry> entries_;
};

class MixedStrategy {
 public:
  MixedStrategy() = default;
  explicit MixedStrategy(std::vector<double> probs);
  static MixedStrategy pure(std::size_t n, std::size_t action);
  static MixedStrategy uniform(std::size_t n);
  // (1 - alpha) * a + alpha * b
  static MixedStrategy blend(const MixedStrategy& a, const MixedStrategy& b, double alpha);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  // Index of the largest entry, lowest index on ties.
  std::size_t argmax() const;

  friend bool operator==(const MixedStrategy&, const MixedStrategy&) = default;

 private:
  std::vector<double> probs_;
};

struct SignalModel {
  double p1 = 1.0;
  double p2 = 0.0;
  SignalModel() = default;
  SignalModel(double p1_in, double p2_in);
  double precision(int player) const { return player == 1 ? p1 : p2; }
};

struct StrategyProfile {
  MixedStrategy x;
  MixedStrategy y;
};

struct Trajectory {
  std::vector<StrategyProfile> rounds;
  int realized_game_index = 0;
  std::pair<int, int> signal_indices{0, 0};
  // Per-round side signals consumed by a player, empty when none were used.
  std::vector<int> side_signals1, side_signals2;

  std::size_t horizon() const { return rounds.size(); }
};

// Joint distribution over action pairs.
class CSP {
 public:
  explicit CSP(Matrix mass);
  const Matrix& mass() const { return mass_; }
  double operator()(std::size_t a1, std::size_t a2) const { return mass_(a1, a2); }

 private:
  Matrix mass_;
};

struct FeedbackRecord {
  MixedStrategy own_strategy;
  std::optional<MixedStrategy> opponent_strategy;  // absent under bandit feedback
  double own_utility = 0.0;
};

// Signal index: the realized index with probability `precision`, otherwise an
// independent draw from the prior weights.
int sample_signal(const Prior& prior, int realized_index, double precision, Rng& rng);

// x^T u_player y
double expected_utility(const GameMatrix& g, const MixedStrategy& x,
                        const MixedStrategy& y, int player);

// Expected utility of the player under a joint distribution.
double expected_utility(const GameMatrix& g, const CSP& csp, int player);

// (1/T) sum_t x_t (outer) y_t
CSP csp_from_trajectory(const Trajectory& traj);

CSP mix_csps(std::span<const std::pair<double, CSP>> parts);

}  // namespace stacklab
