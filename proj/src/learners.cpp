#include "stacklab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stacklab/errors.hpp"
#include "stacklab/kernels.hpp"

namespace stacklab {

const char* to_string(FeedbackMode m) { return m == FeedbackMode::full ? "full" : "bandit"; }

FeedbackMode parse_feedback_mode(std::string_view s) {
  if (s == "full") return FeedbackMode::full;
  if (s == "bandit") return FeedbackMode::bandit;
  throw std::invalid_argument("unknown feedback mode '" + std::string(s) + "'");
}

namespace {

constexpr std::pair<LearnerKind, const char*> kKindNames[] = {
    {LearnerKind::constant_action, "constant_action"},
    {LearnerKind::multiplicative_weights, "multiplicative_weights"},
    {LearnerKind::bandit_exp3, "bandit_exp3"},
    {LearnerKind::no_swap_regret_full, "no_swap_regret_full"},
    {LearnerKind::no_swap_regret_bandit, "no_swap_regret_bandit"},
    {LearnerKind::stackelberg_leader, "stackelberg_leader"},
    {LearnerKind::best_responder, "best_responder"},
    {LearnerKind::mimic_deviation, "mimic_deviation"},
    {LearnerKind::reveal_then_follow_leader, "reveal_then_follow_leader"},
    {LearnerKind::infer_then_commit_follower, "infer_then_commit_follower"},
    {LearnerKind::external_signal_leader, "external_signal_leader"},
};

}  // namespace

const char* to_string(LearnerKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

LearnerKind parse_learner_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (s == name) return kind;
  }
  throw std::invalid_argument("unknown learner kind '" + std::string(s) + "'");
}

LearnerSpec LearnerSpec::constant(std::size_t action) {
  LearnerSpec s;
  s.kind = LearnerKind::constant_action;
  s.params.action = action;
  return s;
}

LearnerSpec LearnerSpec::of(LearnerKind kind) {
  LearnerSpec s;
  s.kind = kind;
  return s;
}

LearnerSpec LearnerSpec::mimic(const LearnerSpec& base, int fixed_signal) {
  LearnerSpec s;
  s.kind = LearnerKind::mimic_deviation;
  s.params.base = std::make_shared<const LearnerSpec>(base);
  s.params.fixed_signal = fixed_signal;
  return s;
}

bool requires_full_information(const LearnerSpec& spec) {
  switch (spec.kind) {
    case LearnerKind::multiplicative_weights:
    case LearnerKind::no_swap_regret_full:
    case LearnerKind::best_responder:
    case LearnerKind::reveal_then_follow_leader:
    case LearnerKind::infer_then_commit_follower:
      return true;
    case LearnerKind::mimic_deviation:
      return spec.params.base && requires_full_information(*spec.params.base);
    default:
      return false;
  }
}

void validate_spec(const LearnerSpec& spec, int role, const Prior& prior) {
  check_player(role);
  const LearnerParams& p = spec.params;
  const std::string kind = to_string(spec.kind);
  if (p.eta && !(*p.eta > 0.0 && std::isfinite(*p.eta))) {
    throw std::invalid_argument(kind + ": eta must be positive");
  }
  if (p.exploration && !(*p.exploration >= 0.0 && *p.exploration <= 1.0)) {
    throw std::invalid_argument(kind + ": exploration must lie in [0, 1]");
  }
  if (!(p.b > 0.0 && p.b < 1.0)) throw std::invalid_argument(kind + ": b must lie in (0, 1)");
  if (!(p.a >= 0.0 && p.a < 1.0)) throw std::invalid_argument(kind + ": a must lie in [0, 1)");
  if (!(p.b < 1.0 - p.a)) throw std::invalid_argument(kind + ": b must be below 1 - a");
  if (p.initial_horizon < 1) throw std::invalid_argument(kind + ": initial_horizon must be >= 1");
  switch (spec.kind) {
    case LearnerKind::constant_action:
      if (!p.action) throw std::invalid_argument("constant_action requires 'action'");
      if (*p.action >= prior.game(0).num_actions(role)) {
        throw std::invalid_argument("constant_action: action index out of range");
      }
      break;
    case LearnerKind::mimic_deviation:
      if (!p.base) throw std::invalid_argument("mimic_deviation requires 'base'");
      if (!p.fixed_signal) throw std::invalid_argument("mimic_deviation requires 'fixed_signal'");
      if (*p.fixed_signal < 0 || static_cast<std::size_t>(*p.fixed_signal) >= prior.size()) {
        throw std::invalid_argument("mimic_deviation: fixed_signal out of range");
      }
      validate_spec(*p.base, role, prior);
      break;
    case LearnerKind::reveal_then_follow_leader:
      if (role != 1) throw std::invalid_argument("reveal_then_follow_leader plays as player 1 only");
      break;
    case LearnerKind::infer_then_commit_follower:
      if (role != 2) throw std::invalid_argument("infer_then_commit_follower plays as player 2 only");
      break;
    default:
      break;
  }
}

SideSignalSource::SideSignalSource(const Prior& prior, int realized_index, std::uint64_t seed)
    : prior_(&prior), realized_(realized_index), rng_(seed), others_(prior.weights()) {
  if (realized_index < 0 || static_cast<std::size_t>(realized_index) >= prior.size()) {
    throw std::invalid_argument("side signal: realized index out of range");
  }
  others_[static_cast<std::size_t>(realized_index)] = 0.0;
}

int SideSignalSource::draw(std::size_t t) {
  if (t == 0) throw std::invalid_argument("side signal rounds are 1-based");
  const double accuracy = 1.0 - 1.0 / static_cast<double>(t);
  const double u = rng_.uniform();
  double rest = 0.0;
  for (double w : others_) rest += w;
  if (u < accuracy || rest <= 0.0) return realized_;
  return rng_.categorical(others_);
}

Learner::Learner(const LearnerContext& ctx, bool needs_full) : ctx_(ctx), needs_full_(needs_full) {}

const MixedStrategy& Learner::act() {
  if (awaiting_observe_) throw ProtocolError("act() called twice without observe()");
  MixedStrategy next = do_act(t_ + 1);
  if (next.size() != num_own()) throw std::logic_error("learner emitted a strategy of wrong size");
  current_ = std::move(next);
  awaiting_observe_ = true;
  return current_;
}

void Learner::observe(const FeedbackRecord& fb) {
  if (!awaiting_observe_) throw ProtocolError("observe() called before act()");
  if (needs_full_ && !fb.opponent_strategy) {
    throw ProtocolError("this learner requires full-information feedback");
  }
  if (fb.own_strategy.size() != num_own() ||
      (fb.opponent_strategy && fb.opponent_strategy->size() != num_opp())) {
    throw std::invalid_argument("feedback strategy dimension mismatch");
  }
  do_observe(t_ + 1, fb);
  ++t_;
  awaiting_observe_ = false;
}

std::size_t doubling_horizon(std::size_t t, std::size_t initial) {
  std::size_t h = std::max<std::size_t>(initial, 1);
  while (t >= h) h *= 2;
  return h;
}

std::vector<double> stationary_distribution(const std::vector<double>& q, std::size_t n,
                                            const std::vector<double>& warm) {
  constexpr double kResidualTol = 1e-10;
  constexpr int kMaxPowerSteps = 64;
  const auto& k = kernels::active();
  std::vector<double> p = warm.size() == n ? warm : std::vector<double>(n, 1.0 / n);
  std::vector<double> next(n);
  for (int it = 0; it < kMaxPowerSteps; ++it) {
    k.gevm(p.data(), q.data(), n, n, next.data());
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) resid += std::abs(next[i] - p[i]);
    p.swap(next);
    if (resid <= kResidualTol) {
      double total = 0.0;
      for (double& v : p) {
        v = std::max(v, 0.0);
        total += v;
      }
      for (double& v : p) v /= total;
      return p;
    }
  }
  // Solve (Q^T - I) p = 0 with the last equation replaced by sum(p) = 1,
  // Gaussian elimination with partial pivoting.
  std::vector<double> a(n * (n + 1), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * (n + 1) + j] = q[j * n + i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j <= n; ++j) a[(n - 1) * (n + 1) + j] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r * (n + 1) + c]) > std::abs(a[piv * (n + 1) + c])) piv = r;
    }
    for (std::size_t j = 0; j <= n; ++j) std::swap(a[c * (n + 1) + j], a[piv * (n + 1) + j]);
    const double d = a[c * (n + 1) + c];
    if (std::abs(d) < 1e-300) continue;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r * (n + 1) + c] / d;
      if (f != 0.0) k.axpy(-f, &a[c * (n + 1)], &a[r * (n + 1)], n + 1);
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i * (n + 1) + i];
    p[i] = std::abs(d) < 1e-300 ? 0.0 : std::max(a[i * (n + 1) + n] / d, 0.0);
    total += p[i];
  }
  if (!(total > 0.0)) return std::vector<double>(n, 1.0 / n);
  for (double& v : p) v /= total;
  return p;
}

namespace {

// Maps the player's utilities to losses in [0, 1] using the utility range
// over every game in the prior.
class LossScale {
 public:
  LossScale(const Prior& prior, int role) {
    auto [lo, hi] = prior.utility_range(role);
    hi_ = hi;
    inv_range_ = hi > lo ? 1.0 / (hi - lo) : 0.0;
  }
  double operator()(double u) const { return (hi_ - u) * inv_range_; }

 private:
  double hi_ = 0.0;
  double inv_range_ = 0.0;
};

// p[a] proportional to exp(-eta * cum_loss[a]).
void hedge(const double* cum_loss, std::size_t n, double eta, double* out) {
  const double lo = *std::min_element(cum_loss, cum_loss + n);
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    out[a] = std::exp(-eta * (cum_loss[a] - lo));
    total += out[a];
  }
  for (std::size_t a = 0; a < n; ++a) out[a] /= total;
}

double log_n(std::size_t n) { return std::log(static_cast<double>(n)); }

double default_eta(std::size_t n, std::size_t t, bool bandit) {
  const double scale = bandit ? static_cast<double>(n) : 1.0;
  return std::sqrt(log_n(n) / (scale * static_cast<double>(t)));
}

double default_exploration(std::size_t n, std::size_t t) {
  return std::min(1.0, std::sqrt(static_cast<double>(n) * log_n(n) / static_cast<double>(t)));
}

MixedStrategy normalized(std::vector<double> p) {
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return MixedStrategy(std::move(p));
}

class ConstantAction final : public Learner {
 public:
  ConstantAction(const LearnerContext& ctx, std::size_t action)
      : Learner(ctx, false), strategy_(MixedStrategy::pure(num_own(), action)) {}

 protected:
  MixedStrategy do_act(std::size_t) override { return strategy_; }
  void do_observe(std::size_t, const FeedbackRecord&) override {}

 private:
  MixedStrategy strategy_;
};

// Full-information Hedge over own actions.
class MultiplicativeWeights final : public Learner {
 public:
  MultiplicativeWeights(const LearnerContext& ctx, std::optional<double> eta)
      : Learner(ctx, true),
        eta_(eta),
        game_(&prior().game(static_cast<std::size_t>(ctx.signal))),
        scale_(prior(), ctx.role),
        loss_(num_own(), 0.0),
        v_(num_own()) {}

 protected:
  MixedStrategy do_act(std::size_t t) override {
    std::vector<double> p(num_own());
    hedge(loss_.data(), p.size(), eta_.value_or(default_eta(p.size(), t, false)), p.data());
    return normalized(std::move(p));
  }
  void do_observe(std::size_t, const FeedbackRecord& fb) override {
    const Matrix& m = game_->own_payoffs(role());
    kernels::active().gemv(m.data().data(), m.rows(), m.cols(),
                           fb.opponent_strategy->probs().data(), v_.data());
    for (std::size_t a = 0; a < v_.size(); ++a) loss_[a] += scale_(v_[a]);
  }

 private:
  std::optional<double> eta_;
  const GameMatrix* game_;
  LossScale scale_;
  std::vector<double> loss_;
  std::vector<double> v_;
};

// EXP3: Hedge on importance-weighted loss estimates mixed with uniform
// exploration; emits the sampled pure action.
class BanditExp3 final : public Learner {
 public:
  BanditExp3(const LearnerContext& ctx, std::optional<double> eta, std::optional<double> explore)
      : Learner(ctx, false),
        eta_(eta),
        explore_(explore),
        scale_(prior(), ctx.role),
        rng_(ctx.seed),
        loss_(num_own(), 0.0),
        p_(num_own()) {}

 protected:
  MixedStrategy do_act(std::size_t t) override {
    const std::size_t n = num_own();
    hedge(loss_.data(), n, eta_.value_or(default_eta(n, t, true)), p_.data());
    const double gamma = explore_.value_or(default_exploration(n, t));
    for (double& v : p_) v = (1.0 - gamma) * v + gamma / static_cast<double>(n);
    played_ = static_cast<std::size_t>(rng_.categorical(p_));
    return MixedStrategy::pure(n, played_);
  }
  void do_observe(std::size_t, const FeedbackRecord& fb) override {
    loss_[played_] += scale_(fb.own_utility) / p_[played_];
  }

 private:
  std::optional<double> eta_;
  std::optional<double> explore_;
  LossScale scale_;
  Rng rng_;
  std::vector<double> loss_;
  std::vector<double> p_;
  std::size_t played_ = 0;
};

// Swap-regret reduction: one Hedge instance per own action; the played
// distribution is the stationary distribution of the experts' stacked
// recommendations, and expert a is charged p[a] times the loss vector.
class NoSwapRegret final : public Learner {
 public:
  NoSwapRegret(const LearnerContext& ctx, bool bandit, std::optional<double> eta,
               std::optional<double> explore)
      : Learner(ctx, !bandit),
        bandit_(bandit),
        eta_(eta),
        explore_(explore),
        game_(&prior().game(static_cast<std::size_t>(ctx.signal))),
        scale_(prior(), ctx.role),
        rng_(ctx.seed),
        n_(num_own()),
        loss_(n_ * n_, 0.0),
        q_(n_ * n_),
        p_(n_, 1.0 / static_cast<double>(n_)),
        p_explore_(n_),
        v_(n_) {}

 protected:
  MixedStrategy do_act(std::size_t t) override {
    const double eta = eta_.value_or(default_eta(n_, t, bandit_));
    for (std::size_t a = 0; a < n_; ++a) hedge(&loss_[a * n_], n_, eta, &q_[a * n_]);
    p_ = stationary_distribution(q_, n_, p_);
    if (!bandit_) return MixedStrategy(p_);
    const double gamma = explore_.value_or(default_exploration(n_, t));
    for (std::size_t a = 0; a < n_; ++a) {
      p_explore_[a] = (1.0 - gamma) * p_[a] + gamma / static_cast<double>(n_);
    }
    played_ = static_cast<std::size_t>(rng_.categorical(p_explore_));
    return MixedStrategy::pure(n_, played_);
  }

  void do_observe(std::size_t, const FeedbackRecord& fb) override {
    if (bandit_) {
      const double est = scale_(fb.own_utility) / p_explore_[played_];
      for (std::size_t a = 0; a < n_; ++a) loss_[a * n_ + played_] += p_[a] * est;
      return;
    }
    const Matrix& m = game_->own_payoffs(role());
    kernels::active().gemv(m.data().data(), m.rows(), m.cols(),
                           fb.opponent_strategy->probs().data(), v_.data());
    for (double& v : v_) v = scale_(v);
    kernels::active().outer_acc(loss_.data(), p_.data(), n_, v_.data(), n_, 1.0);
  }

 private:
  bool bandit_;
  std::optional<double> eta_;
  std::optional<double> explore_;
  const GameMatrix* game_;
  LossScale scale_;
  Rng rng_;
  std::size_t n_;
  std::vector<double> loss_;  // n x n, row a = expert a's cumulative losses
  std::vector<double> q_;
  std::vector<double> p_;
  std::vector<double> p_explore_;
  std::vector<double> v_;
  std::size_t played_ = 0;
};

// Commitment with a doubling-epoch perturbation schedule delta = T_m^-b.
class EpochCommitment {
 public:
  EpochCommitment(double b, std::size_t initial) : b_(b), initial_(initial) {}

  MixedStrategy strategy(const CommitmentComponents& c, std::size_t t) const {
    const std::size_t horizon = doubling_horizon(t, initial_);
    const double delta = std::pow(static_cast<double>(horizon), -b_);
    if (!(c.margin > 0.0)) return c.stackelberg.leader_strategy;
    return perturbed_commitment(c, delta).strategy;
  }

 private:
  double b_;
  std::size_t initial_;
};

// Commits to the signaled game's perturbed Stackelberg strategy. If the
// follower response admits no positive margin, plays the plain commitment.
class StackelbergLeader final : public Learner {
 public:
  StackelbergLeader(const LearnerContext& ctx, const LearnerParams& p)
      : Learner(ctx, false),
        initial_(p.initial_horizon),
        schedule_(p.b, p.initial_horizon),
        components_(commitment_components(prior().game(static_cast<std::size_t>(ctx.signal)),
                                          ctx.role)) {}

 protected:
  MixedStrategy do_act(std::size_t t) override {
    const std::size_t horizon = doubling_horizon(t, initial_);
    if (horizon != cached_horizon_) {
      cached_ = schedule_.strategy(components_, t);
      cached_horizon_ = horizon;
    }
    return cached_;
  }
  void do_observe(std::size_t, const FeedbackRecord&) override {}

 private:
  std::size_t initial_;
  EpochCommitment schedule_;
  CommitmentComponents components_;
  std::size_t cached_horizon_ = 0;
  MixedStrategy cached_;
};

// Best response to the opponent's previous strategy (uniform before any
// observation), lowest index on ties.
class BestResponder final : public Learner {
 public:
  explicit BestResponder(const LearnerContext& ctx)
      : Learner(ctx, true),
        game_(&prior().game(static_cast<std::size_t>(ctx.signal))),
        last_opp_(MixedStrategy::uniform(num_opp())) {}

 protected:
  MixedStrategy do_act(std::size_t) override {
    return MixedStrategy::pure(num_own(), best_response(*game_, role(), last_opp_));
  }
  void do_observe(std::size_t, const FeedbackRecord& fb) override {
    last_opp_ = *fb.opponent_strategy;
  }

 private:
  const GameMatrix* game_;
  MixedStrategy last_opp_;
};

// Plays the base algorithm as if the signal were fixed_signal.
class MimicDeviation final : public Learner {
 public:
  MimicDeviation(const LearnerContext& ctx, std::unique_ptr<Learner> inner)
      : Learner(ctx, false), inner_(std::move(inner)) {}
  int last_side_signal() const override { return inner_->last_side_signal(); }

 protected:
  MixedStrategy do_act(std::size_t) override { return inner_->act(); }
  void do_observe(std::size_t, const FeedbackRecord& fb) override { inner_->observe(fb); }

 private:
  std::unique_ptr<Learner> inner_;
};

// Round 1: pure action (signal mod n1). Afterwards best-responds to the
// opponent's previous strategy in the signaled game.
class RevealThenFollow final : public Learner {
 public:
  explicit RevealThenFollow(const LearnerContext& ctx)
      : Learner(ctx, true), game_(&prior().game(static_cast<std::size_t>(ctx.signal))) {}

 protected:
  MixedStrategy do_act(std::size_t t) override {
    if (t == 1) {
      return MixedStrategy::pure(num_own(), static_cast<std::size_t>(signal()) % num_own());
    }
    return MixedStrategy::pure(num_own(), best_response(*game_, role(), *last_opp_));
  }
  void do_observe(std::size_t, const FeedbackRecord& fb) override {
    last_opp_ = fb.opponent_strategy;
  }

 private:
  const GameMatrix* game_;
  std::optional<MixedStrategy> last_opp_;
};

// Round 1: action 0. Reads the game from the opponent's round-1 action
// (smallest game index congruent to it modulo the opponent's action count)
// and commits to that game's unperturbed Stackelberg strategy.
class InferThenCommit final : public Learner {
 public:
  explicit InferThenCommit(const LearnerContext& ctx) : Learner(ctx, true) {}

 protected:
  MixedStrategy do_act(std::size_t t) override {
    if (t == 1) return MixedStrategy::pure(num_own(), 0);
    return *commitment_;
  }
  void do_observe(std::size_t t, const FeedbackRecord& fb) override {
    if (t != 1) return;
    const std::size_t a = fb.opponent_strategy->argmax();
    std::size_t inferred = static_cast<std::size_t>(prior().mode());
    for (std::size_t g = 0; g < prior().size(); ++g) {
      if (g % num_opp() == a) {
        inferred = g;
        break;
      }
    }
    commitment_ = stackelberg_value(prior().game(inferred), role()).leader_strategy;
  }

 private:
  std::optional<MixedStrategy> commitment_;
};

// Each round commits to the perturbed Stackelberg strategy of the game named
// by that round's side signal.
class ExternalSignalLeader final : public Learner {
 public:
  ExternalSignalLeader(const LearnerContext& ctx, const LearnerParams& p)
      : Learner(ctx, false), schedule_(p.b, p.initial_horizon), components_(prior().size()) {
    if (ctx.side == nullptr) {
      throw std::invalid_argument("external_signal_leader needs a side-signal source");
    }
  }
  int last_side_signal() const override { return last_; }

 protected:
  MixedStrategy do_act(std::size_t t) override {
    last_ = ctx().side->draw(t);
    auto& c = components_[static_cast<std::size_t>(last_)];
    if (!c) c = commitment_components(prior().game(static_cast<std::size_t>(last_)), role());
    return schedule_.strategy(*c, t);
  }
  void do_observe(std::size_t, const FeedbackRecord&) override {}

 private:
  EpochCommitment schedule_;
  std::vector<std::optional<CommitmentComponents>> components_;
  int last_ = -1;
};

}  // namespace

std::unique_ptr<Learner> learner_init(const LearnerSpec& spec, const LearnerContext& ctx) {
  if (ctx.prior == nullptr) throw std::invalid_argument("learner context has no prior");
  validate_spec(spec, ctx.role, *ctx.prior);
  if (ctx.signal < 0 || static_cast<std::size_t>(ctx.signal) >= ctx.prior->size()) {
    throw std::invalid_argument("signal index out of range");
  }
  const LearnerParams& p = spec.params;
  switch (spec.kind) {
    case LearnerKind::constant_action:
      return std::make_unique<ConstantAction>(ctx, *p.action);
    case LearnerKind::multiplicative_weights:
      return std::make_unique<MultiplicativeWeights>(ctx, p.eta);
    case LearnerKind::bandit_exp3:
      return std::make_unique<BanditExp3>(ctx, p.eta, p.exploration);
    case LearnerKind::no_swap_regret_full:
      return std::make_unique<NoSwapRegret>(ctx, false, p.eta, p.exploration);
    case LearnerKind::no_swap_regret_bandit:
      return std::make_unique<NoSwapRegret>(ctx, true, p.eta, p.exploration);
    case LearnerKind::stackelberg_leader:
      return std::make_unique<StackelbergLeader>(ctx, p);
    case LearnerKind::best_responder:
      return std::make_unique<BestResponder>(ctx);
    case LearnerKind::mimic_deviation: {
      LearnerContext inner = ctx;
      inner.signal = *p.fixed_signal;
      return std::make_unique<MimicDeviation>(ctx, learner_init(*p.base, inner));
    }
    case LearnerKind::reveal_then_follow_leader:
      return std::make_unique<RevealThenFollow>(ctx);
    case LearnerKind::infer_then_commit_follower:
      return std::make_unique<InferThenCommit>(ctx);
    case LearnerKind::external_signal_leader:
      return std::make_unique<ExternalSignalLeader>(ctx, p);
  }
  throw std::invalid_argument("unhandled learner kind");
}

}  // namespace stacklab
