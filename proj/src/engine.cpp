#include "stacklab/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "stacklab/kernels.hpp"
#include "stacklab/regret.hpp"

namespace stacklab {
namespace {

constexpr std::uint64_t kStratificationStream = ~std::uint64_t{0};
constexpr std::uint64_t kNatureStream = 0;
constexpr std::uint64_t kRealizationStream = 3;
constexpr std::uint64_t kSideSignalStream = 10;

std::string signal_label(int s) { return "G" + std::to_string(s + 1); }

}  // namespace

std::vector<std::size_t> ExperimentConfig::effective_checkpoints() const {
  if (!checkpoints.empty()) return checkpoints;
  std::vector<std::size_t> out;
  for (std::size_t t = 1; t <= horizon; t *= 2) out.push_back(t);
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  std::size_t prev = 0;
  for (std::size_t t : checkpoints) {
    if (t < 1 || t > horizon) throw std::invalid_argument("checkpoints must lie in [1, horizon]");
    if (t <= prev) throw std::invalid_argument("checkpoints must be strictly increasing");
    prev = t;
  }
  validate_spec(spec1, 1, prior);
  validate_spec(spec2, 2, prior);
}

int realized_game_for_trial(const ExperimentConfig& cfg, std::size_t trial) {
  Rng rng(derive_seed(cfg.master_seed, kStratificationStream));
  double u = rng.uniform() + static_cast<double>(trial % cfg.trials) / static_cast<double>(cfg.trials);
  u -= std::floor(u);
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t g = 0; g < cfg.prior.size(); ++g) {
    const double w = cfg.prior.weight(g);
    if (w <= 0.0) continue;
    last_positive = static_cast<int>(g);
    cum += w;
    if (u < cum) return static_cast<int>(g);
  }
  return last_positive;
}

TrialSetup trial_setup(const ExperimentConfig& cfg, std::size_t trial) {
  TrialSetup s;
  s.trial = trial;
  s.realized = realized_game_for_trial(cfg, trial);
  Rng nature(derive_seed(derive_seed(cfg.master_seed, trial), kNatureStream));
  s.s1 = sample_signal(cfg.prior, s.realized, cfg.signal_model.p1, nature);
  s.s2 = sample_signal(cfg.prior, s.realized, cfg.signal_model.p2, nature);
  return s;
}

TrialSummary run_trial_stream(const ExperimentConfig& cfg, std::size_t trial,
                              const RoundObserver& observer) {
  cfg.validate();
  const std::uint64_t seed = derive_seed(cfg.master_seed, trial);
  TrialSummary summary;
  summary.setup = trial_setup(cfg, trial);
  const int realized = summary.setup.realized;
  const GameMatrix& game = cfg.prior.game(static_cast<std::size_t>(realized));
  const std::size_t n1 = game.n1();
  const std::size_t n2 = game.n2();
  const bool full = cfg.feedback_mode == FeedbackMode::full;

  SideSignalSource side1(cfg.prior, realized, derive_seed(seed, kSideSignalStream + 1));
  SideSignalSource side2(cfg.prior, realized, derive_seed(seed, kSideSignalStream + 2));
  LearnerContext c1{1, &cfg.prior, summary.setup.s1, cfg.feedback_mode, derive_seed(seed, 1), &side1};
  LearnerContext c2{2, &cfg.prior, summary.setup.s2, cfg.feedback_mode, derive_seed(seed, 2), &side2};
  std::unique_ptr<Learner> l1 = learner_init(cfg.spec1, c1);
  std::unique_ptr<Learner> l2 = learner_init(cfg.spec2, c2);
  Rng realize(derive_seed(seed, kRealizationStream));

  RegretAccumulator acc1(game, 1), acc2(game, 2);
  Matrix mass(n1, n2);
  double sum_u1 = 0.0, sum_u2 = 0.0;
  const std::vector<std::size_t> checkpoints = cfg.effective_checkpoints();
  std::size_t next_cp = 0;
  const auto& k = kernels::active();

  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    MixedStrategy x = l1->act();
    MixedStrategy y = l2->act();
    if (cfg.pure_realization) {
      x = MixedStrategy::pure(n1, static_cast<std::size_t>(realize.categorical(x.probs())));
      y = MixedStrategy::pure(n2, static_cast<std::size_t>(realize.categorical(y.probs())));
    }
    const double u1 = expected_utility(game, x, y, 1);
    const double u2 = expected_utility(game, x, y, 2);

    FeedbackRecord fb1{x, full ? std::optional<MixedStrategy>(y) : std::nullopt, u1};
    FeedbackRecord fb2{y, full ? std::optional<MixedStrategy>(x) : std::nullopt, u2};
    l1->observe(fb1);
    l2->observe(fb2);

    acc1.add(x.probs(), y.probs());
    acc2.add(y.probs(), x.probs());
    k.outer_acc(mass.data().data(), x.probs().data(), n1, y.probs().data(), n2, 1.0);
    sum_u1 += u1;
    sum_u2 += u2;

    if (observer) {
      observer(RoundRecord{t, &x, &y, u1, u2, l1->last_side_signal(), l2->last_side_signal()});
    }
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
      const double inv = 1.0 / static_cast<double>(t);
      summary.rows.push_back({t, sum_u1 * inv, sum_u2 * inv, acc1.external() * inv,
                              acc2.external() * inv, acc1.swap() * inv, acc2.swap() * inv});
      ++next_cp;
    }
  }
  const double inv_t = 1.0 / static_cast<double>(cfg.horizon);
  for (double& v : mass.data()) v *= inv_t;
  summary.csp = CSP(std::move(mass));
  if (summary.rows.empty() || summary.rows.back().t != cfg.horizon) {
    summary.rows.push_back({cfg.horizon, sum_u1 * inv_t, sum_u2 * inv_t, acc1.external() * inv_t,
                            acc2.external() * inv_t, acc1.swap() * inv_t, acc2.swap() * inv_t});
  }
  return summary;
}

Trajectory run_trial(const ExperimentConfig& cfg, std::size_t trial) {
  Trajectory traj;
  traj.rounds.reserve(cfg.horizon);
  bool any_side1 = false, any_side2 = false;
  std::vector<int> side1, side2;
  const TrialSummary s = run_trial_stream(cfg, trial, [&](const RoundRecord& r) {
    traj.rounds.push_back({*r.x, *r.y});
    side1.push_back(r.side1);
    side2.push_back(r.side2);
    any_side1 = any_side1 || r.side1 >= 0;
    any_side2 = any_side2 || r.side2 >= 0;
  });
  traj.realized_game_index = s.setup.realized;
  traj.signal_indices = {s.setup.s1, s.setup.s2};
  if (any_side1) traj.side_signals1 = std::move(side1);
  if (any_side2) traj.side_signals2 = std::move(side2);
  return traj;
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<TrialSummary> run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialSummary> out(cfg.trials);
  parallel_for(cfg.trials, cfg.threads,
               [&](std::size_t k) { out[k] = run_trial_stream(cfg, k); });
  return out;
}

MeanCI mean_ci(const std::vector<double>& values, const std::vector<int>& strata) {
  MeanCI r;
  r.n = values.size();
  if (values.empty()) return r;
  if (!strata.empty() && strata.size() != values.size()) {
    throw std::invalid_argument("strata must match values");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n < 2) {
    r.std_error = std::nan("");
    r.half_width = std::nan("");
    return r;
  }
  const double n = static_cast<double>(r.n);
  auto plain_variance = [&] {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    return ss / (n - 1.0) / n;
  };
  double var = 0.0;
  bool stratified = !strata.empty();
  if (stratified) {
    const int groups = *std::max_element(strata.begin(), strata.end()) + 1;
    std::vector<double> gsum(static_cast<std::size_t>(groups), 0.0);
    std::vector<std::size_t> gcount(static_cast<std::size_t>(groups), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      gsum[static_cast<std::size_t>(strata[i])] += values[i];
      ++gcount[static_cast<std::size_t>(strata[i])];
    }
    std::vector<double> gss(static_cast<std::size_t>(groups), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto g = static_cast<std::size_t>(strata[i]);
      const double d = values[i] - gsum[g] / static_cast<double>(gcount[g]);
      gss[g] += d * d;
    }
    for (std::size_t g = 0; g < gcount.size(); ++g) {
      if (gcount[g] == 0) continue;
      if (gcount[g] < 2) {
        stratified = false;
        break;
      }
      const double ng = static_cast<double>(gcount[g]);
      const double share = ng / n;
      var += share * share * (gss[g] / (ng - 1.0)) / ng;
    }
  }
  if (!stratified) var = plain_variance();
  r.std_error = std::sqrt(var);
  r.half_width = kZ95 * r.std_error;
  return r;
}

EstimateReport summarize(const ExperimentConfig& cfg, std::vector<TrialSummary> trials) {
  EstimateReport rep;
  rep.trials = trials.size();
  rep.horizon = cfg.horizon;
  std::vector<int> strata;
  for (const TrialSummary& t : trials) strata.push_back(t.setup.realized);

  auto column = [&](std::size_t cp, double CheckpointRow::*field) {
    std::vector<double> v;
    v.reserve(trials.size());
    for (const TrialSummary& t : trials) v.push_back(t.rows[cp].*field);
    return mean_ci(v, strata);
  };
  if (!trials.empty()) {
    const std::size_t last = trials.front().rows.size() - 1;
    rep.avg_u1 = column(last, &CheckpointRow::avg_u1);
    rep.avg_u2 = column(last, &CheckpointRow::avg_u2);
    rep.ext_regret1 = column(last, &CheckpointRow::ext_regret1);
    rep.ext_regret2 = column(last, &CheckpointRow::ext_regret2);
    rep.swap_regret1 = column(last, &CheckpointRow::swap_regret1);
    rep.swap_regret2 = column(last, &CheckpointRow::swap_regret2);
    for (std::size_t cp = 0; cp <= last; ++cp) {
      CurvePoint p;
      p.t = trials.front().rows[cp].t;
      p.avg_u1 = column(cp, &CheckpointRow::avg_u1);
      p.avg_u2 = column(cp, &CheckpointRow::avg_u2);
      p.ext_regret1 = column(cp, &CheckpointRow::ext_regret1);
      p.ext_regret2 = column(cp, &CheckpointRow::ext_regret2);
      p.swap_regret1 = column(cp, &CheckpointRow::swap_regret1);
      p.swap_regret2 = column(cp, &CheckpointRow::swap_regret2);
      rep.curves.push_back(p);
    }
  }

  const std::size_t ng = cfg.prior.size();
  for (std::size_t g = 0; g < ng; ++g) {
    GroupMean m;
    m.key = cfg.prior.game(g).name();
    m.game = static_cast<int>(g);
    for (const TrialSummary& t : trials) {
      if (t.setup.realized != m.game) continue;
      ++m.count;
      m.avg_u1 += t.final_row().avg_u1;
      m.avg_u2 += t.final_row().avg_u2;
    }
    if (m.count > 0) {
      m.avg_u1 /= static_cast<double>(m.count);
      m.avg_u2 /= static_cast<double>(m.count);
    }
    rep.by_game.push_back(m);
  }
  for (std::size_t a = 0; a < ng; ++a) {
    for (std::size_t b = 0; b < ng; ++b) {
      GroupMean m;
      m.s1 = static_cast<int>(a);
      m.s2 = static_cast<int>(b);
      m.key = signal_label(m.s1) + "," + signal_label(m.s2);
      for (const TrialSummary& t : trials) {
        if (t.setup.s1 != m.s1 || t.setup.s2 != m.s2) continue;
        ++m.count;
        m.avg_u1 += t.final_row().avg_u1;
        m.avg_u2 += t.final_row().avg_u2;
      }
      if (m.count == 0) continue;
      m.avg_u1 /= static_cast<double>(m.count);
      m.avg_u2 /= static_cast<double>(m.count);
      rep.by_signal_pair.push_back(m);
    }
  }
  rep.per_trial = std::move(trials);
  return rep;
}

EstimateReport estimate(const ExperimentConfig& cfg) { return summarize(cfg, run_trials(cfg)); }

namespace {

std::optional<CspEstimate> average_csps(const std::vector<const CSP*>& parts) {
  if (parts.empty()) return std::nullopt;
  const std::size_t r = parts.front()->mass().rows();
  const std::size_t c = parts.front()->mass().cols();
  Matrix mean(r, c), se(r, c);
  const double n = static_cast<double>(parts.size());
  for (const CSP* p : parts) kernels::axpy(1.0 / n, p->mass().data(), mean.data());
  if (parts.size() >= 2) {
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        double ss = 0.0;
        for (const CSP* p : parts) ss += std::pow((*p)(i, j) - mean(i, j), 2);
        se(i, j) = std::sqrt(ss / (n - 1.0) / n);
      }
    }
  }
  return CspEstimate{CSP(std::move(mean)), std::move(se), parts.size()};
}

}  // namespace

CspReport csp_report(const ExperimentConfig& cfg, const std::vector<TrialSummary>& trials) {
  const std::size_t ng = cfg.prior.size();
  CspReport rep;
  rep.p2 = cfg.signal_model.p2;
  rep.by_signal_pair.assign(ng, std::vector<std::optional<CspEstimate>>(ng));
  for (std::size_t g = 0; g < ng; ++g) {
    std::vector<const CSP*> direct;
    for (std::size_t s = 0; s < ng; ++s) {
      std::vector<const CSP*> bucket;
      for (const TrialSummary& t : trials) {
        if (t.setup.realized == static_cast<int>(g) && t.setup.s2 == static_cast<int>(s)) {
          bucket.push_back(&t.csp);
        }
      }
      direct.insert(direct.end(), bucket.begin(), bucket.end());
      rep.by_signal_pair[g][s] = average_csps(bucket);
    }
    rep.direct_by_game.push_back(average_csps(direct));
  }
  const std::size_t n1 = cfg.prior.n1(), n2 = cfg.prior.n2();
  for (std::size_t g = 0; g < ng; ++g) {
    Matrix mass(n1, n2), var(n1, n2);
    bool complete = true;
    std::size_t count = 0;
    for (std::size_t s = 0; s < ng; ++s) {
      const double w = rep.p2 * (g == s ? 1.0 : 0.0) + (1.0 - rep.p2) * cfg.prior.weight(s);
      if (w <= 0.0) continue;
      const auto& cell = rep.by_signal_pair[g][s];
      if (!cell) {
        complete = false;
        break;
      }
      count += cell->count;
      kernels::axpy(w, cell->csp.mass().data(), mass.data());
      for (std::size_t i = 0; i < n1 * n2; ++i) {
        var.data()[i] += w * w * cell->std_error.data()[i] * cell->std_error.data()[i];
      }
    }
    if (!complete) {
      rep.by_game.emplace_back(std::nullopt);
      continue;
    }
    for (double& v : var.data()) v = std::sqrt(v);
    rep.by_game.push_back(CspEstimate{CSP(std::move(mass)), std::move(var), count});
  }
  return rep;
}

CspReport estimate_csps(const ExperimentConfig& cfg) { return csp_report(cfg, run_trials(cfg)); }

}  // namespace stacklab
