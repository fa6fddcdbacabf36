#include "stacklab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stacklab/builtin_games.hpp"
#include "stacklab/solve.hpp"

namespace stacklab {
namespace {

constexpr std::uint64_t kIndependentSeedStream = 0xa0d17;
constexpr double kConsistencyTol = 1e-6;

MeanCI paired_gain(const std::vector<TrialSummary>& base, const std::vector<TrialSummary>& dev,
                   int player) {
  std::vector<double> diffs;
  std::vector<int> strata;
  for (std::size_t k = 0; k < base.size(); ++k) {
    const double b = player == 1 ? base[k].final_row().avg_u1 : base[k].final_row().avg_u2;
    const double d = player == 1 ? dev[k].final_row().avg_u1 : dev[k].final_row().avg_u2;
    diffs.push_back(d - b);
    strata.push_back(base[k].setup.realized);
  }
  return mean_ci(diffs, strata);
}

MeanCI utility_of(const EstimateReport& rep, int player) {
  return player == 1 ? rep.avg_u1 : rep.avg_u2;
}

// Strips an outer mimic so that mimic deviations override the base signal.
const LearnerSpec& unwrap_mimic(const LearnerSpec& spec) {
  if (spec.kind == LearnerKind::mimic_deviation && spec.params.base) return *spec.params.base;
  return spec;
}

}  // namespace

DeviationLibrary DeviationLibrary::standard(const ExperimentConfig& cfg) {
  DeviationLibrary lib;
  const GameMatrix& shape = cfg.prior.game(0);
  for (int player : {1, 2}) {
    std::vector<Deviation> candidates;
    const LearnerSpec& own = unwrap_mimic(cfg.spec(player));
    for (std::size_t j = 0; j < cfg.prior.size(); ++j) {
      candidates.push_back({"mimic:G" + std::to_string(j + 1), player,
                            LearnerSpec::mimic(own, static_cast<int>(j))});
    }
    for (std::size_t a = 0; a < shape.num_actions(player); ++a) {
      candidates.push_back({"constant:" + shape.labels(player)[a], player, LearnerSpec::constant(a)});
    }
    candidates.push_back({"best_responder", player, LearnerSpec::of(LearnerKind::best_responder)});
    candidates.push_back(
        {"stackelberg_leader", player, LearnerSpec::of(LearnerKind::stackelberg_leader)});
    if (player == 2) {
      candidates.push_back({"infer_then_commit_follower", player,
                            LearnerSpec::of(LearnerKind::infer_then_commit_follower)});
    }
    for (Deviation& d : candidates) {
      const std::string name = std::to_string(player) + ":" + d.label;
      if (cfg.feedback_mode == FeedbackMode::bandit && requires_full_information(d.spec)) {
        lib.skipped.push_back(name + " (needs full-information feedback)");
        continue;
      }
      try {
        validate_spec(d.spec, player, cfg.prior);
      } catch (const std::invalid_argument& e) {
        lib.skipped.push_back(name + " (" + e.what() + ")");
        continue;
      }
      lib.deviations.push_back(std::move(d));
    }
  }
  return lib;
}

AuditReport audit_pne(const ExperimentConfig& cfg, const DeviationLibrary& lib, double epsilon,
                      bool common_random_numbers) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  cfg.validate();
  AuditReport rep;
  rep.epsilon = epsilon;
  rep.common_random_numbers = common_random_numbers;
  rep.skipped = lib.skipped;
  const std::vector<TrialSummary> base_trials = run_trials(cfg);
  const EstimateReport base = summarize(cfg, base_trials);
  rep.baseline_u1 = base.avg_u1;
  rep.baseline_u2 = base.avg_u2;

  for (std::size_t i = 0; i < lib.deviations.size(); ++i) {
    const Deviation& d = lib.deviations[i];
    ExperimentConfig dcfg = cfg;
    dcfg.spec(d.player) = d.spec;
    if (!common_random_numbers) {
      dcfg.master_seed = derive_seed(cfg.master_seed, kIndependentSeedStream + i);
    }
    const std::vector<TrialSummary> dev_trials = run_trials(dcfg);
    const EstimateReport dev = summarize(dcfg, dev_trials);
    DeviationResult r{d, utility_of(dev, d.player), {}};
    if (common_random_numbers) {
      r.gain = paired_gain(base_trials, dev_trials, d.player);
    } else {
      const MeanCI b = utility_of(base, d.player);
      r.gain.n = r.utility.n;
      r.gain.mean = r.utility.mean - b.mean;
      r.gain.std_error = std::hypot(r.utility.std_error, b.std_error);
      r.gain.half_width = kZ95 * r.gain.std_error;
    }
    rep.results.push_back(std::move(r));
  }

  double worst = -kInf;
  for (std::size_t i = 0; i < rep.results.size(); ++i) {
    const DeviationResult& r = rep.results[i];
    int& best = r.deviation.player == 1 ? rep.best1 : rep.best2;
    if (best < 0 || r.gain.mean > rep.results[static_cast<std::size_t>(best)].gain.mean) {
      best = static_cast<int>(i);
    }
    if (r.gain.lo() > epsilon && r.gain.mean > worst) {
      worst = r.gain.mean;
      rep.pass = false;
      rep.fail_player = r.deviation.player;
      rep.fail_deviation = r.deviation.label;
    }
  }
  return rep;
}

namespace {

bool matrices_close(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    if (std::abs(a.data()[i] - b.data()[i]) > kConstructionTol) return false;
  }
  return true;
}

bool same_game(const GameMatrix& a, const GameMatrix& b) {
  return matrices_close(a.u1(), b.u1()) && matrices_close(a.u2(), b.u2());
}

MassEstimate mass_at(const std::optional<CspEstimate>& e, std::size_t a1, std::size_t a2) {
  MassEstimate m;
  if (!e) {
    m.mean = m.std_error = m.lower = m.upper = std::nan("");
    return m;
  }
  m.mean = e->csp(a1, a2);
  m.std_error = e->std_error(a1, a2);
  m.lower = m.mean - kZ95OneSided * m.std_error;
  m.upper = m.mean + kZ95OneSided * m.std_error;
  return m;
}

}  // namespace

ClaimsReport verify_claims(const ExperimentConfig& cfg, double p_star, double tol) {
  ClaimsReport rep;
  rep.p_star = p_star;
  rep.gamma = gamma_from_precision(p_star);
  rep.tol = tol;
  const Prior& prior = cfg.prior;
  if (prior.size() != 2 || !same_game(prior.game(0), fig1_g1(rep.gamma)) ||
      !same_game(prior.game(1), fig1_g2(rep.gamma)) ||
      std::abs(prior.weight(0) - 0.5) > kConstructionTol) {
    throw std::invalid_argument(
        "claims verification needs the uniform fig1 prior at gamma = (1 - p*) / (1 + p*)");
  }
  if (cfg.signal_model.p2 > p_star + kConstructionTol) {
    throw std::invalid_argument("claims verification needs p2 <= p*");
  }

  const std::vector<TrialSummary> trials = run_trials(cfg);
  const EstimateReport est = summarize(cfg, trials);
  const CspReport csps = csp_report(cfg, trials);
  constexpr std::size_t A = 0, B = 1, D = 1;
  rep.csp1_BD = mass_at(csps.by_game[0], B, D);
  rep.csp1_AD = mass_at(csps.by_game[0], A, D);
  rep.csp2_BD = mass_at(csps.by_game[1], B, D);
  rep.csp1_BD_ok = rep.csp1_BD.upper <= rep.gamma / 8.0 + tol;
  rep.csp1_AD_ok = rep.csp1_AD.upper <= rep.gamma / 8.0 + tol;
  rep.csp2_BD_ok = rep.csp2_BD.lower >= 0.5 - tol;

  rep.avg_u2 = est.avg_u2;
  rep.benchmark = stackval_prior(prior, 2);
  rep.benchmark_achieved = est.avg_u2.mean >= rep.benchmark - tol;

  ExperimentConfig mimic = cfg;
  mimic.spec1 = LearnerSpec::mimic(unwrap_mimic(cfg.spec1), 0);
  rep.mimic_gain = paired_gain(trials, run_trials(mimic), 1);

  rep.contradiction = rep.benchmark_achieved && rep.csp1_BD_ok && rep.csp1_AD_ok &&
                      rep.csp2_BD_ok && rep.mimic_gain.lo() > 0.0;
  return rep;
}

RevelationReport revelation_analysis(const Prior& prior, int player) {
  check_player(player);
  if (prior.size() < 2) throw std::invalid_argument("revelation analysis needs at least two games");
  RevelationReport rep;
  rep.player = player;
  const std::size_t n = prior.game(0).num_actions(player);
  for (std::size_t a = 0; a < n; ++a) {
    ActionRevelation act;
    act.action = a;
    act.label = prior.game(0).labels(player)[a];
    for (const Prior::Entry& e : prior.entries()) {
      const auto row = e.game.own_payoffs(player).row(a);
      act.ranges.emplace_back(*std::min_element(row.begin(), row.end()),
                              *std::max_element(row.begin(), row.end()));
    }
    act.revealing = true;
    for (std::size_t g = 0; g < act.ranges.size() && act.revealing; ++g) {
      for (std::size_t h = g + 1; h < act.ranges.size(); ++h) {
        const auto [lo_g, hi_g] = act.ranges[g];
        const auto [lo_h, hi_h] = act.ranges[h];
        if (!(hi_g < lo_h || hi_h < lo_g)) {
          act.revealing = false;
          break;
        }
      }
    }
    rep.any_revealing = rep.any_revealing || act.revealing;
    rep.actions.push_back(std::move(act));
  }
  return rep;
}

const char* to_string(BeliefKind k) {
  switch (k) {
    case BeliefKind::nearest_best_response: return "nearest_best_response";
    case BeliefKind::utility_likelihood: return "utility_likelihood";
    case BeliefKind::external_signal: return "external_signal";
  }
  return "unknown";
}

BeliefKind parse_belief_kind(std::string_view s) {
  for (BeliefKind k : {BeliefKind::nearest_best_response, BeliefKind::utility_likelihood,
                       BeliefKind::external_signal}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown belief kind '" + std::string(s) + "'");
}

namespace {

// Highest prior weight among flagged games, lowest index on ties; the prior
// mode when nothing is flagged.
int weighted_mode(const Prior& prior, const std::vector<char>& flagged) {
  int best = -1;
  for (std::size_t g = 0; g < prior.size(); ++g) {
    if (!flagged[g]) continue;
    if (best < 0 || prior.weight(g) > prior.weight(static_cast<std::size_t>(best))) {
      best = static_cast<int>(g);
    }
  }
  return best < 0 ? prior.mode() : best;
}

class BeliefState {
 public:
  BeliefState(const ExperimentConfig& cfg, BeliefKind kind, int player,
              const std::vector<std::size_t>& follower_actions)
      : cfg_(cfg), kind_(kind), player_(player), follower_(follower_actions),
        consistent_(cfg.prior.size(), 1),
        opp_sum_(cfg.prior.game(0).num_actions(opponent_of(player)), 0.0) {}

  int belief(const RoundRecord& r) const {
    const Prior& prior = cfg_.prior;
    switch (kind_) {
      case BeliefKind::external_signal: {
        const int s = player_ == 1 ? r.side1 : r.side2;
        return s >= 0 ? s : prior.mode();
      }
      case BeliefKind::utility_likelihood:
        return weighted_mode(prior, consistent_);
      case BeliefKind::nearest_best_response: {
        if (rounds_ == 0) return prior.mode();
        // L1 distance from the average to a one-hot e_f is 2 - 2 * avg[f].
        double best = -kInf;
        for (std::size_t g = 0; g < prior.size(); ++g) best = std::max(best, opp_sum_[follower_[g]]);
        std::vector<char> tied(prior.size(), 0);
        for (std::size_t g = 0; g < prior.size(); ++g) {
          tied[g] = opp_sum_[follower_[g]] >= best - 1e-12 * static_cast<double>(rounds_);
        }
        return weighted_mode(prior, tied);
      }
    }
    return prior.mode();
  }

  void update(const RoundRecord& r) {
    const MixedStrategy& own = player_ == 1 ? *r.x : *r.y;
    const MixedStrategy& opp = player_ == 1 ? *r.y : *r.x;
    const double u = player_ == 1 ? r.u1 : r.u2;
    ++rounds_;
    if (kind_ == BeliefKind::nearest_best_response) {
      for (std::size_t b = 0; b < opp.size(); ++b) opp_sum_[b] += opp[b];
    } else if (kind_ == BeliefKind::utility_likelihood) {
      for (std::size_t g = 0; g < cfg_.prior.size(); ++g) {
        if (!consistent_[g]) continue;
        const Matrix& m = cfg_.prior.game(g).own_payoffs(player_);
        if (cfg_.feedback_mode == FeedbackMode::full) {
          double v = 0.0;
          for (std::size_t a = 0; a < own.size(); ++a)
            for (std::size_t b = 0; b < opp.size(); ++b) v += own[a] * m(a, b) * opp[b];
          consistent_[g] = std::abs(v - u) <= kConsistencyTol;
        } else {
          double lo = kInf, hi = -kInf;
          for (std::size_t b = 0; b < m.cols(); ++b) {
            double v = 0.0;
            for (std::size_t a = 0; a < own.size(); ++a) v += own[a] * m(a, b);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
          }
          consistent_[g] = u >= lo - kConsistencyTol && u <= hi + kConsistencyTol;
        }
      }
    }
  }

 private:
  const ExperimentConfig& cfg_;
  BeliefKind kind_;
  int player_;
  const std::vector<std::size_t>& follower_;
  std::vector<char> consistent_;
  std::vector<double> opp_sum_;
  std::size_t rounds_ = 0;
};

}  // namespace

BeliefTraceReport belief_trace(const ExperimentConfig& cfg, BeliefKind kind, double tau,
                               int player) {
  check_player(player);
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0, 1]");
  cfg.validate();
  BeliefTraceReport rep;
  rep.kind = kind;
  rep.player = player;
  rep.tau = tau;
  const std::vector<std::size_t> cps = cfg.effective_checkpoints();
  std::vector<std::size_t> follower;
  if (kind == BeliefKind::nearest_best_response) {
    for (const Prior::Entry& e : cfg.prior.entries()) {
      follower.push_back(stackelberg_value(e.game, player).follower_action);
    }
  }
  std::vector<std::vector<char>> wrong(cfg.trials, std::vector<char>(cps.size(), 0));
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t k) {
    BeliefState state(cfg, kind, player, follower);
    const int realized = realized_game_for_trial(cfg, k);
    std::size_t next = 0;
    run_trial_stream(cfg, k, [&](const RoundRecord& r) {
      if (next < cps.size() && cps[next] == r.t) {
        wrong[k][next] = state.belief(r) != realized;
        ++next;
      }
      state.update(r);
    });
  });
  for (std::size_t c = 0; c < cps.size(); ++c) {
    double errors = 0.0;
    for (const auto& w : wrong) errors += w[c];
    rep.checkpoints.push_back({cps[c], errors / static_cast<double>(cfg.trials)});
  }
  rep.final_error = rep.checkpoints.back().error;
  rep.success = rep.final_error <= tau;
  return rep;
}

}  // namespace stacklab
