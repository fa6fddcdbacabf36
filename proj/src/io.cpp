#include "stacklab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stacklab/builtin_games.hpp"

namespace stacklab {
namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void require_object(const json& j, const char* what) {
  if (!j.is_object()) fail(std::string(what) + " must be a JSON object");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const char* what) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (std::string_view k : known) ok = ok || key == k;
    if (!ok) fail(std::string("unknown key '") + key + "' in " + what);
  }
}

double number(const json& j, const char* what) {
  if (!j.is_number()) fail(std::string(what) + " must be a number");
  return j.get<double>();
}

std::size_t count(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    fail(std::string(what) + " must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) fail(std::string(what) + " must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const json& r : j) {
    if (!r.is_array()) fail(std::string(what) + " rows must be arrays");
    std::vector<double> row;
    for (const json& v : r) row.push_back(number(v, what));
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return out;
}

std::vector<std::string> labels_from_json(const json& j, const char* what) {
  if (!j.is_array()) fail(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const json& v : j) {
    if (!v.is_string()) fail(std::string(what) + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

json strategy_to_json(const MixedStrategy& s, const std::vector<std::string>& labels) {
  json out = json::object();
  for (std::size_t i = 0; i < s.size(); ++i) out[labels[i]] = s[i];
  return out;
}

json mass_to_json(const Matrix& m, const GameMatrix& shape) {
  json out = json::object();
  for (std::size_t a = 0; a < m.rows(); ++a) {
    for (std::size_t b = 0; b < m.cols(); ++b) {
      out[shape.labels1()[a] + "," + shape.labels2()[b]] = m(a, b);
    }
  }
  return out;
}

std::string signal_name(std::size_t s) { return "G" + std::to_string(s + 1); }

}  // namespace

json parse_json_text(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    if (pos != std::string::npos) what = what.substr(pos);
    fail(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

GameMatrix game_from_json(const json& j) {
  if (j.is_string()) {
    if (auto g = builtin_game(j.get<std::string>())) return *g;
    fail("unknown builtin game '" + j.get<std::string>() + "'");
  }
  require_object(j, "game");
  reject_unknown(j, {"name", "actions1", "actions2", "u1", "u2"}, "game");
  if (!j.contains("u1") || !j.contains("u2")) fail("game needs 'u1' and 'u2'");
  std::string name = j.value("name", std::string("game"));
  std::vector<std::string> l1, l2;
  if (j.contains("actions1")) l1 = labels_from_json(j["actions1"], "actions1");
  if (j.contains("actions2")) l2 = labels_from_json(j["actions2"], "actions2");
  return GameMatrix(std::move(name), matrix_from_json(j["u1"], "u1"),
                    matrix_from_json(j["u2"], "u2"), std::move(l1), std::move(l2));
}

json game_to_json(const GameMatrix& g) {
  json out;
  out["name"] = g.name();
  out["actions1"] = g.labels1();
  out["actions2"] = g.labels2();
  out["u1"] = matrix_to_json(g.u1());
  out["u2"] = matrix_to_json(g.u2());
  return out;
}

Prior prior_from_json(const json& j) {
  if (j.is_string()) {
    if (auto p = builtin_prior(j.get<std::string>())) return *p;
    if (auto g = builtin_game(j.get<std::string>())) return Prior::single(*g);
    fail("unknown builtin prior '" + j.get<std::string>() + "'");
  }
  require_object(j, "prior");
  if (!j.contains("games")) return Prior::single(game_from_json(j));
  reject_unknown(j, {"games"}, "prior");
  if (!j["games"].is_array()) fail("prior 'games' must be an array");
  std::vector<Prior::Entry> entries;
  for (const json& e : j["games"]) {
    require_object(e, "prior entry");
    reject_unknown(e, {"weight", "game"}, "prior entry");
    if (!e.contains("weight") || !e.contains("game")) fail("prior entries need 'weight' and 'game'");
    entries.push_back({game_from_json(e["game"]), number(e["weight"], "weight")});
  }
  return Prior(std::move(entries));
}

json prior_to_json(const Prior& p) {
  json games = json::array();
  for (const Prior::Entry& e : p.entries()) {
    games.push_back({{"weight", e.weight}, {"game", game_to_json(e.game)}});
  }
  return {{"games", games}};
}

LearnerSpec learner_spec_from_json(const json& j) {
  if (j.is_string()) return LearnerSpec::of(parse_learner_kind(j.get<std::string>()));
  require_object(j, "learner spec");
  reject_unknown(j, {"kind", "params"}, "learner spec");
  if (!j.contains("kind") || !j["kind"].is_string()) fail("learner spec needs a string 'kind'");
  LearnerSpec s;
  s.kind = parse_learner_kind(j["kind"].get<std::string>());
  if (!j.contains("params")) return s;
  const json& p = j["params"];
  require_object(p, "learner params");
  reject_unknown(p, {"action", "eta", "exploration", "b", "a", "initial_horizon", "fixed_signal", "base"},
                 "learner params");
  LearnerParams& out = s.params;
  if (p.contains("action")) out.action = count(p["action"], "action");
  if (p.contains("eta")) out.eta = number(p["eta"], "eta");
  if (p.contains("exploration")) out.exploration = number(p["exploration"], "exploration");
  if (p.contains("b")) out.b = number(p["b"], "b");
  if (p.contains("a")) out.a = number(p["a"], "a");
  if (p.contains("initial_horizon")) out.initial_horizon = count(p["initial_horizon"], "initial_horizon");
  if (p.contains("fixed_signal")) {
    out.fixed_signal = static_cast<int>(count(p["fixed_signal"], "fixed_signal"));
  }
  if (p.contains("base")) out.base = std::make_shared<const LearnerSpec>(learner_spec_from_json(p["base"]));
  return s;
}

json learner_spec_to_json(const LearnerSpec& s) {
  json params = json::object();
  const LearnerParams& p = s.params;
  const LearnerParams defaults;
  if (p.action) params["action"] = *p.action;
  if (p.eta) params["eta"] = *p.eta;
  if (p.exploration) params["exploration"] = *p.exploration;
  if (p.b != defaults.b) params["b"] = p.b;
  if (p.a != defaults.a) params["a"] = p.a;
  if (p.initial_horizon != defaults.initial_horizon) params["initial_horizon"] = p.initial_horizon;
  if (p.fixed_signal) params["fixed_signal"] = *p.fixed_signal;
  if (p.base) params["base"] = learner_spec_to_json(*p.base);
  return {{"kind", to_string(s.kind)}, {"params", params}};
}

ExperimentConfig config_from_json(const json& j) {
  require_object(j, "config");
  reject_unknown(j, {"prior", "signal_model", "learner1", "learner2", "horizon", "trials",
                     "feedback_mode", "pure_realization", "master_seed", "checkpoints", "threads"},
                 "config");
  if (!j.contains("prior")) fail("config needs a 'prior'");
  ExperimentConfig cfg(prior_from_json(j["prior"]));
  if (j.contains("signal_model")) {
    const json& s = j["signal_model"];
    require_object(s, "signal_model");
    reject_unknown(s, {"p1", "p2"}, "signal_model");
    cfg.signal_model = SignalModel(s.contains("p1") ? number(s["p1"], "p1") : 1.0,
                                   s.contains("p2") ? number(s["p2"], "p2") : 0.0);
  }
  if (!j.contains("learner1") || !j.contains("learner2")) {
    fail("config needs 'learner1' and 'learner2'");
  }
  cfg.spec1 = learner_spec_from_json(j["learner1"]);
  cfg.spec2 = learner_spec_from_json(j["learner2"]);
  if (j.contains("horizon")) cfg.horizon = count(j["horizon"], "horizon");
  if (j.contains("trials")) cfg.trials = count(j["trials"], "trials");
  if (j.contains("feedback_mode")) {
    if (!j["feedback_mode"].is_string()) fail("feedback_mode must be a string");
    cfg.feedback_mode = parse_feedback_mode(j["feedback_mode"].get<std::string>());
  }
  if (j.contains("pure_realization")) {
    if (!j["pure_realization"].is_boolean()) fail("pure_realization must be a boolean");
    cfg.pure_realization = j["pure_realization"].get<bool>();
  }
  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_integer() || j["master_seed"].is_number_float()) {
      fail("master_seed must be an integer");
    }
    cfg.master_seed = j["master_seed"].is_number_unsigned()
                          ? j["master_seed"].get<std::uint64_t>()
                          : static_cast<std::uint64_t>(j["master_seed"].get<std::int64_t>());
  }
  if (j.contains("checkpoints")) {
    if (!j["checkpoints"].is_array()) fail("checkpoints must be an array");
    for (const json& t : j["checkpoints"]) cfg.checkpoints.push_back(count(t, "checkpoint"));
  }
  if (j.contains("threads")) cfg.threads = count(j["threads"], "threads");
  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json out;
  out["prior"] = prior_to_json(cfg.prior);
  out["signal_model"] = {{"p1", cfg.signal_model.p1}, {"p2", cfg.signal_model.p2}};
  out["learner1"] = learner_spec_to_json(cfg.spec1);
  out["learner2"] = learner_spec_to_json(cfg.spec2);
  out["horizon"] = cfg.horizon;
  out["trials"] = cfg.trials;
  out["feedback_mode"] = to_string(cfg.feedback_mode);
  out["pure_realization"] = cfg.pure_realization;
  out["master_seed"] = cfg.master_seed;
  out["checkpoints"] = cfg.checkpoints;
  out["threads"] = cfg.threads;
  return out;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    fail("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::string parent_key;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) fail("override path '" + path + "' has an empty segment");
    const bool last = dot == std::string::npos;
    json* child = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        fail("override path '" + path + "': '" + key + "' is not an array index");
      }
      if (idx >= node->size()) fail("override path '" + path + "': index out of range");
      child = &(*node)[idx];
    } else if (node->is_object()) {
      if (!node->contains(key)) {
        if (!(last && parent_key == "params")) {
          fail("override path '" + path + "': no key '" + key + "'");
        }
      }
      child = &(*node)[key];
    } else {
      fail("override path '" + path + "': '" + parent_key + "' is not an object");
    }
    if (last) {
      *child = value;
      return;
    }
    node = child;
    parent_key = key;
    start = dot + 1;
  }
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json mean_ci_to_json(const MeanCI& m) {
  return {{"mean", finite_or_null(m.mean)},
          {"std_error", finite_or_null(m.std_error)},
          {"half_width", finite_or_null(m.half_width)},
          {"lo", finite_or_null(m.lo())},
          {"hi", finite_or_null(m.hi())},
          {"n", m.n}};
}

json stackelberg_to_json(const StackelbergSolution& s, const GameMatrix& g, int leader) {
  json per = json::array();
  for (double v : s.per_follower_action_values) {
    per.push_back(finite_or_null(v));
  }
  json out;
  out["game"] = g.name();
  out["leader"] = leader;
  out["value"] = s.value;
  out["commitment"] = strategy_to_json(s.leader_strategy, g.labels(leader));
  out["follower_action"] = g.labels(opponent_of(leader))[s.follower_action];
  out["follower_action_index"] = s.follower_action;
  out["per_follower_action_values"] = per;
  return out;
}

json stackval_prior_to_json(const Prior& p, int leader) {
  json games = json::array();
  double total = 0.0;
  for (const Prior::Entry& e : p.entries()) {
    const StackelbergSolution s = stackelberg_value(e.game, leader);
    json item = stackelberg_to_json(s, e.game, leader);
    item["weight"] = e.weight;
    games.push_back(item);
    total += e.weight * s.value;
  }
  return {{"leader", leader}, {"value", total}, {"games", games}};
}

json estimate_to_json(const EstimateReport& r, const ExperimentConfig& cfg) {
  json out;
  out["trials"] = r.trials;
  out["horizon"] = r.horizon;
  out["avg_u1"] = mean_ci_to_json(r.avg_u1);
  out["avg_u2"] = mean_ci_to_json(r.avg_u2);
  out["ext_regret1"] = mean_ci_to_json(r.ext_regret1);
  out["ext_regret2"] = mean_ci_to_json(r.ext_regret2);
  out["swap_regret1"] = mean_ci_to_json(r.swap_regret1);
  out["swap_regret2"] = mean_ci_to_json(r.swap_regret2);
  json by_game = json::array();
  for (const GroupMean& g : r.by_game) {
    by_game.push_back({{"game", g.key}, {"index", g.game}, {"count", g.count},
                       {"avg_u1", g.avg_u1}, {"avg_u2", g.avg_u2}});
  }
  out["by_game"] = by_game;
  json by_pair = json::array();
  for (const GroupMean& g : r.by_signal_pair) {
    by_pair.push_back({{"s1", signal_name(static_cast<std::size_t>(g.s1))},
                       {"s2", signal_name(static_cast<std::size_t>(g.s2))},
                       {"count", g.count}, {"avg_u1", g.avg_u1}, {"avg_u2", g.avg_u2}});
  }
  out["by_signal_pair"] = by_pair;
  json curves = json::array();
  for (const CurvePoint& c : r.curves) {
    curves.push_back({{"t", c.t},
                      {"avg_u1", mean_ci_to_json(c.avg_u1)},
                      {"avg_u2", mean_ci_to_json(c.avg_u2)},
                      {"ext_regret1", mean_ci_to_json(c.ext_regret1)},
                      {"ext_regret2", mean_ci_to_json(c.ext_regret2)},
                      {"swap_regret1", mean_ci_to_json(c.swap_regret1)},
                      {"swap_regret2", mean_ci_to_json(c.swap_regret2)}});
  }
  out["curves"] = curves;
  out["config"] = config_to_json(cfg);
  return out;
}

json csp_report_to_json(const CspReport& r, const Prior& prior) {
  const GameMatrix& shape = prior.game(0);
  auto estimate = [&](const std::optional<CspEstimate>& e) -> json {
    if (!e) return nullptr;
    return {{"count", e->count}, {"mass", mass_to_json(e->csp.mass(), shape)},
            {"std_error", mass_to_json(e->std_error, shape)}};
  };
  json out;
  out["p2"] = r.p2;
  json pairs = json::array();
  for (std::size_t g = 0; g < r.by_signal_pair.size(); ++g) {
    for (std::size_t s = 0; s < r.by_signal_pair[g].size(); ++s) {
      const auto& cell = r.by_signal_pair[g][s];
      if (!cell) continue;
      json item = estimate(cell);
      item["game"] = signal_name(g);
      item["signal2"] = signal_name(s);
      pairs.push_back(item);
    }
  }
  out["by_signal_pair"] = pairs;
  json games = json::array();
  for (std::size_t g = 0; g < r.by_game.size(); ++g) {
    games.push_back({{"game", signal_name(g)},
                     {"name", prior.game(g).name()},
                     {"mixture", estimate(r.by_game[g])},
                     {"direct", estimate(r.direct_by_game[g])}});
  }
  out["by_game"] = games;
  return out;
}

json audit_to_json(const AuditReport& r) {
  json out;
  out["epsilon"] = r.epsilon;
  out["common_random_numbers"] = r.common_random_numbers;
  out["baseline"] = {{"avg_u1", mean_ci_to_json(r.baseline_u1)},
                     {"avg_u2", mean_ci_to_json(r.baseline_u2)}};
  json devs = json::array();
  for (const DeviationResult& d : r.results) {
    devs.push_back({{"player", d.deviation.player},
                    {"label", d.deviation.label},
                    {"spec", learner_spec_to_json(d.deviation.spec)},
                    {"utility", mean_ci_to_json(d.utility)},
                    {"gain", mean_ci_to_json(d.gain)}});
  }
  out["deviations"] = devs;
  out["skipped"] = r.skipped;
  json best = json::object();
  for (int player : {1, 2}) {
    const int idx = player == 1 ? r.best1 : r.best2;
    if (idx < 0) {
      best[std::to_string(player)] = nullptr;
    } else {
      const DeviationResult& d = r.results[static_cast<std::size_t>(idx)];
      best[std::to_string(player)] = {{"label", d.deviation.label}, {"gain", d.gain.mean}};
    }
  }
  out["max_gain"] = best;
  json verdict;
  verdict["pass"] = r.pass;
  verdict["player"] = r.pass ? json(nullptr) : json(r.fail_player);
  verdict["deviation"] = r.pass ? json(nullptr) : json(r.fail_deviation);
  out["verdict"] = verdict;
  return out;
}

json claims_to_json(const ClaimsReport& r) {
  auto mass = [](const MassEstimate& m) {
    return json{{"mean", m.mean}, {"std_error", m.std_error}, {"lower", m.lower}, {"upper", m.upper}};
  };
  json out;
  out["p_star"] = r.p_star;
  out["gamma"] = r.gamma;
  out["tol"] = r.tol;
  out["csp1_BD"] = mass(r.csp1_BD);
  out["csp1_AD"] = mass(r.csp1_AD);
  out["csp2_BD"] = mass(r.csp2_BD);
  out["checks"] = {{"csp1_BD_at_most_gamma_over_8", r.csp1_BD_ok},
                   {"csp1_AD_at_most_gamma_over_8", r.csp1_AD_ok},
                   {"csp2_BD_at_least_half", r.csp2_BD_ok}};
  out["avg_u2"] = mean_ci_to_json(r.avg_u2);
  out["benchmark"] = r.benchmark;
  out["benchmark_achieved"] = r.benchmark_achieved;
  out["mimic_gain"] = mean_ci_to_json(r.mimic_gain);
  out["contradiction"] = r.contradiction;
  return out;
}

json revelation_to_json(const RevelationReport& r, const Prior& prior) {
  json actions = json::array();
  for (const ActionRevelation& a : r.actions) {
    json ranges = json::array();
    for (std::size_t g = 0; g < a.ranges.size(); ++g) {
      ranges.push_back({{"game", prior.game(g).name()}, {"min", a.ranges[g].first},
                        {"max", a.ranges[g].second}});
    }
    actions.push_back({{"action", a.label}, {"index", a.action}, {"ranges", ranges},
                       {"revealing", a.revealing}});
  }
  return {{"player", r.player}, {"any_revealing", r.any_revealing}, {"actions", actions}};
}

json belief_to_json(const BeliefTraceReport& r) {
  json cps = json::array();
  for (const BeliefPoint& p : r.checkpoints) cps.push_back({{"t", p.t}, {"error", p.error}});
  return {{"kind", to_string(r.kind)}, {"player", r.player},        {"tau", r.tau},
          {"checkpoints", cps},        {"final_error", r.final_error}, {"success", r.success}};
}

void write_trials_csv(std::ostream& out, const EstimateReport& r) {
  out << "trial,realized_game,s1,s2,t,avg_u1,avg_u2,ext_regret1,ext_regret2,swap_regret1,swap_regret2\n";
  char buf[512];
  for (const TrialSummary& t : r.per_trial) {
    for (const CheckpointRow& row : t.rows) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%d,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    t.setup.trial, t.setup.realized, t.setup.s1, t.setup.s2, row.t, row.avg_u1,
                    row.avg_u2, row.ext_regret1, row.ext_regret2, row.swap_regret1, row.swap_regret2);
      out << buf;
    }
  }
}

}  // namespace stacklab
