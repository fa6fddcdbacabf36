#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stacklab/audit.hpp"
#include "stacklab/builtin_games.hpp"
#include "stacklab/engine.hpp"
#include "stacklab/io.hpp"
#include "stacklab/solve.hpp"

namespace stacklab {
namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> threads;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_config) {
  auto* cfg = cmd->add_option("--config", o.config_path, "Experiment config (JSON)");
  if (needs_config) cfg->required();
  cmd->add_option("--set", o.overrides, "Override a config value, e.g. signal_model.p2=0.5");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--trials", o.trials, "Number of trials");
  cmd->add_option("--horizon", o.horizon, "Rounds per trial");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--out", o.out_dir, "Output directory (default: $STACKLAB_OUTPUT_DIR)");
}

std::string output_dir(const CommonOptions& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("STACKLAB_OUTPUT_DIR")) return env;
  return {};
}

ExperimentConfig load_config(const CommonOptions& o) {
  json doc = config_to_json(config_from_json(load_json_file(o.config_path)));
  for (const std::string& s : o.overrides) apply_override(doc, s);
  if (o.seed) doc["master_seed"] = *o.seed;
  if (o.trials) doc["trials"] = *o.trials;
  if (o.horizon) {
    doc["horizon"] = *o.horizon;
    // Explicit checkpoints beyond a shortened horizon would be invalid.
    json kept = json::array();
    for (const json& t : doc["checkpoints"]) {
      if (t.get<std::size_t>() <= *o.horizon) kept.push_back(t);
    }
    doc["checkpoints"] = kept;
  }
  if (o.threads) doc["threads"] = *o.threads;
  return config_from_json(doc);
}

// A builtin reference, or else a path to a JSON file.
json resolve_ref(const std::string& ref) {
  if (builtin_game(ref) || builtin_prior(ref)) return json(ref);
  return load_json_file(ref);
}

void emit(const json& report, const std::string& name, const CommonOptions& o, std::ostream& out) {
  out << report.dump(2) << "\n";
  const std::string dir = output_dir(o);
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ofstream f(std::filesystem::path(dir) / (name + ".json"));
  if (!f) throw std::runtime_error("cannot write to output directory '" + dir + "'");
  f << report.dump(2) << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Repeated Bayesian games: Stackelberg benchmarks, simulation and equilibrium audits",
               "stacklab"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string game_ref, prior_ref, belief = "utility_likelihood", csv_path;
  int player = 0;
  double epsilon = 0.1, p_star = 0.0, tol = 0.05, tau = 0.05;
  bool independent = false;

  auto* stackval = app.add_subcommand("stackval", "Optimistic Stackelberg value of a game or prior");
  auto* game_opt = stackval->add_option("--game", game_ref, "Builtin game ref or game JSON file");
  auto* prior_opt = stackval->add_option("--prior", prior_ref, "Builtin prior ref or prior JSON file");
  game_opt->excludes(prior_opt);
  stackval->add_option("--player", player, "Leader (1 or 2)")->default_val(1);
  stackval->add_option("--out", common.out_dir, "Output directory");

  auto* simulate = app.add_subcommand("simulate", "Run trials and report utilities, regrets and CSPs");
  add_common(simulate, common, true);
  simulate->add_option("--csv", csv_path, "Also write the per-trial CSV here");

  auto* audit = app.add_subcommand("audit", "Approximate-equilibrium audit against the deviation library");
  add_common(audit, common, true);
  audit->add_option("--epsilon", epsilon, "Tolerated deviation gain")->default_val(0.1);
  audit->add_flag("--independent-seeds", independent, "Give each deviation its own seeds");

  auto* claims = app.add_subcommand("claims", "CSP claims verifier for the fig1 family");
  add_common(claims, common, true);
  claims->add_option("--p-star", p_star, "Signal-precision threshold p*")->default_val(0.0);
  claims->add_option("--tol", tol, "Tolerance")->default_val(0.05);

  auto* reveal = app.add_subcommand("reveal", "One-round revelation analysis");
  reveal->add_option("--prior", prior_ref, "Builtin prior ref or prior JSON file")->required();
  reveal->add_option("--player", player, "Analyzed player (1 or 2)")->default_val(2);
  reveal->add_option("--out", common.out_dir, "Output directory");

  auto* learn = app.add_subcommand("learn", "Belief-meter trace over trials");
  add_common(learn, common, true);
  learn->add_option("--belief", belief,
                    "nearest_best_response | utility_likelihood | external_signal")
      ->default_val("utility_likelihood");
  learn->add_option("--tau", tau, "Success threshold on the final error")->default_val(0.05);
  learn->add_option("--player", player, "Belief holder (1 or 2)")->default_val(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitError;
  }

  try {
    if (*stackval) {
      check_player(player);
      json report;
      if (!game_ref.empty()) {
        const GameMatrix g = game_from_json(resolve_ref(game_ref));
        report = stackelberg_to_json(stackelberg_value(g, player), g, player);
      } else if (!prior_ref.empty()) {
        report = stackval_prior_to_json(prior_from_json(resolve_ref(prior_ref)), player);
      } else {
        throw std::invalid_argument("stackval needs --game or --prior");
      }
      emit(report, "stackval", common, out);
      return kExitPass;
    }
    if (*simulate) {
      const ExperimentConfig cfg = load_config(common);
      const std::vector<TrialSummary> trials = run_trials(cfg);
      const CspReport csps = csp_report(cfg, trials);
      const EstimateReport est = summarize(cfg, trials);
      json report = estimate_to_json(est, cfg);
      report["csp"] = csp_report_to_json(csps, cfg.prior);
      emit(report, "simulate", common, out);
      std::vector<std::filesystem::path> csv_targets;
      if (!csv_path.empty()) csv_targets.emplace_back(csv_path);
      if (const std::string dir = output_dir(common); !dir.empty()) {
        csv_targets.push_back(std::filesystem::path(dir) / "trials.csv");
      }
      for (const auto& path : csv_targets) {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
        write_trials_csv(f, est);
      }
      return kExitPass;
    }
    if (*audit) {
      const ExperimentConfig cfg = load_config(common);
      const AuditReport rep =
          audit_pne(cfg, DeviationLibrary::standard(cfg), epsilon, !independent);
      emit(audit_to_json(rep), "audit", common, out);
      return rep.pass ? kExitPass : kExitFail;
    }
    if (*claims) {
      const ExperimentConfig cfg = load_config(common);
      const ClaimsReport rep = verify_claims(cfg, p_star, tol);
      emit(claims_to_json(rep), "claims", common, out);
      return rep.contradiction ? kExitFail : kExitPass;
    }
    if (*reveal) {
      const Prior prior = prior_from_json(resolve_ref(prior_ref));
      emit(revelation_to_json(revelation_analysis(prior, player), prior), "reveal", common, out);
      return kExitPass;
    }
    if (*learn) {
      const ExperimentConfig cfg = load_config(common);
      const BeliefTraceReport rep = belief_trace(cfg, parse_belief_kind(belief), tau, player);
      emit(belief_to_json(rep), "learn", common, out);
      return rep.success ? kExitPass : kExitFail;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace stacklab
