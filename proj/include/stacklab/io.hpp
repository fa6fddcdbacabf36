#pragma once

// JSON encodings of games, priors, learner specs and experiment configs, and
// JSON/CSV renderings of every report.
//
// Game:   {"name": str, "actions1": [str], "actions2": [str], "u1": [[num]], "u2": [[num]]}
// Prior:  {"games": [{"weight": num, "game": <game object or builtin ref>}]} or a builtin ref
// Spec:   {"kind": str, "params": {...}}
// Config: {"prior", "signal_model": {"p1", "p2"}, "learner1", "learner2", "horizon",
//          "trials", "feedback_mode", "pure_realization", "master_seed",
//          "checkpoints", "threads"}

#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "stacklab/audit.hpp"
#include "stacklab/engine.hpp"
#include "stacklab/game.hpp"
#include "stacklab/learners.hpp"
#include "stacklab/solve.hpp"

namespace stacklab {

using json = nlohmann::ordered_json;

// Parse errors are reported as std::invalid_argument "<source>:<line>:<column>: ...".
json parse_json_text(std::string_view text, std::string_view source);
json load_json_file(const std::string& path);

GameMatrix game_from_json(const json& j);
json game_to_json(const GameMatrix& g);
Prior prior_from_json(const json& j);
json prior_to_json(const Prior& p);
LearnerSpec learner_spec_from_json(const json& j);
json learner_spec_to_json(const LearnerSpec& s);
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& cfg);

// Applies "dotted.path=value" to a config document. Every path segment must
// already exist, except a new key directly under a "params" object. The value
// is parsed as JSON when possible and taken as a string otherwise.
void apply_override(json& doc, std::string_view assignment);

json mean_ci_to_json(const MeanCI& m);
json stackelberg_to_json(const StackelbergSolution& s, const GameMatrix& g, int leader);
json stackval_prior_to_json(const Prior& p, int leader);
json estimate_to_json(const EstimateReport& r, const ExperimentConfig& cfg);
json csp_report_to_json(const CspReport& r, const Prior& prior);
json audit_to_json(const AuditReport& r);
json claims_to_json(const ClaimsReport& r);
json revelation_to_json(const RevelationReport& r, const Prior& prior);
json belief_to_json(const BeliefTraceReport& r);

// Header: trial,realized_game,s1,s2,t,avg_u1,avg_u2,ext_regret1,ext_regret2,swap_regret1,swap_regret2
void write_trials_csv(std::ostream& out, const EstimateReport& r);

}  // namespace stacklab
