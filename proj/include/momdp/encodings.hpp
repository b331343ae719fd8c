#pragma once

#include "momdp/exact.hpp"
#include "momdp/graph.hpp"
#include "momdp/milp.hpp"

#include <optional>

namespace momdp {

enum class EncodingFlavor { Base, Flow };

// One linear term per objective whose signed value equals the objective value
// in "maximizing orientation": +value for maximizing, -value for minimizing.
// var < 0 encodes the constant `offset` (used when the value is fixed at 0).
struct ObjectiveTerm {
    int var = -1;
    Rat sign{1};
    Rat offset{0};
};

struct EncodingArtifacts {
    MilpModel model;
    EncodingFlavor flavor = EncodingFlavor::Base;

    std::map<std::pair<StateId, int>, int> action_var;               // a_{s,alpha}
    std::map<std::pair<StateId, int>, int> value_var;                // x_s^j  key (s, j)
    std::map<std::tuple<StateId, int, int>, int> value_action_var;   // x_{s,alpha}^j
    std::map<std::pair<StateId, int>, int> flow_var;                 // f_{s,alpha}
    std::map<std::pair<StateId, int>, int> ec_state_var;             // e_s^j  key (s, j)
    std::map<std::tuple<StateId, int, int>, int> ec_action_var;      // e_{s,alpha}^j
    std::map<StateId, int> trapped_var;                              // f^E_s (flow flavor)
    std::vector<int> infinite_flag_var;                              // b^j or -1
    std::vector<ObjectiveTerm> objective_terms;                      // per objective

    // row indices that the multichain flow extension augments
    std::map<StateId, int> flow_conservation_row;
    int flow_outflow_row = -1;

    std::vector<ObjectiveStateSets> sets;
    Bounds bounds;
    bool bound_warning = false;
    int num_ec_blocks = 0;
};

// Expected-value encoding: action selection, per-objective value variables
// with big-M deactivation, and per-objective threshold rows; sound for
// unichain models, completed by encode_ec_constraints for multichain ones.
// Thresholds for objectives in `skip_threshold` are left to the caller.
EncodingArtifacts encode_base(const Mdp& m, const Query& q, const Point& p,
                              const Bounds& bounds,
                              const std::vector<ObjectiveStateSets>& sets,
                              const std::set<int>& skip_threshold = {});

// Expected-visit (flow) encoding for total reward objectives; smaller model,
// completed by encode_ec_constraints_flow for multichain inputs.
EncodingArtifacts encode_total_reward(const Mdp& m, const Query& q, const Point& p,
                                      const Bounds& bounds,
                                      const std::vector<ObjectiveStateSets>& sets);

// Equivalent total-reward query when every goal set is closed (or empty):
// goal-sourced rewards are dropped and goals become empty. Otherwise nullopt.
std::optional<Query> convert_to_total_reward(const Query& q, const Mdp& m);

// Model with the given states made absorbing (used before conversion when all
// objectives share one exitable goal set).
Mdp absorb_states(const Mdp& m, const std::set<StateId>& goal);

// Per objective, adds the end-component detection block: marker variables
// e_s^j forced to 1 on some state of every induced zero-reward BSCC (via an
// auxiliary uniform-source flow system) and value deactivation rows.
void encode_ec_constraints(EncodingArtifacts& art, const Mdp& m, const Query& q);

// Multichain extension of the flow encoding: one shared marker family plus
// trapped-flow variables entering the conservation and outflow rows.
void encode_ec_constraints_flow(EncodingArtifacts& art, const Mdp& m, const Query& q);

// Handling for maximizing objectives whose reward can diverge: binary b^j
// gates the threshold, and a reach-probability system with a strict row
// (via the shared epsilon variable) certifies divergence when b^j = 0.
void encode_infinite_max(EncodingArtifacts& art, const Mdp& m, const Query& q, const Point& p,
                         int objective_index);

PureStationaryStrategy extract_strategy(const EncodingArtifacts& art, const MilpSolution& sol);

// Exact variable-count formulas asserted in tests.
long long base_encoding_variable_count(const Mdp& m, const std::vector<ObjectiveStateSets>& sets);
long long flow_encoding_variable_count(const Mdp& m, int num_objectives,
                                       const std::set<StateId>& shared_zero);

// Threshold rows for the point p (used by the pipeline after the optional
// divergence blocks are in place).
void add_threshold_rows(EncodingArtifacts& art, const Query& q, const Point& p,
                        const std::set<int>& skip = {});

enum class PsmaVerdict { Achievable, NotAchievable, VerificationFailed };

struct PsmaOptions {
    enum class Flavor { Auto, Base, Flow };
    Flavor flavor = Flavor::Auto;
    SolverOptions solver;
    std::string export_lp_path;  // when set, the final model is written here
};

struct PsmaResult {
    PsmaVerdict verdict = PsmaVerdict::NotAchievable;
    std::optional<PureStationaryStrategy> strategy;  // on the original model
    ValueVector values;                              // exact re-evaluation
    EncodingFlavor flavor_used = EncodingFlavor::Base;
    bool bound_warning = false;
};

// Full achievability pipeline: preprocessing, state sets and bounds, flavor
// selection, solving, extraction, and exact verification of the witness.
PsmaResult psma_check(const Mdp& m, const Query& q, const Point& p,
                      const PsmaOptions& opts = {});

// Threshold-free encoding for repeated optimizing solves over the same model
// (region membership rows and objectives are appended per solve). Requires
// finite values for every objective and strategy.
struct AchievabilityEncoding {
    EncodingArtifacts art;
    Mdp model;    // restricted (and possibly goal-absorbed) model
    Query query;  // the encoded query (flow: converted to total reward)
    std::vector<StateId> orig_of;
    std::vector<std::vector<int>> orig_action_of;
};
AchievabilityEncoding build_region_encoding(const Mdp& m, const Query& q,
                                            PsmaOptions::Flavor flavor = PsmaOptions::Flavor::Auto);

PureStationaryStrategy lift_to_original(const AchievabilityEncoding& enc,
                                        const PureStationaryStrategy& sigma,
                                        const Mdp& original);

}  // namespace momdp
