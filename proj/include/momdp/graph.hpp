#pragma once

#include "momdp/mdp.hpp"

#include <optional>

namespace momdp {

using PairSet = std::set<std::pair<StateId, int>>;

struct MecDecomposition {
    std::vector<PairSet> mecs;  // ordered by minimal state index

    // States covered by each MEC.
    std::vector<std::set<StateId>> state_sets() const;
    // Index of the MEC containing state s, or -1.
    int mec_of_state(StateId s, int num_states) const;
};

struct ObjectiveStateSets {
    std::set<StateId> zero;   // value 0 under every strategy
    std::set<StateId> maybe;  // reachable from the initial state avoiding zero
};

// Numeric bounds feeding the big-M constraints of the encodings.
struct Bounds {
    std::vector<std::vector<Rat>> reward_upper;  // [objective][state] u_s^j
    std::vector<Rat> visit_upper;                // [state] F_s
};

// Strongly connected components of the graph restricted to the given pairs
// (Tarjan); components are returned in reverse topological order.
std::vector<std::vector<StateId>> strongly_connected_components(const Mdp& m,
                                                                const PairSet& pairs);

// Largest subset of `candidates` that is closed for m.
PairSet largest_closed_subset(const Mdp& m, const PairSet& candidates);

// Maximal end components of the sub-model spanned by `pairs`
// (iterative SCC refinement).
MecDecomposition compute_mecs_restricted(const Mdp& m, const PairSet& pairs);
MecDecomposition compute_mecs(const Mdp& m);

// S0 / S? for one objective, from the graph structure: zero contains the
// states from which no positive-reward transition can be taken before the
// goal; maybe contains the non-zero states reachable while avoiding zero.
ObjectiveStateSets compute_zero_states(const Mdp& m, const Objective& obj);

// States from which every strategy collects infinite reward for at least one
// minimizing objective: those that cannot reach an EC free of minimizing reward.
std::set<StateId> compute_sinfty(const Mdp& m, const Query& q);

// Sub-MDP over the largest closed pair set avoiding compute_sinfty(m, q).
// Throws Error(InitialInfinite) when the initial state itself is infinite.
SubMdpResult restrict_to_finite(const Mdp& m, const Query& q);

// Transforms m so that no end component outside `keep` remains, preserving
// reachability probabilities up to the documented over-approximation: each
// eliminated EC state receives fresh exit actions with self-loop weight 1-p.
Mdp eliminate_ecs(const Mdp& m, const std::set<StateId>& keep);

// As above but also produces a reward structure for the transformed model in
// which each transformed transition carries `state_step_reward` of its source.
Mdp eliminate_ecs_with_rewards(const Mdp& m, const std::set<StateId>& keep,
                               const std::vector<Rat>& state_step_reward,
                               RewardStructure* out_reward);

// Exact optimal maximal expected total reward per state, for an EC-free
// model in which the sink set `zero` is reached almost surely. Policy
// iteration with exact linear solves.
std::vector<Rat> optimal_max_expected_reward(const Mdp& m, const RewardStructure& reward,
                                             const std::set<StateId>& zero);

// Upper bounds u_s >= max_sigma E_s(R_j <> G_j) over strategies with finite
// value, for every s in sets.maybe. Entries for other states are 0.
std::vector<Rat> compute_reward_upper_bounds(const Mdp& m, const Objective& obj,
                                             const ObjectiveStateSets& sets);

// Upper bounds F_s on the expected number of visits of s before reaching
// `sink`, over strategies reaching the sink almost surely. With
// allow_empty_sink, an empty sink bounds visits before any trapping component.
std::vector<Rat> compute_visit_upper_bounds(const Mdp& m, const std::set<StateId>& sink,
                                            bool allow_empty_sink = false);

// Emitted when a computed bound magnitude exceeds the stability threshold.
extern const Rat kBoundWarnThreshold;
bool bounds_exceed_warn_threshold(const std::vector<Rat>& bounds);

}  // namespace momdp
