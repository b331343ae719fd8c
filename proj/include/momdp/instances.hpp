#pragma once

#include "momdp/mdp.hpp"

#include <cstdint>

namespace momdp {

struct ModelWithQuery {
    Mdp mdp;
    Query query;
};

struct SubsetSumInstance {
    int n = 0;
    std::vector<long long> weights;
    long long target = 0;

    void validate() const;
    long long weight_sum() const;
    // dynamic-programming decision, the independent oracle
    bool solvable() const;
};

// MDP reduction of a subset-sum instance: the point is achievable by a pure
// stationary strategy iff some subset of the weights sums to the target.
struct SubsetSumReduction {
    Mdp mdp;
    Query query;
    Point point;
};
SubsetSumReduction gen_subset_sum(const SubsetSumInstance& inst);

// Built-in example models: "fig1", "fig5a", "fig5b".
ModelWithQuery builtin(const std::string& name);

struct RandomMdpParams {
    std::uint64_t seed = 1;
    int num_states = 5;
    int max_actions = 2;
    double density = 0.5;     // fraction of states a transition may target
    int reward_range = 4;     // reward values drawn from 0..reward_range
    int num_objectives = 2;
    bool plant_cycle = true;  // plant a closed cycle so end components occur
};

// Seed-deterministic random model; probabilities have denominator <= 16 and
// every end component is reward-free, so all query values stay finite.
ModelWithQuery random_mdp(const RandomMdpParams& params);

}  // namespace momdp
