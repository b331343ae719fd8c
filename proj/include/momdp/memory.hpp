#pragma once

#include "momdp/encodings.hpp"
#include "momdp/mdp.hpp"

namespace momdp {

struct MemoryStructure {
    int size = 0;                          // |M|
    int initial = 0;                       // m_I
    std::vector<std::vector<int>> update;  // m -> allowed successor memories
    std::vector<std::string> names;

    void validate() const;
};

// Every memory state may move to every memory state: the product captures
// exactly the pure K-memory strategies.
MemoryStructure build_complete_memory(int k);

// Chain m_0 .. m_k with update {m_i, m_i+1} (last state absorbing); k counting
// steps need k+1 chain states, so the structure has size k+1.
MemoryStructure build_counter_memory(int k);

struct MealyStrategy {
    int memory_size = 0;
    int initial_memory = 0;
    std::vector<std::string> memory_names;
    // next_action[s][m] = action index in the original model
    std::vector<std::vector<int>> next_action;
    // update[m][s][a] = next memory
    std::vector<std::vector<std::vector<int>>> update;
};

struct MemoryProduct {
    Mdp mdp;
    // product state -> (original state, memory)
    std::vector<std::pair<StateId, int>> unpack;
    // product action -> (original action, next memory)
    std::vector<std::vector<std::pair<int, int>>> unpack_action;
    int state_of(StateId s, int mem) const;  // -1 when pruned

    std::vector<int> pack;  // internal: s * size + mem -> product state
    int memory_size = 0;

    // goal tracking: the memory is the set of goal bits collected on arrival
    bool goal_tracking = false;
    std::vector<int> goal_mask;  // per original state
};

inline constexpr long long kProductStateGuard = 1000000;

// Synchronous product with a nondeterministic memory structure; unreachable
// product states are pruned.
MemoryProduct product(const Mdp& m, const MemoryStructure& mem);

// Product tracking which goal sets have been visited; the memory update is
// determined by the successor state, so this is built directly rather than
// through a memory structure.
MemoryProduct goal_memory_product(const Mdp& m, const Query& q);

// Query on the product: goals become G x M, rewards ignore the memory.
Query lift_query(const Query& q, const MemoryProduct& prod);

// Pure stationary product strategy as a Mealy machine on the original model.
// Unreachable (state, memory) pairs act with the lowest-index enabled action.
MealyStrategy to_mealy(const MemoryProduct& prod, const PureStationaryStrategy& sigma,
                       const Mdp& original);

// Mealy strategy translated back to a stationary strategy of its product
// chain; used to evaluate Mealy strategies exactly.
ValueVector evaluate_mealy(const Mdp& m, const Query& q, const MealyStrategy& strategy);

enum class MemoryKind { Complete, Counter, Goal };

struct PbmaResult {
    PsmaVerdict verdict = PsmaVerdict::NotAchievable;
    // sound-but-incomplete memory pattern: NotAchievable only bounds from below
    bool lower_bound_only = false;
    std::optional<MealyStrategy> strategy;
    ValueVector values;
};

// Bounded-memory achievability via the product reduction.
PbmaResult pbma_check(const Mdp& m, const Query& q, int memory_bound, const Point& p,
                      MemoryKind kind = MemoryKind::Complete, const PsmaOptions& opts = {});

}  // namespace momdp
