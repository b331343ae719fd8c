#pragma once

#include "momdp/rational.hpp"

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace momdp {

enum class ErrorKind {
    InvalidModel,
    NotClosed,
    StartOutside,
    InvalidStrategy,
    DimensionMismatch,
    SingularSystem,
    TooManyStrategies,
    UnboundedReward,
    EmptySink,
    InitialInfinite,
    UnknownName,
    AmbiguousSelection,
    ZeroMemory,
    ProductTooLarge,
    InfinitePoint,
    NotTotalReward,
    BadInput,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

using StateId = int;

// One enabled action: label plus a sparse successor distribution.
// Successor lists are kept sorted by state index and probabilities sum to 1.
struct ActionEntry {
    std::string label;
    std::vector<std::pair<StateId, Rat>> successors;
};

struct Mdp {
    std::vector<std::string> state_names;
    std::vector<std::vector<ActionEntry>> actions;  // indexed by state
    StateId initial = 0;

    int num_states() const { return static_cast<int>(state_names.size()); }
    int num_actions(StateId s) const { return static_cast<int>(actions[s].size()); }
    int total_action_count() const;

    const ActionEntry& action(StateId s, int a) const { return actions[s][a]; }
    // Index of the action with the given label, or -1.
    int action_index(StateId s, const std::string& label) const;
    int state_index(const std::string& name) const;  // -1 if unknown

    // Probability of (s, a) -> t, zero if t is not a successor.
    Rat probability(StateId s, int a, StateId t) const;

    // Checks all structural invariants; throws Error(InvalidModel).
    void validate() const;

    // Sorts successor lists and normalizes representation.
    void normalize();

    std::vector<std::pair<StateId, int>> all_pairs() const;
};

// Sparse non-negative transition rewards; absent entries are zero.
struct RewardStructure {
    std::map<std::tuple<StateId, int, StateId>, Rat> entries;

    Rat get(StateId s, int a, StateId t) const;
    void set(StateId s, int a, StateId t, Rat value);
    // Expected one-step reward sum_t P(s,a,t) * R(s,a,t).
    Rat expected_step(const Mdp& m, StateId s, int a) const;
    // True if every entry of (s,a,*) is zero.
    bool action_is_zero(StateId s, int a) const;
    void validate(const Mdp& m) const;
};

enum class Relation { AtLeast, AtMost };

struct Objective {
    RewardStructure reward;
    Relation relation = Relation::AtLeast;
    std::set<StateId> goal;  // empty set = total reward objective

    bool maximizing() const { return relation == Relation::AtLeast; }
    bool total_reward() const { return goal.empty(); }
};

struct Query {
    std::vector<Objective> objectives;
    int dimension() const { return static_cast<int>(objectives.size()); }
};

struct Point {
    std::vector<ExtRat> coords;
    int dimension() const { return static_cast<int>(coords.size()); }
    bool all_finite() const;
    std::string to_string() const;
};

struct PureStationaryStrategy {
    std::vector<int> choice;  // action index per state

    void validate(const Mdp& m) const;  // throws InvalidStrategy
};

// Sub-MDP over a closed pair set. States are reindexed; the maps relate
// the new model to the original one.
struct SubMdpResult {
    Mdp mdp;
    std::vector<StateId> orig_of;  // new index -> original index
    std::vector<int> new_of;      // original index -> new index or -1
    std::vector<std::vector<int>> orig_action_of;  // new (s,a) -> original action index

    std::set<StateId> project_states(const std::set<StateId>& orig) const;
    RewardStructure project_reward(const RewardStructure& orig) const;
    Objective project_objective(const Objective& orig) const;
    Query project_query(const Query& orig) const;
};

// M restricted to a closed set of state-action pairs, started at `start`.
SubMdpResult sub_mdp(const Mdp& m, const std::set<std::pair<StateId, int>>& pairs,
                     StateId start);

// Markov chain induced by a pure stationary strategy. State indices are
// preserved; every state keeps exactly its chosen action.
Mdp induce_chain(const Mdp& m, const PureStationaryStrategy& sigma);

// Converts a reachability goal into the reward structure that pays 1 on
// every transition entering the goal, so probabilities become expected rewards.
Objective reachability_to_reward(const Mdp& m, const std::set<StateId>& goal,
                                 Relation relation = Relation::AtLeast);

// True iff p2 lies in the closure of {p} with respect to q.
bool dominates(const Query& q, const Point& p, const Point& p2);

// States reachable from `from` in the underlying graph (all actions).
std::vector<bool> reachable_states(const Mdp& m, StateId from);

}  // namespace momdp
