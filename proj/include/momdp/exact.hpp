#pragma once

#include "momdp/graph.hpp"
#include "momdp/mdp.hpp"

#include <map>
#include <optional>

namespace momdp {

// Per-objective exact value of a strategy at the initial state.
using ValueVector = std::vector<ExtRat>;

// Unique solution of the expected-reward equation system on an induced chain:
// x_s = 0 on `zero`, x_s = sum_s' P(s,s') (x_s' + R(s,s')) elsewhere.
// Precondition (caller): the zero set plus zero-reward BSCCs are reached
// almost surely and all values are finite; otherwise SingularSystem.
std::map<StateId, Rat> solve_value_system(const Mdp& chain, const Objective& obj,
                                          const std::set<StateId>& zero);

// Exact per-state values of one strategy, infinity where reward diverges.
std::vector<ExtRat> evaluate_strategy_all_states(const Mdp& m,
                                                 const PureStationaryStrategy& sigma,
                                                 const Objective& obj);

ExtRat evaluate_strategy(const Mdp& m, const PureStationaryStrategy& sigma,
                         const Objective& obj);

ValueVector evaluate_strategy_query(const Mdp& m, const PureStationaryStrategy& sigma,
                                    const Query& q);

bool value_meets(const ExtRat& value, Relation relation, const ExtRat& threshold);

// Exact check of <M, sigma, p> |= Q.
bool check_achieves(const Mdp& m, const PureStationaryStrategy& sigma, const Query& q,
                    const Point& p);

inline constexpr long long kDefaultStrategyCap = 1000000;

// Number of pure stationary strategies, saturating at cap+1.
long long count_strategies(const Mdp& m, long long cap = kDefaultStrategyCap);

// Enumerates all pure stationary strategies in lexicographic order
// (state index, then action index) and calls fn; the oracle backbone.
void for_each_strategy(const Mdp& m, const std::function<void(const PureStationaryStrategy&)>& fn,
                       long long cap = kDefaultStrategyCap);

bool brute_force_achievable(const Mdp& m, const Query& q, const Point& p,
                            long long cap = kDefaultStrategyCap, int threads = 1);

// Witness variant: the lexicographically first achieving strategy.
std::optional<PureStationaryStrategy> brute_force_witness(const Mdp& m, const Query& q,
                                                          const Point& p,
                                                          long long cap = kDefaultStrategyCap);

// All non-dominated value vectors over pure stationary strategies.
std::vector<Point> brute_force_pareto(const Mdp& m, const Query& q,
                                      long long cap = kDefaultStrategyCap, int threads = 1);

// Removes dominated or duplicate points (used by the oracle and tests).
std::vector<Point> filter_dominated(const Query& q, std::vector<Point> points);

}  // namespace momdp
