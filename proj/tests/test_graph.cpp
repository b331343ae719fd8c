#include <doctest.h>

#include "momdp/exact.hpp"
#include "momdp/graph.hpp"
#include "momdp/instances.hpp"

using namespace momdp;

namespace {

// exhaustive oracle: all maximal closed, internally connected pair sets
std::vector<PairSet> brute_force_mecs(const Mdp& m) {
    std::vector<std::pair<StateId, int>> pairs = m.all_pairs();
    const int n = static_cast<int>(pairs.size());
    REQUIRE(n <= 20);
    std::vector<PairSet> ecs;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        PairSet set;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1) set.insert(pairs[i]);
        // closed?
        std::set<StateId> states;
        for (const auto& [s, a] : set) states.insert(s);
        bool closed = true;
        for (const auto& [s, a] : set)
            for (const auto& [succ, prob] : m.actions[s][a].successors)
                if (!states.count(succ)) closed = false;
        if (!closed) continue;
        // internally strongly connected?
        auto sccs = strongly_connected_components(m, set);
        if (sccs.size() != 1 || sccs[0].size() != states.size()) continue;
        ecs.push_back(set);
    }
    std::vector<PairSet> maximal;
    for (const auto& e : ecs) {
        bool strict_subset = false;
        for (const auto& f : ecs)
            if (e != f && std::includes(f.begin(), f.end(), e.begin(), e.end()))
                strict_subset = true;
        if (!strict_subset) maximal.push_back(e);
    }
    std::sort(maximal.begin(), maximal.end(),
              [](const PairSet& a, const PairSet& b) { return *a.begin() < *b.begin(); });
    return maximal;
}

Mdp two_state_ec_model() {
    // uniform 1/2 cycle between a and b, with an exit from b
    Mdp m;
    m.state_names = {"a", "b", "sink"};
    m.actions.resize(3);
    m.actions[0].push_back({"mix", {{0, Rat(1, 2)}, {1, Rat(1, 2)}}});
    m.actions[1].push_back({"mix", {{0, Rat(1, 2)}, {1, Rat(1, 2)}}});
    m.actions[1].push_back({"exit", {{2, Rat(1)}}});
    m.actions[2].push_back({"loop", {{2, Rat(1)}}});
    m.validate();
    return m;
}

}  // namespace

TEST_CASE("mec decomposition on the figures") {
    Mdp single;
    single.state_names = {"s"};
    single.actions.resize(1);
    single.actions[0].push_back({"loop", {{0, Rat(1)}}});
    single.validate();
    auto mecs = compute_mecs(single);
    REQUIRE(mecs.mecs.size() == 1);
    CHECK(mecs.mecs[0] == PairSet{{0, 0}});

    auto fig5a = builtin("fig5a");
    auto m5 = compute_mecs(fig5a.mdp);
    REQUIRE(m5.mecs.size() == 2);
    CHECK(m5.mecs[0] == PairSet{{0, 0}});  // alpha self-loop
    CHECK(m5.mecs[1] == PairSet{{1, 0}});  // absorbing goal
}

TEST_CASE("mec decomposition matches the exhaustive oracle") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
        RandomMdpParams params;
        params.seed = seed;
        params.num_states = 5;
        params.max_actions = 2;
        auto mq = random_mdp(params);
        if (mq.mdp.total_action_count() > 14) continue;
        auto expected = brute_force_mecs(mq.mdp);
        auto got = compute_mecs(mq.mdp);
        REQUIRE(got.mecs.size() == expected.size());
        for (size_t i = 0; i < expected.size(); ++i) CHECK(got.mecs[i] == expected[i]);
    }
}

TEST_CASE("zero and maybe state sets") {
    auto fig5a = builtin("fig5a");
    auto sets = compute_zero_states(fig5a.mdp, fig5a.query.objectives[0]);
    CHECK(sets.zero == std::set<StateId>{1});
    CHECK(sets.maybe == std::set<StateId>{0});

    // goal everywhere: the reward prefix is empty
    Objective all_goal = reachability_to_reward(fig5a.mdp, {0, 1});
    auto sets2 = compute_zero_states(fig5a.mdp, all_goal);
    CHECK(sets2.zero == std::set<StateId>{0, 1});
    CHECK(sets2.maybe.empty());
}

TEST_CASE("zero states agree with exhaustive evaluation") {
    for (std::uint64_t seed : {3, 9, 27}) {
        RandomMdpParams params;
        params.seed = seed;
        params.num_states = 5;
        params.max_actions = 2;
        auto mq = random_mdp(params);
        const Objective& obj = mq.query.objectives[0];
        auto sets = compute_zero_states(mq.mdp, obj);
        // collect per-state suprema over all strategies
        std::vector<ExtRat> best(mq.mdp.num_states(), ExtRat(Rat(0)));
        for_each_strategy(mq.mdp, [&](const PureStationaryStrategy& sigma) {
            auto values = evaluate_strategy_all_states(mq.mdp, sigma, obj);
            for (StateId s = 0; s < mq.mdp.num_states(); ++s)
                if (values[s] > best[s]) best[s] = values[s];
        });
        for (StateId s = 0; s < mq.mdp.num_states(); ++s) {
            if (sets.zero.count(s)) CHECK(best[s] == ExtRat(Rat(0)));
            if (!sets.zero.count(s)) CHECK(best[s] > ExtRat(Rat(0)));
        }
    }
}

TEST_CASE("infinite-reward state analysis") {
    auto fig1 = builtin("fig1");
    CHECK(compute_sinfty(fig1.mdp, fig1.query).empty());  // no minimizing objective

    Mdp m;
    m.state_names = {"s"};
    m.actions.resize(1);
    m.actions[0].push_back({"loop", {{0, Rat(1)}}});
    m.validate();
    Query q;
    Objective spin;
    spin.relation = Relation::AtMost;
    spin.reward.set(0, 0, 0, Rat(1));
    q.objectives.push_back(spin);
    CHECK(compute_sinfty(m, q) == std::set<StateId>{0});
    CHECK_THROWS_AS(restrict_to_finite(m, q), Error);

    // reaching the goal stops the accumulation, so s is not infinite
    Mdp m2;
    m2.state_names = {"s", "g"};
    m2.actions.resize(2);
    m2.actions[0].push_back({"go", {{1, Rat(1)}}});
    m2.actions[1].push_back({"loop", {{1, Rat(1)}}});
    m2.validate();
    Query q2;
    Objective costly;
    costly.relation = Relation::AtMost;
    costly.goal = {1};
    costly.reward.set(0, 0, 1, Rat(5));
    costly.reward.set(1, 0, 1, Rat(7));  // collected only after the goal
    q2.objectives.push_back(costly);
    CHECK(compute_sinfty(m2, q2).empty());
}

TEST_CASE("ec elimination produces the documented weights") {
    Mdp m = two_state_ec_model();
    Mdp elim = eliminate_ecs(m, {2});
    // p = 1/2 * 1/2 = 1/4; state a receives the exit of b with self-loop 3/4
    int fresh = elim.action_index(0, "b.exit");
    REQUIRE(fresh >= 0);
    CHECK(elim.probability(0, fresh, 2) == Rat(1, 4));
    CHECK(elim.probability(0, fresh, 0) == Rat(3, 4));

    // no EC outside keep remains
    PairSet outside;
    for (const auto& [s, a] : elim.all_pairs())
        if (s != 2) outside.insert({s, a});
    CHECK(compute_mecs_restricted(elim, outside).mecs.empty());

    // EC-free input is unchanged
    Mdp acyclic;
    acyclic.state_names = {"x", "y"};
    acyclic.actions.resize(2);
    acyclic.actions[0].push_back({"go", {{1, Rat(1)}}});
    acyclic.actions[1].push_back({"stay", {{1, Rat(1)}}});
    acyclic.validate();
    Mdp elim2 = eliminate_ecs(acyclic, {1});
    CHECK(elim2.total_action_count() == acyclic.total_action_count());
    CHECK(elim2.probability(0, 0, 1) == 1);
}

TEST_CASE("ec elimination preserves reachability for transient strategies") {
    Mdp m = two_state_ec_model();
    // strategy leaving the component: exit at b
    Objective reach_sink = reachability_to_reward(m, {2});
    PureStationaryStrategy sigma{{0, 1, 0}};
    CHECK(evaluate_strategy(m, sigma, reach_sink) == ExtRat(Rat(1)));
    Mdp elim = eliminate_ecs(m, {2});
    Objective reach_elim = reachability_to_reward(elim, {2});
    // every strategy of the transformed model still reaches the sink surely
    for_each_strategy(elim, [&](const PureStationaryStrategy& s2) {
        CHECK(evaluate_strategy(elim, s2, reach_elim) == ExtRat(Rat(1)));
    });
}

TEST_CASE("visit bounds cover exact expected visits") {
    Mdp m;
    m.state_names = {"s", "t"};
    m.actions.resize(2);
    m.actions[0].push_back({"half", {{0, Rat(1, 2)}, {1, Rat(1, 2)}}});
    m.actions[1].push_back({"loop", {{1, Rat(1)}}});
    m.validate();
    auto bounds = compute_visit_upper_bounds(m, {1});
    CHECK(bounds[0] >= Rat(2));  // geometric series: expected visits of s is 2

    Mdp direct;
    direct.state_names = {"s", "t"};
    direct.actions.resize(2);
    direct.actions[0].push_back({"go", {{1, Rat(1)}}});
    direct.actions[1].push_back({"loop", {{1, Rat(1)}}});
    direct.validate();
    auto b2 = compute_visit_upper_bounds(direct, {1});
    CHECK(b2[0] >= Rat(1));

    CHECK_THROWS_AS(compute_visit_upper_bounds(m, {}), Error);
}

TEST_CASE("bounds are safe on random instances") {
    for (std::uint64_t seed : {5, 17, 23, 41}) {
        RandomMdpParams params;
        params.seed = seed;
        params.num_states = 5;
        params.max_actions = 2;
        auto mq = random_mdp(params);
        for (const auto& obj : mq.query.objectives) {
            auto sets = compute_zero_states(mq.mdp, obj);
            auto u = compute_reward_upper_bounds(mq.mdp, obj, sets);
            std::vector<ExtRat> best(mq.mdp.num_states(), ExtRat(Rat(0)));
            for_each_strategy(mq.mdp, [&](const PureStationaryStrategy& sigma) {
                auto values = evaluate_strategy_all_states(mq.mdp, sigma, obj);
                for (StateId s = 0; s < mq.mdp.num_states(); ++s)
                    if (values[s] > best[s]) best[s] = values[s];
            });
            for (StateId s : sets.maybe) {
                REQUIRE(best[s].is_finite());
                CHECK(u[s] >= best[s].value());
            }
        }
        // visit bounds against exact per-strategy expected visits
        const auto& obj = mq.query.objectives[0];
        auto sets = compute_zero_states(mq.mdp, obj);
        if (sets.zero.empty()) continue;
        auto fbounds = compute_visit_upper_bounds(mq.mdp, sets.zero);
        for_each_strategy(mq.mdp, [&](const PureStationaryStrategy& sigma) {
            Mdp chain = induce_chain(mq.mdp, sigma);
            for (StateId t = 0; t < mq.mdp.num_states(); ++t) {
                if (sets.zero.count(t)) continue;
                Objective entries;
                for (StateId s = 0; s < chain.num_states(); ++s) {
                    if (sets.zero.count(s)) continue;
                    for (const auto& [succ, prob] : chain.actions[s][0].successors)
                        if (succ == t) entries.reward.set(s, 0, succ, Rat(1));
                }
                try {
                    auto visits = solve_value_system(chain, entries, sets.zero);
                    Rat total = visits.at(mq.mdp.initial) + Rat(t == mq.mdp.initial ? 1 : 0);
                    CHECK(fbounds[t] >= total);
                } catch (const Error&) {
                    // strategy does not reach the sink almost surely: exempt
                }
            }
        });
    }
}
