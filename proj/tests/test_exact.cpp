#include <doctest.h>

#include "momdp/exact.hpp"
#include "momdp/instances.hpp"

using namespace momdp;

TEST_CASE("value system on simple chains") {
    Mdp m;
    m.state_names = {"s", "g"};
    m.actions.resize(2);
    m.actions[0].push_back({"go", {{1, Rat(1)}}});
    m.actions[1].push_back({"loop", {{1, Rat(1)}}});
    m.validate();
    Objective obj;
    obj.goal = {1};
    obj.reward.set(0, 0, 1, Rat(5, 2));
    auto values = solve_value_system(m, obj, {1});
    CHECK(values.at(0) == Rat(5, 2));
    CHECK(values.at(1) == 0);

    auto fig5a = builtin("fig5a");
    PureStationaryStrategy beta{{1, 0}};
    Mdp chain = induce_chain(fig5a.mdp, beta);
    Objective chain_obj;
    chain_obj.goal = {1};
    chain_obj.reward.set(0, 0, 1, Rat(1));
    auto v5 = solve_value_system(chain, chain_obj, {1});
    CHECK(v5.at(0) == 1);
}

TEST_CASE("value system residuals vanish exactly") {
    auto fig1 = builtin("fig1");
    PureStationaryStrategy sigma{{1, 0, 0, 0, 0, 0}};
    Mdp chain = induce_chain(fig1.mdp, sigma);
    Objective obj;  // circle reachability rewards on the chain rows
    obj.goal = {3, 5};
    for (StateId s = 0; s < chain.num_states(); ++s)
        for (const auto& [succ, prob] : chain.actions[s][0].successors)
            if (obj.goal.count(succ)) obj.reward.set(s, 0, succ, Rat(1));
    std::set<StateId> zero = {2, 3, 4, 5};  // goals plus zero-reward components
    auto values = solve_value_system(chain, obj, zero);
    CHECK(values.at(0) == Rat(7, 10));
    for (StateId s = 0; s < chain.num_states(); ++s) {
        if (zero.count(s)) {
            CHECK(values.at(s) == 0);
            continue;
        }
        Rat rhs(0);
        for (const auto& [succ, prob] : chain.actions[s][0].successors)
            rhs += prob * (values.at(succ) + obj.reward.get(s, 0, succ));
        CHECK(values.at(s) == rhs);  // exact residual
    }
    // singular when the anchor set is unreachable from a closed component
    CHECK_THROWS_AS(solve_value_system(chain, obj, std::set<StateId>{3}), Error);
}

TEST_CASE("strategy evaluation covers zero, finite, and infinite values") {
    auto fig5a = builtin("fig5a");
    PureStationaryStrategy alpha{{0, 0}};
    CHECK(evaluate_strategy(fig5a.mdp, alpha, fig5a.query.objectives[0]) == ExtRat(Rat(0)));
    PureStationaryStrategy beta{{1, 0}};
    CHECK(evaluate_strategy(fig5a.mdp, beta, fig5a.query.objectives[0]) == ExtRat(Rat(1)));

    // positive-reward absorbing loop diverges under total reward
    Mdp spin;
    spin.state_names = {"s"};
    spin.actions.resize(1);
    spin.actions[0].push_back({"loop", {{0, Rat(1)}}});
    spin.validate();
    Objective total;
    total.reward.set(0, 0, 0, Rat(1));
    CHECK(evaluate_strategy(spin, {{0}}, total).is_infinite());

    // same loop with the state as goal: accumulation stops immediately
    Objective stopped = total;
    stopped.goal = {0};
    CHECK(evaluate_strategy(spin, {{0}}, stopped) == ExtRat(Rat(0)));

    // divergence needs the bad component to be reachable before the goal
    Mdp gate;
    gate.state_names = {"s", "g", "bad"};
    gate.actions.resize(3);
    gate.actions[0].push_back({"go", {{1, Rat(1)}}});
    gate.actions[1].push_back({"on", {{2, Rat(1)}}});
    gate.actions[2].push_back({"loop", {{2, Rat(1)}}});
    gate.validate();
    Objective reward_after_goal;
    reward_after_goal.goal = {1};
    reward_after_goal.reward.set(2, 0, 2, Rat(3));
    CHECK(evaluate_strategy(gate, {{0, 0, 0}}, reward_after_goal) == ExtRat(Rat(0)));
    Objective no_goal = reward_after_goal;
    no_goal.goal = {};
    CHECK(evaluate_strategy(gate, {{0, 0, 0}}, no_goal).is_infinite());
}

TEST_CASE("check_achieves compares exactly") {
    auto fig1 = builtin("fig1");
    PureStationaryStrategy sigma{{1, 1, 0, 0, 0, 0}};
    Point p{{ExtRat(Rat(7, 10)), ExtRat(Rat(7, 10))}};
    CHECK(check_achieves(fig1.mdp, sigma, fig1.query, p));
    Point q{{ExtRat(Rat(71, 100)), ExtRat(Rat(7, 10))}};
    CHECK_FALSE(check_achieves(fig1.mdp, sigma, fig1.query, q));
    Point zeros{{ExtRat(Rat(0)), ExtRat(Rat(0))}};
    CHECK(check_achieves(fig1.mdp, sigma, fig1.query, zeros));
}

TEST_CASE("achievement is monotone under domination") {
    auto mq = random_mdp({.seed = 77, .num_states = 5, .max_actions = 2});
    std::vector<Point> pts;
    for_each_strategy(mq.mdp, [&](const PureStationaryStrategy& sigma) {
        pts.push_back(Point{evaluate_strategy_query(mq.mdp, sigma, mq.query)});
    });
    PureStationaryStrategy first;
    first.choice.assign(mq.mdp.num_states(), 0);
    for (const auto& p : pts)
        for (const auto& p2 : pts)
            if (check_achieves(mq.mdp, first, mq.query, p) && dominates(mq.query, p, p2))
                CHECK(check_achieves(mq.mdp, first, mq.query, p2));
}

TEST_CASE("brute force oracle on the figures") {
    auto fig1 = builtin("fig1");
    auto pareto = brute_force_pareto(fig1.mdp, fig1.query);
    REQUIRE(pareto.size() == 3);
    std::set<std::string> found;
    for (const auto& p : pareto) found.insert(p.to_string());
    CHECK(found.count("(1,0)"));
    CHECK(found.count("(0,1)"));
    CHECK(found.count("(7/10,7/10)"));

    Point good{{ExtRat(Rat(7, 10)), ExtRat(Rat(7, 10))}};
    Point bad{{ExtRat(Rat(1)), ExtRat(Rat(8, 10))}};
    CHECK(brute_force_achievable(fig1.mdp, fig1.query, good));
    CHECK_FALSE(brute_force_achievable(fig1.mdp, fig1.query, bad));

    // a Markov chain yields its single value vector
    PureStationaryStrategy sigma{{0, 0, 0, 0, 0, 0}};
    Mdp chain = induce_chain(fig1.mdp, sigma);
    Query q2 = fig1.query;  // same rewards apply: action index 0 everywhere
    auto single = brute_force_pareto(chain, fig1.query);
    CHECK(single.size() == 1);
}

TEST_CASE("pareto oracle equals domination-filtered value vectors") {
    auto mq = random_mdp({.seed = 123, .num_states = 5, .max_actions = 2});
    std::vector<Point> all;
    for_each_strategy(mq.mdp, [&](const PureStationaryStrategy& sigma) {
        all.push_back(Point{evaluate_strategy_query(mq.mdp, sigma, mq.query)});
    });
    auto expected = filter_dominated(mq.query, all);
    auto got = brute_force_pareto(mq.mdp, mq.query);
    REQUIRE(got.size() == expected.size());
    for (size_t i = 0; i < got.size(); ++i) CHECK(got[i].to_string() == expected[i].to_string());

    // parallel enumeration merges to the identical result
    auto threaded = brute_force_pareto(mq.mdp, mq.query, kDefaultStrategyCap, 4);
    REQUIRE(threaded.size() == got.size());
    for (size_t i = 0; i < got.size(); ++i) CHECK(threaded[i].to_string() == got[i].to_string());
}

TEST_CASE("strategy cap guards the enumeration") {
    auto mq = random_mdp({.seed = 5, .num_states = 6, .max_actions = 3});
    CHECK_THROWS_AS(brute_force_pareto(mq.mdp, mq.query, 3), Error);
    CHECK(count_strategies(mq.mdp, 3) == 4);  // saturates at cap + 1
}

TEST_CASE("subset-sum family: reachability values are complementary") {
    SubsetSumInstance inst{3, {1, 2, 3}, 3};
    auto red = gen_subset_sum(inst);
    for_each_strategy(red.mdp, [&](const PureStationaryStrategy& sigma) {
        auto values = evaluate_strategy_query(red.mdp, sigma, red.query);
        CHECK(values[0].value() + values[1].value() == 1);
    });
}
