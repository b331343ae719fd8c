#include <doctest.h>

#include "momdp/exact.hpp"
#include "momdp/instances.hpp"
#include "momdp/mdp.hpp"

using namespace momdp;

namespace {

std::set<std::pair<StateId, int>> all_pairs_of(const Mdp& m) {
    std::set<std::pair<StateId, int>> pairs;
    for (const auto& [s, a] : m.all_pairs()) pairs.insert({s, a});
    return pairs;
}

}  // namespace

TEST_CASE("model invariants are enforced") {
    Mdp m;
    m.state_names = {"a"};
    m.actions.resize(1);
    CHECK_THROWS_AS(m.validate(), Error);  // no enabled action
    m.actions[0].push_back({"x", {{0, Rat(1, 2)}}});
    CHECK_THROWS_AS(m.validate(), Error);  // probabilities do not sum to 1
    m.actions[0][0].successors = {{0, Rat(1)}};
    CHECK_NOTHROW(m.validate());
}

TEST_CASE("sub_mdp identity and closure errors") {
    auto mq = builtin("fig1");
    SubMdpResult sub = sub_mdp(mq.mdp, all_pairs_of(mq.mdp), mq.mdp.initial);
    CHECK(sub.mdp.num_states() == mq.mdp.num_states());
    CHECK(sub.mdp.total_action_count() == mq.mdp.total_action_count());
    for (StateId s = 0; s < sub.mdp.num_states(); ++s) CHECK(sub.orig_of[s] == s);

    auto fig5a = builtin("fig5a");
    // {(s0, alpha), (s1, loop)}: s0 keeps only its self loop
    SubMdpResult two = sub_mdp(fig5a.mdp, {{0, 0}, {1, 0}}, 0);
    CHECK(two.mdp.num_states() == 2);
    CHECK(two.mdp.num_actions(0) == 1);
    CHECK(two.mdp.probability(0, 0, 0) == 1);

    // beta's successor excluded: not closed
    CHECK_THROWS_AS(sub_mdp(fig5a.mdp, {{0, 0}, {0, 1}}, 0), Error);
    CHECK_THROWS_AS(sub_mdp(fig5a.mdp, {{0, 0}}, 1), Error);  // start outside
}

TEST_CASE("induce_chain matches the chosen rows") {
    auto fig5a = builtin("fig5a");
    PureStationaryStrategy beta{{1, 0}};
    Mdp chain = induce_chain(fig5a.mdp, beta);
    CHECK(chain.num_actions(0) == 1);
    CHECK(chain.probability(0, 0, 1) == 1);

    auto fig1 = builtin("fig1");
    PureStationaryStrategy sigma{{1, 0, 0, 0, 0, 0}};  // beta at s1
    Mdp c1 = induce_chain(fig1.mdp, sigma);
    CHECK(c1.probability(0, 0, 3) == Rat(7, 10));
    CHECK(c1.probability(0, 0, 4) == Rat(3, 10));

    PureStationaryStrategy bad{{5, 0, 0, 0, 0, 0}};
    CHECK_THROWS_AS(induce_chain(fig1.mdp, bad), Error);

    // a Markov chain has a unique strategy and is left unchanged
    PureStationaryStrategy unique{{0, 0}};
    Mdp mc = induce_chain(chain, unique);
    CHECK(mc.probability(0, 0, 1) == 1);
}

TEST_CASE("induce_chain agrees with sub_mdp over the strategy pairs") {
    RandomMdpParams params;
    params.seed = 11;
    params.num_states = 6;
    auto mq = random_mdp(params);
    PureStationaryStrategy sigma;
    for (StateId s = 0; s < mq.mdp.num_states(); ++s)
        sigma.choice.push_back(s % mq.mdp.num_actions(s));
    Mdp chain = induce_chain(mq.mdp, sigma);
    std::set<std::pair<StateId, int>> pairs;
    for (StateId s = 0; s < mq.mdp.num_states(); ++s) pairs.insert({s, sigma.choice[s]});
    SubMdpResult sub = sub_mdp(mq.mdp, pairs, mq.mdp.initial);
    REQUIRE(sub.mdp.num_states() == chain.num_states());
    for (StateId s = 0; s < chain.num_states(); ++s) {
        REQUIRE(sub.mdp.num_actions(s) == 1);
        for (const auto& [succ, prob] : chain.actions[s][0].successors)
            CHECK(sub.mdp.probability(s, 0, succ) == prob);
    }
}

TEST_CASE("reachability_to_reward builds the entering-goal reward") {
    auto fig1 = builtin("fig1");
    Objective empty = reachability_to_reward(fig1.mdp, {});
    CHECK(empty.reward.entries.empty());

    Objective circle = reachability_to_reward(fig1.mdp, {3, 5});
    for (const auto& [key, value] : circle.reward.entries) {
        auto [s, a, t] = key;
        CHECK((t == 3 || t == 5));
        CHECK(value == 1);
    }
    CHECK(circle.reward.get(0, 1, 3) == 1);  // beta into s4
    CHECK(circle.reward.get(1, 0, 5) == 1);  // gamma into s6

    // single absorbing goal reached surely has converted value 1
    Mdp m;
    m.state_names = {"s", "g"};
    m.actions.resize(2);
    m.actions[0].push_back({"go", {{1, Rat(1)}}});
    m.actions[1].push_back({"loop", {{1, Rat(1)}}});
    m.validate();
    Objective obj = reachability_to_reward(m, {1});
    PureStationaryStrategy sigma{{0, 0}};
    CHECK(evaluate_strategy(m, sigma, obj) == ExtRat(Rat(1)));
}

TEST_CASE("dominates is a partial order per query") {
    auto fig1 = builtin("fig1");
    const Query& q = fig1.query;
    Point a{{ExtRat(Rat(7, 10)), ExtRat(Rat(7, 10))}};
    Point b{{ExtRat(Rat(1, 2)), ExtRat(Rat(1, 2))}};
    Point c{{ExtRat(Rat(8, 10)), ExtRat(Rat(1, 10))}};
    CHECK(dominates(q, a, a));
    CHECK(dominates(q, a, b));
    CHECK_FALSE(dominates(q, a, c));
    CHECK_FALSE(dominates(q, b, a));
    // antisymmetry
    CHECK((dominates(q, a, b) && dominates(q, b, a)) == false);

    Query mixed;
    mixed.objectives.push_back(reachability_to_reward(fig1.mdp, {3, 5}, Relation::AtLeast));
    mixed.objectives.push_back(reachability_to_reward(fig1.mdp, {2}, Relation::AtMost));
    Point hi{{ExtRat(Rat(1)), ExtRat(Rat(0))}};
    Point lo{{ExtRat(Rat(1, 2)), ExtRat(Rat(2))}};
    CHECK(dominates(mixed, hi, lo));

    Point wrong{{ExtRat(Rat(1))}};
    CHECK_THROWS_AS(dominates(mixed, hi, wrong), Error);
}

TEST_CASE("transitivity of domination on random points") {
    auto fig1 = builtin("fig1");
    const Query& q = fig1.query;
    std::vector<Point> pts;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            pts.push_back({{ExtRat(Rat(i, 3)), ExtRat(Rat(j, 3))}});
    for (const auto& x : pts)
        for (const auto& y : pts)
            for (const auto& z : pts)
                if (dominates(q, x, y) && dominates(q, y, z)) CHECK(dominates(q, x, z));
}
