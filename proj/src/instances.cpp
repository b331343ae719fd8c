#include "momdp/instances.hpp"

#include "momdp/graph.hpp"

#include <algorithm>
#include <random>

namespace momdp {

void SubsetSumInstance::validate() const {
    if (n < 1 || static_cast<int>(weights.size()) != n)
        throw Error(ErrorKind::BadInput, "subset-sum instance needs n >= 1 weights");
    for (long long w : weights)
        if (w < 1) throw Error(ErrorKind::BadInput, "subset-sum weights must be >= 1");
    if (target < 0 || target > weight_sum())
        throw Error(ErrorKind::BadInput, "subset-sum target out of range");
}

long long SubsetSumInstance::weight_sum() const {
    long long s = 0;
    for (long long w : weights) s += w;
    return s;
}

bool SubsetSumInstance::solvable() const {
    validate();
    std::vector<bool> reachable(static_cast<size_t>(target) + 1, false);
    reachable[0] = true;
    for (long long w : weights)
        for (long long v = target; v >= w; --v)
            if (reachable[v - w]) reachable[v] = true;
    return reachable[target];
}

SubsetSumReduction gen_subset_sum(const SubsetSumInstance& inst) {
    inst.validate();
    SubsetSumReduction out;
    Mdp& m = out.mdp;
    const long long total = inst.weight_sum();

    m.state_names.push_back("sI");
    for (int i = 1; i <= inst.n; ++i) m.state_names.push_back("s" + std::to_string(i));
    m.state_names.push_back("g1");
    m.state_names.push_back("g2");
    const StateId g1 = inst.n + 1, g2 = inst.n + 2;
    m.actions.resize(m.num_states());
    m.initial = 0;

    ActionEntry spread{"alpha", {}};
    for (int i = 1; i <= inst.n; ++i)
        spread.successors.emplace_back(i, Rat(inst.weights[i - 1], total));
    m.actions[0].push_back(std::move(spread));
    for (int i = 1; i <= inst.n; ++i) {
        m.actions[i].push_back({"Y", {{g1, Rat(1)}}});
        m.actions[i].push_back({"N", {{g2, Rat(1)}}});
    }
    m.actions[g1].push_back({"alpha", {{g1, Rat(1)}}});
    m.actions[g2].push_back({"alpha", {{g2, Rat(1)}}});
    m.normalize();
    m.validate();

    out.query.objectives.push_back(reachability_to_reward(m, {g1}));
    out.query.objectives.push_back(reachability_to_reward(m, {g2}));
    out.point.coords = {ExtRat(Rat(inst.target, total)),
                        ExtRat(Rat(total - inst.target, total))};
    return out;
}

ModelWithQuery builtin(const std::string& name) {
    ModelWithQuery out;
    Mdp& m = out.mdp;
    if (name == "fig1") {
        m.state_names = {"s1", "s2", "s3", "s4", "s5", "s6"};
        m.actions.resize(6);
        m.initial = 0;
        m.actions[0].push_back({"alpha", {{1, Rat(1)}}});
        m.actions[0].push_back({"beta", {{3, Rat(7, 10)}, {4, Rat(3, 10)}}});
        m.actions[1].push_back({"gamma", {{5, Rat(1)}}});
        m.actions[1].push_back({"delta", {{2, Rat(1)}}});
        m.actions[2].push_back({"loop", {{2, Rat(1)}}});
        m.actions[3].push_back({"tau", {{2, Rat(1)}}});
        m.actions[4].push_back({"loop", {{4, Rat(1)}}});
        m.actions[5].push_back({"tau", {{1, Rat(8, 10)}, {4, Rat(2, 10)}}});
        m.normalize();
        m.validate();
        out.query.objectives.push_back(reachability_to_reward(m, {3, 5}));  // circle goals
        out.query.objectives.push_back(reachability_to_reward(m, {2}));     // square goal
    } else if (name == "fig5a") {
        m.state_names = {"s0", "s1"};
        m.actions.resize(2);
        m.initial = 0;
        m.actions[0].push_back({"alpha", {{0, Rat(1)}}});
        m.actions[0].push_back({"beta", {{1, Rat(1)}}});
        m.actions[1].push_back({"loop", {{1, Rat(1)}}});
        m.validate();
        Objective obj;
        obj.relation = Relation::AtLeast;
        obj.goal = {1};
        obj.reward.set(0, 1, 1, Rat(1));  // beta pays 1
        out.query.objectives.push_back(std::move(obj));
    } else if (name == "fig5b") {
        m.state_names = {"s1", "s2", "s3", "s4"};
        m.actions.resize(4);
        m.initial = 0;
        m.actions[0].push_back({"tau", {{0, Rat(1, 2)}, {1, Rat(1, 2)}}});
        m.actions[1].push_back({"alpha", {{2, Rat(1)}}});
        m.actions[1].push_back({"beta", {{3, Rat(1)}}});
        m.actions[2].push_back({"loop", {{2, Rat(1)}}});
        m.actions[3].push_back({"loop", {{3, Rat(1)}}});
        m.validate();
        out.query.objectives.push_back(reachability_to_reward(m, {2}));
        out.query.objectives.push_back(reachability_to_reward(m, {3}));
    } else {
        throw Error(ErrorKind::UnknownName, "unknown builtin model: " + name);
    }
    return out;
}

namespace {

// deterministic helpers over the raw generator, independent of libstdc++
// distribution internals
std::uint64_t draw(std::mt19937_64& gen, std::uint64_t n) { return gen() % n; }

}  // namespace

ModelWithQuery random_mdp(const RandomMdpParams& params) {
    if (params.num_states < 1 || params.max_actions < 1 || params.num_objectives < 1)
        throw Error(ErrorKind::BadInput, "bad random model parameters");
    std::mt19937_64 gen(params.seed * 0x9E3779B97F4A7C15ULL + 1);

    ModelWithQuery out;
    Mdp& m = out.mdp;
    const int n = params.num_states;
    m.state_names.resize(n);
    for (int s = 0; s < n; ++s) m.state_names[s] = "s" + std::to_string(s);
    m.actions.resize(n);
    m.initial = 0;

    const int max_succ =
        std::max(1, static_cast<int>(params.density * n + 0.5));
    for (int s = 0; s < n; ++s) {
        int num_actions = 1 + static_cast<int>(draw(gen, params.max_actions));
        for (int a = 0; a < num_actions; ++a) {
            int k = 1 + static_cast<int>(draw(gen, max_succ));
            std::vector<StateId> targets;
            for (int i = 0; i < k; ++i) {
                StateId t = static_cast<StateId>(draw(gen, n));
                if (std::find(targets.begin(), targets.end(), t) == targets.end())
                    targets.push_back(t);
            }
            std::sort(targets.begin(), targets.end());
            // integer weights over denominator 16
            std::vector<int> weights(targets.size(), 1);
            int left = 16 - static_cast<int>(targets.size());
            for (size_t i = 0; i + 1 < targets.size() && left > 0; ++i) {
                int add = static_cast<int>(draw(gen, left + 1));
                weights[i] += add;
                left -= add;
            }
            weights.back() += left;
            ActionEntry act{"a" + std::to_string(a), {}};
            for (size_t i = 0; i < targets.size(); ++i)
                act.successors.emplace_back(targets[i], Rat(weights[i], 16));
            m.actions[s].push_back(std::move(act));
        }
    }

    if (params.plant_cycle && n >= 2 && draw(gen, 2) == 0) {
        // closed cycle through a few states, so nontrivial end components occur
        int len = 2 + static_cast<int>(draw(gen, std::min(n, 3)));
        std::vector<StateId> cyc;
        for (int i = 0; i < len; ++i) {
            StateId t = static_cast<StateId>(draw(gen, n));
            if (std::find(cyc.begin(), cyc.end(), t) == cyc.end()) cyc.push_back(t);
        }
        if (cyc.size() >= 2)
            for (size_t i = 0; i < cyc.size(); ++i)
                m.actions[cyc[i]].push_back(
                    {"cyc", {{cyc[(i + 1) % cyc.size()], Rat(1)}}});
    }
    m.normalize();
    m.validate();

    // reward-free end components keep every objective value finite
    MecDecomposition mecs = compute_mecs(m);
    std::set<std::pair<StateId, int>> ec_pairs;
    for (const auto& mec : mecs.mecs) ec_pairs.insert(mec.begin(), mec.end());

    for (int j = 0; j < params.num_objectives; ++j) {
        Relation rel = draw(gen, 2) == 0 ? Relation::AtLeast : Relation::AtMost;
        bool reachability = draw(gen, 2) == 0;
        if (reachability) {
            std::set<StateId> goal;
            int k = 1 + static_cast<int>(draw(gen, std::max(1, n / 2)));
            for (int i = 0; i < k; ++i) goal.insert(static_cast<StateId>(draw(gen, n)));
            out.query.objectives.push_back(reachability_to_reward(m, goal, rel));
        } else {
            Objective obj;
            obj.relation = rel;
            for (int s = 0; s < n; ++s)
                for (int a = 0; a < m.num_actions(s); ++a) {
                    if (ec_pairs.count({s, a})) continue;
                    for (const auto& [succ, prob] : m.actions[s][a].successors)
                        if (draw(gen, 3) == 0) {
                            int r = static_cast<int>(draw(gen, params.reward_range + 1));
                            if (r > 0) obj.reward.set(s, a, succ, Rat(r));
                        }
                }
            out.query.objectives.push_back(std::move(obj));
        }
    }
    return out;
}

}  // namespace momdp
