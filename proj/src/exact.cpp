#include "momdp/exact.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <future>

namespace momdp {

namespace {

// Gaussian elimination over exact rationals on the system
// x_s = sum P (x + R) for the chain's non-anchor states.
std::map<StateId, Rat> solve_anchor_system(const Mdp& chain, const Objective& obj,
                                           const std::vector<bool>& anchor) {
    const int n = chain.num_states();
    std::vector<int> row_of(n, -1);
    std::vector<StateId> unknowns;
    for (StateId s = 0; s < n; ++s)
        if (!anchor[s]) {
            row_of[s] = static_cast<int>(unknowns.size());
            unknowns.push_back(s);
        }
    const int k = static_cast<int>(unknowns.size());
    std::vector<std::vector<Rat>> mat(k, std::vector<Rat>(k + 1, Rat(0)));
    for (int i = 0; i < k; ++i) {
        StateId s = unknowns[i];
        mat[i][i] += Rat(1);
        for (const auto& [succ, prob] : chain.actions[s][0].successors) {
            mat[i][k] += prob * obj.reward.get(s, 0, succ);
            if (!anchor[succ]) mat[i][row_of[succ]] -= prob;
        }
    }
    for (int col = 0; col < k; ++col) {
        int pivot = -1;
        for (int r = col; r < k; ++r)
            if (mat[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0)
            throw Error(ErrorKind::SingularSystem,
                        "value system is singular: anchors not reached almost surely");
        std::swap(mat[col], mat[pivot]);
        Rat inv = mat[col][col];
        for (int c = col; c <= k; ++c) mat[col][c] /= inv;
        for (int r = 0; r < k; ++r) {
            if (r == col || mat[r][col] == 0) continue;
            Rat factor = mat[r][col];
            for (int c = col; c <= k; ++c) mat[r][c] -= factor * mat[col][c];
        }
    }
    std::map<StateId, Rat> values;
    for (StateId s = 0; s < n; ++s)
        if (anchor[s]) values[s] = Rat(0);
    for (int i = 0; i < k; ++i) values[unknowns[i]] = mat[i][k];
    return values;
}

}  // namespace

std::map<StateId, Rat> solve_value_system(const Mdp& chain, const Objective& obj,
                                          const std::set<StateId>& zero) {
    for (StateId s = 0; s < chain.num_states(); ++s)
        if (chain.num_actions(s) != 1)
            throw Error(ErrorKind::InvalidModel, "value system expects an induced chain");
    std::vector<bool> anchor(chain.num_states(), false);
    for (StateId s : zero) anchor[s] = true;
    return solve_anchor_system(chain, obj, anchor);
}

std::vector<ExtRat> evaluate_strategy_all_states(const Mdp& m,
                                                 const PureStationaryStrategy& sigma,
                                                 const Objective& obj) {
    Mdp chain = induce_chain(m, sigma);
    // Rewards of the chain refer to action index 0; remap from sigma's choice.
    Objective chain_obj;
    chain_obj.relation = obj.relation;
    chain_obj.goal = obj.goal;
    for (StateId s = 0; s < m.num_states(); ++s)
        for (const auto& [succ, prob] : chain.actions[s][0].successors) {
            Rat r = obj.reward.get(s, sigma.choice[s], succ);
            if (r != 0) chain_obj.reward.set(s, 0, succ, r);
        }

    const int n = chain.num_states();
    std::vector<bool> anchor(n, false);
    for (StateId g : obj.goal) anchor[g] = true;  // reward stops at the goal

    // BSCC classification: goal-free zero-reward BSCCs anchor the system at 0,
    // goal-free BSCCs with positive reward diverge.
    MecDecomposition bsccs = compute_mecs(chain);
    std::vector<bool> diverging(n, false);
    for (const auto& bscc : bsccs.mecs) {
        bool has_goal = false, has_reward = false;
        for (const auto& [s, a] : bscc) {
            if (obj.goal.count(s)) has_goal = true;
            if (!chain_obj.reward.action_is_zero(s, 0)) has_reward = true;
        }
        if (has_goal) continue;
        for (const auto& [s, a] : bscc) {
            if (has_reward)
                diverging[s] = true;
            else
                anchor[s] = true;
        }
    }

    // Infinite value wherever a diverging BSCC is reachable before the goal.
    std::vector<bool> infinite(n, false);
    {
        std::vector<std::vector<StateId>> preds(n);
        for (StateId s = 0; s < n; ++s) {
            if (obj.goal.count(s)) continue;
            for (const auto& [succ, prob] : chain.actions[s][0].successors)
                preds[succ].push_back(s);
        }
        std::deque<StateId> queue;
        for (StateId s = 0; s < n; ++s)
            if (diverging[s]) {
                infinite[s] = true;
                queue.push_back(s);
            }
        while (!queue.empty()) {
            StateId s = queue.front();
            queue.pop_front();
            for (StateId p : preds[s])
                if (!infinite[p] && !obj.goal.count(p)) {
                    infinite[p] = true;
                    queue.push_back(p);
                }
        }
    }

    // Finite part: cut transitions into infinite states (their contribution is
    // irrelevant to finite-valued states: no finite state can reach them).
    std::vector<ExtRat> values(n, ExtRat(Rat(0)));
    Mdp finite_chain = chain;
    std::vector<bool> finite_anchor = anchor;
    for (StateId s = 0; s < n; ++s)
        if (infinite[s]) {
            finite_chain.actions[s].clear();
            finite_chain.actions[s].push_back({"loop", {{s, Rat(1)}}});
            finite_anchor[s] = true;  // placeholder; value overwritten below
        }
    auto solved = solve_anchor_system(finite_chain, chain_obj, finite_anchor);
    for (StateId s = 0; s < n; ++s)
        values[s] = infinite[s] ? ExtRat::infinity() : ExtRat(solved.at(s));
    return values;
}

ExtRat evaluate_strategy(const Mdp& m, const PureStationaryStrategy& sigma,
                         const Objective& obj) {
    return evaluate_strategy_all_states(m, sigma, obj)[m.initial];
}

ValueVector evaluate_strategy_query(const Mdp& m, const PureStationaryStrategy& sigma,
                                    const Query& q) {
    ValueVector values;
    for (const auto& obj : q.objectives) values.push_back(evaluate_strategy(m, sigma, obj));
    return values;
}

bool value_meets(const ExtRat& value, Relation relation, const ExtRat& threshold) {
    return relation == Relation::AtLeast ? value >= threshold : value <= threshold;
}

bool check_achieves(const Mdp& m, const PureStationaryStrategy& sigma, const Query& q,
                    const Point& p) {
    if (p.dimension() != q.dimension())
        throw Error(ErrorKind::DimensionMismatch, "point/query dimension mismatch");
    for (int j = 0; j < q.dimension(); ++j) {
        ExtRat value = evaluate_strategy(m, sigma, q.objectives[j]);
        if (!value_meets(value, q.objectives[j].relation, p.coords[j])) return false;
    }
    return true;
}

long long count_strategies(const Mdp& m, long long cap) {
    long long count = 1;
    for (StateId s = 0; s < m.num_states(); ++s) {
        count *= m.num_actions(s);
        if (count > cap) return cap + 1;
    }
    return count;
}

void for_each_strategy(const Mdp& m, const std::function<void(const PureStationaryStrategy&)>& fn,
                       long long cap) {
    if (count_strategies(m, cap) > cap)
        throw Error(ErrorKind::TooManyStrategies,
                    "strategy count exceeds cap " + std::to_string(cap));
    PureStationaryStrategy sigma;
    sigma.choice.assign(m.num_states(), 0);
    while (true) {
        fn(sigma);
        int s = m.num_states() - 1;
        while (s >= 0) {
            if (++sigma.choice[s] < m.num_actions(s)) break;
            sigma.choice[s] = 0;
            --s;
        }
        if (s < 0) return;
    }
}

namespace {

std::vector<ValueVector> all_value_vectors(const Mdp& m, const Query& q, long long cap,
                                           int threads) {
    std::vector<PureStationaryStrategy> strategies;
    for_each_strategy(m, [&](const PureStationaryStrategy& s) { strategies.push_back(s); }, cap);
    std::vector<ValueVector> values(strategies.size());
    if (threads <= 1 || strategies.size() < 16) {
        for (size_t i = 0; i < strategies.size(); ++i)
            values[i] = evaluate_strategy_query(m, strategies[i], q);
        return values;
    }
    // disjoint blocks; merge order is fixed by index, so the result is
    // identical to the sequential run
    std::vector<std::future<void>> futures;
    size_t block = (strategies.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        size_t lo = t * block, hi = std::min(strategies.size(), (t + 1) * block);
        if (lo >= hi) break;
        futures.push_back(std::async(std::launch::async, [&, lo, hi] {
            for (size_t i = lo; i < hi; ++i)
                values[i] = evaluate_strategy_query(m, strategies[i], q);
        }));
    }
    for (auto& f : futures) f.get();
    return values;
}

}  // namespace

bool brute_force_achievable(const Mdp& m, const Query& q, const Point& p, long long cap,
                            int threads) {
    auto values = all_value_vectors(m, q, cap, threads);
    for (const auto& v : values) {
        bool ok = true;
        for (int j = 0; j < q.dimension(); ++j)
            if (!value_meets(v[j], q.objectives[j].relation, p.coords[j])) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

std::optional<PureStationaryStrategy> brute_force_witness(const Mdp& m, const Query& q,
                                                          const Point& p, long long cap) {
    std::optional<PureStationaryStrategy> found;
    try {
        for_each_strategy(m, [&](const PureStationaryStrategy& sigma) {
            if (!found && check_achieves(m, sigma, q, p)) found = sigma;
        }, cap);
    } catch (const Error&) {
        throw;
    }
    return found;
}

std::vector<Point> filter_dominated(const Query& q, std::vector<Point> points) {
    std::vector<Point> out;
    for (size_t i = 0; i < points.size(); ++i) {
        bool keep = true;
        for (size_t k = 0; k < points.size() && keep; ++k) {
            if (k == i) continue;
            if (dominates(q, points[k], points[i])) {
                // strict domination, or the duplicate with the smaller index wins
                if (!dominates(q, points[i], points[k]) || k < i) keep = false;
            }
        }
        if (keep) out.push_back(points[i]);
    }
    return out;
}

std::vector<Point> brute_force_pareto(const Mdp& m, const Query& q, long long cap, int threads) {
    auto values = all_value_vectors(m, q, cap, threads);
    std::vector<Point> points;
    points.reserve(values.size());
    for (auto& v : values) points.push_back(Point{std::move(v)});
    return filter_dominated(q, std::move(points));
}

}  // namespace momdp
