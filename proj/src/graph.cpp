#include "momdp/graph.hpp"

#include <algorithm>
#include <deque>

namespace momdp {

const Rat kBoundWarnThreshold = Rat(1000000000);

std::vector<std::set<StateId>> MecDecomposition::state_sets() const {
    std::vector<std::set<StateId>> out;
    for (const auto& mec : mecs) {
        std::set<StateId> states;
        for (const auto& [s, a] : mec) states.insert(s);
        out.push_back(std::move(states));
    }
    return out;
}

int MecDecomposition::mec_of_state(StateId s, int) const {
    for (size_t i = 0; i < mecs.size(); ++i)
        for (const auto& [t, a] : mecs[i])
            if (t == s) return static_cast<int>(i);
    return -1;
}

std::vector<std::vector<StateId>> strongly_connected_components(const Mdp& m,
                                                                const PairSet& pairs) {
    const int n = m.num_states();
    std::vector<std::vector<StateId>> graph(n);
    std::vector<bool> present(n, false);
    for (const auto& [s, a] : pairs) {
        present[s] = true;
        for (const auto& [succ, prob] : m.actions[s][a].successors) graph[s].push_back(succ);
    }

    // Iterative Tarjan.
    std::vector<int> index(n, -1), low(n, 0), on_stack_pos(n, -1);
    std::vector<StateId> stack;
    std::vector<std::vector<StateId>> sccs;
    int counter = 0;

    struct Frame {
        StateId v;
        size_t edge;
    };
    for (StateId root = 0; root < n; ++root) {
        if (!present[root] || index[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = counter++;
        on_stack_pos[root] = static_cast<int>(stack.size());
        stack.push_back(root);
        while (!frames.empty()) {
            Frame& fr = frames.back();
            if (fr.edge < graph[fr.v].size()) {
                StateId w = graph[fr.v][fr.edge++];
                if (!present[w]) continue;
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    on_stack_pos[w] = static_cast<int>(stack.size());
                    stack.push_back(w);
                    frames.push_back({w, 0});
                } else if (on_stack_pos[w] != -1) {
                    low[fr.v] = std::min(low[fr.v], index[w]);
                }
            } else {
                StateId v = fr.v;
                frames.pop_back();
                if (low[v] == index[v]) {
                    std::vector<StateId> scc;
                    const int boundary = on_stack_pos[v];
                    while (static_cast<int>(stack.size()) > boundary) {
                        StateId w = stack.back();
                        stack.pop_back();
                        on_stack_pos[w] = -1;
                        scc.push_back(w);
                    }
                    std::sort(scc.begin(), scc.end());
                    sccs.push_back(std::move(scc));
                }
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    std::reverse(sccs.begin(), sccs.end());
    return sccs;
}

PairSet largest_closed_subset(const Mdp& m, const PairSet& candidates) {
    PairSet pairs = candidates;
    std::vector<int> pair_count(m.num_states(), 0);
    for (const auto& [s, a] : pairs) pair_count[s]++;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = pairs.begin(); it != pairs.end();) {
            bool keep = true;
            for (const auto& [succ, prob] : m.actions[it->first][it->second].successors)
                if (pair_count[succ] == 0) {
                    keep = false;
                    break;
                }
            if (keep) {
                ++it;
            } else {
                pair_count[it->first]--;
                it = pairs.erase(it);
                changed = true;
            }
        }
    }
    return pairs;
}

MecDecomposition compute_mecs_restricted(const Mdp& m, const PairSet& candidate_pairs) {
    PairSet pairs = candidate_pairs;
    bool changed = true;
    std::vector<int> scc_of(m.num_states(), -1);
    std::vector<std::vector<StateId>> sccs;
    while (changed) {
        changed = false;
        sccs = strongly_connected_components(m, pairs);
        std::fill(scc_of.begin(), scc_of.end(), -1);
        for (size_t i = 0; i < sccs.size(); ++i)
            for (StateId s : sccs[i]) scc_of[s] = static_cast<int>(i);
        for (auto it = pairs.begin(); it != pairs.end();) {
            bool keep = true;
            for (const auto& [succ, prob] : m.actions[it->first][it->second].successors)
                if (scc_of[succ] != scc_of[it->first]) {
                    keep = false;
                    break;
                }
            if (keep) {
                ++it;
            } else {
                it = pairs.erase(it);
                changed = true;
            }
        }
    }

    MecDecomposition out;
    for (const auto& scc : sccs) {
        PairSet mec;
        for (StateId s : scc) {
            auto lo = pairs.lower_bound({s, -1});
            for (auto it = lo; it != pairs.end() && it->first == s; ++it) mec.insert(*it);
        }
        if (!mec.empty()) out.mecs.push_back(std::move(mec));
    }
    std::sort(out.mecs.begin(), out.mecs.end(),
              [](const PairSet& a, const PairSet& b) { return *a.begin() < *b.begin(); });
    return out;
}

MecDecomposition compute_mecs(const Mdp& m) {
    PairSet all;
    for (const auto& [s, a] : m.all_pairs()) all.insert({s, a});
    return compute_mecs_restricted(m, all);
}

ObjectiveStateSets compute_zero_states(const Mdp& m, const Objective& obj) {
    const int n = m.num_states();
    // Sources of positive-reward transitions outside the goal.
    std::vector<bool> positive(n, false);
    for (const auto& [key, value] : obj.reward.entries) {
        auto [s, a, t] = key;
        if (value > 0 && !obj.goal.count(s) && m.probability(s, a, t) > 0) positive[s] = true;
    }
    // Backward closure over non-goal states: marked iff a positive-reward
    // transition can still be taken before reaching the goal.
    std::vector<std::vector<StateId>> preds(n);
    for (StateId s = 0; s < n; ++s) {
        if (obj.goal.count(s)) continue;  // goal states are absorbing here
        for (const auto& act : m.actions[s])
            for (const auto& [succ, prob] : act.successors) preds[succ].push_back(s);
    }
    std::deque<StateId> queue;
    std::vector<bool> marked(n, false);
    for (StateId s = 0; s < n; ++s)
        if (positive[s]) {
            marked[s] = true;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        for (StateId p : preds[s])
            if (!marked[p]) {
                marked[p] = true;
                queue.push_back(p);
            }
    }

    ObjectiveStateSets sets;
    for (StateId s = 0; s < n; ++s)
        if (!marked[s]) sets.zero.insert(s);

    if (!sets.zero.count(m.initial)) {
        std::deque<StateId> fwd{m.initial};
        std::vector<bool> seen(n, false);
        seen[m.initial] = true;
        sets.maybe.insert(m.initial);
        while (!fwd.empty()) {
            StateId s = fwd.front();
            fwd.pop_front();
            for (const auto& act : m.actions[s])
                for (const auto& [succ, prob] : act.successors) {
                    if (seen[succ] || sets.zero.count(succ)) continue;
                    seen[succ] = true;
                    sets.maybe.insert(succ);
                    fwd.push_back(succ);
                }
        }
    }
    return sets;
}

std::set<StateId> compute_sinfty(const Mdp& m, const Query& q) {
    const int n = m.num_states();
    std::vector<std::vector<StateId>> preds(n);
    for (StateId s = 0; s < n; ++s)
        for (const auto& act : m.actions[s])
            for (const auto& [succ, prob] : act.successors) preds[succ].push_back(s);

    // A state is infinite for minimizing objective j when it can neither
    // reach the goal (which stops the accumulation) nor an EC that collects
    // no j-reward. The union over minimizing objectives is sound: from such
    // a state every strategy diverges on that objective.
    std::set<StateId> sinfty;
    for (const auto& obj : q.objectives) {
        if (obj.maximizing()) continue;
        PairSet candidates;
        for (const auto& [s, a] : m.all_pairs())
            if (obj.reward.action_is_zero(s, a)) candidates.insert({s, a});
        MecDecomposition mecs = compute_mecs_restricted(m, candidates);
        std::vector<bool> can_reach(n, false);
        std::deque<StateId> queue;
        auto mark = [&](StateId s) {
            if (!can_reach[s]) {
                can_reach[s] = true;
                queue.push_back(s);
            }
        };
        for (const auto& mec : mecs.mecs)
            for (const auto& [s, a] : mec) mark(s);
        for (StateId g : obj.goal) mark(g);
        while (!queue.empty()) {
            StateId s = queue.front();
            queue.pop_front();
            for (StateId p : preds[s]) mark(p);
        }
        for (StateId s = 0; s < n; ++s)
            if (!can_reach[s]) sinfty.insert(s);
    }
    return sinfty;
}

SubMdpResult restrict_to_finite(const Mdp& m, const Query& q) {
    std::set<StateId> sinfty = compute_sinfty(m, q);
    PairSet candidates;
    for (const auto& [s, a] : m.all_pairs())
        if (!sinfty.count(s)) candidates.insert({s, a});
    PairSet fin = largest_closed_subset(m, candidates);
    bool initial_covered = false;
    for (const auto& [s, a] : fin)
        if (s == m.initial) initial_covered = true;
    if (!initial_covered)
        throw Error(ErrorKind::InitialInfinite,
                    "every strategy collects infinite reward for a minimizing objective");
    return sub_mdp(m, fin, m.initial);
}

namespace {

// Probability lower bound used by the EC elimination: the product over EC
// states of the smallest transition probability at that state.
Rat ec_exit_probability(const Mdp& m, const std::set<StateId>& ec_states) {
    Rat p(1);
    for (StateId s : ec_states) {
        Rat local(1);
        bool first = true;
        for (const auto& act : m.actions[s])
            for (const auto& [succ, prob] : act.successors) {
                if (first || prob < local) local = prob;
                first = false;
            }
        p *= local;
    }
    return p;
}

}  // namespace

Mdp eliminate_ecs_with_rewards(const Mdp& m, const std::set<StateId>& keep,
                               const std::vector<Rat>& state_step_reward,
                               RewardStructure* out_reward) {
    PairSet candidates;
    for (const auto& [s, a] : m.all_pairs())
        if (!keep.count(s)) candidates.insert({s, a});
    MecDecomposition mecs = compute_mecs_restricted(m, candidates);

    Mdp out;
    out.state_names = m.state_names;
    out.initial = m.initial;
    out.actions.resize(m.num_states());
    std::vector<int> mec_of(m.num_states(), -1);
    auto mec_states = mecs.state_sets();
    for (size_t i = 0; i < mecs.mecs.size(); ++i)
        for (StateId s : mec_states[i]) mec_of[s] = static_cast<int>(i);

    auto emit = [&](StateId s, const std::string& label,
                    std::vector<std::pair<StateId, Rat>> succs) {
        std::sort(succs.begin(), succs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        // merge duplicate successors
        std::vector<std::pair<StateId, Rat>> merged;
        for (auto& [t, p] : succs) {
            if (!merged.empty() && merged.back().first == t)
                merged.back().second += p;
            else
                merged.emplace_back(t, p);
        }
        int a = static_cast<int>(out.actions[s].size());
        out.actions[s].push_back({label, merged});
        if (out_reward && !state_step_reward.empty() && state_step_reward[s] != 0)
            for (const auto& [t, p] : merged) out_reward->set(s, a, t, state_step_reward[s]);
    };

    for (StateId s = 0; s < m.num_states(); ++s) {
        if (mec_of[s] < 0) {
            for (const auto& act : m.actions[s]) {
                std::vector<std::pair<StateId, Rat>> succs(act.successors);
                emit(s, act.label, std::move(succs));
            }
            continue;
        }
        const auto& mec = mecs.mecs[mec_of[s]];
        const auto& states = mec_states[mec_of[s]];
        Rat p = ec_exit_probability(m, states);
        // One fresh action per leaving pair of the component.
        for (StateId src : states) {
            for (int a = 0; a < m.num_actions(src); ++a) {
                if (mec.count({src, a})) continue;
                std::vector<std::pair<StateId, Rat>> succs;
                for (const auto& [succ, prob] : m.actions[src][a].successors)
                    succs.emplace_back(succ, p * prob);
                succs.emplace_back(s, Rat(1) - p);
                emit(s, m.state_names[src] + "." + m.actions[src][a].label, std::move(succs));
            }
        }
        // kept original actions that are not part of the component
        // (already covered by the loop above when src == s)
        if (out.actions[s].empty()) {
            // dead component without exits: keep the state absorbing
            emit(s, "stuck", {{s, Rat(1)}});
        }
    }
    out.normalize();
    out.validate();
    return out;
}

Mdp eliminate_ecs(const Mdp& m, const std::set<StateId>& keep) {
    return eliminate_ecs_with_rewards(m, keep, {}, nullptr);
}

namespace {

// Exact value of one pure stationary strategy on an EC-free model: solves the
// linear system x = P(x + r) with x = 0 on `zero` by Gaussian elimination.
std::vector<Rat> policy_values(const Mdp& m, const RewardStructure& reward,
                               const std::vector<bool>& zero, const std::vector<int>& policy) {
    const int n = m.num_states();
    std::vector<int> row_of(n, -1);
    std::vector<StateId> unknowns;
    for (StateId s = 0; s < n; ++s)
        if (!zero[s]) {
            row_of[s] = static_cast<int>(unknowns.size());
            unknowns.push_back(s);
        }
    const int k = static_cast<int>(unknowns.size());
    std::vector<std::vector<Rat>> mat(k, std::vector<Rat>(k + 1, Rat(0)));
    for (int i = 0; i < k; ++i) {
        StateId s = unknowns[i];
        int a = policy[s];
        mat[i][i] = Rat(1);
        for (const auto& [succ, prob] : m.actions[s][a].successors) {
            mat[i][k] += prob * reward.get(s, a, succ);
            if (!zero[succ]) mat[i][row_of[succ]] -= prob;
        }
    }
    // exact elimination with first-nonzero pivoting
    for (int col = 0; col < k; ++col) {
        int pivot = -1;
        for (int r = col; r < k; ++r)
            if (mat[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) throw Error(ErrorKind::SingularSystem, "singular value system");
        std::swap(mat[col], mat[pivot]);
        Rat inv = mat[col][col];
        for (int c = col; c <= k; ++c) mat[col][c] /= inv;
        for (int r = 0; r < k; ++r) {
            if (r == col || mat[r][col] == 0) continue;
            Rat factor = mat[r][col];
            for (int c = col; c <= k; ++c) mat[r][c] -= factor * mat[col][c];
        }
    }
    std::vector<Rat> values(n, Rat(0));
    for (int i = 0; i < k; ++i) values[unknowns[i]] = mat[i][k];
    return values;
}

}  // namespace

std::vector<Rat> optimal_max_expected_reward(const Mdp& m, const RewardStructure& reward,
                                             const std::set<StateId>& zero_set) {
    const int n = m.num_states();
    std::vector<bool> zero(n, false);
    for (StateId s : zero_set) zero[s] = true;
    std::vector<int> policy(n, 0);
    while (true) {
        std::vector<Rat> values = policy_values(m, reward, zero, policy);
        bool improved = false;
        for (StateId s = 0; s < n; ++s) {
            if (zero[s]) continue;
            Rat best = values[s];
            int best_a = policy[s];
            for (int a = 0; a < m.num_actions(s); ++a) {
                Rat v(0);
                for (const auto& [succ, prob] : m.actions[s][a].successors)
                    v += prob * (values[succ] + reward.get(s, a, succ));
                if (v > best) {
                    best = v;
                    best_a = a;
                }
            }
            if (best_a != policy[s]) {
                policy[s] = best_a;
                improved = true;
            }
        }
        if (!improved) return values;
    }
}

namespace {

// Quotient of m in which every MEC outside `sink` is collapsed into a single
// state offering the component's leaving pairs. Dead components (no leaving
// pair) become absorbing. Used for finite visit-count bounds.
struct EcQuotient {
    Mdp model;
    std::vector<int> quot_of;       // original -> quotient state
    std::vector<Rat> sojourn_gain;  // per original state: 1/p of its MEC (or 1)
    std::set<StateId> sink_quot;    // quotient images of sink plus dead components
};

EcQuotient build_ec_quotient(const Mdp& m, const std::set<StateId>& sink) {
    const int n = m.num_states();
    PairSet candidates;
    for (const auto& [s, a] : m.all_pairs())
        if (!sink.count(s)) candidates.insert({s, a});
    MecDecomposition mecs = compute_mecs_restricted(m, candidates);
    auto mec_states = mecs.state_sets();

    EcQuotient q;
    q.quot_of.assign(n, -1);
    q.sojourn_gain.assign(n, Rat(1));
    std::vector<int> mec_of(n, -1);
    for (size_t i = 0; i < mecs.mecs.size(); ++i)
        for (StateId s : mec_states[i]) mec_of[s] = static_cast<int>(i);

    std::vector<int> mec_rep(mecs.mecs.size(), -1);
    for (StateId s = 0; s < n; ++s) {
        if (mec_of[s] >= 0 && mec_rep[mec_of[s]] >= 0) {
            q.quot_of[s] = mec_rep[mec_of[s]];
            continue;
        }
        int id = static_cast<int>(q.model.state_names.size());
        q.quot_of[s] = id;
        if (mec_of[s] >= 0) mec_rep[mec_of[s]] = id;
        q.model.state_names.push_back(mec_of[s] >= 0 ? "mec" + std::to_string(mec_of[s])
                                                     : m.state_names[s]);
    }
    for (size_t i = 0; i < mecs.mecs.size(); ++i) {
        Rat p = ec_exit_probability(m, mec_states[i]);
        for (StateId s : mec_states[i]) q.sojourn_gain[s] = Rat(1) / p;
    }

    q.model.actions.resize(q.model.state_names.size());
    q.model.initial = q.quot_of[m.initial];
    auto add_action = [&](int qs, const std::string& label,
                          const std::vector<std::pair<StateId, Rat>>& orig_succs) {
        std::map<int, Rat> merged;
        for (const auto& [succ, prob] : orig_succs) merged[q.quot_of[succ]] += prob;
        ActionEntry entry;
        entry.label = label;
        for (const auto& [t, p] : merged) entry.successors.emplace_back(t, p);
        q.model.actions[qs].push_back(std::move(entry));
    };

    for (StateId s = 0; s < n; ++s) {
        int qs = q.quot_of[s];
        if (sink.count(s)) continue;  // handled below
        if (mec_of[s] < 0) {
            for (const auto& act : m.actions[s]) add_action(qs, act.label, act.successors);
        } else {
            for (int a = 0; a < m.num_actions(s); ++a)
                if (!mecs.mecs[mec_of[s]].count({s, a}))
                    add_action(qs, m.state_names[s] + "." + m.actions[s][a].label,
                               m.actions[s][a].successors);
        }
    }
    for (StateId s : sink) {
        int qs = q.quot_of[s];
        if (q.model.actions[qs].empty()) q.model.actions[qs].push_back({"sink", {{qs, Rat(1)}}});
        q.sink_quot.insert(qs);
    }
    // dead components / dead ends become absorbing pseudo-sinks
    for (int qs = 0; qs < q.model.num_states(); ++qs)
        if (q.model.actions[qs].empty()) {
            q.model.actions[qs].push_back({"stuck", {{qs, Rat(1)}}});
            q.sink_quot.insert(qs);
        }
    q.model.normalize();
    q.model.validate();
    return q;
}

// Max expected number of transitions into `target` before reaching the sink,
// per start state, on the EC-free quotient.
std::vector<Rat> optimal_entry_counts(const EcQuotient& q, int target_quot) {
    RewardStructure entry_reward;
    for (StateId s = 0; s < q.model.num_states(); ++s) {
        if (q.sink_quot.count(s)) continue;
        for (int a = 0; a < q.model.num_actions(s); ++a)
            for (const auto& [succ, prob] : q.model.actions[s][a].successors)
                if (succ == target_quot) entry_reward.set(s, a, succ, Rat(1));
    }
    return optimal_max_expected_reward(q.model, entry_reward, q.sink_quot);
}

}  // namespace

std::vector<Rat> compute_visit_upper_bounds(const Mdp& m, const std::set<StateId>& sink,
                                            bool allow_empty_sink) {
    if (sink.empty() && !allow_empty_sink)
        throw Error(ErrorKind::EmptySink, "visit bounds need a sink set");
    EcQuotient q = build_ec_quotient(m, sink);
    const int n = m.num_states();
    std::vector<Rat> bounds(n, Rat(0));
    // one entry-count optimization per quotient target
    std::map<int, std::vector<Rat>> entries_cache;
    for (StateId s = 0; s < n; ++s) {
        if (sink.count(s)) continue;
        int qt = q.quot_of[s];
        if (!q.sink_quot.count(qt)) {
            auto it = entries_cache.find(qt);
            if (it == entries_cache.end())
                it = entries_cache.emplace(qt, optimal_entry_counts(q, qt)).first;
            Rat visits = it->second[q.model.initial];
            if (q.quot_of[m.initial] == qt) visits += 1;
            bounds[s] = visits * q.sojourn_gain[s];
        }
        // keep F_s >= 1; flow conservation still forces unvisitable flow to 0
        if (bounds[s] < 1) bounds[s] = Rat(1);
    }
    return bounds;
}

std::vector<Rat> compute_reward_upper_bounds(const Mdp& m, const Objective& obj,
                                             const ObjectiveStateSets& sets) {
    const int n = m.num_states();
    std::vector<Rat> bounds(n, Rat(0));
    if (sets.maybe.empty()) return bounds;

    // Reachability-style objectives are bounded by 1.
    bool reachability = !obj.goal.empty();
    if (reachability) {
        for (const auto& [key, value] : obj.reward.entries) {
            auto [s, a, t] = key;
            if (value != 1 || !obj.goal.count(t)) {
                reachability = false;
                break;
            }
        }
        if (reachability) {
            Objective ref = reachability_to_reward(m, obj.goal, obj.relation);
            reachability = ref.reward.entries == obj.reward.entries;
        }
    }
    if (reachability) {
        for (StateId s : sets.maybe) bounds[s] = Rat(1);
        return bounds;
    }

    // General case: bound the value by per-state visit counts times the
    // largest one-step expected reward of that state.
    std::vector<Rat> step_max(n, Rat(0));
    for (StateId s : sets.maybe)
        for (int a = 0; a < m.num_actions(s); ++a) {
            Rat r = obj.reward.expected_step(m, s, a);
            if (r > step_max[s]) step_max[s] = r;
        }

    EcQuotient q = build_ec_quotient(m, sets.zero);
    std::map<int, std::vector<Rat>> entries_cache;
    for (StateId t = 0; t < n; ++t) {
        if (step_max[t] == 0 || !sets.maybe.count(t)) continue;
        int qt = q.quot_of[t];
        if (q.sink_quot.count(qt)) continue;  // only trapped strategies visit it
        auto it = entries_cache.find(qt);
        if (it == entries_cache.end()) it = entries_cache.emplace(qt, optimal_entry_counts(q, qt)).first;
        const auto& entries = it->second;
        for (StateId s : sets.maybe) {
            Rat visits = entries[q.quot_of[s]];
            if (q.quot_of[s] == qt) visits += 1;
            bounds[s] += visits * q.sojourn_gain[t] * step_max[t];
        }
    }
    return bounds;
}

bool bounds_exceed_warn_threshold(const std::vector<Rat>& bounds) {
    for (const auto& b : bounds)
        if (b > kBoundWarnThreshold) return true;
    return false;
}

}  // namespace momdp
