#include "momdp/memory.hpp"

#include <algorithm>
#include <deque>

namespace momdp {

void MemoryStructure::validate() const {
    if (size < 1) throw Error(ErrorKind::ZeroMemory, "memory structure needs at least one state");
    if (initial < 0 || initial >= size)
        throw Error(ErrorKind::BadInput, "initial memory out of range");
    if (static_cast<int>(update.size()) != size)
        throw Error(ErrorKind::BadInput, "memory update table size mismatch");
    for (const auto& succs : update) {
        if (succs.empty()) throw Error(ErrorKind::BadInput, "memory update may not be empty");
        for (int t : succs)
            if (t < 0 || t >= size) throw Error(ErrorKind::BadInput, "memory successor out of range");
    }
}

MemoryStructure build_complete_memory(int k) {
    if (k < 1) throw Error(ErrorKind::ZeroMemory, "memory bound must be positive");
    MemoryStructure mem;
    mem.size = k;
    mem.initial = 0;
    mem.update.resize(k);
    for (int i = 0; i < k; ++i) {
        mem.names.push_back("m" + std::to_string(i));
        for (int j = 0; j < k; ++j) mem.update[i].push_back(j);
    }
    return mem;
}

MemoryStructure build_counter_memory(int k) {
    if (k < 1) throw Error(ErrorKind::ZeroMemory, "memory bound must be positive");
    MemoryStructure mem;
    mem.size = k + 1;
    mem.initial = 0;
    mem.update.resize(mem.size);
    for (int i = 0; i <= k; ++i) {
        mem.names.push_back("m" + std::to_string(i));
        mem.update[i].push_back(i);
        if (i < k) mem.update[i].push_back(i + 1);
    }
    return mem;
}

int MemoryProduct::state_of(StateId s, int mem) const {
    long long idx = static_cast<long long>(s) * memory_size + mem;
    if (idx < 0 || idx >= static_cast<long long>(pack.size())) return -1;
    return pack[idx];
}

namespace {

std::string product_name(const Mdp& m, StateId s, const std::string& mem_name) {
    return m.state_names[s] + "@" + mem_name;
}

// BFS construction over (state, memory) pairs with an expansion callback that
// lists (action label, original action, next memory, successor distribution).
struct Expansion {
    std::string label;
    int action;
    int next_memory_for_unpack;  // representative; per-successor memory below
    std::vector<std::tuple<StateId, int, Rat>> successors;  // (state, memory, prob)
};

MemoryProduct build_product(
    const Mdp& m, int memory_size, int initial_memory,
    const std::vector<std::string>& memory_names,
    const std::function<std::vector<Expansion>(StateId, int)>& expand) {
    if (static_cast<long long>(m.num_states()) * memory_size > kProductStateGuard)
        throw Error(ErrorKind::ProductTooLarge, "product exceeds the state guard");

    MemoryProduct prod;
    prod.memory_size = memory_size;
    prod.pack.assign(static_cast<size_t>(m.num_states()) * memory_size, -1);
    auto intern = [&](StateId s, int mem) {
        long long idx = static_cast<long long>(s) * memory_size + mem;
        if (prod.pack[idx] < 0) {
            prod.pack[idx] = static_cast<int>(prod.unpack.size());
            prod.unpack.emplace_back(s, mem);
        }
        return prod.pack[idx];
    };

    std::deque<int> queue;
    intern(m.initial, initial_memory);
    queue.push_back(0);
    std::vector<std::vector<Expansion>> expansions;
    for (size_t head = 0; head < prod.unpack.size(); ++head) {
        auto [s, mem] = prod.unpack[head];
        auto exps = expand(s, mem);
        for (const auto& e : exps)
            for (const auto& [succ, mem2, prob] : e.successors) intern(succ, mem2);
        expansions.push_back(std::move(exps));
    }

    prod.mdp.state_names.resize(prod.unpack.size());
    prod.mdp.actions.resize(prod.unpack.size());
    prod.unpack_action.resize(prod.unpack.size());
    prod.mdp.initial = 0;
    for (size_t i = 0; i < prod.unpack.size(); ++i) {
        auto [s, mem] = prod.unpack[i];
        prod.mdp.state_names[i] = product_name(m, s, memory_names[mem]);
        for (const auto& e : expansions[i]) {
            ActionEntry entry{e.label, {}};
            for (const auto& [succ, mem2, prob] : e.successors)
                entry.successors.emplace_back(prod.state_of(succ, mem2), prob);
            std::sort(entry.successors.begin(), entry.successors.end());
            prod.mdp.actions[i].push_back(std::move(entry));
            prod.unpack_action[i].emplace_back(e.action, e.next_memory_for_unpack);
        }
    }
    prod.mdp.validate();
    return prod;
}

}  // namespace

MemoryProduct product(const Mdp& m, const MemoryStructure& mem) {
    mem.validate();
    return build_product(
        m, mem.size, mem.initial, mem.names, [&](StateId s, int cur) {
            std::vector<Expansion> out;
            for (int next : mem.update[cur])
                for (int a = 0; a < m.num_actions(s); ++a) {
                    Expansion e;
                    e.label = m.actions[s][a].label + "@" + mem.names[next];
                    e.action = a;
                    e.next_memory_for_unpack = next;
                    for (const auto& [succ, prob] : m.actions[s][a].successors)
                        e.successors.emplace_back(succ, next, prob);
                    out.push_back(std::move(e));
                }
            return out;
        });
}

MemoryProduct goal_memory_product(const Mdp& m, const Query& q) {
    std::vector<int> goal_objectives;
    for (int j = 0; j < q.dimension(); ++j)
        if (!q.objectives[j].goal.empty()) goal_objectives.push_back(j);
    const int bits = static_cast<int>(goal_objectives.size());
    const int size = 1 << bits;

    auto visited_mask = [&](StateId s) {
        int mask = 0;
        for (int b = 0; b < bits; ++b)
            if (q.objectives[goal_objectives[b]].goal.count(s)) mask |= 1 << b;
        return mask;
    };
    std::vector<std::string> names(size);
    for (int v = 0; v < size; ++v) {
        std::string n = "v";
        for (int b = 0; b < bits; ++b) n += (v >> b & 1) ? '1' : '0';
        names[v] = n;
    }

    MemoryProduct prod = build_product(
        m, size, visited_mask(m.initial), names, [&](StateId s, int cur) {
            std::vector<Expansion> out;
            for (int a = 0; a < m.num_actions(s); ++a) {
                Expansion e;
                e.label = m.actions[s][a].label;
                e.action = a;
                e.next_memory_for_unpack = cur;
                for (const auto& [succ, prob] : m.actions[s][a].successors)
                    e.successors.emplace_back(succ, cur | visited_mask(succ), prob);
                out.push_back(std::move(e));
            }
            return out;
        });
    prod.goal_tracking = true;
    prod.goal_mask.resize(m.num_states());
    for (StateId s = 0; s < m.num_states(); ++s) prod.goal_mask[s] = visited_mask(s);
    return prod;
}

Query lift_query(const Query& q, const MemoryProduct& prod) {
    Query out;
    for (const auto& obj : q.objectives) {
        Objective lifted;
        lifted.relation = obj.relation;
        for (size_t i = 0; i < prod.unpack.size(); ++i)
            if (obj.goal.count(prod.unpack[i].first)) lifted.goal.insert(static_cast<int>(i));
        for (StateId ps = 0; ps < prod.mdp.num_states(); ++ps) {
            StateId s = prod.unpack[ps].first;
            for (int pa = 0; pa < prod.mdp.num_actions(ps); ++pa) {
                int a = prod.unpack_action[ps][pa].first;
                for (const auto& [psucc, prob] : prod.mdp.actions[ps][pa].successors) {
                    Rat r = obj.reward.get(s, a, prod.unpack[psucc].first);
                    if (r != 0) lifted.reward.set(ps, pa, psucc, r);
                }
            }
        }
        out.objectives.push_back(std::move(lifted));
    }
    return out;
}

MealyStrategy to_mealy(const MemoryProduct& prod, const PureStationaryStrategy& sigma,
                       const Mdp& original) {
    sigma.validate(prod.mdp);
    MealyStrategy out;
    out.memory_size = prod.memory_size;
    for (int mem = 0; mem < prod.memory_size; ++mem)
        out.memory_names.push_back("m" + std::to_string(mem));

    out.next_action.assign(original.num_states(),
                           std::vector<int>(prod.memory_size, 0));
    out.update.resize(prod.memory_size);
    for (int mem = 0; mem < prod.memory_size; ++mem) {
        out.update[mem].resize(original.num_states());
        for (StateId s = 0; s < original.num_states(); ++s)
            out.update[mem][s].assign(original.num_actions(s), mem);
    }

    if (prod.goal_tracking) {
        // The product memory includes the current state's goal bits; the Mealy
        // machine folds them in on departure instead, since its update cannot
        // observe the successor.
        out.initial_memory = 0;
        for (StateId s = 0; s < original.num_states(); ++s)
            for (int pre = 0; pre < prod.memory_size; ++pre) {
                int eff = pre | prod.goal_mask[s];
                int ps = prod.state_of(s, eff);
                int action = ps >= 0 ? prod.unpack_action[ps][sigma.choice[ps]].first : 0;
                out.next_action[s][pre] = action;
                out.update[pre][s][action] = eff;
            }
        return out;
    }

    out.initial_memory = prod.unpack[prod.mdp.initial].second;
    for (StateId ps = 0; ps < prod.mdp.num_states(); ++ps) {
        auto [s, mem] = prod.unpack[ps];
        auto [action, next_mem] = prod.unpack_action[ps][sigma.choice[ps]];
        out.next_action[s][mem] = action;
        out.update[mem][s][action] = next_mem;
    }
    return out;
}

ValueVector evaluate_mealy(const Mdp& m, const Query& q, const MealyStrategy& strategy) {
    // induced chain over (state, memory)
    const int k = strategy.memory_size;
    Mdp chain;
    chain.state_names.resize(static_cast<size_t>(m.num_states()) * k);
    chain.actions.resize(chain.state_names.size());
    auto id = [&](StateId s, int mem) { return s * k + mem; };
    for (StateId s = 0; s < m.num_states(); ++s)
        for (int mem = 0; mem < k; ++mem) {
            chain.state_names[id(s, mem)] =
                m.state_names[s] + "@" + strategy.memory_names[mem];
            int a = strategy.next_action[s][mem];
            int next_mem = strategy.update[mem][s][a];
            ActionEntry entry{m.actions[s][a].label, {}};
            for (const auto& [succ, prob] : m.actions[s][a].successors)
                entry.successors.emplace_back(id(succ, next_mem), prob);
            std::sort(entry.successors.begin(), entry.successors.end());
            chain.actions[id(s, mem)].push_back(std::move(entry));
        }
    chain.initial = id(m.initial, strategy.initial_memory);
    chain.validate();

    PureStationaryStrategy unique;
    unique.choice.assign(chain.num_states(), 0);
    ValueVector values;
    for (const auto& obj : q.objectives) {
        Objective lifted;
        lifted.relation = obj.relation;
        for (StateId s = 0; s < m.num_states(); ++s)
            for (int mem = 0; mem < k; ++mem) {
                if (obj.goal.count(s)) lifted.goal.insert(id(s, mem));
                int a = strategy.next_action[s][mem];
                for (const auto& [succ, prob] : m.actions[s][a].successors) {
                    Rat r = obj.reward.get(s, a, succ);
                    if (r != 0)
                        lifted.reward.set(id(s, mem), 0,
                                          id(succ, strategy.update[mem][s][a]), r);
                }
            }
        values.push_back(evaluate_strategy(chain, unique, lifted));
    }
    return values;
}

PbmaResult pbma_check(const Mdp& m, const Query& q, int memory_bound, const Point& p,
                      MemoryKind kind, const PsmaOptions& opts) {
    if (memory_bound < 1) throw Error(ErrorKind::ZeroMemory, "memory bound must be positive");
    MemoryProduct prod;
    switch (kind) {
        case MemoryKind::Complete:
            prod = product(m, build_complete_memory(memory_bound));
            break;
        case MemoryKind::Counter:
            prod = product(m, build_counter_memory(memory_bound));
            break;
        case MemoryKind::Goal:
            prod = goal_memory_product(m, q);
            break;
    }
    Query lifted = lift_query(q, prod);
    PsmaResult inner = psma_check(prod.mdp, lifted, p, opts);

    PbmaResult out;
    out.verdict = inner.verdict;
    out.lower_bound_only = kind != MemoryKind::Complete &&
                           inner.verdict == PsmaVerdict::NotAchievable;
    if (inner.strategy) {
        MealyStrategy mealy = to_mealy(prod, *inner.strategy, m);
        out.values = evaluate_mealy(m, q, mealy);
        // the product witness must evaluate identically on the original model
        if (inner.verdict == PsmaVerdict::Achievable) {
            for (int j = 0; j < q.dimension(); ++j)
                if (!value_meets(out.values[j], q.objectives[j].relation, p.coords[j])) {
                    out.verdict = PsmaVerdict::VerificationFailed;
                    break;
                }
        }
        out.strategy = std::move(mealy);
    }
    return out;
}

}  // namespace momdp
