#include "momdp/mdp.hpp"

#include <algorithm>
#include <deque>

namespace momdp {

int Mdp::total_action_count() const {
    int n = 0;
    for (const auto& acts : actions) n += static_cast<int>(acts.size());
    return n;
}

int Mdp::action_index(StateId s, const std::string& label) const {
    for (int a = 0; a < num_actions(s); ++a)
        if (actions[s][a].label == label) return a;
    return -1;
}

int Mdp::state_index(const std::string& name) const {
    for (int s = 0; s < num_states(); ++s)
        if (state_names[s] == name) return s;
    return -1;
}

Rat Mdp::probability(StateId s, int a, StateId t) const {
    for (const auto& [succ, prob] : actions[s][a].successors)
        if (succ == t) return prob;
    return Rat(0);
}

void Mdp::validate() const {
    const int n = num_states();
    if (n == 0) throw Error(ErrorKind::InvalidModel, "model has no states");
    if (initial < 0 || initial >= n)
        throw Error(ErrorKind::InvalidModel, "initial state out of range");
    if (static_cast<int>(actions.size()) != n)
        throw Error(ErrorKind::InvalidModel, "action table size mismatch");
    for (int s = 0; s < n; ++s) {
        if (actions[s].empty())
            throw Error(ErrorKind::InvalidModel,
                        "state " + state_names[s] + " has no enabled action");
        for (const auto& act : actions[s]) {
            if (act.successors.empty())
                throw Error(ErrorKind::InvalidModel, "action without successors");
            Rat total(0);
            StateId prev = -1;
            for (const auto& [succ, prob] : act.successors) {
                if (succ < 0 || succ >= n)
                    throw Error(ErrorKind::InvalidModel, "successor out of range");
                if (succ <= prev)
                    throw Error(ErrorKind::InvalidModel, "successors not sorted/unique");
                prev = succ;
                if (prob <= 0 || prob > 1)
                    throw Error(ErrorKind::InvalidModel, "probability outside (0,1]");
                total += prob;
            }
            if (total != 1)
                throw Error(ErrorKind::InvalidModel,
                            "probabilities at " + state_names[s] + "/" + act.label +
                                " sum to " + rational_to_string(total));
        }
    }
}

void Mdp::normalize() {
    for (auto& acts : actions)
        for (auto& act : acts)
            std::sort(act.successors.begin(), act.successors.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
}

std::vector<std::pair<StateId, int>> Mdp::all_pairs() const {
    std::vector<std::pair<StateId, int>> pairs;
    for (StateId s = 0; s < num_states(); ++s)
        for (int a = 0; a < num_actions(s); ++a) pairs.emplace_back(s, a);
    return pairs;
}

Rat RewardStructure::get(StateId s, int a, StateId t) const {
    auto it = entries.find({s, a, t});
    return it == entries.end() ? Rat(0) : it->second;
}

void RewardStructure::set(StateId s, int a, StateId t, Rat value) {
    if (value < 0) throw Error(ErrorKind::InvalidModel, "negative reward");
    if (value == 0)
        entries.erase({s, a, t});
    else
        entries[{s, a, t}] = std::move(value);
}

Rat RewardStructure::expected_step(const Mdp& m, StateId s, int a) const {
    Rat total(0);
    for (const auto& [succ, prob] : m.actions[s][a].successors) total += prob * get(s, a, succ);
    return total;
}

bool RewardStructure::action_is_zero(StateId s, int a) const {
    auto it = entries.lower_bound({s, a, -1});
    return it == entries.end() || std::get<0>(it->first) != s || std::get<1>(it->first) != a;
}

void RewardStructure::validate(const Mdp& m) const {
    for (const auto& [key, value] : entries) {
        auto [s, a, t] = key;
        if (s < 0 || s >= m.num_states() || a < 0 || a >= m.num_actions(s))
            throw Error(ErrorKind::InvalidModel, "reward entry on unknown state-action");
        if (m.probability(s, a, t) == 0)
            throw Error(ErrorKind::InvalidModel, "reward entry on zero-probability transition");
        if (value < 0) throw Error(ErrorKind::InvalidModel, "negative reward");
    }
}

bool Point::all_finite() const {
    for (const auto& c : coords)
        if (c.is_infinite()) return false;
    return true;
}

std::string Point::to_string() const {
    std::string out = "(";
    for (size_t i = 0; i < coords.size(); ++i) {
        if (i) out += ",";
        out += coords[i].to_string();
    }
    return out + ")";
}

void PureStationaryStrategy::validate(const Mdp& m) const {
    if (static_cast<int>(choice.size()) != m.num_states())
        throw Error(ErrorKind::InvalidStrategy, "strategy does not cover all states");
    for (StateId s = 0; s < m.num_states(); ++s)
        if (choice[s] < 0 || choice[s] >= m.num_actions(s))
            throw Error(ErrorKind::InvalidStrategy,
                        "strategy picks disabled action at " + m.state_names[s]);
}

std::set<StateId> SubMdpResult::project_states(const std::set<StateId>& orig) const {
    std::set<StateId> out;
    for (StateId s : orig)
        if (new_of[s] >= 0) out.insert(new_of[s]);
    return out;
}

RewardStructure SubMdpResult::project_reward(const RewardStructure& orig) const {
    RewardStructure out;
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(s); ++a)
            for (const auto& [succ, prob] : mdp.actions[s][a].successors) {
                Rat r = orig.get(orig_of[s], orig_action_of[s][a], orig_of[succ]);
                if (r != 0) out.set(s, a, succ, r);
            }
    return out;
}

Objective SubMdpResult::project_objective(const Objective& orig) const {
    Objective out;
    out.reward = project_reward(orig.reward);
    out.relation = orig.relation;
    out.goal = project_states(orig.goal);
    return out;
}

Query SubMdpResult::project_query(const Query& orig) const {
    Query out;
    for (const auto& obj : orig.objectives) out.objectives.push_back(project_objective(obj));
    return out;
}

SubMdpResult sub_mdp(const Mdp& m, const std::set<std::pair<StateId, int>>& pairs,
                     StateId start) {
    // Collect covered states and check closure.
    std::vector<bool> covered(m.num_states(), false);
    for (const auto& [s, a] : pairs) {
        if (s < 0 || s >= m.num_states() || a < 0 || a >= m.num_actions(s))
            throw Error(ErrorKind::NotClosed, "pair refers to unknown state or action");
        covered[s] = true;
    }
    for (const auto& [s, a] : pairs)
        for (const auto& [succ, prob] : m.actions[s][a].successors)
            if (!covered[succ])
                throw Error(ErrorKind::NotClosed,
                            "successor " + m.state_names[succ] + " not covered");
    if (start < 0 || start >= m.num_states() || !covered[start])
        throw Error(ErrorKind::StartOutside, "start state not in projected state set");

    SubMdpResult out;
    out.new_of.assign(m.num_states(), -1);
    for (StateId s = 0; s < m.num_states(); ++s) {
        if (!covered[s]) continue;
        out.new_of[s] = static_cast<int>(out.orig_of.size());
        out.orig_of.push_back(s);
    }
    out.mdp.state_names.resize(out.orig_of.size());
    out.mdp.actions.resize(out.orig_of.size());
    out.orig_action_of.resize(out.orig_of.size());
    for (size_t i = 0; i < out.orig_of.size(); ++i) {
        StateId s = out.orig_of[i];
        out.mdp.state_names[i] = m.state_names[s];
        for (int a = 0; a < m.num_actions(s); ++a) {
            if (!pairs.count({s, a})) continue;
            ActionEntry entry;
            entry.label = m.actions[s][a].label;
            for (const auto& [succ, prob] : m.actions[s][a].successors)
                entry.successors.emplace_back(out.new_of[succ], prob);
            std::sort(entry.successors.begin(), entry.successors.end());
            out.mdp.actions[i].push_back(std::move(entry));
            out.orig_action_of[i].push_back(a);
        }
    }
    out.mdp.initial = out.new_of[start];
    out.mdp.validate();
    return out;
}

Mdp induce_chain(const Mdp& m, const PureStationaryStrategy& sigma) {
    sigma.validate(m);
    Mdp chain;
    chain.state_names = m.state_names;
    chain.initial = m.initial;
    chain.actions.resize(m.num_states());
    for (StateId s = 0; s < m.num_states(); ++s)
        chain.actions[s].push_back(m.actions[s][sigma.choice[s]]);
    return chain;
}

Objective reachability_to_reward(const Mdp& m, const std::set<StateId>& goal,
                                 Relation relation) {
    Objective obj;
    obj.relation = relation;
    obj.goal = goal;
    for (StateId s = 0; s < m.num_states(); ++s)
        for (int a = 0; a < m.num_actions(s); ++a)
            for (const auto& [succ, prob] : m.actions[s][a].successors)
                if (goal.count(succ)) obj.reward.set(s, a, succ, Rat(1));
    return obj;
}

bool dominates(const Query& q, const Point& p, const Point& p2) {
    if (p.dimension() != q.dimension() || p2.dimension() != q.dimension())
        throw Error(ErrorKind::DimensionMismatch, "point dimension mismatch");
    for (int j = 0; j < q.dimension(); ++j) {
        if (q.objectives[j].maximizing()) {
            if (!(p.coords[j] >= p2.coords[j])) return false;
        } else {
            if (!(p.coords[j] <= p2.coords[j])) return false;
        }
    }
    return true;
}

std::vector<bool> reachable_states(const Mdp& m, StateId from) {
    std::vector<bool> seen(m.num_states(), false);
    std::deque<StateId> queue{from};
    seen[from] = true;
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        for (const auto& act : m.actions[s])
            for (const auto& [succ, prob] : act.successors)
                if (!seen[succ]) {
                    seen[succ] = true;
                    queue.push_back(succ);
                }
    }
    return seen;
}

}  // namespace momdp
