#include "momdp/encodings.hpp"

#include "momdp/lp_format.hpp"

#include <algorithm>
#include <fstream>
#include <deque>

namespace momdp {

namespace {

std::string state_tag(const Mdp& m, StateId s) { return m.state_names[s]; }

// Largest closed pair set inside `maybe` whose transitions carry no reward
// for the given objective; the induced-BSCC candidates of the encoding.
PairSet reward_free_candidates(const Mdp& m, const std::set<StateId>& maybe,
                               const RewardStructure& reward) {
    PairSet cand;
    for (StateId s : maybe)
        for (int a = 0; a < m.num_actions(s); ++a)
            if (reward.action_is_zero(s, a)) cand.insert({s, a});
    return largest_closed_subset(m, cand);
}

PairSet reward_free_candidates_all(const Mdp& m, const std::set<StateId>& maybe,
                                   const Query& q) {
    PairSet cand;
    for (StateId s : maybe)
        for (int a = 0; a < m.num_actions(s); ++a) {
            bool zero = true;
            for (const auto& obj : q.objectives)
                if (!obj.reward.action_is_zero(s, a)) {
                    zero = false;
                    break;
                }
            if (zero) cand.insert({s, a});
        }
    return largest_closed_subset(m, cand);
}

void add_action_selection(EncodingArtifacts& art, const Mdp& m) {
    for (StateId s = 0; s < m.num_states(); ++s) {
        LinExpr one;
        for (int a = 0; a < m.num_actions(s); ++a) {
            int var = art.model.add_binary("a_" + state_tag(m, s) + "_" + m.actions[s][a].label);
            art.action_var[{s, a}] = var;
            one.push_back({var, Rat(1)});
        }
        art.model.add_constraint(std::move(one), Cmp::Eq, Rat(1),
                                 "pick_" + state_tag(m, s));
    }
}

// Auxiliary model for the marker flow system of one component: the component
// itself plus a fresh uniform source and a sink absorbing every action that
// leaves the component.
struct MarkerModel {
    Mdp mdp;
    std::vector<int> local_of;  // original state -> local index (-1 outside)
    std::vector<StateId> orig_of;
    StateId source, bottom;
};

MarkerModel build_marker_model(const Mdp& m, const PairSet& mec,
                               const std::set<StateId>& states) {
    MarkerModel mm;
    mm.local_of.assign(m.num_states(), -1);
    for (StateId s : states) {
        mm.local_of[s] = static_cast<int>(mm.orig_of.size());
        mm.orig_of.push_back(s);
    }
    const int k = static_cast<int>(states.size());
    mm.source = k;
    mm.bottom = k + 1;
    mm.mdp.state_names.resize(k + 2);
    mm.mdp.actions.resize(k + 2);
    for (int i = 0; i < k; ++i) mm.mdp.state_names[i] = m.state_names[mm.orig_of[i]];
    mm.mdp.state_names[mm.source] = "src";
    mm.mdp.state_names[mm.bottom] = "bot";
    mm.mdp.initial = mm.source;

    ActionEntry init{"init", {}};
    for (int i = 0; i < k; ++i) init.successors.emplace_back(i, Rat(1, k));
    mm.mdp.actions[mm.source].push_back(std::move(init));
    mm.mdp.actions[mm.bottom].push_back({"loop", {{mm.bottom, Rat(1)}}});

    for (int i = 0; i < k; ++i) {
        StateId s = mm.orig_of[i];
        for (int a = 0; a < m.num_actions(s); ++a) {
            if (mec.count({s, a})) {
                ActionEntry entry{m.actions[s][a].label, {}};
                for (const auto& [succ, prob] : m.actions[s][a].successors)
                    entry.successors.emplace_back(mm.local_of[succ], prob);
                std::sort(entry.successors.begin(), entry.successors.end());
                mm.mdp.actions[i].push_back(std::move(entry));
            } else {
                mm.mdp.actions[i].push_back({m.actions[s][a].label, {{mm.bottom, Rat(1)}}});
            }
        }
        mm.mdp.actions[i].push_back({"leave", {{mm.bottom, Rat(1)}}});
    }
    mm.mdp.validate();
    return mm;
}

// Shared part of the end-component blocks: marker binaries with successor
// propagation, and the uniform-source flow system that forces at least one
// marked state on every induced BSCC inside the component.
void add_marker_block(EncodingArtifacts& art, const Mdp& m, const PairSet& mec, int obj_key,
                      const std::string& block_name) {
    std::set<StateId> states;
    for (const auto& [s, a] : mec) states.insert(s);
    const int k = static_cast<int>(states.size());

    for (StateId s : states) {
        int e = art.model.add_binary("e_" + state_tag(m, s) +
                                     (obj_key >= 0 ? "_" + std::to_string(obj_key) : ""));
        art.ec_state_var[{s, obj_key}] = e;
    }
    for (const auto& [s, a] : mec) {
        int ea = art.model.add_binary("ea_" + state_tag(m, s) + "_" + m.actions[s][a].label +
                                      (obj_key >= 0 ? "_" + std::to_string(obj_key) : ""));
        art.ec_action_var[{s, a, obj_key}] = ea;
        art.model.add_constraint({{ea, Rat(1)}, {art.action_var.at({s, a}), Rat(-1)}}, Cmp::Le,
                                 Rat(0));
        for (const auto& [succ, prob] : m.actions[s][a].successors)
            art.model.add_constraint({{ea, Rat(1)}, {art.ec_state_var.at({succ, obj_key}), Rat(-1)}},
                                     Cmp::Le, Rat(0));
    }
    for (StateId s : states) {
        LinExpr agg{{art.ec_state_var.at({s, obj_key}), Rat(1)}};
        for (int a = 0; a < m.num_actions(s); ++a)
            if (mec.count({s, a})) agg.push_back({art.ec_action_var.at({s, a, obj_key}), Rat(-1)});
        art.model.add_constraint(std::move(agg), Cmp::Eq, Rat(0));
    }

    // marker flow system on the auxiliary model
    MarkerModel mm = build_marker_model(m, mec, states);
    std::vector<Rat> fe = compute_visit_upper_bounds(mm.mdp, {mm.bottom});

    std::map<std::pair<StateId, int>, int> flow;  // (orig state, action) in mec-universe
    std::map<StateId, int> bottom_flow;
    for (StateId s : states) {
        const Rat& cap = fe[mm.local_of[s]];
        for (int a = 0; a < m.num_actions(s); ++a) {
            int f = art.model.add_continuous(
                block_name + "_f_" + state_tag(m, s) + "_" + m.actions[s][a].label, Rat(0), cap);
            flow[{s, a}] = f;
            art.model.add_constraint({{f, Rat(1)}, {art.action_var.at({s, a}), -cap}}, Cmp::Le,
                                     Rat(0));
        }
        int fb = art.model.add_continuous(block_name + "_f_" + state_tag(m, s) + "_bot", Rat(0),
                                          cap);
        bottom_flow[s] = fb;
        art.model.add_constraint({{fb, Rat(1)}, {art.ec_state_var.at({s, obj_key}), -cap}},
                                 Cmp::Le, Rat(0));
    }
    for (StateId s : states) {
        LinExpr row{{bottom_flow.at(s), Rat(1)}};
        for (int a = 0; a < m.num_actions(s); ++a) row.push_back({flow.at({s, a}), Rat(1)});
        for (const auto& [t, a] : mec) {
            Rat prob = m.probability(t, a, s);
            if (prob != 0) row.push_back({flow.at({t, a}), -prob});
        }
        art.model.add_constraint(std::move(row), Cmp::Eq, Rat(1, k));
    }
    LinExpr out;
    for (StateId s : states) {
        out.push_back({bottom_flow.at(s), Rat(1)});
        for (int a = 0; a < m.num_actions(s); ++a)
            if (!mec.count({s, a})) out.push_back({flow.at({s, a}), Rat(1)});
    }
    art.model.add_constraint(std::move(out), Cmp::Eq, Rat(1));
    art.num_ec_blocks++;
}

}  // namespace

static void add_threshold_row(EncodingArtifacts& art, const Query& q, const Point& p, int j) {
    const ObjectiveTerm& term = art.objective_terms[j];
    const bool maximizing = q.objectives[j].maximizing();
    if (p.coords[j].is_infinite()) {
        // minimizing: trivially satisfied; maximizing with finite values: impossible
        if (maximizing) art.model.add_constraint({}, Cmp::Ge, Rat(1), "thr_unreachable");
        return;
    }
    const Rat& pj = p.coords[j].value();
    if (term.var < 0) {
        // value is the constant term.offset
        bool ok = maximizing ? term.offset >= pj : term.offset <= pj;
        if (!ok) art.model.add_constraint({}, Cmp::Ge, Rat(1), "thr_unreachable");
        return;
    }
    // maximizing: x >= p; minimizing: -x <= p i.e. sign*x >= sign-adjusted rhs
    if (maximizing)
        art.model.add_constraint({{term.var, term.sign}}, Cmp::Ge, pj,
                                 "thr_" + std::to_string(j));
    else
        art.model.add_constraint({{term.var, -term.sign}}, Cmp::Le, pj,
                                 "thr_" + std::to_string(j));
}

void add_threshold_rows(EncodingArtifacts& art, const Query& q, const Point& p,
                        const std::set<int>& skip) {
    for (int j = 0; j < q.dimension(); ++j)
        if (!skip.count(j)) add_threshold_row(art, q, p, j);
}

EncodingArtifacts encode_base(const Mdp& m, const Query& q, const Point& p, const Bounds& bounds,
                              const std::vector<ObjectiveStateSets>& sets,
                              const std::set<int>& skip_threshold) {
    if (p.dimension() != q.dimension())
        throw Error(ErrorKind::DimensionMismatch, "point/query dimension mismatch");
    EncodingArtifacts art;
    art.flavor = EncodingFlavor::Base;
    art.sets = sets;
    art.bounds = bounds;
    add_action_selection(art, m);

    for (int j = 0; j < q.dimension(); ++j) {
        const Objective& obj = q.objectives[j];
        const bool maximizing = obj.maximizing();
        const auto& u = bounds.reward_upper.at(j);
        if (bounds_exceed_warn_threshold(u)) art.bound_warning = true;

        // x variables in maximizing orientation: x = +value (max), -value (min)
        for (StateId s : sets[j].maybe) {
            Rat lo = maximizing ? Rat(0) : -u[s];
            Rat up = maximizing ? u[s] : Rat(0);
            art.value_var[{s, j}] =
                art.model.add_continuous("x_" + state_tag(m, s) + "_" + std::to_string(j), lo, up);
            for (int a = 0; a < m.num_actions(s); ++a)
                art.value_action_var[{s, a, j}] = art.model.add_continuous(
                    "xa_" + state_tag(m, s) + "_" + m.actions[s][a].label + "_" + std::to_string(j),
                    lo, up);
        }
        for (StateId s : sets[j].maybe) {
            const Rat& us = u[s];
            for (int a = 0; a < m.num_actions(s); ++a) {
                int xa = art.value_action_var.at({s, a, j});
                // xa <= sum_s' P (x' +- R)
                LinExpr row{{xa, Rat(1)}};
                Rat rhs(0);
                for (const auto& [succ, prob] : m.actions[s][a].successors) {
                    Rat rew = prob * obj.reward.get(s, a, succ);
                    rhs += maximizing ? rew : -rew;
                    auto it = art.value_var.find({succ, j});
                    if (it != art.value_var.end()) row.push_back({it->second, -prob});
                }
                art.model.add_constraint(std::move(row), Cmp::Le, rhs);
                // xa <= u (a_{s,alpha} - [min])
                art.model.add_constraint({{xa, Rat(1)}, {art.action_var.at({s, a}), -us}}, Cmp::Le,
                                         maximizing ? Rat(0) : -us);
            }
            // x <= sum_a xa + [min] (|Act|-1) u
            LinExpr agg{{art.value_var.at({s, j}), Rat(1)}};
            for (int a = 0; a < m.num_actions(s); ++a)
                agg.push_back({art.value_action_var.at({s, a, j}), Rat(-1)});
            Rat rhs = maximizing ? Rat(0) : Rat(m.num_actions(s) - 1) * us;
            art.model.add_constraint(std::move(agg), Cmp::Le, rhs);
        }

        ObjectiveTerm term;
        if (sets[j].maybe.count(m.initial)) {
            term.var = art.value_var.at({m.initial, j});
            term.sign = 1;  // the variable already carries the orientation
        } else {
            term.var = -1;
            term.offset = 0;
        }
        art.objective_terms.push_back(term);
        if (!skip_threshold.count(j)) add_threshold_row(art, q, p, j);
    }
    art.infinite_flag_var.assign(q.dimension(), -1);
    return art;
}

EncodingArtifacts encode_total_reward(const Mdp& m, const Query& q, const Point& p,
                                      const Bounds& bounds,
                                      const std::vector<ObjectiveStateSets>& sets) {
    for (const auto& obj : q.objectives)
        if (!obj.total_reward())
            throw Error(ErrorKind::NotTotalReward, "flow encoding needs total reward objectives");
    if (p.dimension() != q.dimension())
        throw Error(ErrorKind::DimensionMismatch, "point/query dimension mismatch");

    EncodingArtifacts art;
    art.flavor = EncodingFlavor::Flow;
    art.sets = sets;
    art.bounds = bounds;
    add_action_selection(art, m);

    std::set<StateId> shared_zero;
    for (StateId s = 0; s < m.num_states(); ++s) {
        bool all_zero = true;
        for (const auto& js : sets)
            if (!js.zero.count(s)) {
                all_zero = false;
                break;
            }
        if (all_zero) shared_zero.insert(s);
    }
    const bool trivial = shared_zero.count(m.initial) > 0;
    if (bounds_exceed_warn_threshold(bounds.visit_upper)) art.bound_warning = true;

    if (!trivial) {
        // flow variables and conservation
        for (StateId s = 0; s < m.num_states(); ++s) {
            if (shared_zero.count(s)) continue;
            const Rat& cap = bounds.visit_upper.at(s);
            for (int a = 0; a < m.num_actions(s); ++a) {
                int f = art.model.add_continuous(
                    "f_" + state_tag(m, s) + "_" + m.actions[s][a].label, Rat(0), cap);
                art.flow_var[{s, a}] = f;
                art.model.add_constraint({{f, Rat(1)}, {art.action_var.at({s, a}), -cap}},
                                         Cmp::Le, Rat(0));
            }
        }
        for (StateId s = 0; s < m.num_states(); ++s) {
            if (shared_zero.count(s)) continue;
            LinExpr row;
            for (int a = 0; a < m.num_actions(s); ++a) row.push_back({art.flow_var.at({s, a}), Rat(1)});
            for (StateId t = 0; t < m.num_states(); ++t) {
                if (shared_zero.count(t)) continue;
                for (int a = 0; a < m.num_actions(t); ++a) {
                    Rat prob = m.probability(t, a, s);
                    if (prob != 0) row.push_back({art.flow_var.at({t, a}), -prob});
                }
            }
            art.flow_conservation_row[s] = static_cast<int>(art.model.constraints.size());
            art.model.add_constraint(std::move(row), Cmp::Eq, Rat(s == m.initial ? 1 : 0),
                                     "flow_" + state_tag(m, s));
        }
        LinExpr out;
        for (StateId s = 0; s < m.num_states(); ++s) {
            if (shared_zero.count(s)) continue;
            for (int a = 0; a < m.num_actions(s); ++a) {
                Rat mass(0);
                for (const auto& [succ, prob] : m.actions[s][a].successors)
                    if (shared_zero.count(succ)) mass += prob;
                if (mass != 0) out.push_back({art.flow_var.at({s, a}), mass});
            }
        }
        art.flow_outflow_row = static_cast<int>(art.model.constraints.size());
        art.model.add_constraint(std::move(out), Cmp::Eq, Rat(1), "outflow");
    }

    for (int j = 0; j < q.dimension(); ++j) {
        const Objective& obj = q.objectives[j];
        ObjectiveTerm term;
        if (trivial) {
            term.var = -1;
            term.offset = 0;
        } else {
            // cap the defined value by a crude safe budget
            Rat cap(0);
            for (StateId s = 0; s < m.num_states(); ++s) {
                if (shared_zero.count(s)) continue;
                Rat rmax(0);
                for (int a = 0; a < m.num_actions(s); ++a) {
                    Rat r = obj.reward.expected_step(m, s, a);
                    if (r > rmax) rmax = r;
                }
                cap += bounds.visit_upper.at(s) * rmax;
            }
            int x = art.model.add_continuous("x_init_" + std::to_string(j), Rat(0), cap);
            LinExpr def{{x, Rat(1)}};
            for (StateId s = 0; s < m.num_states(); ++s) {
                if (shared_zero.count(s)) continue;
                for (int a = 0; a < m.num_actions(s); ++a) {
                    Rat r = obj.reward.expected_step(m, s, a);
                    if (r != 0) def.push_back({art.flow_var.at({s, a}), -r});
                }
            }
            art.model.add_constraint(std::move(def), Cmp::Eq, Rat(0),
                                     "value_" + std::to_string(j));
            term.var = x;
            term.sign = obj.maximizing() ? Rat(1) : Rat(-1);  // orientation for optimization
            art.value_var[{m.initial, j}] = x;
        }
        art.objective_terms.push_back(term);

        // threshold on the plain value
        if (p.coords[j].is_infinite()) {
            if (obj.maximizing())
                art.model.add_constraint({}, Cmp::Ge, Rat(1), "thr_unreachable");
            continue;
        }
        if (term.var < 0) {
            bool ok = obj.maximizing() ? Rat(0) >= p.coords[j].value()
                                       : Rat(0) <= p.coords[j].value();
            if (!ok) art.model.add_constraint({}, Cmp::Ge, Rat(1), "thr_unreachable");
        } else {
            art.model.add_constraint({{term.var, Rat(1)}},
                                     obj.maximizing() ? Cmp::Ge : Cmp::Le, p.coords[j].value(),
                                     "thr_" + std::to_string(j));
        }
    }
    art.infinite_flag_var.assign(q.dimension(), -1);
    return art;
}

std::optional<Query> convert_to_total_reward(const Query& q, const Mdp& m) {
    Query out;
    for (const auto& obj : q.objectives) {
        if (obj.total_reward()) {
            out.objectives.push_back(obj);
            continue;
        }
        // goal must be closed: no action of a goal state may leave the set
        for (StateId g : obj.goal)
            for (const auto& act : m.actions[g])
                for (const auto& [succ, prob] : act.successors)
                    if (!obj.goal.count(succ)) return std::nullopt;
        Objective conv;
        conv.relation = obj.relation;
        for (const auto& [key, value] : obj.reward.entries) {
            auto [s, a, t] = key;
            if (!obj.goal.count(s)) conv.reward.set(s, a, t, value);
        }
        out.objectives.push_back(std::move(conv));
    }
    return out;
}

Mdp absorb_states(const Mdp& m, const std::set<StateId>& goal) {
    Mdp out = m;
    for (StateId g : goal) {
        out.actions[g].clear();
        out.actions[g].push_back({"stay", {{g, Rat(1)}}});
    }
    out.validate();
    return out;
}

void encode_ec_constraints(EncodingArtifacts& art, const Mdp& m, const Query& q) {
    for (int j = 0; j < q.dimension(); ++j) {
        PairSet cand = reward_free_candidates(m, art.sets[j].maybe, q.objectives[j].reward);
        MecDecomposition mecs = compute_mecs_restricted(m, cand);
        const bool maximizing = q.objectives[j].maximizing();
        int block = 0;
        for (const auto& mec : mecs.mecs) {
            add_marker_block(art, m, mec, j,
                             "ec" + std::to_string(j) + "_" + std::to_string(block++));
            // value deactivation: +-x_s <= u_s (1 - e_s)
            std::set<StateId> states;
            for (const auto& [s, a] : mec) states.insert(s);
            for (StateId s : states) {
                auto xit = art.value_var.find({s, j});
                if (xit == art.value_var.end()) continue;
                const Rat& us = art.bounds.reward_upper.at(j).at(s);
                LinExpr row{{xit->second, maximizing ? Rat(1) : Rat(-1)},
                            {art.ec_state_var.at({s, j}), us}};
                art.model.add_constraint(std::move(row), Cmp::Le, us);
            }
        }
    }
}

void encode_ec_constraints_flow(EncodingArtifacts& art, const Mdp& m, const Query& q) {
    if (art.flavor != EncodingFlavor::Flow)
        throw Error(ErrorKind::BadInput, "flow EC constraints need the flow encoding");
    if (art.flow_outflow_row < 0) return;  // trivial instance, no flow system

    std::set<StateId> maybe;
    for (const auto& [key, var] : art.flow_var) maybe.insert(key.first);
    PairSet cand = reward_free_candidates_all(m, maybe, q);
    MecDecomposition mecs = compute_mecs_restricted(m, cand);
    int block = 0;
    for (const auto& mec : mecs.mecs) {
        add_marker_block(art, m, mec, -1, "ecf_" + std::to_string(block++));
        std::set<StateId> states;
        for (const auto& [s, a] : mec) states.insert(s);
        for (StateId s : states) {
            int fe = art.model.add_continuous("ftrap_" + state_tag(m, s), Rat(0), Rat(1));
            art.trapped_var[s] = fe;
            art.model.add_constraint({{fe, Rat(1)}, {art.ec_state_var.at({s, -1}), Rat(-1)}},
                                     Cmp::Le, Rat(0));
            // augment conservation and outflow with the trapped mass
            art.model.constraints[art.flow_conservation_row.at(s)].expr.push_back({fe, Rat(1)});
            art.model.constraints[art.flow_outflow_row].expr.push_back({fe, Rat(1)});
        }
    }
}

void encode_infinite_max(EncodingArtifacts& art, const Mdp& m, const Query& q, const Point& p,
                         int j) {
    if (!q.objectives[j].maximizing())
        throw Error(ErrorKind::BadInput, "divergence handling applies to maximizing objectives");
    const auto& sets = art.sets[j];
    int b = art.model.add_binary("b_" + std::to_string(j));
    art.infinite_flag_var[j] = b;

    // gated threshold: value >= p_j * b  (or b = 0 when the threshold is inf)
    if (p.coords[j].is_infinite()) {
        art.model.add_constraint({{b, Rat(1)}}, Cmp::Eq, Rat(0));
    } else {
        const ObjectiveTerm& term = art.objective_terms[j];
        const Rat& pj = p.coords[j].value();
        if (term.var >= 0)
            art.model.add_constraint({{term.var, term.sign}, {b, -pj}}, Cmp::Ge, Rat(0));
        else
            art.model.add_constraint({{b, -pj}}, Cmp::Ge, -term.offset);
    }

    // reach-probability system: w_s >= P(eventually zero-value states or a
    // marked component under the selected strategy); all w in [0,1]
    std::map<StateId, int> w_state;
    for (StateId s : sets.maybe)
        w_state[s] = art.model.add_continuous(
            "w_" + state_tag(m, s) + "_" + std::to_string(j), Rat(0), Rat(1));

    for (StateId s : sets.maybe) {
        LinExpr agg{{w_state.at(s), Rat(1)}};
        for (int a = 0; a < m.num_actions(s); ++a) {
            int wa = art.model.add_continuous(
                "wa_" + state_tag(m, s) + "_" + m.actions[s][a].label + "_" + std::to_string(j),
                Rat(0), Rat(1));
            agg.push_back({wa, Rat(-1)});
            // w_{s,a} >= 1 - a_{s,a}
            art.model.add_constraint({{wa, Rat(1)}, {art.action_var.at({s, a}), Rat(1)}}, Cmp::Ge,
                                     Rat(1));
            // w_{s,a} >= e_{s,a}
            auto ea = art.ec_action_var.find({s, a, j});
            if (ea != art.ec_action_var.end())
                art.model.add_constraint({{wa, Rat(1)}, {ea->second, Rat(-1)}}, Cmp::Ge, Rat(0));
            // w_{s,a} >= sum_{s' in maybe} P w_{s'} + P(s,a,zero)
            LinExpr rec{{wa, Rat(1)}};
            Rat zero_mass(0);
            for (const auto& [succ, prob] : m.actions[s][a].successors) {
                if (sets.zero.count(succ))
                    zero_mass += prob;
                else
                    rec.push_back({w_state.at(succ), -prob});
            }
            art.model.add_constraint(std::move(rec), Cmp::Ge, zero_mass);
        }
        art.model.add_constraint(std::move(agg), Cmp::Eq, Rat(1 - m.num_actions(s)));
    }

    // strict: w_init < 1 + b, via the shared epsilon slack
    int eps = ensure_strictness_epsilon(art.model);
    if (sets.maybe.count(m.initial)) {
        art.model.add_constraint({{w_state.at(m.initial), Rat(1)}, {eps, Rat(1)}, {b, Rat(-1)}},
                                 Cmp::Le, Rat(1));
    } else {
        // initial state has value zero surely; divergence is impossible
        art.model.add_constraint({{eps, Rat(1)}, {b, Rat(-1)}}, Cmp::Le, Rat(0));
    }
}

PureStationaryStrategy extract_strategy(const EncodingArtifacts& art, const MilpSolution& sol) {
    if (!sol.is_feasible())
        throw Error(ErrorKind::BadInput, "cannot extract a strategy from an infeasible solve");
    int num_states = 0;
    for (const auto& [key, var] : art.action_var) num_states = std::max(num_states, key.first + 1);
    PureStationaryStrategy sigma;
    sigma.choice.assign(num_states, -1);
    for (const auto& [key, var] : art.action_var) {
        if (sol.binary_value(var) != 1) continue;
        if (sigma.choice[key.first] != -1)
            throw Error(ErrorKind::AmbiguousSelection,
                        "more than one action selected at a state");
        sigma.choice[key.first] = key.second;
    }
    for (int s = 0; s < num_states; ++s)
        if (sigma.choice[s] == -1)
            throw Error(ErrorKind::AmbiguousSelection, "no action selected at a state");
    return sigma;
}

long long base_encoding_variable_count(const Mdp& m,
                                       const std::vector<ObjectiveStateSets>& sets) {
    long long count = m.total_action_count();
    for (const auto& js : sets)
        for (StateId s : js.maybe) count += 1 + m.num_actions(s);
    return count;
}

long long flow_encoding_variable_count(const Mdp& m, int num_objectives,
                                       const std::set<StateId>& shared_zero) {
    long long count = m.total_action_count();
    if (shared_zero.count(m.initial)) return count;
    for (StateId s = 0; s < m.num_states(); ++s)
        if (!shared_zero.count(s)) count += m.num_actions(s);
    return count + num_objectives;
}

// ---------------------------------------------------------------------------
// Full pipeline.
// ---------------------------------------------------------------------------

namespace {

struct PreparedInstance {
    Mdp mdp;                  // restricted (and possibly goal-absorbed) model
    Query query;              // restricted query (flow: converted)
    std::vector<ObjectiveStateSets> sets;
    std::vector<StateId> orig_of;
    std::vector<std::vector<int>> orig_action_of;
    EncodingFlavor flavor = EncodingFlavor::Base;
    std::vector<bool> infinite_max;  // per objective (base flavor only)
};

std::vector<bool> detect_infinite_max(const Mdp& m, const Query& q) {
    std::vector<bool> out(q.dimension(), false);
    for (int j = 0; j < q.dimension(); ++j) {
        const Objective& obj = q.objectives[j];
        if (!obj.maximizing()) continue;
        // reward diverges iff some strategy can, while avoiding the goal,
        // reach an EC that avoids the goal and collects positive reward
        PairSet goal_free;
        for (const auto& [s, a] : m.all_pairs())
            if (!obj.goal.count(s)) goal_free.insert({s, a});
        MecDecomposition mecs = compute_mecs_restricted(m, goal_free);

        std::vector<bool> reach(m.num_states(), false);
        if (!obj.goal.count(m.initial)) {
            std::deque<StateId> queue{m.initial};
            reach[m.initial] = true;
            while (!queue.empty()) {
                StateId s = queue.front();
                queue.pop_front();
                for (const auto& act : m.actions[s])
                    for (const auto& [succ, prob] : act.successors)
                        if (!reach[succ] && !obj.goal.count(succ)) {
                            reach[succ] = true;
                            queue.push_back(succ);
                        }
            }
        }
        for (const auto& mec : mecs.mecs) {
            for (const auto& [s, a] : mec)
                if (reach[s] && !obj.reward.action_is_zero(s, a)) {
                    out[j] = true;
                    break;
                }
            if (out[j]) break;
        }
    }
    return out;
}

PureStationaryStrategy lift_strategy(const PreparedInstance& inst,
                                     const PureStationaryStrategy& sigma, const Mdp& original) {
    PureStationaryStrategy out;
    out.choice.assign(original.num_states(), 0);
    for (size_t i = 0; i < inst.orig_of.size(); ++i)
        out.choice[inst.orig_of[i]] = inst.orig_action_of[i][sigma.choice[i]];
    return out;
}

}  // namespace

AchievabilityEncoding build_region_encoding(const Mdp& m, const Query& q,
                                            PsmaOptions::Flavor flavor) {
    AchievabilityEncoding enc;
    SubMdpResult restricted = restrict_to_finite(m, q);
    enc.query = restricted.project_query(q);
    enc.model = std::move(restricted.mdp);
    enc.orig_of = std::move(restricted.orig_of);
    enc.orig_action_of = std::move(restricted.orig_action_of);

    std::vector<bool> inf_max = detect_infinite_max(enc.model, enc.query);
    if (std::find(inf_max.begin(), inf_max.end(), true) != inf_max.end())
        throw Error(ErrorKind::UnboundedReward,
                    "region optimization requires finite objective values");

    std::optional<Query> converted = convert_to_total_reward(enc.query, enc.model);
    Mdp flow_model = enc.model;
    if (!converted) {
        std::set<StateId> common = enc.query.objectives[0].goal;
        bool equal = !common.empty();
        for (const auto& obj : enc.query.objectives)
            if (obj.goal != common) equal = false;
        if (equal) {
            flow_model = absorb_states(enc.model, common);
            Query absorbed = enc.query;
            for (auto& obj : absorbed.objectives) {
                RewardStructure pruned;
                for (const auto& [key, value] : obj.reward.entries) {
                    auto [s, a, t] = key;
                    if (!common.count(s) && flow_model.probability(s, a, t) != 0)
                        pruned.set(s, a, t, value);
                }
                obj.reward = std::move(pruned);
            }
            converted = convert_to_total_reward(absorbed, flow_model);
        }
    }
    bool use_flow = false;
    switch (flavor) {
        case PsmaOptions::Flavor::Base: break;
        case PsmaOptions::Flavor::Flow:
            if (!converted)
                throw Error(ErrorKind::NotTotalReward,
                            "flow encoding requested but the query is not total-reward convertible");
            use_flow = true;
            break;
        case PsmaOptions::Flavor::Auto: use_flow = converted.has_value(); break;
    }

    // placeholder point: thresholds are skipped entirely
    Point dummy;
    dummy.coords.assign(enc.query.dimension(), ExtRat(Rat(0)));
    std::set<int> skip_all;
    for (int j = 0; j < enc.query.dimension(); ++j) skip_all.insert(j);

    if (use_flow) {
        enc.model = std::move(flow_model);
        enc.query = *converted;
        std::vector<ObjectiveStateSets> sets;
        for (const auto& obj : enc.query.objectives)
            sets.push_back(compute_zero_states(enc.model, obj));
        std::set<StateId> shared_zero;
        for (StateId s = 0; s < enc.model.num_states(); ++s) {
            bool all = true;
            for (const auto& js : sets)
                if (!js.zero.count(s)) all = false;
            if (all) shared_zero.insert(s);
        }
        Bounds bounds;
        bounds.visit_upper = compute_visit_upper_bounds(enc.model, shared_zero, true);
        enc.art = encode_total_reward(enc.model, enc.query, dummy, bounds, sets);
        // drop the threshold rows the flow encoder added
        auto& cons = enc.art.model.constraints;
        cons.erase(std::remove_if(cons.begin(), cons.end(),
                                  [](const MilpConstraint& c) {
                                      return c.name.rfind("thr_", 0) == 0;
                                  }),
                   cons.end());
        encode_ec_constraints_flow(enc.art, enc.model, enc.query);
    } else {
        Bounds bounds;
        std::vector<ObjectiveStateSets> sets;
        for (int j = 0; j < enc.query.dimension(); ++j) {
            sets.push_back(compute_zero_states(enc.model, enc.query.objectives[j]));
            bounds.reward_upper.push_back(
                compute_reward_upper_bounds(enc.model, enc.query.objectives[j], sets[j]));
        }
        enc.art = encode_base(enc.model, enc.query, dummy, bounds, sets, skip_all);
        encode_ec_constraints(enc.art, enc.model, enc.query);
    }
    return enc;
}

PureStationaryStrategy lift_to_original(const AchievabilityEncoding& enc,
                                        const PureStationaryStrategy& sigma,
                                        const Mdp& original) {
    PureStationaryStrategy out;
    out.choice.assign(original.num_states(), 0);
    for (size_t i = 0; i < enc.orig_of.size(); ++i)
        out.choice[enc.orig_of[i]] = enc.orig_action_of[i][sigma.choice[i]];
    return out;
}

PsmaResult psma_check(const Mdp& m, const Query& q_in, const Point& p_in,
                      const PsmaOptions& opts) {
    if (p_in.dimension() != q_in.dimension())
        throw Error(ErrorKind::DimensionMismatch, "point/query dimension mismatch");

    PsmaResult result;

    // minimizing objectives with an infinite threshold constrain nothing
    Query q;
    Point p;
    for (int j = 0; j < q_in.dimension(); ++j) {
        if (!q_in.objectives[j].maximizing() && p_in.coords[j].is_infinite()) continue;
        q.objectives.push_back(q_in.objectives[j]);
        p.coords.push_back(p_in.coords[j]);
    }
    auto finish_achievable = [&](PureStationaryStrategy sigma) {
        result.verdict = PsmaVerdict::Achievable;
        result.values = evaluate_strategy_query(m, sigma, q_in);
        result.strategy = std::move(sigma);
        return result;
    };
    if (q.objectives.empty()) {
        PureStationaryStrategy sigma;
        sigma.choice.assign(m.num_states(), 0);
        return finish_achievable(std::move(sigma));
    }

    PreparedInstance inst;
    try {
        SubMdpResult restricted = restrict_to_finite(m, q);
        inst.query = restricted.project_query(q);
        inst.mdp = std::move(restricted.mdp);
        inst.orig_of = std::move(restricted.orig_of);
        inst.orig_action_of = std::move(restricted.orig_action_of);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InitialInfinite) {
            result.verdict = PsmaVerdict::NotAchievable;
            return result;
        }
        throw;
    }

    std::vector<bool> inf_max = detect_infinite_max(inst.mdp, inst.query);
    for (int j = 0; j < inst.query.dimension(); ++j)
        if (p.coords[j].is_infinite() && inst.query.objectives[j].maximizing() && !inf_max[j]) {
            result.verdict = PsmaVerdict::NotAchievable;  // finite values never reach inf
            return result;
        }

    // flavor selection
    bool any_inf_max = std::find(inf_max.begin(), inf_max.end(), true) != inf_max.end();
    std::optional<Query> converted = convert_to_total_reward(inst.query, inst.mdp);
    Mdp flow_model = inst.mdp;
    if (!converted) {
        // all goals equal and non-empty: absorbing them preserves every objective
        std::set<StateId> common = inst.query.objectives[0].goal;
        bool equal = !common.empty();
        for (const auto& obj : inst.query.objectives)
            if (obj.goal != common) equal = false;
        if (equal) {
            flow_model = absorb_states(inst.mdp, common);
            Query absorbed = inst.query;
            for (auto& obj : absorbed.objectives) {
                RewardStructure pruned;
                for (const auto& [key, value] : obj.reward.entries) {
                    auto [s, a, t] = key;
                    if (!common.count(s) && flow_model.probability(s, a, t) != 0)
                        pruned.set(s, a, t, value);
                }
                obj.reward = std::move(pruned);
            }
            converted = convert_to_total_reward(absorbed, flow_model);
        }
    }

    switch (opts.flavor) {
        case PsmaOptions::Flavor::Base:
            inst.flavor = EncodingFlavor::Base;
            break;
        case PsmaOptions::Flavor::Flow:
            if (!converted)
                throw Error(ErrorKind::NotTotalReward,
                            "flow encoding requested but the query is not total-reward convertible");
            inst.flavor = EncodingFlavor::Flow;
            break;
        case PsmaOptions::Flavor::Auto:
            inst.flavor =
                (converted && !any_inf_max) ? EncodingFlavor::Flow : EncodingFlavor::Base;
            break;
    }
    if (inst.flavor == EncodingFlavor::Flow && any_inf_max)
        throw Error(ErrorKind::UnboundedReward,
                    "flow encoding does not support diverging maximizing objectives");

    EncodingArtifacts art;
    if (inst.flavor == EncodingFlavor::Flow) {
        inst.mdp = flow_model;
        inst.query = *converted;
        for (const auto& obj : inst.query.objectives)
            inst.sets.push_back(compute_zero_states(inst.mdp, obj));
        std::set<StateId> shared_zero;
        for (StateId s = 0; s < inst.mdp.num_states(); ++s) {
            bool all = true;
            for (const auto& js : inst.sets)
                if (!js.zero.count(s)) all = false;
            if (all) shared_zero.insert(s);
        }
        Bounds bounds;
        bounds.visit_upper = compute_visit_upper_bounds(inst.mdp, shared_zero, true);
        art = encode_total_reward(inst.mdp, inst.query, p, bounds, inst.sets);
        encode_ec_constraints_flow(art, inst.mdp, inst.query);
    } else {
        inst.infinite_max = inf_max;
        Bounds bounds;
        std::set<int> skip;
        for (int j = 0; j < inst.query.dimension(); ++j) {
            inst.sets.push_back(compute_zero_states(inst.mdp, inst.query.objectives[j]));
            bounds.reward_upper.push_back(
                compute_reward_upper_bounds(inst.mdp, inst.query.objectives[j], inst.sets[j]));
            if (inf_max[j]) skip.insert(j);
        }
        art = encode_base(inst.mdp, inst.query, p, bounds, inst.sets, skip);
        encode_ec_constraints(art, inst.mdp, inst.query);
        for (int j = 0; j < inst.query.dimension(); ++j)
            if (inf_max[j]) encode_infinite_max(art, inst.mdp, inst.query, p, j);
    }
    result.flavor_used = inst.flavor;
    result.bound_warning = art.bound_warning;

    if (!opts.export_lp_path.empty()) {
        std::ofstream out(opts.export_lp_path);
        out << export_lp(art.model);
    }

    int eps_var = -1;
    for (const auto& v : art.model.vars)
        if (v.name == "eps_strict") eps_var = v.id;

    SolverOptions solver_opts = opts.solver;
    for (int attempt = 0; attempt < 2; ++attempt) {
        MilpSolution sol = solve(art.model, solver_opts);
        if (!sol.is_feasible() ||
            (eps_var >= 0 && sol.value(eps_var) <= solver_opts.integrality_tol)) {
            result.verdict = PsmaVerdict::NotAchievable;
            return result;
        }
        PureStationaryStrategy local = extract_strategy(art, sol);
        PureStationaryStrategy sigma = lift_strategy(inst, local, m);
        if (check_achieves(m, sigma, q_in, p_in)) return finish_achievable(std::move(sigma));
        if (attempt == 0) {
            solver_opts = solver_opts.tightened();
            continue;
        }
        result.verdict = PsmaVerdict::VerificationFailed;
        result.strategy = std::move(sigma);
        result.values = evaluate_strategy_query(m, *result.strategy, q_in);
    }
    return result;
}

}  // namespace momdp
