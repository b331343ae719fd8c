#include "momdp/model_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace momdp {

using nlohmann::json;

namespace {

void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known)
            throw Error(ErrorKind::BadInput, "unknown field '" + it.key() + "' in " + where);
    }
}

Relation parse_relation(const std::string& text) {
    if (text == ">=" || text == "ge" || text == "atleast") return Relation::AtLeast;
    if (text == "<=" || text == "le" || text == "atmost") return Relation::AtMost;
    throw Error(ErrorKind::BadInput, "unknown relation '" + text + "'");
}

}  // namespace

const Query& ModelFile::query(const std::string& name) const {
    for (const auto& [n, q] : queries)
        if (n == name) return q;
    throw Error(ErrorKind::UnknownName, "unknown query '" + name + "'");
}

ModelFile parse_model(const std::string& json_text) {
    json doc = json::parse(json_text);
    reject_unknown_fields(doc, {"states", "initial", "actions", "rewards", "queries", "points"},
                          "model");
    ModelFile file;
    Mdp& m = file.mdp;

    if (!doc.contains("states") || !doc.contains("initial") || !doc.contains("actions"))
        throw Error(ErrorKind::BadInput, "model needs states, initial, and actions");
    for (const auto& s : doc["states"]) m.state_names.push_back(s.get<std::string>());
    m.actions.resize(m.num_states());
    m.initial = m.state_index(doc["initial"].get<std::string>());
    if (m.initial < 0) throw Error(ErrorKind::BadInput, "unknown initial state");

    for (auto it = doc["actions"].begin(); it != doc["actions"].end(); ++it) {
        int s = m.state_index(it.key());
        if (s < 0) throw Error(ErrorKind::BadInput, "actions for unknown state " + it.key());
        for (const auto& a : it.value()) {
            reject_unknown_fields(a, {"label", "transitions"}, "action");
            ActionEntry entry;
            entry.label = a.at("label").get<std::string>();
            for (const auto& t : a.at("transitions")) {
                reject_unknown_fields(t, {"to", "prob"}, "transition");
                int succ = m.state_index(t.at("to").get<std::string>());
                if (succ < 0) throw Error(ErrorKind::BadInput, "unknown successor state");
                entry.successors.emplace_back(succ,
                                              parse_rational(t.at("prob").get<std::string>()));
            }
            m.actions[s].push_back(std::move(entry));
        }
    }
    m.normalize();
    m.validate();

    if (doc.contains("rewards"))
        for (auto it = doc["rewards"].begin(); it != doc["rewards"].end(); ++it) {
            RewardStructure rs;
            for (const auto& e : it.value()) {
                reject_unknown_fields(e, {"from", "action", "to", "value"}, "reward entry");
                int s = m.state_index(e.at("from").get<std::string>());
                int t = m.state_index(e.at("to").get<std::string>());
                if (s < 0 || t < 0) throw Error(ErrorKind::BadInput, "reward on unknown state");
                int a = m.action_index(s, e.at("action").get<std::string>());
                if (a < 0) throw Error(ErrorKind::BadInput, "reward on unknown action");
                rs.set(s, a, t, parse_rational(e.at("value").get<std::string>()));
            }
            rs.validate(m);
            file.rewards.emplace_back(it.key(), std::move(rs));
        }

    if (doc.contains("queries"))
        for (const auto& qj : doc["queries"]) {
            reject_unknown_fields(qj, {"name", "objectives"}, "query");
            Query q;
            for (const auto& oj : qj.at("objectives")) {
                reject_unknown_fields(oj, {"reward", "relation", "goal"}, "objective");
                Objective obj;
                obj.relation = parse_relation(oj.at("relation").get<std::string>());
                if (oj.contains("goal"))
                    for (const auto& g : oj["goal"]) {
                        int s = m.state_index(g.get<std::string>());
                        if (s < 0) throw Error(ErrorKind::BadInput, "unknown goal state");
                        obj.goal.insert(s);
                    }
                std::string reward_name = oj.at("reward").get<std::string>();
                if (reward_name == "reach") {
                    obj.reward = reachability_to_reward(m, obj.goal, obj.relation).reward;
                } else {
                    bool found = false;
                    for (const auto& [n, rs] : file.rewards)
                        if (n == reward_name) {
                            obj.reward = rs;
                            found = true;
                        }
                    if (!found)
                        throw Error(ErrorKind::UnknownName,
                                    "unknown reward structure '" + reward_name + "'");
                }
                q.objectives.push_back(std::move(obj));
            }
            if (q.objectives.empty())
                throw Error(ErrorKind::BadInput, "query needs at least one objective");
            file.queries.emplace_back(qj.at("name").get<std::string>(), std::move(q));
        }

    if (doc.contains("points"))
        for (auto it = doc["points"].begin(); it != doc["points"].end(); ++it) {
            std::vector<Point> pts;
            for (const auto& pj : it.value()) {
                Point p;
                for (const auto& c : pj) p.coords.push_back(parse_ext_rational(c.get<std::string>()));
                pts.push_back(std::move(p));
            }
            file.points[it.key()] = std::move(pts);
        }
    return file;
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::BadInput, "cannot open model file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string serialize_model(const ModelFile& file) {
    const Mdp& m = file.mdp;
    json doc;
    doc["states"] = m.state_names;
    doc["initial"] = m.state_names[m.initial];
    json actions = json::object();
    for (StateId s = 0; s < m.num_states(); ++s) {
        json list = json::array();
        for (const auto& act : m.actions[s]) {
            json a;
            a["label"] = act.label;
            json ts = json::array();
            for (const auto& [succ, prob] : act.successors) {
                json t;
                t["to"] = m.state_names[succ];
                t["prob"] = rational_to_string(prob);
                ts.push_back(std::move(t));
            }
            a["transitions"] = std::move(ts);
            list.push_back(std::move(a));
        }
        actions[m.state_names[s]] = std::move(list);
    }
    doc["actions"] = std::move(actions);

    json rewards = json::object();
    for (const auto& [name, rs] : file.rewards) {
        json list = json::array();
        for (const auto& [key, value] : rs.entries) {
            auto [s, a, t] = key;
            json e;
            e["from"] = m.state_names[s];
            e["action"] = m.actions[s][a].label;
            e["to"] = m.state_names[t];
            e["value"] = rational_to_string(value);
            list.push_back(std::move(e));
        }
        rewards[name] = std::move(list);
    }
    if (!file.rewards.empty()) doc["rewards"] = std::move(rewards);

    json queries = json::array();
    for (const auto& [name, q] : file.queries) {
        json qj;
        qj["name"] = name;
        json objs = json::array();
        for (const auto& obj : q.objectives) {
            json oj;
            // match a named reward structure, else inline as reachability
            std::string reward_name = "reach";
            for (const auto& [n, rs] : file.rewards)
                if (rs.entries == obj.reward.entries) reward_name = n;
            oj["reward"] = reward_name;
            oj["relation"] = obj.relation == Relation::AtLeast ? ">=" : "<=";
            json goal = json::array();
            for (StateId g : obj.goal) goal.push_back(m.state_names[g]);
            oj["goal"] = std::move(goal);
            objs.push_back(std::move(oj));
        }
        qj["objectives"] = std::move(objs);
        queries.push_back(std::move(qj));
    }
    if (!file.queries.empty()) doc["queries"] = std::move(queries);

    if (!file.points.empty()) {
        json points = json::object();
        for (const auto& [name, pts] : file.points) {
            json list = json::array();
            for (const auto& p : pts) {
                json pj = json::array();
                for (const auto& c : p.coords) pj.push_back(c.to_string());
                list.push_back(std::move(pj));
            }
            points[name] = std::move(list);
        }
        doc["points"] = std::move(points);
    }
    return doc.dump(2) + "\n";
}

Point parse_point(const std::string& text) {
    Point p;
    std::string cur;
    std::stringstream ss(text);
    while (std::getline(ss, cur, ','))
        if (!cur.empty()) p.coords.push_back(parse_ext_rational(cur));
    if (p.coords.empty()) throw Error(ErrorKind::BadInput, "empty point");
    return p;
}

std::string serialize_strategy(const ModelFile& file, const PureStationaryStrategy& sigma) {
    const Mdp& m = file.mdp;
    json doc;
    doc["type"] = "stationary";
    json choice = json::object();
    for (StateId s = 0; s < m.num_states(); ++s)
        choice[m.state_names[s]] = m.actions[s][sigma.choice[s]].label;
    doc["choice"] = std::move(choice);
    return doc.dump(2) + "\n";
}

std::string serialize_mealy(const ModelFile& file, const MealyStrategy& strategy) {
    const Mdp& m = file.mdp;
    json doc;
    doc["type"] = "mealy";
    doc["memory"] = strategy.memory_names;
    doc["initial_memory"] = strategy.memory_names[strategy.initial_memory];
    json actions = json::object();
    json updates = json::object();
    for (StateId s = 0; s < m.num_states(); ++s)
        for (int mem = 0; mem < strategy.memory_size; ++mem) {
            std::string key = m.state_names[s] + "@" + strategy.memory_names[mem];
            int a = strategy.next_action[s][mem];
            actions[key] = m.actions[s][a].label;
            updates[key] = strategy.memory_names[strategy.update[mem][s][a]];
        }
    doc["actions"] = std::move(actions);
    doc["updates"] = std::move(updates);
    return doc.dump(2) + "\n";
}

PureStationaryStrategy parse_strategy(const ModelFile& file, const std::string& json_text) {
    json doc = json::parse(json_text);
    reject_unknown_fields(doc, {"type", "choice"}, "strategy");
    if (doc.at("type").get<std::string>() != "stationary")
        throw Error(ErrorKind::BadInput, "expected a stationary strategy file");
    const Mdp& m = file.mdp;
    PureStationaryStrategy sigma;
    sigma.choice.assign(m.num_states(), -1);
    for (auto it = doc.at("choice").begin(); it != doc.at("choice").end(); ++it) {
        int s = m.state_index(it.key());
        if (s < 0) throw Error(ErrorKind::BadInput, "strategy for unknown state " + it.key());
        int a = m.action_index(s, it.value().get<std::string>());
        if (a < 0) throw Error(ErrorKind::BadInput, "strategy picks unknown action");
        sigma.choice[s] = a;
    }
    sigma.validate(m);
    return sigma;
}

}  // namespace momdp
