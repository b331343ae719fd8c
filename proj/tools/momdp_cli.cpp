#include "momdp/encodings.hpp"
#include "momdp/exact.hpp"
#include "momdp/instances.hpp"
#include "momdp/memory.hpp"
#include "momdp/model_io.hpp"
#include "momdp/pareto.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace momdp;
using nlohmann::json;

ModelFile resolve_model(const std::string& arg) {
    if (arg == "fig1" || arg == "fig5a" || arg == "fig5b") {
        ModelWithQuery mq = builtin(arg);
        ModelFile file;
        file.mdp = std::move(mq.mdp);
        file.queries.emplace_back("q0", std::move(mq.query));
        return file;
    }
    return load_model(arg);
}

json point_json(const Point& p) {
    json arr = json::array();
    for (const auto& c : p.coords) arr.push_back(c.to_string());
    return arr;
}

json values_json(const ValueVector& values) {
    json arr = json::array();
    for (const auto& v : values) arr.push_back(v.to_string());
    return arr;
}

int run_check(const ModelFile& file, const std::string& query_name, const Point& point,
              int memory, const std::string& memory_kind, const std::string& encoding,
              const std::string& export_path, double time_limit, const std::string& witness_out) {
    const Query& q = file.query(query_name);
    PsmaOptions opts;
    opts.solver.time_limit_seconds = time_limit;
    opts.export_lp_path = export_path;
    if (encoding == "base") opts.flavor = PsmaOptions::Flavor::Base;
    if (encoding == "flow") opts.flavor = PsmaOptions::Flavor::Flow;

    json out;
    PsmaVerdict verdict;
    if (memory <= 1 && memory_kind.empty()) {
        PsmaResult res = psma_check(file.mdp, q, point, opts);
        verdict = res.verdict;
        out["encoding"] = res.flavor_used == EncodingFlavor::Flow ? "flow" : "base";
        if (res.strategy) {
            out["witness"] = json::parse(serialize_strategy(file, *res.strategy));
            out["values"] = values_json(res.values);
            if (!witness_out.empty()) {
                std::ofstream w(witness_out);
                w << serialize_strategy(file, *res.strategy);
            }
        }
        if (res.bound_warning)
            std::cerr << "warning: big-M bounds exceed 1e9; expect numerical strain\n";
    } else {
        MemoryKind kind = MemoryKind::Complete;
        if (memory_kind == "counter") kind = MemoryKind::Counter;
        if (memory_kind == "goal") kind = MemoryKind::Goal;
        PbmaResult res = pbma_check(file.mdp, q, std::max(memory, 1), point, kind, opts);
        verdict = res.verdict;
        out["memory_kind"] = memory_kind.empty() ? "complete" : memory_kind;
        if (res.lower_bound_only) out["lower_bound_only"] = true;
        if (res.strategy) {
            out["witness"] = json::parse(serialize_mealy(file, *res.strategy));
            out["values"] = values_json(res.values);
            if (!witness_out.empty()) {
                std::ofstream w(witness_out);
                w << serialize_mealy(file, *res.strategy);
            }
        }
    }
    out["query"] = query_name;
    out["point"] = point_json(point);
    switch (verdict) {
        case PsmaVerdict::Achievable: out["verdict"] = "achievable"; break;
        case PsmaVerdict::NotAchievable: out["verdict"] = "not-achievable"; break;
        case PsmaVerdict::VerificationFailed: out["verdict"] = "verification-failed"; break;
    }
    std::cout << out.dump(2) << "\n";
    if (verdict == PsmaVerdict::VerificationFailed) return 2;
    return verdict == PsmaVerdict::Achievable ? 0 : 1;
}

int run_pareto(const ModelFile& file, const std::string& query_name, double eps,
               const std::string& eps_absolute, double time_limit, const std::string& out_path,
               const std::string& encoding) {
    const Query& q = file.query(query_name);
    ParetoOptions opts;
    opts.time_limit_seconds = time_limit;
    if (encoding == "base") opts.flavor = PsmaOptions::Flavor::Base;
    if (encoding == "flow") opts.flavor = PsmaOptions::Flavor::Flow;

    ParetoApprox res;
    if (!eps_absolute.empty()) {
        Vec abs_eps;
        std::stringstream ss(eps_absolute);
        std::string item;
        while (std::getline(ss, item, ',')) abs_eps.push_back(parse_rational(item));
        if (static_cast<int>(abs_eps.size()) == 1)
            abs_eps.assign(q.dimension(), abs_eps[0]);
        res = approximate_pareto(file.mdp, q, abs_eps, opts);
    } else {
        res = approximate_pareto_relative(file.mdp, q, eps, opts);
    }

    json out;
    out["query"] = query_name;
    out["status"] = res.complete ? "complete" : "incomplete";
    out["milp_solves"] = res.milp_solves;
    json eps_arr = json::array();
    for (const auto& e : res.eps) eps_arr.push_back(rational_to_string(e));
    out["eps"] = eps_arr;
    json found = json::array();
    for (const auto& f : res.found) {
        json fj;
        fj["point"] = point_json(f.point);
        fj["witness"] = json::parse(serialize_strategy(file, f.strategy));
        found.push_back(std::move(fj));
    }
    out["found"] = std::move(found);
    json unach = json::array();
    for (const auto& poly : res.unachievable) {
        json pj = json::array();
        for (const auto& v : poly) {
            json vj = json::array();
            for (const auto& c : v) vj.push_back(rational_to_string(c));
            pj.push_back(std::move(vj));
        }
        unach.push_back(std::move(pj));
    }
    out["unachievable_regions"] = std::move(unach);
    out["open_candidates"] = res.candidates.size();

    std::cout << out.dump(2) << "\n";
    if (!out_path.empty()) {
        {
            std::ofstream f(out_path + ".json");
            f << out.dump(2) << "\n";
        }
        {
            std::ofstream f(out_path + ".csv");
            for (int j = 0; j < q.dimension(); ++j) f << (j ? "," : "") << "objective" << j;
            f << "\n";
            for (const auto& fp : res.found) {
                for (int j = 0; j < q.dimension(); ++j)
                    f << (j ? "," : "") << fp.point.coords[j].to_string();
                f << "\n";
            }
        }
        {
            // gnuplot: decimal coordinates, one point per line
            std::ofstream f(out_path + ".dat");
            f << "# pareto points (" << q.dimension() << " columns)\n";
            for (const auto& fp : res.found) {
                for (int j = 0; j < q.dimension(); ++j)
                    f << (j ? " " : "") << to_double(fp.point.coords[j].value());
                f << "\n";
            }
        }
    }
    return 0;
}

int run_oracle(const ModelFile& file, const std::string& query_name, const std::string& point_arg,
               long long cap, int threads) {
    const Query& q = file.query(query_name);
    json out;
    out["query"] = query_name;
    int code = 0;
    if (!point_arg.empty()) {
        Point p = parse_point(point_arg);
        bool achievable = brute_force_achievable(file.mdp, q, p, cap, threads);
        out["point"] = point_json(p);
        out["verdict"] = achievable ? "achievable" : "not-achievable";
        code = achievable ? 0 : 1;
    } else {
        auto pareto = brute_force_pareto(file.mdp, q, cap, threads);
        json pts = json::array();
        for (const auto& p : pareto) pts.push_back(point_json(p));
        out["pareto"] = std::move(pts);
    }
    std::cout << out.dump(2) << "\n";
    return code;
}

int run_evaluate(const ModelFile& file, const std::string& strategy_path,
                 const std::string& query_name) {
    std::ifstream in(strategy_path);
    if (!in) throw Error(ErrorKind::BadInput, "cannot open strategy file " + strategy_path);
    std::stringstream ss;
    ss << in.rdbuf();
    PureStationaryStrategy sigma = parse_strategy(file, ss.str());
    const Query& q = file.query(query_name);
    json out;
    out["query"] = query_name;
    out["values"] = values_json(evaluate_strategy_query(file.mdp, sigma, q));
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_generate(const std::string& kind, std::uint64_t seed, int states, int actions,
                 double density, int rewards, int objectives, const std::string& weights,
                 long long target, const std::string& out_path) {
    ModelFile file;
    if (kind == "subset-sum") {
        SubsetSumInstance inst;
        std::stringstream ss(weights);
        std::string item;
        while (std::getline(ss, item, ',')) inst.weights.push_back(std::stoll(item));
        inst.n = static_cast<int>(inst.weights.size());
        inst.target = target;
        SubsetSumReduction red = gen_subset_sum(inst);
        file.mdp = std::move(red.mdp);
        file.queries.emplace_back("q0", std::move(red.query));
        file.points["q0"] = {red.point};
    } else if (kind == "random") {
        RandomMdpParams params;
        params.seed = seed;
        params.num_states = states;
        params.max_actions = actions;
        params.density = density;
        params.reward_range = rewards;
        params.num_objectives = objectives;
        ModelWithQuery mq = random_mdp(params);
        file.mdp = std::move(mq.mdp);
        // name non-reachability reward structures so the file can round-trip
        for (int j = 0; j < mq.query.dimension(); ++j) {
            const Objective& obj = mq.query.objectives[j];
            bool is_reach =
                reachability_to_reward(file.mdp, obj.goal, obj.relation).reward.entries ==
                obj.reward.entries;
            if (!is_reach && !obj.reward.entries.empty())
                file.rewards.emplace_back("r" + std::to_string(j), obj.reward);
        }
        file.queries.emplace_back("q0", std::move(mq.query));
    } else if (kind == "fig1" || kind == "fig5a" || kind == "fig5b") {
        ModelWithQuery mq = builtin(kind);
        file.mdp = std::move(mq.mdp);
        for (int j = 0; j < mq.query.dimension(); ++j) {
            const Objective& obj = mq.query.objectives[j];
            bool is_reach =
                reachability_to_reward(file.mdp, obj.goal, obj.relation).reward.entries ==
                obj.reward.entries;
            if (!is_reach && !obj.reward.entries.empty())
                file.rewards.emplace_back("r" + std::to_string(j), obj.reward);
        }
        file.queries.emplace_back("q0", std::move(mq.query));
    } else {
        throw Error(ErrorKind::UnknownName, "unknown generator kind " + kind);
    }
    std::string text = serialize_model(file);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out_path);
        f << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-objective MDP achievability and Pareto front tool"};
    app.require_subcommand(1);

    std::string model_arg, query_name = "q0", point_arg, encoding = "auto";
    std::string export_lp_path, out_path, witness_out, memory_kind, strategy_path, weights;
    double eps = 0.05, time_limit = 0, density = 0.5;
    std::string eps_absolute;
    int memory = 0, threads = 1, states = 5, actions = 2, rewards = 4, objectives = 2;
    long long cap = kDefaultStrategyCap, target = 0;
    std::uint64_t seed = 1;

    auto* check = app.add_subcommand("check", "decide achievability of a point");
    check->add_option("model", model_arg)->required();
    check->add_option("query", query_name);
    check->add_option("point", point_arg)->required();
    check->add_option("--memory", memory, "memory bound for bounded-memory search");
    check->add_option("--memory-kind", memory_kind)
        ->check(CLI::IsMember({"complete", "counter", "goal"}));
    check->add_option("--encoding", encoding)->check(CLI::IsMember({"auto", "base", "flow"}));
    check->add_option("--export-lp", export_lp_path);
    check->add_option("--time-limit", time_limit);
    check->add_option("--witness-out", witness_out);

    auto* pareto = app.add_subcommand("pareto", "approximate the Pareto front");
    pareto->add_option("model", model_arg)->required();
    pareto->add_option("query", query_name);
    pareto->add_option("--eps", eps, "relative precision");
    pareto->add_option("--eps-absolute", eps_absolute, "absolute per-objective eps (comma list)");
    pareto->add_option("--time-limit", time_limit);
    pareto->add_option("--out", out_path, "output prefix (.json/.csv/.dat)");
    pareto->add_option("--encoding", encoding)->check(CLI::IsMember({"auto", "base", "flow"}));

    auto* oracle = app.add_subcommand("oracle", "brute-force verdicts by strategy enumeration");
    oracle->add_option("model", model_arg)->required();
    oracle->add_option("query", query_name);
    oracle->add_option("point", point_arg);
    oracle->add_option("--cap", cap);
    oracle->add_option("--threads", threads);

    auto* evaluate = app.add_subcommand("evaluate", "exact value vector of a strategy");
    evaluate->add_option("model", model_arg)->required();
    evaluate->add_option("strategy", strategy_path)->required();
    evaluate->add_option("query", query_name);

    auto* generate = app.add_subcommand("generate", "emit example models");
    generate->add_option("kind", model_arg)->required();
    generate->add_option("--seed", seed);
    generate->add_option("--states", states);
    generate->add_option("--actions", actions);
    generate->add_option("--density", density);
    generate->add_option("--rewards", rewards);
    generate->add_option("--objectives", objectives);
    generate->add_option("--weights", weights, "subset-sum weights (comma list)");
    generate->add_option("--target", target, "subset-sum target");
    generate->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed())
            return run_check(resolve_model(model_arg), query_name, parse_point(point_arg), memory,
                             memory_kind, encoding, export_lp_path, time_limit, witness_out);
        if (pareto->parsed())
            return run_pareto(resolve_model(model_arg), query_name, eps, eps_absolute, time_limit,
                              out_path, encoding);
        if (oracle->parsed())
            return run_oracle(resolve_model(model_arg), query_name, point_arg, cap, threads);
        if (evaluate->parsed())
            return run_evaluate(resolve_model(model_arg), strategy_path, query_name);
        if (generate->parsed())
            return run_generate(model_arg, seed, states, actions, density, rewards, objectives,
                                weights, target, out_path);
    } catch (const momdp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const momdp::MilpError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
