#include "momdp/pareto.hpp"

#include <algorithm>
#include <chrono>
#include <deque>

namespace momdp {

namespace {

Rat dot(const Vec& a, const Vec& b) {
    Rat s(0);
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vec oriented_coords(const Query& q, const Point& p) {
    Vec out;
    for (int j = 0; j < q.dimension(); ++j) {
        const Rat& v = p.coords[j].value();
        out.push_back(q.objectives[j].maximizing() ? v : Rat(-v));
    }
    return out;
}

bool leq(const Vec& a, const Vec& b) {
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

}  // namespace

Vec ParetoApprox::oriented(const Query& q, int index) const {
    return oriented_coords(q, found[index].point);
}

std::vector<Vec> clip_polygon(const std::vector<Vec>& polygon, const Halfspace& h) {
    if (polygon.empty()) return {};
    std::vector<Vec> out;
    const size_t n = polygon.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec& cur = polygon[i];
        const Vec& nxt = polygon[(i + 1) % n];
        Rat dc = h.offset - dot(h.normal, cur);
        Rat dn = h.offset - dot(h.normal, nxt);
        if (dc >= 0) out.push_back(cur);
        if ((dc >= 0) != (dn >= 0)) {
            Rat t = dc / (dc - dn);
            Vec mid(cur.size());
            for (size_t k = 0; k < cur.size(); ++k) mid[k] = cur[k] + t * (nxt[k] - cur[k]);
            out.push_back(std::move(mid));
        }
    }
    // drop duplicate consecutive vertices
    std::vector<Vec> dedup;
    for (const auto& v : out)
        if (dedup.empty() || dedup.back() != v) dedup.push_back(v);
    while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
    if (dedup.size() < 3 || polygon_area_twice(dedup) == 0) return {};
    return dedup;
}

Rat polygon_area_twice(const std::vector<Vec>& polygon) {
    Rat area(0);
    const size_t n = polygon.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec& a = polygon[i];
        const Vec& b = polygon[(i + 1) % n];
        area += a[0] * b[1] - b[0] * a[1];
    }
    return area < 0 ? Rat(-area) : area;
}

Vec choose_direction(const Region& region) {
    if (region.anchor_a.size() == 2 && region.anchor_b.size() == 2) {
        Rat w1 = region.anchor_a[1] - region.anchor_b[1];
        Rat w2 = region.anchor_b[0] - region.anchor_a[0];
        if (w1 < 0) w1 = 0;
        if (w2 < 0) w2 = 0;
        Rat norm = w1 + w2;
        if (norm > 0) return {w1 / norm, w2 / norm};
    }
    size_t dim = region.anchor_a.empty() ? 2 : region.anchor_a.size();
    return Vec(dim, Rat(1, static_cast<long long>(dim)));
}

namespace {

std::vector<Halfspace> region_halfspaces(const Region& region) {
    if (!region.vertices.empty()) {
        // CCW polygon edges as inner halfspaces
        std::vector<Halfspace> rows;
        const size_t n = region.vertices.size();
        Rat orient = 0;
        for (size_t i = 0; i < n; ++i) {
            const Vec& a = region.vertices[i];
            const Vec& b = region.vertices[(i + 1) % n];
            orient += a[0] * b[1] - b[0] * a[1];
        }
        Rat flip = orient >= 0 ? Rat(1) : Rat(-1);
        for (size_t i = 0; i < n; ++i) {
            const Vec& a = region.vertices[i];
            const Vec& b = region.vertices[(i + 1) % n];
            // inward normal for CCW: (-(b1-a1... outward = (dy, -dx); inner: n.x <= c
            Vec normal{flip * (b[1] - a[1]), flip * (a[0] - b[0])};
            rows.push_back({normal, dot(normal, a)});
        }
        return rows;
    }
    return region.bounds;
}

struct SolveContext {
    const Mdp* original = nullptr;
    const Query* original_query = nullptr;
    AchievabilityEncoding enc;
    SolverOptions solver;
    long long solves = 0;
};

RegionOptimum solve_region(SolveContext& ctx, const Region& region, const Vec& w) {
    const Query& q = *ctx.original_query;
    MilpModel model = ctx.enc.art.model;

    LinExpr objective;
    for (int j = 0; j < q.dimension(); ++j) {
        const ObjectiveTerm& term = ctx.enc.art.objective_terms[j];
        if (term.var >= 0 && w[j] != 0) objective.push_back({term.var, w[j] * term.sign});
    }
    model.maximize(std::move(objective));

    for (const auto& h : region_halfspaces(region)) {
        LinExpr row;
        Rat rhs = h.offset;
        for (int j = 0; j < q.dimension(); ++j) {
            if (h.normal[j] == 0) continue;
            const ObjectiveTerm& term = ctx.enc.art.objective_terms[j];
            if (term.var >= 0)
                row.push_back({term.var, h.normal[j] * term.sign});
            else
                rhs -= h.normal[j] * term.offset;
        }
        model.add_constraint(std::move(row), Cmp::Le, rhs, "region");
    }

    RegionOptimum out;
    ctx.solves++;
    MilpSolution sol = solve(model, ctx.solver);
    if (!sol.is_feasible()) return out;

    PureStationaryStrategy local;
    {
        // strategy variables live in the shared prefix of the model
        EncodingArtifacts view;
        view.action_var = ctx.enc.art.action_var;
        local = extract_strategy(view, sol);
    }
    PureStationaryStrategy sigma = lift_to_original(ctx.enc, local, *ctx.original);
    out.feasible = true;
    out.point.coords = evaluate_strategy_query(*ctx.original, sigma, q);
    out.strategy = std::move(sigma);

    // certified cut: the largest w.x over the region's part of the witness
    // closure; equals the solver optimum when the solve was exact
    Vec t = oriented_coords(q, out.point);
    if (!region.vertices.empty()) {
        std::vector<Vec> part = region.vertices;
        for (int j = 0; j < q.dimension() && !part.empty(); ++j) {
            Vec axis(q.dimension(), Rat(0));
            axis[j] = 1;
            part = clip_polygon(part, {axis, t[j]});
        }
        if (!part.empty()) {
            Rat best = dot(w, part[0]);
            for (const auto& v : part) best = std::max(best, dot(w, v));
            out.cut = best;
            return out;
        }
    }
    out.cut = dot(w, t);
    return out;
}

}  // namespace

RegionOptimum optimize_in_region(const Mdp& m, const Query& q, const Region& region,
                                 const Vec& w, const ParetoOptions& opts) {
    SolveContext ctx;
    ctx.original = &m;
    ctx.original_query = &q;
    ctx.enc = build_region_encoding(m, q, opts.flavor);
    ctx.solver = opts.solver;
    return solve_region(ctx, region, w);
}

RegionSplit split_region(const Region& region, const Vec& t, const Vec& w, const Rat& cut,
                         const Vec& eps, long long* next_id) {
    RegionSplit out;
    out.unachievable = {w, cut};

    std::vector<Vec> below = clip_polygon(region.vertices, {w, cut});
    {
        std::vector<Vec> ach = below;
        for (int j = 0; j < 2 && !ach.empty(); ++j) {
            Vec axis{Rat(0), Rat(0)};
            axis[j] = 1;
            ach = clip_polygon(ach, {axis, t[j]});
        }
        out.achievable_part = std::move(ach);
    }

    // right piece: first coordinate beyond the found point by at least eps
    {
        Vec axis{Rat(-1), Rat(0)};
        std::vector<Vec> piece = clip_polygon(below, {axis, Rat(-(t[0] + eps[0]))});
        if (!piece.empty()) {
            Region r;
            r.vertices = std::move(piece);
            r.anchor_a = t;
            r.anchor_b = region.anchor_b;
            r.id = (*next_id)++;
            out.candidates.push_back(std::move(r));
        }
    }
    // upper piece: second coordinate beyond the found point
    {
        Vec axis{Rat(0), Rat(-1)};
        std::vector<Vec> piece = clip_polygon(below, {axis, Rat(-(t[1] + eps[1]))});
        piece = clip_polygon(piece, {{Rat(1), Rat(0)}, t[0] + eps[0]});
        if (!piece.empty()) {
            Region r;
            r.vertices = std::move(piece);
            r.anchor_a = region.anchor_a;
            r.anchor_b = t;
            r.id = (*next_id)++;
            out.candidates.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<std::pair<Rat, Rat>> compute_objective_ranges(const Mdp& m, const Query& q,
                                                          const ParetoOptions& opts) {
    SolveContext ctx;
    ctx.original = &m;
    ctx.original_query = &q;
    ctx.enc = build_region_encoding(m, q, opts.flavor);
    ctx.solver = opts.solver;

    std::vector<std::pair<Rat, Rat>> out;
    Region everything;  // no membership rows
    for (int j = 0; j < q.dimension(); ++j) {
        Vec w(q.dimension(), Rat(0));
        w[j] = 1;
        RegionOptimum hi = solve_region(ctx, everything, w);
        w[j] = -1;
        RegionOptimum lo = solve_region(ctx, everything, w);
        if (!hi.feasible || !lo.feasible)
            throw Error(ErrorKind::BadInput, "objective range solve failed");
        Rat a = oriented_coords(q, lo.point)[j];
        Rat b = oriented_coords(q, hi.point)[j];
        out.emplace_back(std::min(a, b), std::max(a, b));
    }
    return out;
}

namespace {

struct Work {
    Region region;
    Vec direction;  // used for dimensions != 2
};

}  // namespace

ParetoApprox approximate_pareto(const Mdp& m, const Query& q, const Vec& eps,
                                const ParetoOptions& opts) {
    const int dim = q.dimension();
    if (static_cast<int>(eps.size()) != dim)
        throw Error(ErrorKind::DimensionMismatch, "eps dimension mismatch");
    for (const auto& e : eps)
        if (e <= 0) throw Error(ErrorKind::BadInput, "eps must be positive");

    const auto start_time = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        if (opts.time_limit_seconds <= 0) return false;
        std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_time;
        return elapsed.count() > opts.time_limit_seconds;
    };

    SolveContext ctx;
    ctx.original = &m;
    ctx.original_query = &q;
    ctx.enc = build_region_encoding(m, q, opts.flavor);
    ctx.solver = opts.solver;

    ParetoApprox res;
    res.eps = eps;

    // oriented-space box from per-objective value upper bounds
    long long grid = 4;
    for (int j = 0; j < dim; ++j) {
        const Objective& obj = q.objectives[j];
        ObjectiveStateSets sets = compute_zero_states(m, obj);
        std::vector<Rat> u = compute_reward_upper_bounds(m, obj, sets);
        Rat top = sets.maybe.count(m.initial) ? u[m.initial] : Rat(0);
        if (obj.maximizing())
            res.box.emplace_back(Rat(0), top);
        else
            res.box.emplace_back(Rat(-top), Rat(0));
        Rat cells = top / eps[j] + 2;
        grid *= std::min<long long>(cells.convert_to<long long>() + 1, 4096);
        grid = std::min<long long>(grid, 1000000);
    }
    const long long max_iterations = opts.max_iterations > 0 ? opts.max_iterations : grid;

    auto add_found = [&](const RegionOptimum& opt) {
        for (const auto& f : res.found)
            if (dominates(q, f.point, opt.point)) return;  // dominated or duplicate
        std::vector<ParetoFoundPoint> kept;
        for (auto& f : res.found)
            if (!dominates(q, opt.point, f.point)) kept.push_back(std::move(f));
        kept.push_back({opt.point, opt.strategy});
        res.found = std::move(kept);
    };

    if (dim == 1) {
        Region everything;
        RegionOptimum best = solve_region(ctx, everything, {Rat(1)});
        if (best.feasible) add_found(best);
        res.milp_solves = ctx.solves;
        return res;
    }

    if (dim == 2) {
        long long next_id = 0;
        std::deque<Region> work;
        {
            Region box;
            const auto& [lo1, hi1] = res.box[0];
            const auto& [lo2, hi2] = res.box[1];
            box.vertices = {{lo1, lo2}, {hi1, lo2}, {hi1, hi2}, {lo1, hi2}};
            if (polygon_area_twice(box.vertices) == 0) {
                // degenerate box: a single optimizing solve settles the line
                Region line;
                line.bounds = {};
                RegionOptimum opt = solve_region(ctx, line, {Rat(1, 2), Rat(1, 2)});
                if (opt.feasible) add_found(opt);
                res.milp_solves = ctx.solves;
                return res;
            }
            box.anchor_a = {lo1, hi2};
            box.anchor_b = {hi1, lo2};
            box.id = next_id++;
            work.push_back(std::move(box));
        }

        long long iterations = 0;
        while (!work.empty()) {
            if (out_of_time() || ++iterations > max_iterations) {
                res.complete = false;
                for (auto& r : work) res.candidates.push_back(std::move(r));
                break;
            }
            // largest-area first
            auto best_it = work.begin();
            Rat best_area = polygon_area_twice(best_it->vertices);
            for (auto it = std::next(work.begin()); it != work.end(); ++it) {
                Rat area = polygon_area_twice(it->vertices);
                if (area > best_area) {
                    best_area = area;
                    best_it = it;
                }
            }
            Region region = std::move(*best_it);
            work.erase(best_it);

            // skip regions below an already-found point's closure
            Vec ideal{region.vertices[0][0], region.vertices[0][1]};
            for (const auto& v : region.vertices) {
                ideal[0] = std::max(ideal[0], v[0]);
                ideal[1] = std::max(ideal[1], v[1]);
            }
            bool covered = false;
            for (size_t i = 0; i < res.found.size() && !covered; ++i)
                if (leq(ideal, res.oriented(q, i))) covered = true;
            if (covered) continue;

            Vec w = choose_direction(region);
            RegionOptimum opt = solve_region(ctx, region, w);
            if (!opt.feasible) {
                res.unachievable.push_back(region.vertices);
                continue;
            }
            add_found(opt);
            Vec t = oriented_coords(q, opt.point);
            RegionSplit split = split_region(region, t, w, opt.cut, eps, &next_id);
            {
                std::vector<Vec> cut_part =
                    clip_polygon(region.vertices, {{-w[0], -w[1]}, Rat(-opt.cut)});
                if (!cut_part.empty()) res.unachievable.push_back(std::move(cut_part));
            }
            for (auto& piece : split.candidates) work.push_back(std::move(piece));
        }
        res.milp_solves = ctx.solves;
        return res;
    }

    // three or more objectives: halfspace regions, most-recent first
    long long next_id = 0;
    std::vector<Work> stack;
    {
        Work root;
        for (int j = 0; j < dim; ++j) {
            Vec lo(dim, Rat(0)), hi(dim, Rat(0));
            hi[j] = 1;
            root.region.bounds.push_back({hi, res.box[j].second});
            lo[j] = -1;
            root.region.bounds.push_back({lo, Rat(-res.box[j].first)});
        }
        root.region.id = next_id++;
        Rat norm(0);
        root.direction.assign(dim, Rat(0));
        for (int j = 0; j < dim; ++j) {
            Rat range = res.box[j].second - res.box[j].first;
            root.direction[j] = range > 0 ? Rat(1) / range : Rat(1);
            norm += root.direction[j];
        }
        for (auto& d : root.direction) d /= norm;
        stack.push_back(std::move(root));
    }
    long long iterations = 0;
    while (!stack.empty()) {
        if (out_of_time() || ++iterations > max_iterations) {
            res.complete = false;
            for (auto& wk : stack) res.candidates.push_back(std::move(wk.region));
            break;
        }
        Work wk = std::move(stack.back());
        stack.pop_back();
        RegionOptimum opt = solve_region(ctx, wk.region, wk.direction);
        if (!opt.feasible) continue;
        add_found(opt);
        Vec t = oriented_coords(q, opt.point);
        for (int j = 0; j < dim; ++j) {
            Work piece;
            piece.region = wk.region;
            piece.region.bounds.push_back({wk.direction, opt.cut});
            Vec axis(dim, Rat(0));
            axis[j] = -1;
            piece.region.bounds.push_back({axis, Rat(-(t[j] + eps[j]))});
            piece.region.id = next_id++;
            piece.direction = wk.direction;
            stack.push_back(std::move(piece));
        }
    }
    res.milp_solves = ctx.solves;
    return res;
}

ParetoApprox approximate_pareto_relative(const Mdp& m, const Query& q, double eps,
                                         const ParetoOptions& opts) {
    auto ranges = compute_objective_ranges(m, q, opts);
    Rat factor = parse_rational(std::to_string(eps));
    Vec abs_eps;
    for (const auto& [lo, hi] : ranges) {
        Rat delta = hi - lo;
        if (delta <= 0) delta = 1;  // flat objective: any positive tolerance works
        abs_eps.push_back(factor * delta);
    }
    return approximate_pareto(m, q, abs_eps, opts);
}

}  // namespace momdp
