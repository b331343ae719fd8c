#include "momdp/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

namespace momdp {

int MilpModel::add_binary(const std::string& name) {
    MilpVar v;
    v.id = static_cast<int>(vars.size());
    v.name = name;
    v.kind = VarKind::Binary;
    v.lower = 0;
    v.upper = 1;
    vars.push_back(std::move(v));
    return vars.back().id;
}

int MilpModel::add_continuous(const std::string& name, Rat lower, Rat upper) {
    MilpVar v;
    v.id = static_cast<int>(vars.size());
    v.name = name;
    v.kind = VarKind::Continuous;
    v.lower = std::move(lower);
    v.upper = std::move(upper);
    vars.push_back(std::move(v));
    return vars.back().id;
}

void MilpModel::add_constraint(LinExpr expr, Cmp cmp, Rat rhs, const std::string& name) {
    constraints.push_back({std::move(expr), cmp, std::move(rhs), name});
}

void MilpModel::maximize(LinExpr expr) { objective = std::move(expr); }

int MilpModel::num_binaries() const {
    int n = 0;
    for (const auto& v : vars)
        if (v.kind == VarKind::Binary) ++n;
    return n;
}

void MilpModel::validate() const {
    for (const auto& v : vars)
        if (v.lower > v.upper)
            throw std::invalid_argument("variable " + v.name + " has empty bound interval");
    auto check_expr = [&](const LinExpr& e) {
        for (const auto& t : e)
            if (t.var < 0 || t.var >= static_cast<int>(vars.size()))
                throw std::invalid_argument("constraint references unknown variable");
    };
    for (const auto& c : constraints) check_expr(c.expr);
    if (objective) check_expr(*objective);
}

int MilpSolution::binary_value(int var, double int_tol) const {
    double v = assignment.at(var);
    if (std::abs(v) <= int_tol) return 0;
    if (std::abs(v - 1.0) <= int_tol) return 1;
    throw MilpError(MilpFailure::NumericalTrouble,
                    "binary variable not integral within tolerance");
}

int ensure_strictness_epsilon(MilpModel& model) {
    for (const auto& v : model.vars)
        if (v.name == "eps_strict") return v.id;
    int eps = model.add_continuous("eps_strict", Rat(0), Rat(1));
    LinExpr obj = model.objective.value_or(LinExpr{});
    obj.push_back({eps, Rat(1)});
    model.maximize(std::move(obj));
    return eps;
}

// ---------------------------------------------------------------------------
// Bounded-variable primal simplex on doubles, dense basis inverse.
// Columns: structurals, then one slack per row, then one artificial per row.
// ---------------------------------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-10;

struct LpProblem {
    int num_struct = 0;
    int num_rows = 0;
    std::vector<std::vector<double>> cols;  // column-major, one entry per row
    std::vector<double> lower, upper;
    std::vector<double> rhs;
    std::vector<double> objective;  // per column (structurals only)
};

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

class Simplex {
  public:
    Simplex(const LpProblem& p, const SolverOptions& opts, long long* iteration_budget)
        : p_(p), opts_(opts), budget_(iteration_budget), lower_(p.lower), upper_(p.upper) {}

    bool run();  // false = infeasible

    std::vector<double> structural_values() const {
        return {x_.begin(), x_.begin() + p_.num_struct};
    }

  private:
    int total_cols() const { return static_cast<int>(p_.cols.size()); }
    void set_phase_objective(bool phase1);
    void compute_basic_values();
    void refactorize();
    void iterate();

    const LpProblem& p_;
    const SolverOptions& opts_;
    long long* budget_;
    std::vector<double> lower_, upper_;  // artificials get pinned after phase 1

    std::vector<int> basis_;
    std::vector<VarState> state_;
    std::vector<double> x_;
    std::vector<std::vector<double>> binv_;
    std::vector<double> cost_;
    int stall_ = 0;
    double last_obj_ = -kInf;
};

void Simplex::set_phase_objective(bool phase1) {
    cost_.assign(total_cols(), 0.0);
    if (!phase1) {
        for (int j = 0; j < total_cols(); ++j) cost_[j] = p_.objective[j];
    } else {
        // maximize -(sum of artificial magnitudes)
        for (int j = p_.num_struct + p_.num_rows; j < total_cols(); ++j)
            cost_[j] = upper_[j] == 0 ? 1.0 : -1.0;
    }
    last_obj_ = -kInf;
    stall_ = 0;
}

void Simplex::compute_basic_values() {
    std::vector<double> r = p_.rhs;
    for (int j = 0; j < total_cols(); ++j) {
        if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
        for (int i = 0; i < p_.num_rows; ++i) r[i] -= p_.cols[j][i] * x_[j];
    }
    for (int i = 0; i < p_.num_rows; ++i) {
        double v = 0;
        for (int k = 0; k < p_.num_rows; ++k) v += binv_[i][k] * r[k];
        x_[basis_[i]] = v;
    }
}

void Simplex::refactorize() {
    const int m = p_.num_rows;
    std::vector<std::vector<double>> a(m, std::vector<double>(2 * m, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int r = 0; r < m; ++r) a[r][i] = p_.cols[basis_[i]][r];
        a[i][m + i] = 1.0;
    }
    for (int col = 0; col < m; ++col) {
        int pivot = -1;
        double best = kPivotTol;
        for (int r = col; r < m; ++r)
            if (std::abs(a[r][col]) > best) {
                best = std::abs(a[r][col]);
                pivot = r;
            }
        if (pivot < 0)
            throw MilpError(MilpFailure::NumericalTrouble, "singular basis during refactorize");
        std::swap(a[col], a[pivot]);
        double inv = 1.0 / a[col][col];
        for (int c = 0; c < 2 * m; ++c) a[col][c] *= inv;
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            double f = a[r][col];
            if (f == 0.0) continue;
            for (int c = 0; c < 2 * m; ++c) a[r][c] -= f * a[col][c];
        }
    }
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) binv_[i][k] = a[i][m + k];
    compute_basic_values();
}

void Simplex::iterate() {
    const int m = p_.num_rows;
    const int n = total_cols();
    int since_refactor = 0;

    while (true) {
        if (--(*budget_) < 0)
            throw MilpError(MilpFailure::IterationLimit, "simplex iteration limit exceeded");

        std::vector<double> y(m, 0.0);
        for (int i = 0; i < m; ++i) {
            double cb = cost_[basis_[i]];
            if (cb == 0.0) continue;
            for (int k = 0; k < m; ++k) y[k] += cb * binv_[i][k];
        }

        double obj_now = 0;
        for (int j = 0; j < n; ++j)
            if (cost_[j] != 0.0) obj_now += cost_[j] * x_[j];
        if (obj_now > last_obj_ + 1e-12) {
            stall_ = 0;
            last_obj_ = obj_now;
        } else {
            ++stall_;
        }
        const bool bland = stall_ > 2 * (m + n) + 16;

        int entering = -1;
        double best_score = 0;
        for (int j = 0; j < n; ++j) {
            if (state_[j] == VarState::Basic || lower_[j] == upper_[j]) continue;
            double d = cost_[j];
            for (int i = 0; i < m; ++i)
                if (p_.cols[j][i] != 0.0) d -= y[i] * p_.cols[j][i];
            bool eligible = (state_[j] == VarState::AtLower && d > 1e-9) ||
                            (state_[j] == VarState::AtUpper && d < -1e-9);
            if (!eligible) continue;
            if (bland) {
                entering = j;
                break;
            }
            if (std::abs(d) > best_score) {
                best_score = std::abs(d);
                entering = j;
            }
        }
        if (entering < 0) return;  // phase optimal

        const double dir = state_[entering] == VarState::AtLower ? 1.0 : -1.0;
        std::vector<double> w(m, 0.0);  // B^-1 A_e
        for (int i = 0; i < m; ++i) {
            double v = 0;
            for (int k = 0; k < m; ++k) v += binv_[i][k] * p_.cols[entering][k];
            w[i] = v;
        }

        // ratio test: largest step keeping basics inside bounds, capped by the
        // entering variable's own bound-flip distance
        double best_t = upper_[entering] - lower_[entering];  // may be +inf
        int leaving_row = -1;
        for (int i = 0; i < m; ++i) {
            double delta = -w[i] * dir;  // change of basic i per unit step
            int bj = basis_[i];
            double t;
            if (delta < -kPivotTol) {
                if (lower_[bj] == -kInf) continue;
                t = (lower_[bj] - x_[bj]) / delta;
            } else if (delta > kPivotTol) {
                if (upper_[bj] == kInf) continue;
                t = (upper_[bj] - x_[bj]) / delta;
            } else {
                continue;
            }
            if (t < 0) t = 0;  // numerical drift
            if (t < best_t - 1e-12) {
                best_t = t;
                leaving_row = i;
            } else if (leaving_row >= 0 && t <= best_t + 1e-12 && bj < basis_[leaving_row]) {
                leaving_row = i;  // deterministic tie break by variable index
            }
        }

        if (best_t == kInf || best_t > 1e30)
            throw MilpError(MilpFailure::NumericalTrouble, "unbounded simplex ray");

        for (int i = 0; i < m; ++i) x_[basis_[i]] -= w[i] * dir * best_t;
        x_[entering] += dir * best_t;

        if (leaving_row < 0) {  // bound flip
            state_[entering] =
                state_[entering] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
            x_[entering] = state_[entering] == VarState::AtLower ? lower_[entering]
                                                                 : upper_[entering];
            continue;
        }

        int leaving = basis_[leaving_row];
        double delta_leaving = -w[leaving_row] * dir;
        state_[leaving] = delta_leaving < 0 ? VarState::AtLower : VarState::AtUpper;
        x_[leaving] = delta_leaving < 0 ? lower_[leaving] : upper_[leaving];
        basis_[leaving_row] = entering;
        state_[entering] = VarState::Basic;

        double piv = w[leaving_row];
        if (std::abs(piv) < kPivotTol) {
            refactorize();
            continue;
        }
        for (int k = 0; k < m; ++k) binv_[leaving_row][k] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == leaving_row) continue;
            double f = w[i];
            if (f == 0.0) continue;
            for (int k = 0; k < m; ++k) binv_[i][k] -= f * binv_[leaving_row][k];
        }
        if (++since_refactor >= 128) {
            refactorize();
            since_refactor = 0;
        }
    }
}

bool Simplex::run() {
    const int m = p_.num_rows;
    const int n = total_cols();
    basis_.resize(m);
    state_.assign(n, VarState::AtLower);
    x_.assign(n, 0.0);
    binv_.assign(m, std::vector<double>(m, 0.0));

    for (int j = 0; j < p_.num_struct + m; ++j) {
        if (lower_[j] != -kInf) {
            state_[j] = VarState::AtLower;
            x_[j] = lower_[j];
        } else {
            state_[j] = VarState::AtUpper;
            x_[j] = upper_[j];
        }
    }
    for (int i = 0; i < m; ++i) {
        int aj = p_.num_struct + m + i;
        basis_[i] = aj;
        state_[aj] = VarState::Basic;
        binv_[i][i] = 1.0;
    }
    compute_basic_values();

    if (m > 0) {
        set_phase_objective(true);
        iterate();
        double infeasibility = 0;
        for (int i = 0; i < m; ++i) infeasibility += std::abs(x_[p_.num_struct + m + i]);
        if (infeasibility > opts_.feasibility_tol * std::max(1, m)) return false;
        // pin artificials at zero so phase 2 cannot reuse them
        for (int j = p_.num_struct + m; j < n; ++j) {
            lower_[j] = 0;
            upper_[j] = 0;
            if (state_[j] != VarState::Basic) {
                state_[j] = VarState::AtLower;
                x_[j] = 0;
            }
        }
    }

    set_phase_objective(false);
    iterate();
    return true;
}

LpProblem build_problem(const MilpModel& model, const std::vector<Rat>& lower,
                        const std::vector<Rat>& upper) {
    LpProblem p;
    p.num_struct = static_cast<int>(model.vars.size());
    p.num_rows = static_cast<int>(model.constraints.size());
    const int m = p.num_rows;
    const int total = p.num_struct + 2 * m;
    p.cols.assign(total, std::vector<double>(m, 0.0));
    p.lower.assign(total, 0.0);
    p.upper.assign(total, 0.0);
    p.objective.assign(total, 0.0);
    p.rhs.assign(m, 0.0);

    for (int j = 0; j < p.num_struct; ++j) {
        p.lower[j] = to_double(lower[j]);
        p.upper[j] = to_double(upper[j]);
    }
    for (int i = 0; i < m; ++i) {
        const auto& c = model.constraints[i];
        for (const auto& t : c.expr) p.cols[t.var][i] += to_double(t.coef);
        p.rhs[i] = to_double(c.rhs);
        int slack = p.num_struct + i;
        p.cols[slack][i] = 1.0;
        switch (c.cmp) {
            case Cmp::Le:
                p.lower[slack] = 0;
                p.upper[slack] = kInf;
                break;
            case Cmp::Ge:
                p.lower[slack] = -kInf;
                p.upper[slack] = 0;
                break;
            case Cmp::Eq:
                p.lower[slack] = 0;
                p.upper[slack] = 0;
                break;
        }
    }
    if (model.objective)
        for (const auto& t : *model.objective) p.objective[t.var] += to_double(t.coef);

    for (int i = 0; i < m; ++i) {
        double residual = p.rhs[i];
        for (int j = 0; j < p.num_struct + m; ++j) {
            double start = p.lower[j] != -kInf ? p.lower[j] : p.upper[j];
            if (start != 0.0 && p.cols[j][i] != 0.0) residual -= p.cols[j][i] * start;
        }
        int aj = p.num_struct + m + i;
        p.cols[aj][i] = 1.0;
        if (residual >= 0) {
            p.lower[aj] = 0;
            p.upper[aj] = kInf;
        } else {
            p.lower[aj] = -kInf;
            p.upper[aj] = 0;
        }
    }
    return p;
}

struct LpResult {
    bool feasible = false;
    double objective = 0;
    std::vector<double> values;
};

LpResult solve_lp(const MilpModel& model, const std::vector<Rat>& lower,
                  const std::vector<Rat>& upper, const SolverOptions& opts, long long* budget) {
    LpProblem p = build_problem(model, lower, upper);
    Simplex simplex(p, opts, budget);
    LpResult res;
    if (!simplex.run()) return res;
    res.feasible = true;
    res.values = simplex.structural_values();
    if (model.objective)
        for (const auto& t : *model.objective)
            res.objective += to_double(t.coef) * res.values[t.var];
    return res;
}

double residual_norm(const MilpModel& model, const std::vector<double>& values) {
    double worst = 0;
    for (const auto& c : model.constraints) {
        double lhs = 0;
        for (const auto& t : c.expr) lhs += to_double(t.coef) * values[t.var];
        double rhs = to_double(c.rhs);
        double v = 0;
        switch (c.cmp) {
            case Cmp::Le: v = lhs - rhs; break;
            case Cmp::Ge: v = rhs - lhs; break;
            case Cmp::Eq: v = std::abs(lhs - rhs); break;
        }
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace

MilpSolution lp_relax(const MilpModel& model, const SolverOptions& opts) {
    model.validate();
    std::vector<Rat> lower, upper;
    for (const auto& v : model.vars) {
        lower.push_back(v.lower);
        upper.push_back(v.upper);
    }
    long long budget = opts.iteration_limit;
    LpResult res = solve_lp(model, lower, upper, opts, &budget);
    MilpSolution sol;
    sol.simplex_iterations = opts.iteration_limit - budget;
    if (!res.feasible) {
        sol.status = MilpStatus::Infeasible;
        return sol;
    }
    sol.status = model.objective ? MilpStatus::Optimal : MilpStatus::Feasible;
    sol.assignment = res.values;
    sol.objective = res.objective;
    return sol;
}

MilpSolution solve(const MilpModel& model, const SolverOptions& opts) {
    model.validate();
    const auto start_time = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        if (opts.time_limit_seconds <= 0) return false;
        std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_time;
        return elapsed.count() > opts.time_limit_seconds;
    };

    std::vector<int> binaries;
    for (const auto& v : model.vars)
        if (v.kind == VarKind::Binary) binaries.push_back(v.id);

    std::vector<Rat> base_lower, base_upper;
    for (const auto& v : model.vars) {
        base_lower.push_back(v.lower);
        base_upper.push_back(v.upper);
    }

    struct Node {
        std::vector<std::pair<int, int>> fixings;
        double bound;
        long long id;
    };
    struct NodeOrder {
        bool operator()(const Node& a, const Node& b) const {
            if (a.bound != b.bound) return a.bound < b.bound;  // best bound first
            return a.id > b.id;                                // then creation order
        }
    };
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long long next_id = 0;
    long long budget = opts.iteration_limit;
    long long nodes = 0;

    open.push({{}, kInf, next_id++});

    bool have_incumbent = false;
    double incumbent_obj = -kInf;
    std::vector<double> incumbent_values;
    const bool feasibility_only = !model.objective.has_value();

    auto lp_with = [&](const std::vector<std::pair<int, int>>& fixings) {
        std::vector<Rat> lo = base_lower, up = base_upper;
        for (const auto& [var, val] : fixings) {
            lo[var] = val;
            up[var] = val;
        }
        return solve_lp(model, lo, up, opts, &budget);
    };

    while (!open.empty()) {
        if (out_of_time())
            throw MilpError(MilpFailure::TimeLimit, "time limit in branch and bound");
        Node node = open.top();
        open.pop();
        if (have_incumbent && node.bound <= incumbent_obj + 1e-9) continue;
        if (++nodes > opts.node_limit)
            throw MilpError(MilpFailure::NodeLimit, "node limit in branch and bound");

        LpResult res = lp_with(node.fixings);
        if (!res.feasible) continue;
        if (have_incumbent && res.objective <= incumbent_obj + 1e-9) continue;

        int frac = -1;
        for (int b : binaries) {
            double v = res.values[b];
            if (std::abs(v - std::round(v)) > opts.integrality_tol) {
                frac = b;
                break;
            }
        }
        if (frac < 0) {
            // integral candidate: pin every binary to its rounded value and
            // re-solve so the continuous part is consistent with the rounding
            std::vector<std::pair<int, int>> pinned = node.fixings;
            std::vector<bool> done(model.vars.size(), false);
            for (const auto& [var, val] : pinned) done[var] = true;
            for (int b : binaries)
                if (!done[b]) pinned.emplace_back(b, static_cast<int>(std::round(res.values[b])));
            LpResult fixed = lp_with(pinned);
            if (fixed.feasible && residual_norm(model, fixed.values) <= opts.feasibility_tol * 16) {
                if (!have_incumbent || fixed.objective > incumbent_obj + 1e-9) {
                    have_incumbent = true;
                    incumbent_obj = fixed.objective;
                    incumbent_values = fixed.values;
                    if (feasibility_only) break;
                }
                continue;
            }
            // rounding failed; branch explicitly on the first unbranched binary
            std::vector<bool> branched(model.vars.size(), false);
            for (const auto& [var, val] : node.fixings) branched[var] = true;
            for (int b : binaries)
                if (!branched[b]) {
                    frac = b;
                    break;
                }
            if (frac < 0) continue;
        }
        for (int val : {1, 0}) {
            Node child;
            child.fixings = node.fixings;
            child.fixings.emplace_back(frac, val);
            child.bound = res.objective;
            child.id = next_id++;
            open.push(std::move(child));
        }
    }

    MilpSolution sol;
    sol.nodes = nodes;
    sol.simplex_iterations = opts.iteration_limit - budget;
    if (!have_incumbent) {
        sol.status = MilpStatus::Infeasible;
        return sol;
    }
    sol.status = feasibility_only ? MilpStatus::Feasible : MilpStatus::Optimal;
    sol.assignment = incumbent_values;
    sol.objective = incumbent_obj;
    return sol;
}

}  // namespace momdp
