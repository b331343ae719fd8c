#include <doctest.h>

#include "momdp/milp.hpp"

#include <cmath>
#include <random>

using namespace momdp;

namespace {

// exact LP oracle: enumerate basic solutions from all n-subsets of the
// tight-candidate rows (constraints as equalities plus variable bounds)
std::optional<Rat> lp_vertex_oracle(const MilpModel& model) {
    const int n = static_cast<int>(model.vars.size());
    struct Row {
        std::vector<Rat> a;
        Rat b;
    };
    std::vector<Row> rows;          // candidate tight rows
    std::vector<Row> inequalities;  // for feasibility checking: a.x <= b
    auto expr_row = [&](const LinExpr& e) {
        std::vector<Rat> a(n, Rat(0));
        for (const auto& t : e) a[t.var] += t.coef;
        return a;
    };
    for (const auto& c : model.constraints) {
        std::vector<Rat> a = expr_row(c.expr);
        if (c.cmp == Cmp::Le || c.cmp == Cmp::Eq) inequalities.push_back({a, c.rhs});
        if (c.cmp == Cmp::Ge || c.cmp == Cmp::Eq) {
            std::vector<Rat> neg(n);
            for (int i = 0; i < n; ++i) neg[i] = -a[i];
            inequalities.push_back({neg, Rat(-c.rhs)});
        }
        rows.push_back({a, c.rhs});
    }
    for (int i = 0; i < n; ++i) {
        std::vector<Rat> lo(n, Rat(0)), hi(n, Rat(0));
        lo[i] = -1;
        hi[i] = 1;
        inequalities.push_back({lo, Rat(-model.vars[i].lower)});
        inequalities.push_back({hi, model.vars[i].upper});
        rows.push_back({hi, model.vars[i].upper});
        std::vector<Rat> lob(n, Rat(0));
        lob[i] = 1;
        rows.push_back({lob, model.vars[i].lower});
    }
    std::vector<Rat> objective(n, Rat(0));
    if (model.objective)
        for (const auto& t : *model.objective) objective[t.var] += t.coef;

    std::optional<Rat> best;
    const int r = static_cast<int>(rows.size());
    std::vector<int> idx(n);
    std::function<void(int, int)> rec = [&](int start, int chosen) {
        if (chosen == n) {
            // solve the square system
            std::vector<std::vector<Rat>> mat(n, std::vector<Rat>(n + 1));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) mat[i][j] = rows[idx[i]].a[j];
                mat[i][n] = rows[idx[i]].b;
            }
            for (int col = 0; col < n; ++col) {
                int pivot = -1;
                for (int i = col; i < n; ++i)
                    if (mat[i][col] != 0) {
                        pivot = i;
                        break;
                    }
                if (pivot < 0) return;
                std::swap(mat[col], mat[pivot]);
                Rat inv = mat[col][col];
                for (int j = col; j <= n; ++j) mat[col][j] /= inv;
                for (int i = 0; i < n; ++i) {
                    if (i == col || mat[i][col] == 0) continue;
                    Rat f = mat[i][col];
                    for (int j = col; j <= n; ++j) mat[i][j] -= f * mat[col][j];
                }
            }
            std::vector<Rat> x(n);
            for (int i = 0; i < n; ++i) x[i] = mat[i][n];
            for (const auto& ineq : inequalities) {
                Rat lhs(0);
                for (int i = 0; i < n; ++i) lhs += ineq.a[i] * x[i];
                if (lhs > ineq.b) return;
            }
            Rat value(0);
            for (int i = 0; i < n; ++i) value += objective[i] * x[i];
            if (!best || value > *best) best = value;
            return;
        }
        if (r - start < n - chosen) return;
        for (int i = start; i < r; ++i) {
            idx[chosen] = i;
            rec(i + 1, chosen + 1);
        }
    };
    rec(0, 0);
    return best;
}

}  // namespace

TEST_CASE("simplex solves toy problems") {
    MilpModel m;
    int x = m.add_continuous("x", Rat(0), Rat(1));
    m.maximize({{x, Rat(1)}});
    auto sol = lp_relax(m);
    REQUIRE(sol.status == MilpStatus::Optimal);
    CHECK(sol.value(x) == doctest::Approx(1.0));

    MilpModel m2;
    int b = m2.add_binary("b");
    int y = m2.add_continuous("y", Rat(0), Rat(10));
    m2.add_constraint({{y, Rat(1)}, {b, Rat(-10)}}, Cmp::Le, Rat(0));
    m2.add_constraint({{y, Rat(1)}}, Cmp::Ge, Rat(3));
    auto sol2 = solve(m2);
    REQUIRE(sol2.is_feasible());
    CHECK(sol2.binary_value(b) == 1);
    CHECK(sol2.value(y) >= 3 - 1e-9);
}

TEST_CASE("infeasible systems are detected") {
    MilpModel m;
    int x = m.add_continuous("x", Rat(0), Rat(1));
    m.add_constraint({{x, Rat(1)}}, Cmp::Ge, Rat(2));
    CHECK(lp_relax(m).status == MilpStatus::Infeasible);
    CHECK(solve(m).status == MilpStatus::Infeasible);
}

TEST_CASE("knapsack optimum equals exhaustive enumeration") {
    // max 3a+5b+4c+6d+2e+7f st weights <= 11
    MilpModel m;
    std::vector<int> vars;
    std::vector<int> value = {3, 5, 4, 6, 2, 7};
    std::vector<int> weight = {4, 3, 2, 5, 1, 6};
    LinExpr obj, cap;
    for (int i = 0; i < 6; ++i) {
        int b = m.add_binary("b" + std::to_string(i));
        vars.push_back(b);
        obj.push_back({b, Rat(value[i])});
        cap.push_back({b, Rat(weight[i])});
    }
    m.add_constraint(cap, Cmp::Le, Rat(11));
    m.maximize(obj);
    auto sol = solve(m);
    REQUIRE(sol.status == MilpStatus::Optimal);

    int best = 0;
    for (int mask = 0; mask < 64; ++mask) {
        int v = 0, w = 0;
        for (int i = 0; i < 6; ++i)
            if (mask >> i & 1) {
                v += value[i];
                w += weight[i];
            }
        if (w <= 11) best = std::max(best, v);
    }
    CHECK(sol.objective == doctest::Approx(best));
}

TEST_CASE("lp optimum matches exact vertex enumeration") {
    std::mt19937_64 gen(99);
    for (int round = 0; round < 25; ++round) {
        MilpModel m;
        int n = 3 + static_cast<int>(gen() % 3);
        LinExpr obj;
        for (int i = 0; i < n; ++i) {
            int v = m.add_continuous("x" + std::to_string(i), Rat(0), Rat(1 + (int)(gen() % 4)));
            obj.push_back({v, Rat((int)(gen() % 7) - 3)});
        }
        int rows = 2 + static_cast<int>(gen() % 4);
        for (int r = 0; r < rows; ++r) {
            LinExpr e;
            for (int i = 0; i < n; ++i)
                if (gen() % 2) e.push_back({i, Rat((int)(gen() % 9) - 4)});
            Cmp cmp = gen() % 2 ? Cmp::Le : Cmp::Ge;
            m.add_constraint(e, cmp, Rat((int)(gen() % 11) - 2));
        }
        m.maximize(obj);
        auto oracle = lp_vertex_oracle(m);
        MilpSolution sol;
        bool feasible = true;
        sol = lp_relax(m);
        feasible = sol.status != MilpStatus::Infeasible;
        REQUIRE(feasible == oracle.has_value());
        if (feasible) CHECK(sol.objective == doctest::Approx(to_double(*oracle)).epsilon(1e-7));
    }
}

TEST_CASE("relaxation bounds the integer optimum") {
    std::mt19937_64 gen(7);
    for (int round = 0; round < 10; ++round) {
        MilpModel m;
        LinExpr obj;
        for (int i = 0; i < 5; ++i) {
            int b = m.add_binary("b" + std::to_string(i));
            obj.push_back({b, Rat((int)(gen() % 9) - 2)});
        }
        LinExpr row;
        for (int i = 0; i < 5; ++i) row.push_back({i, Rat((int)(gen() % 5))});
        m.add_constraint(row, Cmp::Le, Rat(6));
        m.maximize(obj);
        auto milp = solve(m);
        auto relax = lp_relax(m);
        REQUIRE(milp.is_feasible());
        CHECK(relax.objective >= milp.objective - 1e-7);
    }
}

TEST_CASE("milp verdicts match exhaustive binary enumeration") {
    std::mt19937_64 gen(2024);
    for (int round = 0; round < 30; ++round) {
        MilpModel m;
        int nb = 3 + static_cast<int>(gen() % 4);
        int nc = 1 + static_cast<int>(gen() % 3);
        LinExpr obj;
        for (int i = 0; i < nb; ++i) {
            int b = m.add_binary("b" + std::to_string(i));
            obj.push_back({b, Rat((int)(gen() % 11) - 5)});
        }
        for (int i = 0; i < nc; ++i) {
            int v = m.add_continuous("x" + std::to_string(i), Rat(0), Rat(3));
            obj.push_back({v, Rat((int)(gen() % 7) - 3)});
        }
        int rows = 2 + static_cast<int>(gen() % 3);
        for (int r = 0; r < rows; ++r) {
            LinExpr e;
            for (int i = 0; i < nb + nc; ++i)
                if (gen() % 2) e.push_back({i, Rat((int)(gen() % 9) - 4)});
            m.add_constraint(e, gen() % 2 ? Cmp::Le : Cmp::Ge, Rat((int)(gen() % 9) - 2));
        }
        m.maximize(obj);

        // oracle: enumerate binaries, exact vertex LP on the continuous rest
        std::optional<Rat> best;
        for (int mask = 0; mask < (1 << nb); ++mask) {
            MilpModel leaf = m;
            for (int i = 0; i < nb; ++i) {
                leaf.vars[i].kind = VarKind::Continuous;
                leaf.vars[i].lower = (mask >> i) & 1;
                leaf.vars[i].upper = (mask >> i) & 1;
            }
            auto v = lp_vertex_oracle(leaf);
            if (v && (!best || *v > *best)) best = *v;
        }

        MilpSolution sol;
        bool threw = false;
        try {
            sol = solve(m);
        } catch (const MilpError&) {
            threw = true;
        }
        REQUIRE_FALSE(threw);
        REQUIRE((sol.status != MilpStatus::Infeasible) == best.has_value());
        if (best) CHECK(sol.objective == doctest::Approx(to_double(*best)).epsilon(1e-6));
    }
}

TEST_CASE("solves are deterministic") {
    MilpModel m;
    LinExpr obj;
    for (int i = 0; i < 6; ++i) {
        int b = m.add_binary("b" + std::to_string(i));
        obj.push_back({b, Rat(i % 3 + 1)});
    }
    LinExpr row{{0, Rat(2)}, {1, Rat(3)}, {2, Rat(1)}, {3, Rat(4)}, {4, Rat(2)}, {5, Rat(3)}};
    m.add_constraint(row, Cmp::Le, Rat(7));
    m.maximize(obj);
    auto a = solve(m);
    auto b = solve(m);
    REQUIRE(a.is_feasible());
    REQUIRE(b.is_feasible());
    CHECK(a.objective == b.objective);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("strictness epsilon helper") {
    MilpModel m;
    int x = m.add_continuous("x", Rat(0), Rat(1));
    int eps = ensure_strictness_epsilon(m);
    CHECK(ensure_strictness_epsilon(m) == eps);  // reused, not duplicated
    // x < 1 as x + eps <= 1
    m.add_constraint({{x, Rat(1)}, {eps, Rat(1)}}, Cmp::Le, Rat(1));
    auto sol = solve(m);
    REQUIRE(sol.is_feasible());
    CHECK(sol.value(eps) > 1e-6);

    // x < 0 with x in [0, 1] is strictly infeasible: optimal eps is 0
    MilpModel m2;
    int y = m2.add_continuous("y", Rat(0), Rat(1));
    int eps2 = ensure_strictness_epsilon(m2);
    m2.add_constraint({{y, Rat(1)}, {eps2, Rat(1)}}, Cmp::Le, Rat(0));
    auto sol2 = solve(m2);
    REQUIRE(sol2.is_feasible());
    CHECK(sol2.value(eps2) <= 1e-9);
}
