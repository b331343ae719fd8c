#pragma once

#include "momdp/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace momdp {

enum class VarKind { Binary, Continuous };

struct MilpVar {
    int id = 0;
    std::string name;
    VarKind kind = VarKind::Continuous;
    Rat lower{0};
    Rat upper{0};  // binaries carry [0,1]
};

struct LinTerm {
    int var;
    Rat coef;
};
using LinExpr = std::vector<LinTerm>;

enum class Cmp { Le, Eq, Ge };

struct MilpConstraint {
    LinExpr expr;
    Cmp cmp = Cmp::Le;
    Rat rhs{0};
    std::string name;
};

struct MilpModel {
    std::vector<MilpVar> vars;
    std::vector<MilpConstraint> constraints;
    std::optional<LinExpr> objective;  // maximized when present

    int add_binary(const std::string& name);
    int add_continuous(const std::string& name, Rat lower, Rat upper);
    void add_constraint(LinExpr expr, Cmp cmp, Rat rhs, const std::string& name = "");
    void maximize(LinExpr expr);

    int num_binaries() const;
    void validate() const;  // finite bounds, known variable ids
};

enum class MilpStatus { Optimal, Feasible, Infeasible };

struct MilpSolution {
    MilpStatus status = MilpStatus::Infeasible;
    std::vector<double> assignment;  // indexed by variable id, empty when infeasible
    double objective = 0.0;
    long long nodes = 0;
    long long simplex_iterations = 0;

    bool is_feasible() const { return status != MilpStatus::Infeasible; }
    double value(int var) const { return assignment.at(var); }
    // Rounded binary value; throws if not within the integrality tolerance.
    int binary_value(int var, double int_tol = 1e-6) const;
};

struct SolverOptions {
    double feasibility_tol = 1e-9;
    double integrality_tol = 1e-6;
    long long node_limit = 2000000;
    long long iteration_limit = 100000000;
    double time_limit_seconds = 0;  // 0: no limit

    SolverOptions tightened() const {
        SolverOptions o = *this;
        o.feasibility_tol /= 100;
        o.integrality_tol /= 100;
        return o;
    }
};

enum class MilpFailure { IterationLimit, NodeLimit, TimeLimit, NumericalTrouble };

class MilpError : public std::runtime_error {
  public:
    MilpError(MilpFailure failure, const std::string& message)
        : std::runtime_error(message), failure_(failure) {}
    MilpFailure failure() const { return failure_; }

  private:
    MilpFailure failure_;
};

// Branch-and-bound over the bounded-variable simplex. Deterministic:
// best-bound node selection with creation-order tie break, branching on the
// lowest-index fractional binary, value 1 explored first.
MilpSolution solve(const MilpModel& model, const SolverOptions& opts = {});

// Continuous relaxation (binaries relaxed to [0,1]).
MilpSolution lp_relax(const MilpModel& model, const SolverOptions& opts = {});

// Support for strict inequalities: returns the model's dedicated slack
// variable (creating it on first use, with bounds [0,1]) and makes the
// objective maximize it. Callers encode a < b as a + eps <= b and treat the
// system as strictly feasible only when the solved eps is positive.
int ensure_strictness_epsilon(MilpModel& model);

}  // namespace momdp
