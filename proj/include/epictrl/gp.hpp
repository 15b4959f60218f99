#pragma once

#include <map>
#include <string>
#include <vector>

#include "epictrl/errors.hpp"

namespace epictrl {

using VarId = int;

// c * prod_v x_v^(a_v), c > 0
struct Monomial {
    double coeff = 1.0;
    std::map<VarId, double> exponents;

    Monomial() = default;
    Monomial(double c, std::map<VarId, double> e);
};

// sum of monomials (at least one term)
struct Posynomial {
    std::vector<Monomial> terms;

    Posynomial() = default;
    Posynomial(std::initializer_list<Monomial> t) : terms(t) {}
    explicit Posynomial(Monomial m) : terms{std::move(m)} {}
    Posynomial& operator+=(Monomial m) {
        terms.push_back(std::move(m));
        return *this;
    }
};

double evaluate(const Monomial& m, const std::vector<double>& x);
double evaluate(const Posynomial& p, const std::vector<double>& x);

// minimize a posynomial subject to posynomial <= 1 and monomial = 1
// constraints over positive variables
class GpProblem {
public:
    VarId add_variable(std::string name);
    int variable_count() const { return static_cast<int>(names_.size()); }
    const std::string& variable_name(VarId v) const { return names_.at(v); }

    void set_objective(Posynomial p);
    void add_ineq(Posynomial p);
    void add_eq(Monomial m);

    const Posynomial& objective() const { return objective_; }
    const std::vector<Posynomial>& ineqs() const { return ineqs_; }
    const std::vector<Monomial>& eqs() const { return eqs_; }

private:
    void check(const Monomial& m) const;
    std::vector<std::string> names_;
    Posynomial objective_{Monomial{1.0, {}}};
    std::vector<Posynomial> ineqs_;
    std::vector<Monomial> eqs_;
};

// --- log-space convex form ------------------------------------------------

// affine form a . y + b over y = log x (b = log coeff)
struct LogTerm {
    std::vector<std::pair<int, double>> a; // sorted, sparse
    double b = 0.0;
};

// log-sum-exp of affine forms; a single term degenerates to the affine itself
struct LseFunction {
    std::vector<LogTerm> terms;
    std::vector<int> support; // union of variable ids, sorted
};

struct ConvexProgram {
    int nvars = 0;
    LseFunction objective;
    std::vector<LseFunction> ineqs; // F(y) <= 0
    std::vector<LogTerm> eqs;       // a . y + b = 0
};

ConvexProgram to_convex(const GpProblem& gp);

// max-subtracted log-sum-exp evaluation at y
double evaluate_lse(const LseFunction& f, const std::vector<double>& y);

// --- solver ----------------------------------------------------------------

struct GpSolution {
    enum class Status { Optimal, Infeasible, MaxIterations };
    Status status = Status::MaxIterations;
    std::vector<double> values; // per variable, positive
    double objective_value = 0.0;
    double kkt_residual = 0.0;
    double max_violation = 0.0; // phase-I certificate when infeasible
    int newton_iterations = 0;
};

// Phase-I (minimize the maximum constraint violation) followed by log-barrier
// path following with Newton steps; barrier parameter grows x10 per stage
// until the duality-gap estimate certifies opt_tol relative accuracy.
// Deterministic: identical inputs give identical iterates.
GpSolution solve(const GpProblem& gp, double feas_tol = 1e-8, double opt_tol = 1e-6);

// optional warm start for the log-space iterate (used by callers that know a
// good interior point); values are in the original (positive) space
GpSolution solve(const GpProblem& gp, double feas_tol, double opt_tol,
                 const std::vector<double>& x0);

// --- brute-force oracle ------------------------------------------------------

struct GridResult {
    bool feasible = false;
    std::vector<double> x;
    double objective = 0.0;
};

// Exhaustive search over the log-space lattice with the given per-variable
// boxes and step (in log units). At most 4 variables.
GridResult grid_oracle(const GpProblem& gp,
                       const std::vector<std::pair<double, double>>& box,
                       double step);

} // namespace epictrl
