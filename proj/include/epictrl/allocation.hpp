#pragma once

#include <Eigen/Dense>
#include <optional>

#include "epictrl/gp.hpp"
#include "epictrl/spectral.hpp"
#include "epictrl/temporal.hpp"

namespace epictrl {

enum class CostKind { InfectionF, RecoveryG, CuttingH };

// One-parameter cost family, normalized so that natural rates cost 0:
//   f(beta) = c1 + c2 / beta^q          f(lower) = 1/2, f(upper) = 0
//   g(delta) = c3 + c4 / (hat-delta)^r  g(lower) = 0,   g(upper) = 1/2
//   h(phi)  = c5 + c6 / (hat-phi)^s     h(lower) = 0,   h(upper) = 1
// hat is required (and must exceed upper) for the g and h kinds.
class CostModel {
public:
    static CostModel normalize(CostKind kind, double shape, double hat, double lower,
                               double upper);

    CostKind kind() const { return kind_; }
    double shape() const { return shape_; }
    double hat() const { return hat_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    double cost(double rate) const;
    // inverse of cost on the feasible interval (costs are strictly monotone)
    double rate_for_cost(double cost) const;

    // GP bookkeeping: cost = constant_offset + positive_coeff * z^(-shape),
    // where z = beta for f and z = hat - rate for g/h
    double positive_coeff() const { return c_pos_; }
    double constant_offset() const { return c_off_; }

private:
    CostKind kind_;
    double shape_, hat_, lower_, upper_, c_pos_, c_off_;
};

struct GpTols {
    double feas_tol = 1e-8;
    double opt_tol = 1e-6;
};

struct AllocationResult {
    Eigen::VectorXd beta_star;  // empty for the adaptive model
    Eigen::VectorXd delta_star; // empty for the adaptive model
    Eigen::VectorXd phi_star;   // adaptive model only
    double lambda_star = 0.0;   // achieved decay-rate bound
    Eigen::VectorXd spend;      // per node
    double total_spend = 0.0;
    Eigen::VectorXd certificate_v; // eigenvector certificate (model-matrix order)
    GpSolution solver;
};

// Budgeted rate tuning for the Markovian temporal model: decision variables
// beta_i and delta_i (via the hat shift), eigenvector certificate of dim nL.
// Throws InfeasibleError when the geometric program has no feasible point and
// Error when budget < 0.
AllocationResult optimize_markov(const MarkovTemporalNet& net, const CostModel& f,
                                 const CostModel& g, double budget,
                                 const GpTols& tols = {});

// Same structure against B Abar - D (certificate of dim n).
AllocationResult optimize_amei(const AmeiNet& net, const CostModel& f,
                               const CostModel& g, double budget,
                               const GpTols& tols = {});

// Cutting-rate tuning for the adaptive model: beta and delta fixed,
// decision variables phi_i (via the hat shift).
AllocationResult optimize_asis(const AsisModel& model, const EpidemicParams& ep,
                               const CostModel& h, double budget,
                               const GpTols& tols = {});

// Equal-spend reference point: every node receives budget/n, split evenly
// across the available knobs (f and g, or h alone).
EpidemicParams uniform_spend_params(int n, const CostModel& f, const CostModel& g,
                                    double budget);
double uniform_spend_phi(const CostModel& h, double budget, int n);

// Entrywise slack of A v <= -lambda v, normalized per row; <= 0 means the
// certificate holds exactly.
double certificate_violation(const MetzlerMatrix& m, const Eigen::VectorXd& v,
                             double lambda);

} // namespace epictrl
