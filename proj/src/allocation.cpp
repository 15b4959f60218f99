#include "epictrl/allocation.hpp"

#include <cmath>

namespace epictrl {

CostModel CostModel::normalize(CostKind kind, double shape, double hat, double lower,
                               double upper) {
    if (!(shape > 0)) throw Error("CostModel: shape exponent must be positive");
    if (!(lower > 0) || !(upper > lower)) throw Error("CostModel: need 0 < lower < upper");
    CostModel c;
    c.kind_ = kind;
    c.shape_ = shape;
    c.hat_ = hat;
    c.lower_ = lower;
    c.upper_ = upper;
    if (kind == CostKind::InfectionF) {
        // f(lower) = 1/2, f(upper) = 0
        const double dlo = std::pow(lower, -shape), dhi = std::pow(upper, -shape);
        c.c_pos_ = 0.5 / (dlo - dhi);
        c.c_off_ = -c.c_pos_ * dhi;
    } else {
        if (!(hat > upper)) throw Error("CostModel: hat must exceed the upper bound");
        // g(lower) = 0, g(upper) = 1/2 (recovery); h(lower) = 0, h(upper) = 1
        const double target = (kind == CostKind::RecoveryG) ? 0.5 : 1.0;
        const double zlo = std::pow(hat - upper, -shape); // cost grows toward upper
        const double zhi = std::pow(hat - lower, -shape);
        c.c_pos_ = target / (zlo - zhi);
        c.c_off_ = -c.c_pos_ * zhi;
    }
    if (!(c.c_pos_ > 0)) throw Error("CostModel: degenerate interval");
    return c;
}

double CostModel::cost(double rate) const {
    if (kind_ == CostKind::InfectionF) return c_off_ + c_pos_ * std::pow(rate, -shape_);
    return c_off_ + c_pos_ * std::pow(hat_ - rate, -shape_);
}

double CostModel::rate_for_cost(double cost) const {
    const double z = std::pow(c_pos_ / (cost - c_off_), 1.0 / shape_);
    return kind_ == CostKind::InfectionF ? z : hat_ - z;
}

EpidemicParams uniform_spend_params(int n, const CostModel& f, const CostModel& g,
                                    double budget) {
    const double per_knob = budget / (2.0 * n);
    return EpidemicParams::homogeneous(n, f.rate_for_cost(per_knob),
                                       g.rate_for_cost(per_knob));
}

double uniform_spend_phi(const CostModel& h, double budget, int n) {
    return h.rate_for_cost(budget / n);
}

double certificate_violation(const MetzlerMatrix& m, const Eigen::VectorXd& v,
                             double lambda) {
    const Eigen::VectorXd mv = m.matrix() * v;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.dim(); ++i) {
        const double scale = m.matrix().row(i).cwiseAbs().dot(v) + lambda * v(i);
        worst = std::max(worst, (mv(i) + lambda * v(i)) / std::max(scale, 1e-300));
    }
    return worst;
}

namespace {

// registry of the eigenvector coordinates with the first coordinate pinned to
// one (the eigen constraints are scale invariant in v, so this is lossless and
// removes the flat direction)
struct VBlock {
    std::vector<VarId> ids; // -1 for the pinned coordinate

    static VBlock create(GpProblem& gp, int dim, const std::string& prefix) {
        VBlock b;
        b.ids.resize(dim);
        b.ids[0] = -1;
        for (int i = 1; i < dim; ++i) b.ids[i] = gp.add_variable(prefix + std::to_string(i));
        return b;
    }
    void add_exp(Monomial& m, int coord, double e) const {
        if (ids[coord] >= 0) m.exponents[ids[coord]] += e;
    }
    Eigen::VectorXd extract(const std::vector<double>& values) const {
        Eigen::VectorXd v(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i)
            v(i) = (ids[i] < 0) ? 1.0 : values[ids[i]];
        return v;
    }
};

void check_budget(double budget) {
    if (budget < 0) throw Error("budget must be nonnegative");
}

void require_kinds(const CostModel& f, const CostModel& g) {
    if (f.kind() != CostKind::InfectionF || g.kind() != CostKind::RecoveryG)
        throw Error("optimize: expected an infection-cost and a recovery-cost model");
}

void add_budget_and_boxes(GpProblem& gp, const std::vector<VarId>& beta,
                          const std::vector<VarId>& dt, const CostModel& f,
                          const CostModel& g, double budget) {
    const int n = static_cast<int>(beta.size());
    const double rhs = budget - n * (f.constant_offset() + g.constant_offset());
    if (!(rhs > 0)) throw Error("budget below the cost floor");
    Posynomial budget_posy;
    for (int i = 0; i < n; ++i) {
        budget_posy += Monomial(f.positive_coeff() / rhs, {{beta[i], -f.shape()}});
        budget_posy += Monomial(g.positive_coeff() / rhs, {{dt[i], -g.shape()}});
    }
    gp.add_ineq(std::move(budget_posy));

    const double dt_lo = g.hat() - g.upper(), dt_hi = g.hat() - g.lower();
    for (int i = 0; i < n; ++i) {
        gp.add_ineq(Posynomial{Monomial(f.lower(), {{beta[i], -1.0}})});
        gp.add_ineq(Posynomial{Monomial(1.0 / f.upper(), {{beta[i], 1.0}})});
        gp.add_ineq(Posynomial{Monomial(dt_lo, {{dt[i], -1.0}})});
        gp.add_ineq(Posynomial{Monomial(1.0 / dt_hi, {{dt[i], 1.0}})});
    }
}

struct RateVars {
    std::vector<VarId> beta, dt;       // empty when rates are fixed
    Eigen::VectorXd beta_fix, dt_fix;  // used when rates are fixed
    bool fixed = false;
};

AllocationResult finish_rates(GpSolution sol, const RateVars& rv,
                              const VBlock& vb, VarId lam, const CostModel& f,
                              const CostModel& g) {
    if (sol.status == GpSolution::Status::Infeasible)
        throw InfeasibleError("allocation geometric program infeasible (max constraint violation " +
                                  std::to_string(sol.max_violation) + ")",
                              sol.max_violation);
    AllocationResult res;
    const int n = static_cast<int>(rv.fixed ? rv.beta_fix.size() : rv.beta.size());
    res.beta_star.resize(n);
    res.delta_star.resize(n);
    res.spend.resize(n);
    for (int i = 0; i < n; ++i) {
        const double b = rv.fixed ? rv.beta_fix(i) : sol.values[rv.beta[i]];
        const double dtv = rv.fixed ? rv.dt_fix(i) : sol.values[rv.dt[i]];
        res.beta_star(i) = b;
        res.delta_star(i) = g.hat() - dtv;
        res.spend(i) = f.cost(b) + g.cost(res.delta_star(i));
    }
    res.total_spend = res.spend.sum();
    res.lambda_star = sol.values[lam];
    res.certificate_v = vb.extract(sol.values);
    res.solver = std::move(sol);
    return res;
}

} // namespace

AllocationResult optimize_markov(const MarkovTemporalNet& net, const CostModel& f,
                                 const CostModel& g, double budget, const GpTols& tols) {
    require_kinds(f, g);
    check_budget(budget);
    const int n = net.node_count();
    const int l = net.config_count();
    const double delta_hat = g.hat();

    GpProblem gp;
    RateVars rv;
    rv.fixed = budget == 0.0;
    if (rv.fixed) {
        rv.beta_fix = Eigen::VectorXd::Constant(n, f.upper());
        rv.dt_fix = Eigen::VectorXd::Constant(n, delta_hat - g.lower());
    } else {
        for (int i = 0; i < n; ++i) rv.beta.push_back(gp.add_variable("beta" + std::to_string(i)));
        for (int i = 0; i < n; ++i) rv.dt.push_back(gp.add_variable("dt" + std::to_string(i)));
    }
    VBlock vb = VBlock::create(gp, n * l, "v");
    const VarId lam = gp.add_variable("lambda");
    gp.set_objective(Posynomial{Monomial(1.0, {{lam, -1.0}})});

    // A1 v <= -lambda v, one posynomial row per (configuration, node)
    for (int block = 0; block < l; ++block) {
        const Eigen::MatrixXd adj = net.config(block).adjacency();
        const double denom = delta_hat - net.rates()(block, block);
        for (int i = 0; i < n; ++i) {
            const int row = block * n + i;
            Posynomial p;
            for (int k = 0; k < l; ++k) {
                if (k == block || net.rates()(k, block) <= 0) continue;
                Monomial t(net.rates()(k, block) / denom, {});
                vb.add_exp(t, k * n + i, 1.0);
                vb.add_exp(t, row, -1.0);
                p += std::move(t);
            }
            for (int j = 0; j < n; ++j) {
                if (adj(i, j) == 0.0) continue;
                Monomial t(1.0 / denom, {});
                if (rv.fixed)
                    t.coeff *= rv.beta_fix(i);
                else
                    t.exponents[rv.beta[i]] += 1.0;
                vb.add_exp(t, block * n + j, 1.0);
                vb.add_exp(t, row, -1.0);
                p += std::move(t);
            }
            {
                Monomial t(1.0 / denom, {});
                if (rv.fixed)
                    t.coeff *= rv.dt_fix(i);
                else
                    t.exponents[rv.dt[i]] += 1.0;
                p += std::move(t);
            }
            p += Monomial(1.0 / denom, {{lam, 1.0}});
            gp.add_ineq(std::move(p));
        }
    }

    if (!rv.fixed) add_budget_and_boxes(gp, rv.beta, rv.dt, f, g, budget);

    // warm start: box midpoints in log space; certificate coordinates at one
    std::vector<double> x0(gp.variable_count(), 1.0);
    if (!rv.fixed) {
        for (int i = 0; i < n; ++i) {
            x0[rv.beta[i]] = std::sqrt(f.lower() * f.upper());
            x0[rv.dt[i]] = std::sqrt((delta_hat - g.upper()) * (delta_hat - g.lower()));
        }
    }
    x0[lam] = 1e-2;

    return finish_rates(solve(gp, tols.feas_tol, tols.opt_tol, x0), rv, vb, lam, f, g);
}

AllocationResult optimize_amei(const AmeiNet& net, const CostModel& f, const CostModel& g,
                               double budget, const GpTols& tols) {
    require_kinds(f, g);
    check_budget(budget);
    const int n = net.node_count();
    const double delta_hat = g.hat();
    const Eigen::MatrixXd abar = abar_matrix(net);

    GpProblem gp;
    RateVars rv;
    rv.fixed = budget == 0.0;
    if (rv.fixed) {
        rv.beta_fix = Eigen::VectorXd::Constant(n, f.upper());
        rv.dt_fix = Eigen::VectorXd::Constant(n, delta_hat - g.lower());
    } else {
        for (int i = 0; i < n; ++i) rv.beta.push_back(gp.add_variable("beta" + std::to_string(i)));
        for (int i = 0; i < n; ++i) rv.dt.push_back(gp.add_variable("dt" + std::to_string(i)));
    }
    VBlock vb = VBlock::create(gp, n, "v");
    const VarId lam = gp.add_variable("lambda");
    gp.set_objective(Posynomial{Monomial(1.0, {{lam, -1.0}})});

    for (int i = 0; i < n; ++i) {
        Posynomial p;
        for (int j = 0; j < n; ++j) {
            if (abar(i, j) <= 0.0) continue;
            Monomial t(abar(i, j) / delta_hat, {});
            if (rv.fixed)
                t.coeff *= rv.beta_fix(i);
            else
                t.exponents[rv.beta[i]] += 1.0;
            vb.add_exp(t, j, 1.0);
            vb.add_exp(t, i, -1.0);
            p += std::move(t);
        }
        {
            Monomial t(1.0 / delta_hat, {});
            if (rv.fixed)
                t.coeff *= rv.dt_fix(i);
            else
                t.exponents[rv.dt[i]] += 1.0;
            p += std::move(t);
        }
        p += Monomial(1.0 / delta_hat, {{lam, 1.0}});
        gp.add_ineq(std::move(p));
    }

    if (!rv.fixed) add_budget_and_boxes(gp, rv.beta, rv.dt, f, g, budget);

    std::vector<double> x0(gp.variable_count(), 1.0);
    if (!rv.fixed) {
        for (int i = 0; i < n; ++i) {
            x0[rv.beta[i]] = std::sqrt(f.lower() * f.upper());
            x0[rv.dt[i]] = std::sqrt((delta_hat - g.upper()) * (delta_hat - g.lower()));
        }
    }
    x0[lam] = 1e-2;

    return finish_rates(solve(gp, tols.feas_tol, tols.opt_tol, x0), rv, vb, lam, f, g);
}

AllocationResult optimize_asis(const AsisModel& model, const EpidemicParams& ep,
                               const CostModel& h, double budget, const GpTols& tols) {
    if (h.kind() != CostKind::CuttingH) throw Error("optimize_asis: expected a cutting-cost model");
    check_budget(budget);
    const AsisIndex idx(model.g0);
    const int n = idx.n;
    if (ep.node_count() != n) throw Error("optimize_asis: dimension mismatch");
    const double phi_hat = h.hat();

    GpProblem gp;
    const bool fixed = budget == 0.0;
    std::vector<VarId> pt; // phi-tilde variables
    Eigen::VectorXd pt_fix;
    if (fixed) {
        pt_fix = Eigen::VectorXd::Constant(n, phi_hat - h.lower());
    } else {
        for (int i = 0; i < n; ++i) pt.push_back(gp.add_variable("pt" + std::to_string(i)));
    }
    VBlock vb = VBlock::create(gp, idx.dim(), "v");
    const VarId lam = gp.add_variable("lambda");
    gp.set_objective(Posynomial{Monomial(1.0, {{lam, -1.0}})});

    // p-rows: (beta_i sum_k v_q(k,i) + lambda v_pi) / (delta_i v_pi) <= 1
    for (int i = 0; i < n; ++i) {
        Posynomial p;
        for (int k : idx.neigh[i]) {
            Monomial t(ep.beta(i) / ep.delta(i), {});
            vb.add_exp(t, n + idx.q_index(k, i), 1.0);
            vb.add_exp(t, i, -1.0);
            p += std::move(t);
        }
        {
            Monomial t(1.0 / ep.delta(i), {{lam, 1.0}});
            p += std::move(t);
        }
        gp.add_ineq(std::move(p));
    }
    // q-rows: (psi_ij v_pi + beta_i sum_k v_q(k,i) + phi~_i v_qij + lambda v_qij)
    //         / ((phi_hat + delta_i + psi_ij) v_qij) <= 1
    for (int i = 0; i < n; ++i) {
        for (int j : idx.neigh[i]) {
            const int row = n + idx.q_index(i, j);
            const double psi = model.psi_at(i, j);
            const double denom = phi_hat + ep.delta(i) + psi;
            Posynomial p;
            {
                Monomial t(psi / denom, {});
                vb.add_exp(t, i, 1.0);
                vb.add_exp(t, row, -1.0);
                p += std::move(t);
            }
            for (int k : idx.neigh[i]) {
                Monomial t(ep.beta(i) / denom, {});
                vb.add_exp(t, n + idx.q_index(k, i), 1.0);
                vb.add_exp(t, row, -1.0);
                p += std::move(t);
            }
            {
                Monomial t(1.0 / denom, {});
                if (fixed)
                    t.coeff *= pt_fix(i);
                else
                    t.exponents[pt[i]] += 1.0;
                p += std::move(t);
            }
            p += Monomial(1.0 / denom, {{lam, 1.0}});
            gp.add_ineq(std::move(p));
        }
    }

    if (!fixed) {
        const double rhs = budget - n * h.constant_offset();
        if (!(rhs > 0)) throw Error("budget below the cost floor");
        Posynomial budget_posy;
        for (int i = 0; i < n; ++i)
            budget_posy += Monomial(h.positive_coeff() / rhs, {{pt[i], -h.shape()}});
        gp.add_ineq(std::move(budget_posy));
        const double pt_lo = phi_hat - h.upper(), pt_hi = phi_hat - h.lower();
        for (int i = 0; i < n; ++i) {
            gp.add_ineq(Posynomial{Monomial(pt_lo, {{pt[i], -1.0}})});
            gp.add_ineq(Posynomial{Monomial(1.0 / pt_hi, {{pt[i], 1.0}})});
        }
    }

    std::vector<double> x0(gp.variable_count(), 1.0);
    if (!fixed) {
        for (int i = 0; i < n; ++i)
            x0[pt[i]] = std::sqrt((phi_hat - h.upper()) * (phi_hat - h.lower()));
    }
    x0[lam] = 1e-2;

    GpSolution sol = solve(gp, tols.feas_tol, tols.opt_tol, x0);
    if (sol.status == GpSolution::Status::Infeasible)
        throw InfeasibleError("allocation geometric program infeasible (max constraint violation " +
                                  std::to_string(sol.max_violation) + ")",
                              sol.max_violation);
    AllocationResult res;
    res.phi_star.resize(n);
    res.spend.resize(n);
    for (int i = 0; i < n; ++i) {
        const double ptv = fixed ? pt_fix(i) : sol.values[pt[i]];
        res.phi_star(i) = phi_hat - ptv;
        res.spend(i) = h.cost(res.phi_star(i));
    }
    res.total_spend = res.spend.sum();
    res.lambda_star = sol.values[lam];
    res.certificate_v = vb.extract(sol.values);
    res.solver = std::move(sol);
    return res;
}

} // namespace epictrl
