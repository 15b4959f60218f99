#include "epictrl/gp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace epictrl {

Monomial::Monomial(double c, std::map<VarId, double> e) : coeff(c), exponents(std::move(e)) {
    if (!(coeff > 0) || !std::isfinite(coeff)) throw Error("Monomial: coefficient must be positive and finite");
    for (const auto& [v, a] : exponents)
        if (!std::isfinite(a)) throw Error("Monomial: exponent for variable " + std::to_string(v) + " not finite");
}

double evaluate(const Monomial& m, const std::vector<double>& x) {
    double v = m.coeff;
    for (const auto& [var, a] : m.exponents) {
        const double xv = x.at(var);
        if (!(xv > 0)) throw Error("evaluate: variable value must be positive");
        v *= std::pow(xv, a);
    }
    return v;
}

double evaluate(const Posynomial& p, const std::vector<double>& x) {
    if (p.terms.empty()) throw Error("evaluate: empty posynomial");
    double s = 0.0;
    for (const auto& t : p.terms) s += evaluate(t, x);
    return s;
}

void GpProblem::check(const Monomial& m) const {
    if (!(m.coeff > 0)) throw Error("GpProblem: monomial coefficient must be positive");
    for (const auto& [v, a] : m.exponents) {
        (void)a;
        if (v < 0 || v >= variable_count())
            throw Error("GpProblem: unregistered variable id " + std::to_string(v));
    }
}

VarId GpProblem::add_variable(std::string name) {
    names_.push_back(std::move(name));
    return static_cast<VarId>(names_.size()) - 1;
}

void GpProblem::set_objective(Posynomial p) {
    if (p.terms.empty()) throw Error("GpProblem: objective needs at least one term");
    for (const auto& t : p.terms) check(t);
    objective_ = std::move(p);
}

void GpProblem::add_ineq(Posynomial p) {
    if (p.terms.empty()) throw Error("GpProblem: constraint needs at least one term");
    for (const auto& t : p.terms) check(t);
    ineqs_.push_back(std::move(p));
}

void GpProblem::add_eq(Monomial m) {
    check(m);
    eqs_.push_back(std::move(m));
}

namespace {

LogTerm to_log_term(const Monomial& m) {
    LogTerm t;
    t.b = std::log(m.coeff);
    t.a.reserve(m.exponents.size());
    for (const auto& [v, a] : m.exponents)
        if (a != 0.0) t.a.emplace_back(v, a);
    return t;
}

LseFunction to_lse(const Posynomial& p) {
    LseFunction f;
    f.terms.reserve(p.terms.size());
    for (const auto& m : p.terms) f.terms.push_back(to_log_term(m));
    std::vector<int> sup;
    for (const auto& t : f.terms)
        for (const auto& [v, a] : t.a) {
            (void)a;
            sup.push_back(v);
        }
    std::sort(sup.begin(), sup.end());
    sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
    f.support = std::move(sup);
    return f;
}

} // namespace

ConvexProgram to_convex(const GpProblem& gp) {
    ConvexProgram cp;
    cp.nvars = gp.variable_count();
    cp.objective = to_lse(gp.objective());
    cp.ineqs.reserve(gp.ineqs().size());
    for (const auto& p : gp.ineqs()) cp.ineqs.push_back(to_lse(p));
    cp.eqs.reserve(gp.eqs().size());
    for (const auto& m : gp.eqs()) cp.eqs.push_back(to_log_term(m));
    return cp;
}

double evaluate_lse(const LseFunction& f, const std::vector<double>& y) {
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> u(f.terms.size());
    for (std::size_t k = 0; k < f.terms.size(); ++k) {
        double s = f.terms[k].b;
        for (const auto& [v, a] : f.terms[k].a) s += a * y.at(v);
        u[k] = s;
        mx = std::max(mx, s);
    }
    double acc = 0.0;
    for (double s : u) acc += std::exp(s - mx);
    return mx + std::log(acc);
}

// ---------------------------------------------------------------------------
// barrier solver internals
// ---------------------------------------------------------------------------

namespace {

// Value of an LSE function at y; when grad is given, the raw gradient
// sum_k w_k a_k is accumulated into it. When hess is given, the contribution
//   h_scale * sum_k w_k a_k a_k^T + (g_outer_scale - h_scale) * g g^T
// is accumulated, which lets callers form h_scale*H + g_outer_scale*g g^T
// (H = true LSE Hessian) in one pass.
double lse_eval(const LseFunction& f, const Eigen::VectorXd& y, Eigen::VectorXd* grad,
                Eigen::MatrixXd* hess, double h_scale, double g_outer_scale) {
    const std::size_t nt = f.terms.size();
    static thread_local std::vector<double> u;
    u.resize(nt);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nt; ++k) {
        double s = f.terms[k].b;
        for (const auto& [v, a] : f.terms[k].a) s += a * y(v);
        u[k] = s;
        mx = std::max(mx, s);
    }
    double z = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
        u[k] = std::exp(u[k] - mx);
        z += u[k];
    }
    const double value = mx + std::log(z);
    if (!grad) return value;

    static thread_local Eigen::VectorXd g_local;
    if (g_local.size() != y.size()) g_local.setZero(y.size());
    for (int v : f.support) g_local(v) = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
        const double w = u[k] / z;
        for (const auto& [v, a] : f.terms[k].a) g_local(v) += w * a;
    }
    for (int v : f.support) (*grad)(v) += g_local(v);

    if (hess) {
        for (std::size_t k = 0; k < nt; ++k) {
            const double w = h_scale * u[k] / z;
            for (const auto& [v1, a1] : f.terms[k].a)
                for (const auto& [v2, a2] : f.terms[k].a) (*hess)(v1, v2) += w * a1 * a2;
        }
        const double go = g_outer_scale - h_scale;
        if (go != 0.0) {
            for (int v1 : f.support) {
                const double gv1 = go * g_local(v1);
                for (int v2 : f.support) (*hess)(v1, v2) += gv1 * g_local(v2);
            }
        }
    }
    return value;
}

struct BarrierProblem {
    int nvars = 0;
    const LseFunction* objective = nullptr;
    const std::vector<LseFunction>* ineqs = nullptr;
    Eigen::MatrixXd eq_a; // A y = b
    Eigen::VectorXd eq_b;
};

bool in_domain(const BarrierProblem& bp, const Eigen::VectorXd& y) {
    for (const auto& f : *bp.ineqs)
        if (lse_eval(f, y, nullptr, nullptr, 0, 0) >= 0.0) return false;
    return true;
}

double barrier_value(const BarrierProblem& bp, double t, const Eigen::VectorXd& y) {
    double val = t * lse_eval(*bp.objective, y, nullptr, nullptr, 0, 0);
    for (const auto& f : *bp.ineqs) {
        const double fi = lse_eval(f, y, nullptr, nullptr, 0, 0);
        if (!(fi < 0)) return std::numeric_limits<double>::infinity();
        val -= std::log(-fi);
    }
    return val;
}

// gradient and Hessian of psi_t(y) = t F0(y) - sum_i log(-F_i(y)).
// Returns +inf if y is outside the barrier domain.
double barrier_derivatives(const BarrierProblem& bp, double t, const Eigen::VectorXd& y,
                           Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
    const int n = bp.nvars;
    grad.setZero(n);
    hess.setZero(n, n);

    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    double val = t * lse_eval(*bp.objective, y, &g, &hess, t, 0.0);
    grad = t * g;

    for (const auto& f : *bp.ineqs) {
        const double fi = lse_eval(f, y, nullptr, nullptr, 0, 0);
        if (!(fi < 0)) return std::numeric_limits<double>::infinity();
        const double inv = 1.0 / (-fi);
        g.setZero();
        // contributes inv * H_i + inv^2 * g_i g_i^T
        lse_eval(f, y, &g, &hess, inv, inv * inv);
        grad += inv * g;
        val -= std::log(-fi);
    }
    return val;
}

struct NewtonOutcome {
    double decrement_sq = 0.0;
    Eigen::VectorXd dual_w;
    bool step_taken = false;
};

// one damped Newton step; affine equalities are preserved exactly via the
// Schur-complement KKT solve around a (boosted) Cholesky factorization
NewtonOutcome newton_step(const BarrierProblem& bp, double t, Eigen::VectorXd& y,
                          Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
    const int p = static_cast<int>(bp.eq_a.rows());
    NewtonOutcome out;

    const double val = barrier_derivatives(bp, t, y, grad, hess);
    if (!std::isfinite(val)) return out;

    double boost = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0;; ++attempt) {
        Eigen::MatrixXd hb = hess;
        if (boost > 0) hb.diagonal().array() += boost;
        llt.compute(hb);
        if (llt.info() == Eigen::Success) break;
        boost = (boost == 0) ? 1e-10 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff())
                             : boost * 10.0;
        if (attempt > 50 || boost > 1e12) return out;
    }

    Eigen::VectorXd dy;
    if (p == 0) {
        dy = llt.solve(-grad);
    } else {
        const Eigen::VectorXd rp = bp.eq_a * y - bp.eq_b;
        const Eigen::MatrixXd hia = llt.solve(Eigen::MatrixXd(bp.eq_a.transpose()));
        const Eigen::VectorXd hig = llt.solve(Eigen::VectorXd(-grad));
        const Eigen::MatrixXd s = bp.eq_a * hia;
        out.dual_w = s.ldlt().solve(bp.eq_a * hig + rp);
        dy = hig - hia * out.dual_w;
    }
    out.decrement_sq = -grad.dot(dy);
    if (!dy.allFinite() || !(out.decrement_sq > 0)) {
        out.decrement_sq = std::max(out.decrement_sq, 0.0);
        return out;
    }

    // pure Newton inside the quadratic convergence region: at large barrier
    // parameters the objective's floating-point granularity defeats an
    // Armijo test on the tiny decrements left
    if (out.decrement_sq <= 0.01) {
        const Eigen::VectorXd cand = y + dy;
        if (cand.cwiseAbs().maxCoeff() < 400.0 && in_domain(bp, cand)) {
            y = cand;
            out.step_taken = true;
            return out;
        }
    }

    // log-space trust region: an ill-conditioned Hessian (e.g. a nearly
    // inactive variable) can produce astronomically long Newton directions
    // that no amount of backtracking recovers from
    const double step_norm = dy.cwiseAbs().maxCoeff();
    if (step_norm > 100.0) dy *= 100.0 / step_norm;

    const double slope = grad.dot(dy);
    double alpha = 1.0;
    for (int ls = 0; ls < 80; ++ls) {
        const Eigen::VectorXd cand = y + alpha * dy;
        if (cand.cwiseAbs().maxCoeff() < 400.0 && in_domain(bp, cand)) {
            const double v2 = barrier_value(bp, t, cand);
            if (v2 <= val + 0.01 * alpha * slope) {
                y = cand;
                out.step_taken = true;
                return out;
            }
        }
        alpha *= 0.5;
        if (alpha < 1e-14) break;
    }
    return out;
}

struct BarrierRun {
    bool centered = false;
    double final_t = 1.0;
    int newton_iterations = 0;
    double kkt_residual = 0.0;
};

// log-barrier path following; early_accept can stop the run as soon as an
// iterate satisfies the caller (phase-I bails once strictly feasible)
BarrierRun run_barrier(const BarrierProblem& bp, Eigen::VectorXd& y, double gap_tol,
                       double t0 = 1.0,
                       const std::function<bool(const Eigen::VectorXd&)>& early_accept = {}) {
    BarrierRun run;
    const int m = static_cast<int>(bp.ineqs->size());
    int budget = 20000;
    double t = t0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;

    const auto kkt_at = [&](double tt) {
        Eigen::VectorXd g(bp.nvars);
        Eigen::MatrixXd h(bp.nvars, bp.nvars);
        if (!std::isfinite(barrier_derivatives(bp, tt, y, g, h)))
            return std::numeric_limits<double>::infinity();
        double r = g.cwiseAbs().maxCoeff() / tt;
        if (bp.eq_a.rows() > 0)
            r = std::max(r, (bp.eq_a * y - bp.eq_b).cwiseAbs().maxCoeff());
        return r;
    };

    for (int stage = 0; stage < 60; ++stage) {
        for (int it = 0; it < 400 && budget > 0; ++it) {
            if (early_accept && early_accept(y)) {
                run.centered = true;
                run.final_t = t;
                return run;
            }
            const NewtonOutcome out = newton_step(bp, t, y, grad, hess);
            ++run.newton_iterations;
            --budget;
            if (!out.step_taken || out.decrement_sq * 0.5 < 1e-11) break;
        }
        if (static_cast<double>(m) / t <= gap_tol || budget <= 0) {
            // polish the final center until the scaled dual point has a small
            // stationarity residual
            for (int extra = 0; extra < 60 && budget > 0; ++extra) {
                run.kkt_residual = kkt_at(t);
                if (run.kkt_residual <= 1e-8) break;
                const NewtonOutcome out = newton_step(bp, t, y, grad, hess);
                ++run.newton_iterations;
                --budget;
                if (!out.step_taken) break;
            }
            run.kkt_residual = kkt_at(t);
            run.centered = budget > 0;
            run.final_t = t;
            return run;
        }
        t *= 10.0;
    }
    run.final_t = t;
    return run;
}

Eigen::VectorXd project_to_equalities(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                      const Eigen::VectorXd& y0) {
    if (a.rows() == 0) return y0;
    const Eigen::VectorXd r = b - a * y0;
    return y0 + a.transpose() * (a * a.transpose()).ldlt().solve(r);
}

} // namespace

GpSolution solve(const GpProblem& gp, double feas_tol, double opt_tol) {
    return solve(gp, feas_tol, opt_tol, {});
}

GpSolution solve(const GpProblem& gp, double feas_tol, double opt_tol,
                 const std::vector<double>& x0) {
    if (!(feas_tol > 0) || !(opt_tol > 0)) throw Error("solve: tolerances must be positive");
    const ConvexProgram cp = to_convex(gp);
    const int n = cp.nvars;
    const int m = static_cast<int>(cp.ineqs.size());
    GpSolution sol;

    const int p = static_cast<int>(cp.eqs.size());
    Eigen::MatrixXd eq_a = Eigen::MatrixXd::Zero(p, n);
    Eigen::VectorXd eq_b = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < p; ++j) {
        for (const auto& [v, a] : cp.eqs[j].a) eq_a(j, v) = a;
        eq_b(j) = -cp.eqs[j].b;
    }

    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    if (!x0.empty()) {
        if (static_cast<int>(x0.size()) != n) throw Error("solve: warm start size mismatch");
        for (int i = 0; i < n; ++i) {
            if (!(x0[i] > 0)) throw Error("solve: warm start must be positive");
            y(i) = std::log(x0[i]);
        }
    }
    y = project_to_equalities(eq_a, eq_b, y);

    const auto extract = [&](const Eigen::VectorXd& yy) {
        sol.values.resize(n);
        for (int i = 0; i < n; ++i) sol.values[i] = std::exp(yy(i));
    };

    int total_newton = 0;

    // ---- phase I: minimize s subject to F_i(y) - s <= 0 ----
    double worst = -std::numeric_limits<double>::infinity();
    {
        std::vector<double> yv(n);
        for (int i = 0; i < n; ++i) yv[i] = y(i);
        for (const auto& f : cp.ineqs) worst = std::max(worst, evaluate_lse(f, yv));
    }

    if (m > 0 && worst >= -1e-9) {
        std::vector<LseFunction> ph1_ineqs = cp.ineqs;
        for (auto& f : ph1_ineqs) {
            for (auto& term : f.terms) term.a.emplace_back(n, -1.0);
            f.support.push_back(n);
        }
        LseFunction ph1_obj;
        ph1_obj.terms.push_back(LogTerm{{{n, 1.0}}, 0.0});
        ph1_obj.support = {n};

        BarrierProblem ph1;
        ph1.nvars = n + 1;
        ph1.objective = &ph1_obj;
        ph1.ineqs = &ph1_ineqs;
        ph1.eq_a = Eigen::MatrixXd::Zero(p, n + 1);
        ph1.eq_a.leftCols(n) = eq_a;
        ph1.eq_b = eq_b;

        Eigen::VectorXd z(n + 1);
        z.head(n) = y;
        z(n) = worst + 1.0;

        const BarrierRun ph1_run = run_barrier(
            ph1, z, 1e-9, std::max(1.0, static_cast<double>(m)),
            [n](const Eigen::VectorXd& zz) { return zz(n) < -1e-6; });
        total_newton += ph1_run.newton_iterations;
        if (!(z(n) < -1e-6)) {
            const double viol = std::expm1(std::max(z(n), 0.0));
            extract(z.head(n));
            sol.newton_iterations = total_newton;
            sol.max_violation = viol;
            if (viol > feas_tol) {
                sol.status = GpSolution::Status::Infeasible;
            } else {
                // feasible within tolerance but no strict interior: nothing
                // for the barrier to do
                sol.status = GpSolution::Status::MaxIterations;
                sol.objective_value = evaluate(gp.objective(), sol.values);
            }
            return sol;
        }
        y = z.head(n);
    }

    // ---- phase II ----
    BarrierProblem bp;
    bp.nvars = n;
    bp.objective = &cp.objective;
    bp.ineqs = &cp.ineqs;
    bp.eq_a = std::move(eq_a);
    bp.eq_b = std::move(eq_b);

    const BarrierRun run = run_barrier(bp, y, 0.5 * opt_tol);
    total_newton += run.newton_iterations;

    extract(y);
    sol.objective_value = evaluate(gp.objective(), sol.values);
    sol.kkt_residual = run.kkt_residual;
    sol.newton_iterations = total_newton;
    sol.status = run.centered ? GpSolution::Status::Optimal : GpSolution::Status::MaxIterations;
    return sol;
}

GridResult grid_oracle(const GpProblem& gp,
                       const std::vector<std::pair<double, double>>& box, double step) {
    const int n = gp.variable_count();
    if (n > 4) throw Error("grid_oracle: at most 4 variables");
    if (static_cast<int>(box.size()) != n) throw Error("grid_oracle: need one box per variable");
    if (!(step > 0)) throw Error("grid_oracle: step must be positive");
    for (const auto& [lo, hi] : box)
        if (!(lo > 0) || !(hi >= lo) || !std::isfinite(hi))
            throw Error("grid_oracle: boxes must be finite positive intervals");

    // per-axis lattice in log space (endpoints included)
    std::vector<std::vector<double>> axis(n);
    for (int v = 0; v < n; ++v) {
        const double ylo = std::log(box[v].first), yhi = std::log(box[v].second);
        const int count = static_cast<int>(std::floor((yhi - ylo) / step + 1e-12)) + 1;
        axis[v].reserve(count + 1);
        for (int i = 0; i < count; ++i) axis[v].push_back(std::exp(ylo + i * step));
        if (axis[v].back() < box[v].second * (1.0 - 1e-12)) axis[v].push_back(box[v].second);
    }

    struct Table {
        double coeff;
        std::vector<std::vector<double>> pows; // [axis][lattice index]
    };
    const auto tabulate = [&](const Posynomial& p) {
        std::vector<Table> ts;
        for (const auto& mterm : p.terms) {
            Table t;
            t.coeff = mterm.coeff;
            t.pows.resize(n);
            for (int v = 0; v < n; ++v) {
                const auto it = mterm.exponents.find(v);
                const double e = (it == mterm.exponents.end()) ? 0.0 : it->second;
                t.pows[v].resize(axis[v].size());
                for (std::size_t i = 0; i < axis[v].size(); ++i)
                    t.pows[v][i] = (e == 0.0) ? 1.0 : std::pow(axis[v][i], e);
            }
            ts.push_back(std::move(t));
        }
        return ts;
    };

    const auto obj_t = tabulate(gp.objective());
    std::vector<std::vector<Table>> con_t;
    for (const auto& c : gp.ineqs()) con_t.push_back(tabulate(c));
    std::vector<std::vector<Table>> eq_t;
    for (const auto& e : gp.eqs()) eq_t.push_back(tabulate(Posynomial{e}));

    std::vector<std::size_t> idx(n, 0);
    GridResult best;
    best.objective = std::numeric_limits<double>::infinity();

    const auto term_value = [&](const Table& t) {
        double v = t.coeff;
        for (int a = 0; a < n; ++a) v *= t.pows[a][idx[a]];
        return v;
    };
    const auto posy_value = [&](const std::vector<Table>& ts) {
        double s = 0.0;
        for (const auto& t : ts) s += term_value(t);
        return s;
    };

    while (true) {
        bool ok = true;
        for (const auto& c : con_t) {
            if (posy_value(c) > 1.0 + 1e-9) {
                ok = false;
                break;
            }
        }
        if (ok) {
            for (const auto& e : eq_t) {
                if (std::abs(posy_value(e) - 1.0) > std::max(1e-9, 2.0 * step)) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) {
            const double obj = posy_value(obj_t);
            if (obj < best.objective) {
                best.feasible = true;
                best.objective = obj;
                best.x.resize(n);
                for (int v = 0; v < n; ++v) best.x[v] = axis[v][idx[v]];
            }
        }
        int v = 0;
        while (v < n && ++idx[v] == axis[v].size()) idx[v++] = 0;
        if (v == n) break;
    }
    if (!best.feasible) best.objective = std::numeric_limits<double>::quiet_NaN();
    return best;
}

} // namespace epictrl
