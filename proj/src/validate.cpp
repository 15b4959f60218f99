#include "epictrl/validate.hpp"

#include <cmath>
#include <sstream>

#include "epictrl/allocation.hpp"
#include "epictrl/simulate.hpp"
#include "epictrl/spectral.hpp"

namespace epictrl {

RandomGpCase make_random_gp(CounterRng& rng, int nvars) {
    RandomGpCase c;
    std::vector<VarId> vars;
    for (int v = 0; v < nvars; ++v) vars.push_back(c.gp.add_variable("x" + std::to_string(v)));

    std::vector<double> center(nvars);
    for (int v = 0; v < nvars; ++v) {
        const double mid = std::exp(rng.uniform01() - 0.5);
        const double halfw = 0.05 + 0.07 * rng.uniform01(); // log units
        c.box.emplace_back(mid * std::exp(-halfw), mid * std::exp(halfw));
        center[v] = mid;
    }

    const auto random_posy = [&](int min_terms, int max_terms) {
        Posynomial p;
        const int nt = min_terms + static_cast<int>(rng.uniform_index(max_terms - min_terms + 1));
        for (int t = 0; t < nt; ++t) {
            std::map<VarId, double> exps;
            for (int v = 0; v < nvars; ++v) {
                const double a = (static_cast<double>(rng.uniform_index(9)) - 4.0) / 2.0;
                if (a != 0.0) exps[vars[v]] = a;
            }
            p += Monomial(std::exp(2.0 * rng.uniform01() - 1.0), std::move(exps));
        }
        return p;
    };

    c.gp.set_objective(random_posy(2, 4));
    const int ncons = 2 + static_cast<int>(rng.uniform_index(2));
    for (int k = 0; k < ncons; ++k) {
        Posynomial p = random_posy(1, 3);
        const double at_center = evaluate(p, center);
        for (auto& t : p.terms) t.coeff *= 0.7 / at_center; // strictly feasible center
        c.gp.add_ineq(std::move(p));
    }
    for (int v = 0; v < nvars; ++v) {
        c.gp.add_ineq(Posynomial{Monomial(c.box[v].first, {{vars[v], -1.0}})});
        c.gp.add_ineq(Posynomial{Monomial(1.0 / c.box[v].second, {{vars[v], 1.0}})});
    }
    return c;
}

namespace {

std::string num(double v) {
    std::ostringstream s;
    s.precision(12);
    s << v;
    return s.str();
}

CheckResult check(const std::string& name, bool pass, const std::string& detail) {
    return CheckResult{name, pass, detail};
}

// two disjoint 2-edge matchings on a 4-cycle, switched by a Markov chain
MarkovTemporalNet alternating_cycle_net(double switch_rate) {
    StaticGraph even(4, {{0, 1}, {2, 3}});
    StaticGraph odd(4, {{1, 2}, {0, 3}});
    Eigen::MatrixXd rates(2, 2);
    rates << 0, switch_rate, switch_rate, 0;
    return MarkovTemporalNet({even, odd}, rates);
}

std::vector<CheckResult> suite_thresholds() {
    std::vector<CheckResult> out;
    const StaticGraph g = karate();
    const double lam_a = lambda_max(MetzlerMatrix(g.adjacency()), 1e-10);

    for (double delta : {0.5, 1.0, 2.0}) {
        const auto eval = [&](double beta) {
            return lambda_max(build_static(g, EpidemicParams::homogeneous(34, beta, delta)),
                              1e-9);
        };
        const double bc = threshold_beta(eval, 0.0, 1e-4, 2.0, 1e-9);
        const double expected = delta / lam_a;
        const double rel = std::abs(bc - expected) / expected;
        out.push_back(check("static-karate-delta-" + num(delta), rel <= 1e-6,
                            "beta_c=" + num(bc) + " expected=" + num(expected)));
    }

    {
        // adaptive model with phi = 0 reduces to the static condition
        const AsisModel m = AsisModel::homogeneous(g, 0.0, 2.0);
        const auto eval = [&](double beta) {
            return lambda_max(build_A3(m, EpidemicParams::homogeneous(34, beta, 1.0)), 1e-9);
        };
        const double bc = threshold_beta(eval, 0.0, 1e-4, 2.0, 1e-8);
        const double expected = 1.0 / lam_a;
        out.push_back(check("asis-phi0-static-identity",
                            std::abs(bc - expected) / expected <= 1e-5,
                            "beta_c=" + num(bc) + " expected=" + num(expected)));
    }
    {
        // delta=1, psi=2, phi=3 gives effective cutting rate omega = 1
        const AsisModel m = AsisModel::homogeneous(g, 3.0, 2.0);
        const auto eval = [&](double beta) {
            return lambda_max(build_A3(m, EpidemicParams::homogeneous(34, beta, 1.0)), 1e-9);
        };
        const double bc = threshold_beta(eval, 0.0, 1e-4, 2.0, 1e-8);
        const double expected = 2.0 / lam_a;
        out.push_back(check("asis-omega1-doubled-threshold",
                            std::abs(bc - expected) / expected <= 1e-5,
                            "beta_c=" + num(bc) + " expected=" + num(expected)));
    }
    {
        // switching between identical configurations is inert
        StaticGraph path(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
        Eigen::MatrixXd rates(2, 2);
        rates << 0, 0.7, 1.3, 0;
        MarkovTemporalNet net({path, path}, rates);
        const EpidemicParams ep = EpidemicParams::homogeneous(5, 0.4, 0.9);
        const double l1 = lambda_max_dense(build_A1(net, ep));
        const double ls = lambda_max_dense(build_static(path, ep));
        out.push_back(check("markov-identical-collapse", std::abs(l1 - ls) <= 1e-8,
                            "lambda(A1)=" + num(l1) + " lambda(BA-D)=" + num(ls)));
    }
    return out;
}

std::vector<CheckResult> suite_gp_oracle() {
    std::vector<CheckResult> out;
    CounterRng rng(20240817);
    for (int caseno = 0; caseno < 8; ++caseno) {
        RandomGpCase rc = make_random_gp(rng, 3);
        const GpSolution sol = solve(rc.gp, 1e-8, 1e-8);
        const GridResult grid = grid_oracle(rc.gp, rc.box, 1e-3);
        const bool ok = sol.status == GpSolution::Status::Optimal && grid.feasible &&
                        std::abs(sol.objective_value - grid.objective) <=
                            1e-2 * std::max(1e-12, std::abs(grid.objective));
        out.push_back(check("gp-vs-grid-" + std::to_string(caseno), ok,
                            "solver=" + num(sol.objective_value) +
                                " grid=" + num(grid.objective)));
    }
    return out;
}

std::vector<CheckResult> suite_master_equation() {
    std::vector<CheckResult> out;
    {
        // single node, no edges: pure death p(t) = e^(-delta t)
        StaticGraph g(1, {});
        Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(1, 1);
        MarkovTemporalNet net({g}, rates);
        const EpidemicParams ep = EpidemicParams::homogeneous(1, 1.0, 0.8);
        const auto table = master_equation_marginals(net, ep, {0.5, 1.0, 2.0}, {1});
        bool ok = true;
        std::string detail;
        for (int k = 0; k < 3; ++k) {
            const double expect = std::exp(-0.8 * table.times[k]);
            if (std::abs(table.marginals(k, 0) - expect) > 1e-8) ok = false;
            detail += num(table.marginals(k, 0)) + " ";
        }
        out.push_back(check("pure-death-analytic", ok, detail));
    }
    {
        // linear model upper-bounds the exact marginals (3-node path)
        StaticGraph g(3, {{0, 1}, {1, 2}});
        Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(1, 1);
        MarkovTemporalNet net({g}, rates);
        const EpidemicParams ep = EpidemicParams::homogeneous(3, 0.7, 1.1);
        const std::vector<double> grid{0.25, 0.5, 1.0, 2.0, 4.0};
        const auto exact = master_equation_marginals(net, ep, grid, {1, 1, 1});
        const auto mf = mean_field_ode(build_static(g, ep), Eigen::VectorXd::Ones(3), grid);
        bool ok = true;
        for (int k = 0; k < static_cast<int>(grid.size()); ++k)
            for (int i = 0; i < 3; ++i)
                if (mf(k, i) < exact.marginals(k, i) - 1e-9) ok = false;
        out.push_back(check("mean-field-dominates-exact", ok, ""));
    }
    {
        // decay of the exact chain is at least the certified rate
        MarkovTemporalNet net = alternating_cycle_net(1.0);
        const EpidemicParams ep = EpidemicParams::homogeneous(4, 0.3, 1.0);
        const double lam = lambda_max_dense(build_A1(net, ep));
        const double horizon = 18.0;
        const std::vector<double> grid{horizon / 2, horizon};
        const auto table = master_equation_marginals(net, ep, grid, {1, 1, 1, 1});
        const double p1 = table.total()(0), p2 = table.total()(1);
        const double fitted = -(std::log(p2) - std::log(p1)) / (horizon / 2);
        const bool ok = lam < 0 && fitted >= 0.95 * std::abs(lam);
        out.push_back(check("exact-decay-meets-bound", ok,
                            "lambda=" + num(lam) + " fitted=" + num(fitted)));
    }
    return out;
}

} // namespace

std::vector<std::string> validation_suites() {
    return {"thresholds", "gp-oracle", "master-equation"};
}

std::vector<CheckResult> run_validation_suite(const std::string& suite) {
    if (suite == "thresholds") return suite_thresholds();
    if (suite == "gp-oracle") return suite_gp_oracle();
    if (suite == "master-equation") return suite_master_equation();
    throw Error("unknown validation suite: " + suite);
}

} // namespace epictrl
