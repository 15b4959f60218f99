// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the measured quantities.
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "epictrl/allocation.hpp"
#include "epictrl/rng.hpp"
#include "epictrl/simulate.hpp"
#include "epictrl/spectral.hpp"
#include "epictrl/validate.hpp"

#include "support.hpp"

using namespace epictrl;
using namespace epictrl_test;

namespace {

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("ACCEPTANCE %02d %-28s %s  %s\n", criterion, name, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(pass, name, ": ", detail);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}

// reference-rate karate fixtures shared by criteria 5 and 6
struct KarateFixtures {
    MarkovTemporalNet markov = markov_karate(0.1, 1, 0.1, 1, 0.02, 5);
    AmeiNet amei = amei_karate(0.1, 1, 0.1, 1, 0.02, 5);
    AsisModel asis = AsisModel::homogeneous(karate(), 1.0, 2.0);

    double beta_upper = 0.0;
    CostModel f{CostModel::normalize(CostKind::InfectionF, 0.1, 0, 0.5, 1.0)};
    CostModel g{CostModel::normalize(CostKind::RecoveryG, 0.1, 0.12, 0.05, 0.06)};
    CostModel h{CostModel::normalize(CostKind::CuttingH, 1.0, 150.0, 0.5, 1.5)};
    EpidemicParams asis_ep = EpidemicParams::homogeneous(34, 0.18, 1.0);

    AllocationResult markov_alloc, amei_alloc, asis_alloc;

    KarateFixtures() {
        const double delta_lower = 0.05;
        const auto eval = [&](double b) {
            return lambda_max(build_A1(markov, EpidemicParams::homogeneous(34, b, delta_lower)),
                              1e-9);
        };
        beta_upper = threshold_beta(eval, 0.0, 1e-4, 1.0, 1e-9);
        f = CostModel::normalize(CostKind::InfectionF, 0.1, 0, 0.8 * beta_upper, beta_upper);
        g = CostModel::normalize(CostKind::RecoveryG, 0.1, 2 * 1.2 * delta_lower, delta_lower,
                                 1.2 * delta_lower);
        markov_alloc = optimize_markov(markov, f, g, 17.0);
        amei_alloc = optimize_amei(amei, f, g, 17.0);
        asis_alloc = optimize_asis(asis, asis_ep, h, 17.0);
    }

    static const KarateFixtures& get() {
        static KarateFixtures fx;
        return fx;
    }
};

} // namespace

TEST_CASE("criterion 1: static reduction identity") {
    const StaticGraph g = karate();
    const double lam_a = lambda_max(MetzlerMatrix(g.adjacency()), 1e-11);
    bool pass = true;
    std::string detail;
    for (double delta : {0.5, 1.0, 2.0}) {
        const auto eval = [&](double beta) {
            return lambda_max(build_static(g, EpidemicParams::homogeneous(34, beta, delta)),
                              1e-10);
        };
        const double bc = threshold_beta(eval, 0.0, 1e-4, 2.0, 1e-10);
        const double expect = delta / lam_a;
        const double rel = std::abs(bc - expect) / expect;
        pass = pass && rel <= 1e-6;
        detail += "rel(" + num(delta) + ")=" + num(rel) + " ";
    }
    report(1, "static-reduction", pass, detail);
}

TEST_CASE("criterion 2: markovian collapse on identical configurations") {
    CounterRng rng(202);
    bool pass = true;
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int l = (rep % 2 == 0) ? 2 : 4;
        const int n = 3 + static_cast<int>(rng.uniform_index(6));
        std::vector<NodePair> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform01() < 0.5) edges.emplace_back(i, j);
        const StaticGraph g(n, edges);
        Eigen::MatrixXd rates(l, l);
        for (int a = 0; a < l; ++a)
            for (int b = 0; b < l; ++b) rates(a, b) = (a == b) ? 0.0 : 0.1 + rng.uniform01();
        const MarkovTemporalNet net(std::vector<StaticGraph>(l, g), rates);
        Eigen::VectorXd beta(n), delta(n);
        for (int i = 0; i < n; ++i) {
            beta(i) = 0.1 + rng.uniform01();
            delta(i) = 0.5 + rng.uniform01();
        }
        const EpidemicParams ep(beta, delta);
        const double gap = std::abs(lambda_max_dense(build_A1(net, ep)) -
                                    lambda_max_dense(build_static(g, ep)));
        worst = std::max(worst, gap);
        pass = pass && gap <= 1e-8;
    }
    report(2, "markovian-collapse", pass, "worst-gap=" + num(worst));
}

TEST_CASE("criterion 3: adaptive homogeneous threshold sign") {
    bool pass = true;
    int tested = 0, skipped = 0;
    const double delta = 1.0, psi = 2.0;
    const struct {
        const char* name;
        StaticGraph g;
        double beta_lo, beta_hi;
    } cases[] = {
        {"path2", StaticGraph(2, {{0, 1}}), 0.3, 3.0},
        {"triangle", StaticGraph(3, {{0, 1}, {0, 2}, {1, 2}}), 0.15, 1.5},
        {"karate", karate(), 0.05, 0.5},
    };
    for (const auto& c : cases) {
        const int n = c.g.node_count();
        const double lam_a = lambda_max(MetzlerMatrix(c.g.adjacency()), 1e-11);
        for (int bi = 0; bi < 10; ++bi) {
            for (int pi = 0; pi < 10; ++pi) {
                const double beta = c.beta_lo + (c.beta_hi - c.beta_lo) * bi / 9.0;
                const double phi = 4.0 * pi / 9.0;
                const double omega = phi / (delta + psi);
                const double margin = beta * lam_a - delta * (1 + omega);
                if (std::abs(margin) < 1e-6) {
                    ++skipped;
                    continue;
                }
                const AsisModel m = AsisModel::homogeneous(c.g, phi, psi);
                const double lam = lambda_max(
                    build_A3(m, EpidemicParams::homogeneous(n, beta, delta)), 1e-9);
                pass = pass && ((lam < 0) == (margin < 0));
                ++tested;
            }
        }
    }
    report(3, "asis-threshold-sign", pass,
           "cells=" + std::to_string(tested) + " guarded=" + std::to_string(skipped));
}

TEST_CASE("criterion 4: solver matches the grid oracle") {
    CounterRng rng(404);
    bool pass = true;
    double worst = 0.0;
    for (int caseno = 0; caseno < 20; ++caseno) {
        RandomGpCase rc = make_random_gp(rng, 3);
        const GpSolution sol = solve(rc.gp, 1e-8, 1e-8);
        const GridResult grid = grid_oracle(rc.gp, rc.box, 1e-3);
        const bool ok = sol.status == GpSolution::Status::Optimal && grid.feasible;
        double rel = 1.0;
        if (ok) rel = std::abs(sol.objective_value - grid.objective) / std::abs(grid.objective);
        worst = std::max(worst, rel);
        pass = pass && ok && rel <= 1e-2;
    }
    report(4, "gp-vs-grid-oracle", pass, "worst-rel=" + num(worst));
}

TEST_CASE("criterion 5: allocation certificates hold") {
    const auto& fx = KarateFixtures::get();
    bool pass = true;
    std::string detail;

    const auto check_one = [&](const char* tag, const AllocationResult& res,
                               const MetzlerMatrix& mat, double lo, double hi,
                               const Eigen::VectorXd& rates) {
        const double lam = lambda_max_dense(mat);
        bool ok = res.solver.status == GpSolution::Status::Optimal;
        ok = ok && lam <= -res.lambda_star + 1e-6;
        ok = ok && res.total_spend <= 17.0 + 1e-6;
        for (int i = 0; i < rates.size(); ++i)
            ok = ok && rates(i) >= lo - 1e-6 && rates(i) <= hi + 1e-6;
        ok = ok && certificate_violation(mat, res.certificate_v, res.lambda_star) <= 1e-6;
        detail += std::string(tag) + ": lam_max=" + num(lam) + " -lam*=" +
                  num(-res.lambda_star) + " spend=" + num(res.total_spend) + "  ";
        pass = pass && ok;
    };

    check_one("markov", fx.markov_alloc,
              build_A1(fx.markov, EpidemicParams(fx.markov_alloc.beta_star,
                                                 fx.markov_alloc.delta_star)),
              fx.f.lower(), fx.f.upper(), fx.markov_alloc.beta_star);
    check_one("amei", fx.amei_alloc,
              build_A2(fx.amei, EpidemicParams(fx.amei_alloc.beta_star,
                                               fx.amei_alloc.delta_star)),
              fx.g.lower(), fx.g.upper(), fx.amei_alloc.delta_star);
    check_one("asis", fx.asis_alloc,
              build_A3(AsisModel(fx.asis.g0, fx.asis_alloc.phi_star, fx.asis.psi), fx.asis_ep),
              fx.h.lower(), fx.h.upper(), fx.asis_alloc.phi_star);
    report(5, "eigen-certificate", pass, detail);
}

TEST_CASE("criterion 6: optimizer beats the uniform baseline") {
    const auto& fx = KarateFixtures::get();
    const EpidemicParams uni = uniform_spend_params(34, fx.f, fx.g, 17.0);
    const double markov_uni = -lambda_max_dense(build_A1(fx.markov, uni));
    const double amei_uni = -lambda_max_dense(build_A2(fx.amei, uni));
    const double phi_uni = uniform_spend_phi(fx.h, 17.0, 34);
    const double asis_uni = -lambda_max_dense(
        build_A3(AsisModel::homogeneous(karate(), phi_uni, 2.0), fx.asis_ep));

    bool pass = true;
    pass = pass && fx.markov_alloc.lambda_star >= markov_uni - 1e-9;
    pass = pass && fx.amei_alloc.lambda_star >= amei_uni - 1e-9;
    pass = pass && fx.asis_alloc.lambda_star >= asis_uni - 1e-9;
    report(6, "beats-uniform", pass,
           "markov " + num(fx.markov_alloc.lambda_star) + ">=" + num(markov_uni) + "  amei " +
               num(fx.amei_alloc.lambda_star) + ">=" + num(amei_uni) + "  asis " +
               num(fx.asis_alloc.lambda_star) + ">=" + num(asis_uni));
}

TEST_CASE("criterion 7: exact decay meets the certified rate") {
    StaticGraph even(4, {{0, 1}, {2, 3}});
    StaticGraph odd(4, {{1, 2}, {0, 3}});
    Eigen::MatrixXd rates(2, 2);
    rates << 0, 1.0, 1.0, 0;
    const MarkovTemporalNet net({even, odd}, rates);
    const EpidemicParams ep = EpidemicParams::homogeneous(4, 0.3, 1.0);
    const double lam = lambda_max_dense(build_A1(net, ep));

    const std::vector<double> grid{9.0, 11.25, 13.5, 15.75, 18.0}; // [T/2, T], T = 18
    const auto table = master_equation_marginals(net, ep, grid, {1, 1, 1, 1});
    // least-squares slope of log total probability over [T/2, T]
    const Eigen::VectorXd tot = table.total();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int k = static_cast<int>(grid.size());
    for (int i = 0; i < k; ++i) {
        sx += grid[i];
        sy += std::log(tot(i));
        sxx += grid[i] * grid[i];
        sxy += grid[i] * std::log(tot(i));
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double fitted = -slope;

    const bool in_range = lam >= -1.0 && lam <= -0.2;
    const bool pass = in_range && fitted >= 0.95 * std::abs(lam);
    report(7, "decay-rate-bound", pass,
           "lambda_max=" + num(lam) + " fitted=" + num(fitted));
}

TEST_CASE("criterion 8: gillespie exactness on three models") {
    bool pass = true;
    std::string detail;
    const int runs = 100000;

    const auto compare = [&](const char* tag, const McMarginals& mm,
                             const Eigen::MatrixXd& exact) {
        double worst = 0.0;
        for (int k = 0; k < exact.rows(); ++k) {
            for (int i = 0; i < exact.cols(); ++i) {
                const double se = std::max(mm.stderr_(k, i), 1e-4);
                worst = std::max(worst, std::abs(mm.mean(k, i) - exact(k, i)) / se);
            }
        }
        pass = pass && worst <= 3.0;
        detail += std::string(tag) + " worst-z=" + num(worst) + "  ";
    };

    {
        // two nodes whose single edge blinks through network switching
        StaticGraph k2(2, {{0, 1}});
        StaticGraph none(2, {});
        Eigen::MatrixXd r(2, 2);
        r << 0, 1.2, 0.8, 0;
        const MarkovTemporalNet net({k2, none}, r);
        const EpidemicParams ep = EpidemicParams::homogeneous(2, 2.0, 1.0);
        const std::vector<int> x0{1, 0};
        const std::vector<double> times{0.5, 1.0, 2.0};
        const auto exact = master_equation_marginals(net, ep, times, x0, 0);
        const auto mm = mc_marginals(
            [&](int rr) {
                SimConfig cfg;
                cfg.horizon = 2.0;
                cfg.seed = 81000 ^ static_cast<std::uint64_t>(rr);
                cfg.x0 = x0;
                cfg.config0 = 0;
                return gillespie_markov(net, ep, cfg);
            },
            x0, times, runs);
        compare("markov", mm, exact.marginals);
    }
    {
        // independent two-state edges on a 3-path, exactified by expansion
        AmeiNet net(3);
        net.set_process(0, 1, EdgeProcess::two_state(0.7, 1.3));
        net.set_process(1, 2, EdgeProcess::two_state(0.7, 1.3));
        const EpidemicParams ep = EpidemicParams::homogeneous(3, 1.5, 1.0);
        const std::vector<int> x0{1, 0, 1};
        const std::vector<double> times{0.4, 0.8, 1.6};
        const MarkovTemporalNet joint = amei_to_markov(net);
        const auto exact = master_equation_marginals(joint, ep, times, x0, 0);
        const auto mm = mc_marginals(
            [&](int rr) {
                SimConfig cfg;
                cfg.horizon = 1.6;
                cfg.seed = 82000 ^ static_cast<std::uint64_t>(rr);
                cfg.x0 = x0;
                cfg.pair_state0 = {{{0, 1}, 0}, {{1, 2}, 0}}; // all edges active
                return gillespie_amei(net, ep, cfg);
            },
            x0, times, runs);
        compare("amei", mm, exact.marginals);
    }
    {
        StaticGraph tri(3, {{0, 1}, {0, 2}, {1, 2}});
        const AsisModel m = AsisModel::homogeneous(tri, 1.5, 2.0);
        const EpidemicParams ep = EpidemicParams::homogeneous(3, 1.2, 1.0);
        const std::vector<int> x0{1, 1, 0};
        const std::vector<double> times{0.4, 0.8, 1.6};
        const Eigen::MatrixXd exact = asis_exact_marginals(m, ep, times, x0);
        const auto mm = mc_marginals(
            [&](int rr) {
                SimConfig cfg;
                cfg.horizon = 1.6;
                cfg.seed = 83000 ^ static_cast<std::uint64_t>(rr);
                cfg.x0 = x0;
                return gillespie_asis(m, ep, cfg);
            },
            x0, times, runs);
        compare("asis", mm, exact);
    }
    report(8, "gillespie-exactness", pass, detail);
}

TEST_CASE("criterion 9: metastable sweep tracks the analytic line") {
    const StaticGraph g = karate();
    const double lam_a = 6.725697727631729; // frozen dataset value, checked elsewhere
    const double delta = 1.0, psi = 2.0;
    const int runs = 500;

    bool pass = true;
    int sub_cells = 0, super_cells = 0;
    std::string offenders;
    for (int bi = 0; bi < 8; ++bi) {
        for (int pi = 0; pi < 8; ++pi) {
            const double beta = 0.05 + (0.6 - 0.05) * bi / 7.0;
            const double phi = 4.0 * pi / 7.0;
            const double omega = phi / (delta + psi);
            const double line = delta * (1 + omega) / lam_a;
            const bool sub = beta < 0.9 * line;
            const bool super = beta > 1.5 * line;
            if (!sub && !super) continue;

            const AsisModel m = AsisModel::homogeneous(g, phi, psi);
            const EpidemicParams ep = EpidemicParams::homogeneous(34, beta, delta);
            SimConfig cfg;
            // window [12.5, 25]: late enough for transients to settle, early
            // enough that the shallow metastable states at high phi have not
            // yet drained through stochastic extinction
            cfg.horizon = 25.0;
            cfg.seed = 900000 + bi * 100 + pi;
            cfg.x0.assign(34, 1);
            const auto est = metastable_count(make_asis_runner(m, ep, cfg, 0.5), runs, 0.5);
            if (sub) {
                ++sub_cells;
                if (!(est.y_star < 1.0)) {
                    pass = false;
                    offenders += " sub(" + num(beta) + "," + num(phi) + ")=" + num(est.y_star);
                }
            } else {
                ++super_cells;
                if (!(est.y_star > 1.0)) {
                    pass = false;
                    offenders += " super(" + num(beta) + "," + num(phi) + ")=" + num(est.y_star);
                }
            }
        }
    }
    report(9, "metastable-sweep", pass,
           "sub=" + std::to_string(sub_cells) + " super=" + std::to_string(super_cells) +
               offenders);
}

TEST_CASE("criterion 10: temporal threshold curve dominates the static one") {
    const MarkovTemporalNet net = markov_karate(0.1, 1, 0.1, 1, 0.02, 5);
    const double lam_a = lambda_max(MetzlerMatrix(karate().adjacency()), 1e-11);
    bool pass = true;
    double prev = 0.0;
    std::string detail;
    for (double delta = 0.25; delta <= 2.0 + 1e-9; delta += 0.25) {
        const auto eval = [&](double beta) {
            return lambda_max(build_A1(net, EpidemicParams::homogeneous(34, beta, delta)),
                              1e-8);
        };
        const double bc = threshold_beta(eval, 0.0, 1e-5, 2.0, 1e-6);
        pass = pass && bc > prev && bc > delta / lam_a;
        detail += num(bc) + " ";
        prev = bc;
    }
    report(10, "threshold-curve-shape", pass, detail);
}
