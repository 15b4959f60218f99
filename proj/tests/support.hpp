// Shared test oracles: Monte Carlo marginal estimation from replayed event
// logs, and an exact master equation for the adaptive model on tiny graphs.
// These stay independent of the library's analysis path on purpose.
#pragma once

#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "epictrl/simulate.hpp"

namespace epictrl_test {

using namespace epictrl;

struct McMarginals {
    Eigen::MatrixXd mean;    // times x n
    Eigen::MatrixXd stderr_; // times x n
};

template <class RunTraj>
McMarginals mc_marginals(RunTraj&& run_one, const std::vector<int>& x0,
                         const std::vector<double>& times, int runs) {
    const int n = static_cast<int>(x0.size());
    const int nt = static_cast<int>(times.size());
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(nt, n);
    for (int r = 0; r < runs; ++r) {
        const Trajectory tr = run_one(r);
        for (int k = 0; k < nt; ++k) {
            const auto state = infection_state_at(tr, x0, times[k]);
            for (int i = 0; i < n; ++i) sum(k, i) += state[i];
        }
    }
    McMarginals mm;
    mm.mean = sum / runs;
    mm.stderr_ = (mm.mean.array() * (1.0 - mm.mean.array()) / runs).sqrt();
    return mm;
}

// exact marginals of the joint (infection bits, active-edge bits) chain of
// the adaptive model; all initial edges start active
inline Eigen::MatrixXd asis_exact_marginals(const AsisModel& m, const EpidemicParams& ep,
                                            const std::vector<double>& times,
                                            const std::vector<int>& x0) {
    const int n = m.g0.node_count();
    const auto& edges = m.g0.edges();
    const int ne = m.g0.edge_count();
    REQUIRE(n <= 4);
    REQUIRE(ne <= 8);
    const int dim = (1 << n) * (1 << ne);

    std::vector<std::vector<std::pair<int, double>>> out(dim);
    for (int eb = 0; eb < (1 << ne); ++eb) {
        for (int xb = 0; xb < (1 << n); ++xb) {
            const int s = eb * (1 << n) + xb;
            for (int i = 0; i < n; ++i) {
                if (xb & (1 << i)) {
                    out[s].emplace_back(eb * (1 << n) + (xb & ~(1 << i)), ep.delta(i));
                } else {
                    double rate = 0.0;
                    for (int e = 0; e < ne; ++e) {
                        if (!(eb & (1 << e))) continue;
                        const auto [u, v] = edges[e];
                        if (u == i && (xb >> v) & 1) rate += ep.beta(i);
                        if (v == i && (xb >> u) & 1) rate += ep.beta(i);
                    }
                    if (rate > 0) out[s].emplace_back(eb * (1 << n) + (xb | (1 << i)), rate);
                }
            }
            for (int e = 0; e < ne; ++e) {
                const auto [u, v] = edges[e];
                if (eb & (1 << e)) {
                    const double rate =
                        m.phi(u) * ((xb >> u) & 1) + m.phi(v) * ((xb >> v) & 1);
                    if (rate > 0)
                        out[s].emplace_back((eb & ~(1 << e)) * (1 << n) + xb, rate);
                } else {
                    out[s].emplace_back((eb | (1 << e)) * (1 << n) + xb, m.psi_at(u, v));
                }
            }
        }
    }

    Eigen::VectorXd rho = Eigen::VectorXd::Zero(dim);
    int xb0 = 0;
    for (int i = 0; i < n; ++i)
        if (x0[i]) xb0 |= 1 << i;
    rho(((1 << ne) - 1) * (1 << n) + xb0) = 1.0;

    const auto deriv = [&](const Eigen::VectorXd& r, Eigen::VectorXd& d) {
        d.setZero();
        for (int s = 0; s < dim; ++s) {
            if (r(s) == 0.0) continue;
            for (const auto& [tgt, rate] : out[s]) {
                d(tgt) += r(s) * rate;
                d(s) -= r(s) * rate;
            }
        }
    };

    Eigen::MatrixXd result(static_cast<int>(times.size()), n);
    Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    double t = 0.0;
    const double h = 5e-4;
    for (std::size_t gi = 0; gi < times.size(); ++gi) {
        while (t < times[gi] - 1e-12) {
            const double step = std::min(h, times[gi] - t);
            deriv(rho, k1);
            tmp = rho + 0.5 * step * k1;
            deriv(tmp, k2);
            tmp = rho + 0.5 * step * k2;
            deriv(tmp, k3);
            tmp = rho + step * k3;
            deriv(tmp, k4);
            rho += (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
            t += step;
        }
        for (int i = 0; i < n; ++i) {
            double p = 0.0;
            for (int s = 0; s < dim; ++s)
                if ((s & ((1 << n) - 1)) & (1 << i)) p += rho(s);
            result(static_cast<int>(gi), i) = p;
        }
    }
    return result;
}

} // namespace epictrl_test
