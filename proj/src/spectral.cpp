#include "epictrl/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace epictrl {

MetzlerMatrix::MetzlerMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    const int n = static_cast<int>(m_.rows());
    if (n == 0 || m_.cols() != n) throw Error("MetzlerMatrix: matrix must be square and non-empty");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && m_(i, j) < 0)
                throw Error("MetzlerMatrix: negative off-diagonal entry at (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
}

double lambda_max_dense(const MetzlerMatrix& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m.matrix(), /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

namespace {

struct PowerResult {
    bool converged = false;
    double lo = 0, hi = 0; // Collatz-Wielandt bracket for lambda_max
};

// Power iteration on the shifted nonnegative matrix N = M + sI. early_stop,
// when provided, may end the iteration once the bracket answers the caller's
// question (used by sign queries).
PowerResult power_iterate(const Eigen::MatrixXd& m, double tol,
                          const std::function<bool(double, double)>& early_stop = {}) {
    const int n = static_cast<int>(m.rows());
    const double shift = m.diagonal().cwiseAbs().maxCoeff() + 1.0;
    Eigen::MatrixXd nn = m;
    nn.diagonal().array() += shift;

    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    PowerResult res;
    double prev_ratio = std::numeric_limits<double>::quiet_NaN();
    int stable = 0;
    const long cap = 100L * n;
    for (long it = 0; it < cap; ++it) {
        Eigen::VectorXd w = nn * v;
        double rlo = std::numeric_limits<double>::infinity();
        double rhi = -rlo;
        for (int i = 0; i < n; ++i) {
            const double r = w(i) / v(i);
            rlo = std::min(rlo, r);
            rhi = std::max(rhi, r);
        }
        res.lo = rlo - shift;
        res.hi = rhi - shift;
        if (rhi - rlo <= tol) {
            res.converged = true;
            return res;
        }
        if (early_stop && early_stop(res.lo, res.hi)) {
            res.converged = true;
            return res;
        }
        // Rayleigh-style ratio stability check; the bracket above is the
        // certificate, so a stable ratio alone is not enough to stop.
        const double ratio = v.dot(w) / v.dot(v);
        if (std::isfinite(prev_ratio) &&
            std::abs(ratio - prev_ratio) <= (tol / 10.0) * std::max(1.0, std::abs(ratio))) {
            if (++stable >= 3 && rhi - rlo <= tol) {
                res.converged = true;
                return res;
            }
        } else {
            stable = 0;
        }
        prev_ratio = ratio;
        v = w / w.cwiseAbs().maxCoeff();
    }
    return res;
}

} // namespace

double lambda_max(const MetzlerMatrix& m, double tol) {
    if (!(tol > 0)) throw Error("lambda_max: tol must be positive");
    if (m.dim() == 1) return m.matrix()(0, 0);
    const PowerResult r = power_iterate(m.matrix(), tol);
    if (r.converged) return 0.5 * (r.lo + r.hi);
    return lambda_max_dense(m);
}

SpectralSign lambda_max_sign(const MetzlerMatrix& m, double target) {
    if (m.dim() == 1)
        return m.matrix()(0, 0) < target ? SpectralSign::Below : SpectralSign::Above;
    const auto decided = [target](double lo, double hi) {
        return hi < target || lo >= target;
    };
    const PowerResult r = power_iterate(m.matrix(), 1e-11, decided);
    if (r.converged) {
        if (r.hi < target) return SpectralSign::Below;
        if (r.lo >= target) return SpectralSign::Above;
        return 0.5 * (r.lo + r.hi) < target ? SpectralSign::Below : SpectralSign::Above;
    }
    return lambda_max_dense(m) < target ? SpectralSign::Below : SpectralSign::Above;
}

MetzlerMatrix build_static(const StaticGraph& g, const EpidemicParams& ep) {
    if (ep.node_count() != g.node_count())
        throw Error("build_static: dimension mismatch");
    Eigen::MatrixXd m = ep.beta.asDiagonal() * g.adjacency();
    m.diagonal() -= ep.delta;
    return MetzlerMatrix(std::move(m));
}

MetzlerMatrix build_A1(const MarkovTemporalNet& net, const EpidemicParams& ep) {
    const int n = net.node_count();
    const int l = net.config_count();
    if (ep.node_count() != n) throw Error("build_A1: dimension mismatch");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n * l, n * l);
    for (int block = 0; block < l; ++block) {
        Eigen::MatrixXd diag = ep.beta.asDiagonal() * net.config(block).adjacency();
        diag.diagonal() -= ep.delta;
        diag.diagonal().array() += net.rates()(block, block);
        m.block(block * n, block * n, n, n) = diag;
        for (int k = 0; k < l; ++k) {
            if (k == block) continue;
            m.block(block * n, k * n, n, n).diagonal().setConstant(net.rates()(k, block));
        }
    }
    return MetzlerMatrix(std::move(m));
}

MetzlerMatrix build_A2(const AmeiNet& net, const EpidemicParams& ep) {
    if (ep.node_count() != net.node_count()) throw Error("build_A2: dimension mismatch");
    Eigen::MatrixXd m = ep.beta.asDiagonal() * abar_matrix(net);
    m.diagonal() -= ep.delta;
    return MetzlerMatrix(std::move(m));
}

double kappa_concentration(int n, double b, double d, double s) {
    // log kappa = log n + s/b - ((b s + d)/b^2) log(1 + b s / d)
    const double logk =
        std::log(static_cast<double>(n)) + s / b - ((b * s + d) / (b * b)) * std::log1p(b * s / d);
    return std::exp(logk);
}

namespace {

double kappa_log(int n, double b, double d, double s) {
    return std::log(static_cast<double>(n)) + s / b -
           ((b * s + d) / (b * b)) * std::log1p(b * s / d);
}

// root of kappa(s) = 1 by bisection (kappa is strictly decreasing)
double kappa_inverse_one(int n, double b, double d) {
    if (kappa_log(n, b, d, 0.0) <= 0.0) return 0.0; // n == 1
    double hi = 1.0;
    while (kappa_log(n, b, d, hi) >= 0.0) {
        hi *= 2.0;
        if (hi > 1e300) throw Error("amei_margin: kappa does not fall below 1");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (kappa_log(n, b, d, mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

AmeiMargin amei_margin(const AmeiNet& net, const EpidemicParams& ep) {
    const int n = net.node_count();
    if (ep.node_count() != n) throw Error("amei_margin: dimension mismatch");
    const Eigen::MatrixXd abar = abar_matrix(net);

    AmeiMargin mg;
    mg.b = ep.beta.maxCoeff();

    double delta_cap = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j)
            row += ep.beta(i) * ep.beta(j) * abar(i, j) * (1.0 - abar(i, j));
        delta_cap = std::max(delta_cap, row);
    }
    mg.d = delta_cap;

    Eigen::MatrixXd sgn = (abar.array() > 1e-14).cast<double>().matrix();
    const double lam_sgn =
        lambda_max(MetzlerMatrix(Eigen::MatrixXd(ep.beta.asDiagonal() * sgn -
                                                 Eigen::MatrixXd(ep.delta.asDiagonal()))),
                   1e-10);

    if (mg.d <= 0.0) {
        // every activation is deterministically 0 or 1: the static condition
        // on sgn(Abar) applies with no concentration penalty
        mg.kind = AmeiMargin::Kind::DeterministicEdges;
        mg.kappa_inv_1 = 0.0;
        mg.c = lam_sgn;
        mg.tau = 0.0;
        return mg;
    }

    mg.kappa_inv_1 = kappa_inverse_one(n, mg.b, mg.d);
    mg.c = lam_sgn - mg.kappa_inv_1;

    const double delta_min = ep.delta.minCoeff();
    const double upper = delta_min + 0.5 * (std::abs(mg.c) - mg.c);
    if (upper <= mg.kappa_inv_1) {
        mg.kind = AmeiMargin::Kind::NoMargin;
        mg.tau = std::numeric_limits<double>::quiet_NaN();
        return mg;
    }

    // value -(s + c kappa(s)) / (1 - kappa(s)) on (kappa^{-1}(1), upper]
    const auto objective = [&](double s) {
        const double k = kappa_concentration(n, mg.b, mg.d, s);
        return -(s + mg.c * k) / (1.0 - k);
    };

    // as s -> kappa^{-1}(1)+ the denominator -> 0+, the numerator ->
    // -(s* + c) = -lambda_max(B sgn(Abar) - D): positive limit means the
    // objective is unbounded above
    if (-(mg.kappa_inv_1 + mg.c) > 0.0) {
        mg.kind = AmeiMargin::Kind::Unbounded;
        mg.tau = std::numeric_limits<double>::infinity();
        return mg;
    }

    const int grid_points = 1024;
    const double eps = std::max(1e-12, 1e-12 * mg.kappa_inv_1);
    const double lo = mg.kappa_inv_1 + eps;
    double best_s = lo, best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double s = lo + (upper - lo) * i / (grid_points - 1);
        const double val = objective(s);
        if (val > best_v) {
            best_v = val;
            best_s = s;
        }
    }
    // golden-section refinement on the bracket around the best grid point
    const double h = (upper - lo) / (grid_points - 1);
    double a = std::max(lo, best_s - h);
    double b2 = std::min(upper, best_s + h);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b2 - gr * (b2 - a), x2 = a + gr * (b2 - a);
    double f1 = objective(x1), f2 = objective(x2);
    while (b2 - a > 1e-10) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b2 - a);
            f2 = objective(x2);
        } else {
            b2 = x2;
            x2 = x1;
            f2 = f1;
            x1 = b2 - gr * (b2 - a);
            f1 = objective(x1);
        }
    }
    mg.tau = std::max(best_v, objective(0.5 * (a + b2)));
    mg.kind = AmeiMargin::Kind::Regular;
    return mg;
}

AmeiExtinctReport amei_extinct(const AmeiNet& net, const EpidemicParams& ep) {
    AmeiExtinctReport rep;
    rep.margin = amei_margin(net, ep);
    rep.lambda_max_a2 = lambda_max(build_A2(net, ep), 1e-10);
    switch (rep.margin.kind) {
        case AmeiMargin::Kind::NoMargin:
            rep.certified = false;
            rep.extinct = false;
            break;
        case AmeiMargin::Kind::Unbounded:
            rep.extinct = true;
            break;
        default:
            rep.extinct = rep.lambda_max_a2 < rep.margin.tau;
            break;
    }
    return rep;
}

AsisIndex::AsisIndex(const StaticGraph& g0) : n(g0.node_count()), neigh(g0.neighbors()) {
    q_offset.resize(n);
    int off = 0;
    for (int i = 0; i < n; ++i) {
        q_offset[i] = off;
        off += static_cast<int>(neigh[i].size());
    }
    q_dim = off;
}

int AsisIndex::q_index(int i, int j) const {
    const auto& nb = neigh[i];
    const auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j) throw Error("AsisIndex: (i,j) is not an edge of g0");
    return q_offset[i] + static_cast<int>(it - nb.begin());
}

MetzlerMatrix build_A3(const AsisModel& model, const EpidemicParams& ep) {
    const AsisIndex idx(model.g0);
    const int n = idx.n;
    if (ep.node_count() != n) throw Error("build_A3: dimension mismatch");
    const int dim = idx.dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);

    // node block: dp_i/dt = -delta_i p_i + beta_i sum_{k in N_i} q_{ki}
    for (int i = 0; i < n; ++i) {
        m(i, i) = -ep.delta(i);
        for (int k : idx.neigh[i]) m(i, n + idx.q_index(k, i)) += ep.beta(i);
    }
    // pair block: dq_ij/dt = psi_ij p_i - (delta_i + phi_i + psi_ij) q_ij
    //                        + beta_i sum_{k in N_i} q_{ki}
    for (int i = 0; i < n; ++i) {
        for (int j : idx.neigh[i]) {
            const int r = n + idx.q_index(i, j);
            const double psi = model.psi_at(i, j);
            m(r, i) += psi;
            m(r, r) -= ep.delta(i) + model.phi(i) + psi;
            for (int k : idx.neigh[i]) m(r, n + idx.q_index(k, i)) += ep.beta(i);
        }
    }
    return MetzlerMatrix(std::move(m));
}

double threshold_beta(const std::function<double(double)>& evaluator,
                      double target, double lo, double hi, double tol) {
    if (!(lo > 0) || !(hi > lo) || !(tol > 0))
        throw Error("threshold_beta: need 0 < lo < hi and tol > 0");
    const double elo = evaluator(lo);
    const double ehi = evaluator(hi);
    if (!(elo < target) || !(ehi >= target))
        throw Error("threshold_beta: no sign change on bracket: f(" + std::to_string(lo) +
                    ")=" + std::to_string(elo) + ", f(" + std::to_string(hi) + ")=" +
                    std::to_string(ehi) + ", target=" + std::to_string(target));
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (evaluator(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace epictrl
