#include "epictrl/linalg.hpp"

#include <cmath>

#include "epictrl/errors.hpp"

namespace epictrl {

void jacobi_symmetric_eig(const Eigen::MatrixXd& sym, Eigen::VectorXd& evals,
                          Eigen::MatrixXd& evecs) {
    const int n = static_cast<int>(sym.rows());
    if (n == 0 || sym.cols() != n) throw Error("jacobi_symmetric_eig: matrix must be square and non-empty");
    Eigen::MatrixXd a = sym;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    auto offdiag_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2.0 * s);
    };

    const double tol = 1e-14 * (1.0 + a.cwiseAbs().maxCoeff());
    for (int sweep = 0; sweep < 100 && offdiag_norm() > tol; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                // smaller-angle root of t^2 + 2 theta t - 1 = 0
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    // sort ascending
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a(i, i) < a(j, j); });
    evals.resize(n);
    evecs.resize(n, n);
    for (int i = 0; i < n; ++i) {
        evals(i) = a(order[i], order[i]);
        evecs.col(i) = v.col(order[i]);
    }
}

Eigen::VectorXd ctmc_stationary(const Eigen::MatrixXd& generator) {
    const int m = static_cast<int>(generator.rows());
    if (m == 0 || generator.cols() != m) throw Error("ctmc_stationary: generator must be square");
    // pi Q = 0  <=>  Q^T pi^T = 0; replace the last equation with sum(pi) = 1
    Eigen::MatrixXd a = generator.transpose();
    a.row(m - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b(m - 1) = 1.0;
    Eigen::VectorXd pi = a.partialPivLu().solve(b);
    return pi;
}

} // namespace epictrl
