#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "epictrl/temporal.hpp"

namespace epictrl {

// Square real matrix with nonnegative off-diagonal entries (checked on
// construction). Its maximum-real-part eigenvalue is real.
class MetzlerMatrix {
public:
    explicit MetzlerMatrix(Eigen::MatrixXd m);
    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& matrix() const { return m_; }

private:
    Eigen::MatrixXd m_;
};

// Maximum real part of the eigenvalues, within +-tol. Shifts the matrix to a
// nonnegative one with positive diagonal and runs power iteration from the
// all-ones vector; each iterate gives the Collatz-Wielandt bracket
// [min_i (Nv)_i/v_i, max_i (Nv)_i/v_i] around the spectral radius, so the
// returned value is certified once the bracket is narrow. Falls back to a
// dense Hessenberg + shifted-QR eigensolver if the bracket does not close
// within 100*dim iterations.
double lambda_max(const MetzlerMatrix& m, double tol = 1e-8);

// The dense QR route on its own (also usable as an independent check).
double lambda_max_dense(const MetzlerMatrix& m);

// Certified comparison of lambda_max against a target, for bisection loops
// that only need the sign. Undecided means the bracket never separated from
// the target (then the caller should fall back to lambda_max).
enum class SpectralSign { Below, Above };
SpectralSign lambda_max_sign(const MetzlerMatrix& m, double target);

// B A - D for a static graph.
MetzlerMatrix build_static(const StaticGraph& g, const EpidemicParams& ep);

// The nL-dimensional stability matrix of a Markovian temporal network:
// diagonal block l is B A_l - D + pi_ll I, off-diagonal block (l,k) is
// pi_kl I (rate into configuration l from configuration k).
MetzlerMatrix build_A1(const MarkovTemporalNet& net, const EpidemicParams& ep);

// B Abar - D for an AMEI network.
MetzlerMatrix build_A2(const AmeiNet& net, const EpidemicParams& ep);

// Safety-margin data for the AMEI extinction condition.
struct AmeiMargin {
    double b = 0;           // beta_max
    double d = 0;           // Delta = max_i sum_j beta_i beta_j abar_ij (1 - abar_ij)
    double c = 0;           // lambda_max(B sgn(Abar) - D) - kappa^{-1}(1)
    double kappa_inv_1 = 0; // unique root of kappa(s) = 1
    double tau = 0;

    enum class Kind {
        Regular,            // tau computed by maximizing over the stated interval
        DeterministicEdges, // Delta = 0: all activations in {0,1}; tau = 0
        NoMargin,           // maximization domain empty; tau unavailable (NaN)
        Unbounded,          // condition holds for any finite lambda_max; tau = +inf
    } kind = Kind::Regular;
};

// kappa(s) = n exp(s/b) [(b s + d)/d]^(-(b s + d)/b^2), evaluated in log space.
double kappa_concentration(int n, double b, double d, double s);

AmeiMargin amei_margin(const AmeiNet& net, const EpidemicParams& ep);

struct AmeiExtinctReport {
    bool extinct = false;
    bool certified = true; // false when no margin is available
    double lambda_max_a2 = 0;
    AmeiMargin margin;
};

// Certified extinction test: lambda_max(B Abar - D) < tau.
AmeiExtinctReport amei_extinct(const AmeiNet& net, const EpidemicParams& ep);

// State indexing of the adaptive-SIS stability matrix: first the n node
// coordinates, then one coordinate per ordered pair (i, j) with j a neighbor
// of i in g0, ordered by i ascending then j ascending.
struct AsisIndex {
    explicit AsisIndex(const StaticGraph& g0);
    int n = 0;
    int q_dim = 0;
    std::vector<std::vector<int>> neigh; // sorted adjacency of g0
    std::vector<int> q_offset;           // per node, first q coordinate
    int q_index(int i, int j) const;     // position of (i,j) within the q block
    int dim() const { return n + q_dim; }
};

// Stability matrix of the adaptive SIS model, dimension n + sum_i deg_i.
MetzlerMatrix build_A3(const AsisModel& m, const EpidemicParams& ep);

// Supremum beta_c with evaluator(beta) < target, located by bisection.
// evaluator must be monotone nondecreasing; requires a sign change on
// [lo, hi] and throws otherwise (reporting the endpoint values).
double threshold_beta(const std::function<double(double)>& evaluator,
                      double target, double lo, double hi, double tol);

struct ThresholdCurve {
    std::vector<std::pair<double, double>> points; // (delta, beta_c)
};

} // namespace epictrl
