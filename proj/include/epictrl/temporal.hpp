#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "epictrl/graph.hpp"

namespace epictrl {

// Per-node infection (beta) and recovery (delta) rates, all positive.
struct EpidemicParams {
    Eigen::VectorXd beta;
    Eigen::VectorXd delta;

    EpidemicParams(Eigen::VectorXd beta, Eigen::VectorXd delta);
    static EpidemicParams homogeneous(int n, double beta, double delta);
    int node_count() const { return static_cast<int>(beta.size()); }
};

// A temporal network that jumps among L static configurations according to
// a continuous-time Markov chain: rate(k,l) is the transition rate from
// configuration k to configuration l. Diagonal entries of the input rate
// matrix are ignored and recomputed as -sum of the off-diagonal row.
class MarkovTemporalNet {
public:
    MarkovTemporalNet(std::vector<StaticGraph> configs, Eigen::MatrixXd rates);

    int config_count() const { return static_cast<int>(configs_.size()); }
    int node_count() const { return configs_.front().node_count(); }
    const StaticGraph& config(int l) const { return configs_[l]; }
    const Eigen::MatrixXd& rates() const { return rates_; } // diagonal = -row sum

private:
    std::vector<StaticGraph> configs_;
    Eigen::MatrixXd rates_;
};

// Finite-state Markov process attached to one node pair: the edge is present
// exactly while the process sits in a state of the active set.
struct EdgeProcess {
    Eigen::MatrixXd generator;      // M x M, off-diagonal >= 0, rows sum to 0
    std::vector<int> active_states; // 0-based subset of {0..M-1}; may be empty

    EdgeProcess(Eigen::MatrixXd generator, std::vector<int> active_states);
    int state_count() const { return static_cast<int>(generator.rows()); }
    bool is_active(int state) const;

    // two states: 0 = active, 1 = inactive; activation rate p (1 -> 0),
    // deactivation rate q (0 -> 1)
    static EdgeProcess two_state(double activation, double deactivation);
};

// Aggregated-Markovian edge-independent temporal network: one independent
// EdgeProcess per node pair; pairs without a process are permanently inactive.
class AmeiNet {
public:
    explicit AmeiNet(int n) : n_(n) {
        if (n <= 0) throw Error("AmeiNet: node count must be positive");
    }

    void set_process(int i, int j, EdgeProcess p);
    const EdgeProcess* process(int i, int j) const; // nullptr if absent
    const std::map<NodePair, EdgeProcess>& processes() const { return processes_; }
    int node_count() const { return n_; }

private:
    int n_;
    std::map<NodePair, EdgeProcess> processes_;
};

// Adaptive SIS: edges of the initial graph g0 are cut at rate
// phi_i x_i + phi_j x_j and reconnected at rate psi_ij.
struct AsisModel {
    StaticGraph g0;
    Eigen::VectorXd phi;            // per node, >= 0
    std::map<NodePair, double> psi; // defined exactly on edges of g0, > 0

    AsisModel(StaticGraph g0, Eigen::VectorXd phi, std::map<NodePair, double> psi);
    static AsisModel homogeneous(StaticGraph g0, double phi, double psi);
    double psi_at(int i, int j) const;
};

// Markovian Karate network: spectral-bisection edge classes appear and
// disappear simultaneously, giving 2^3 = 8 configurations. Configuration
// order: {1,2,3}, {1,2}, {2,3}, {1,3}, {1}, {2}, {3}, {} (active classes).
MarkovTemporalNet markov_karate(double p1, double q1, double p2, double q2,
                                double p3, double q3);

// AMEI Karate network: each edge gets an independent two-state process with
// its class rates; non-edges get activation 0 and deactivation 1.
AmeiNet amei_karate(double p1, double q1, double p2, double q2, double p3,
                    double q3);

// Long-run probability of finding the process in its active set. Requires a
// unique closed communicating class; throws otherwise.
double stationary_activation(const EdgeProcess& ep);

// Matrix of long-run edge activation probabilities (symmetric, zero diagonal).
Eigen::MatrixXd abar_matrix(const AmeiNet& net);

// Exact Markovian representation of a small AMEI network: one configuration
// per combination of pair states. Throws CapError if the configuration count
// would exceed max_configs.
MarkovTemporalNet amei_to_markov(const AmeiNet& net, int max_configs = 4096);

} // namespace epictrl
