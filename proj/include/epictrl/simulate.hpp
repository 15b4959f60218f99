#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "epictrl/spectral.hpp"
#include "epictrl/temporal.hpp"

namespace epictrl {

struct SimConfig {
    double horizon = 10.0;
    std::uint64_t seed = 0;
    std::vector<int> x0; // 0/1 per node

    int config0 = 0;                     // Markovian models: initial configuration
    std::map<NodePair, int> pair_state0; // AMEI overrides; default: first inactive state
    std::vector<int> edges0;             // adaptive model: 0/1 per g0 edge; empty = all active

    double sample_dt = 0.0; // prevalence sampling grid; 0 = horizon / 200
    bool record_events = true;
};

enum class EventKind {
    Recovery,       // a = node
    Infection,      // a = node
    NetworkSwitch,  // a = new configuration
    PairTransition, // a,b = pair, c = new state
    EdgeCut,        // a,b = endpoints
    EdgeRestore,    // a,b = endpoints
};

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Recovery;
    int a = -1, b = -1, c = -1;
};

struct Trajectory {
    std::vector<Event> events; // strictly increasing times
    double sample_dt = 0.0;
    std::vector<double> sampled; // prevalence at k * sample_dt
};

// Statistically exact next-event simulation with full rate recomputation
// after every event.
Trajectory gillespie_markov(const MarkovTemporalNet& net, const EpidemicParams& ep,
                            const SimConfig& cfg);
Trajectory gillespie_amei(const AmeiNet& net, const EpidemicParams& ep,
                          const SimConfig& cfg);
Trajectory gillespie_asis(const AsisModel& model, const EpidemicParams& ep,
                          const SimConfig& cfg);

// replay helper: node states at time t from the event log
std::vector<int> infection_state_at(const Trajectory& tr, std::vector<int> x0, double t);

struct MarginalTable {
    std::vector<double> times;
    Eigen::MatrixXd marginals; // times x n, Pr(x_i(t) = 1)
    Eigen::VectorXd total() const { return marginals.rowwise().sum(); }
};

// Exact marginals of the joint (nodes x configuration) chain, by building the
// full generator on {0,1}^n x {1..L} and integrating the forward equation
// with adaptive RK4. Caps: n <= 10 and 2^n L <= 4096.
MarginalTable master_equation_marginals(const MarkovTemporalNet& net,
                                        const EpidemicParams& ep,
                                        const std::vector<double>& t_grid,
                                        const std::vector<int>& x0, int config0 = 0);

// RK4 integration of dp/dt = mat p on a fixed step <= 1e-3 of the matrix
// time scale; rows of the result follow t_grid.
Eigen::MatrixXd mean_field_ode(const MetzlerMatrix& mat, const Eigen::VectorXd& p0,
                               const std::vector<double>& t_grid);

struct WindowStats {
    double mean_prevalence = 0.0; // time average over the measurement window
    bool survived = false;        // prevalence > 0 at window start
};

using RunSimulator = std::function<WindowStats(int run_index)>;

struct MetastableEstimate {
    double y_star = 0.0;
    double stderr_ = 0.0;
    double survived_fraction = 0.0;
    int surviving_runs = 0;
};

// Mean prevalence conditioned on survival, after discarding the first
// burn_in_fraction of each run. Reports y_star = 0 when fewer than 5% of
// runs survive to the window start. Runs execute concurrently when
// EPICTRL_THREADS (or the hardware) allows; the reduction is order-fixed.
MetastableEstimate metastable_count(const RunSimulator& simulate_run, int runs,
                                    double burn_in_fraction);

// window-statistics runners with per-run substreams (seed ^ run_index)
RunSimulator make_markov_runner(const MarkovTemporalNet& net, const EpidemicParams& ep,
                                const SimConfig& base, double burn_in_fraction);
RunSimulator make_amei_runner(const AmeiNet& net, const EpidemicParams& ep,
                              const SimConfig& base, double burn_in_fraction);
RunSimulator make_asis_runner(const AsisModel& model, const EpidemicParams& ep,
                              const SimConfig& base, double burn_in_fraction);

} // namespace epictrl
