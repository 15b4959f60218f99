#include "epictrl/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "epictrl/rng.hpp"

namespace epictrl {

namespace {

void check_x0(const std::vector<int>& x0, int n) {
    if (static_cast<int>(x0.size()) != n) throw Error("SimConfig: x0 length must equal node count");
    for (int v : x0)
        if (v != 0 && v != 1) throw Error("SimConfig: x0 entries must be 0 or 1");
}

// Collects the event stream into a Trajectory with a uniform prevalence grid.
class TrajectoryBuilder {
public:
    TrajectoryBuilder(const SimConfig& cfg, int prevalence0) : cfg_(cfg) {
        dt_ = cfg.sample_dt > 0 ? cfg.sample_dt : cfg.horizon / 200.0;
        grid_count_ = static_cast<std::size_t>(std::floor(cfg.horizon / dt_)) + 1;
        tr_.sample_dt = dt_;
        tr_.sampled.reserve(grid_count_);
        last_prev_ = prevalence0;
    }

    bool handle(double t, EventKind k, int a, int b, int c, int prevalence) {
        fill_grid_until(t);
        if (cfg_.record_events) tr_.events.push_back(Event{t, k, a, b, c});
        last_prev_ = prevalence;
        return true;
    }

    Trajectory finish() {
        fill_grid_until(cfg_.horizon + dt_);
        return std::move(tr_);
    }

private:
    void fill_grid_until(double t) {
        while (tr_.sampled.size() < grid_count_ &&
               static_cast<double>(tr_.sampled.size()) * dt_ < t)
            tr_.sampled.push_back(static_cast<double>(last_prev_));
    }

    const SimConfig& cfg_;
    Trajectory tr_;
    double dt_ = 0;
    std::size_t grid_count_ = 0;
    int last_prev_ = 0;
};

// Integrates prevalence over the measurement window; stops the run early
// once the disease-free state is absorbed (prevalence can never recover).
class WindowAccumulator {
public:
    WindowAccumulator(double window_start, double horizon, int prevalence0)
        : wstart_(window_start), horizon_(horizon), last_prev_(prevalence0) {}

    bool handle(double t, EventKind, int, int, int, int prevalence) {
        advance(t);
        last_prev_ = prevalence;
        // the disease-free state is absorbing: nothing after it changes the
        // window statistics
        return last_prev_ > 0;
    }

    WindowStats finish() {
        advance(horizon_);
        WindowStats w;
        w.survived = survived_;
        const double len = horizon_ - wstart_;
        w.mean_prevalence = len > 0 ? integral_ / len : 0.0;
        return w;
    }

private:
    void advance(double t) {
        const double a = std::max(last_t_, wstart_);
        const double b = std::min(t, horizon_);
        if (b > a) integral_ += static_cast<double>(last_prev_) * (b - a);
        if (last_t_ <= wstart_ && t > wstart_) survived_ = last_prev_ > 0;
        last_t_ = t;
    }

    double wstart_, horizon_;
    double last_t_ = 0.0;
    double integral_ = 0.0;
    int last_prev_;
    bool survived_ = false;
};

// ---- engines ---------------------------------------------------------------

template <class Obs>
void run_markov(const MarkovTemporalNet& net, const EpidemicParams& ep,
                const SimConfig& cfg, Obs& obs) {
    const int n = net.node_count();
    const int l = net.config_count();
    check_x0(cfg.x0, n);
    if (cfg.config0 < 0 || cfg.config0 >= l) throw Error("SimConfig: config0 out of range");

    std::vector<int> x = cfg.x0;
    int conf = cfg.config0;
    int prevalence = std::accumulate(x.begin(), x.end(), 0);
    CounterRng rng(cfg.seed);
    std::vector<double> rates(n + l, 0.0);

    double t = 0.0;
    while (true) {
        const auto& neigh = net.config(conf).neighbors();
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double r;
            if (x[i]) {
                r = ep.delta(i);
            } else {
                int inf = 0;
                for (int j : neigh[i]) inf += x[j];
                r = ep.beta(i) * inf;
            }
            rates[i] = r;
            total += r;
        }
        for (int k = 0; k < l; ++k) {
            const double r = (k == conf) ? 0.0 : net.rates()(conf, k);
            rates[n + k] = r;
            total += r;
        }
        if (total <= 0.0) break;
        t += rng.exponential(total);
        if (t > cfg.horizon) break;
        double u = rng.uniform01() * total;
        int pick = -1;
        for (int idx = 0; idx < n + l; ++idx) {
            if (rates[idx] <= 0) continue;
            pick = idx;
            if (u < rates[idx]) break;
            u -= rates[idx];
        }
        if (pick < n) {
            x[pick] ^= 1;
            prevalence += x[pick] ? 1 : -1;
            if (!obs.handle(t, x[pick] ? EventKind::Infection : EventKind::Recovery,
                            pick, -1, -1, prevalence))
                break;
        } else {
            conf = pick - n;
            if (!obs.handle(t, EventKind::NetworkSwitch, conf, -1, -1, prevalence)) break;
        }
    }
}

template <class Obs>
void run_amei(const AmeiNet& net, const EpidemicParams& ep, const SimConfig& cfg,
              Obs& obs) {
    const int n = net.node_count();
    check_x0(cfg.x0, n);

    std::vector<NodePair> pairs;
    std::vector<const EdgeProcess*> procs;
    std::vector<int> state;
    for (const auto& [pair, proc] : net.processes()) {
        pairs.push_back(pair);
        procs.push_back(&proc);
        int s0 = 0;
        for (int s = 0; s < proc.state_count(); ++s) {
            if (!proc.is_active(s)) {
                s0 = s;
                break;
            }
        }
        const auto ov = cfg.pair_state0.find(pair);
        if (ov != cfg.pair_state0.end()) {
            if (ov->second < 0 || ov->second >= proc.state_count())
                throw Error("SimConfig: pair_state0 out of range");
            s0 = ov->second;
        }
        state.push_back(s0);
    }
    const int np = static_cast<int>(pairs.size());

    std::vector<int> x = cfg.x0;
    int prevalence = std::accumulate(x.begin(), x.end(), 0);
    CounterRng rng(cfg.seed);

    struct Cand {
        double rate;
        int what; // node index, or n + pair index
        int target;
    };
    std::vector<Cand> cands;
    std::vector<int> pressure(n, 0);

    double t = 0.0;
    while (true) {
        cands.clear();
        std::fill(pressure.begin(), pressure.end(), 0);
        for (int k = 0; k < np; ++k) {
            if (procs[k]->is_active(state[k])) {
                const auto [i, j] = pairs[k];
                if (x[i]) ++pressure[j];
                if (x[j]) ++pressure[i];
            }
        }
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = x[i] ? ep.delta(i) : ep.beta(i) * pressure[i];
            if (r > 0) {
                cands.push_back({r, i, -1});
                total += r;
            }
        }
        for (int k = 0; k < np; ++k) {
            const auto& q = procs[k]->generator;
            for (int s2 = 0; s2 < procs[k]->state_count(); ++s2) {
                if (s2 == state[k]) continue;
                const double r = q(state[k], s2);
                if (r > 0) {
                    cands.push_back({r, n + k, s2});
                    total += r;
                }
            }
        }
        if (total <= 0.0) break;
        t += rng.exponential(total);
        if (t > cfg.horizon) break;
        double u = rng.uniform01() * total;
        std::size_t pick = 0;
        while (pick + 1 < cands.size() && u >= cands[pick].rate) u -= cands[pick++].rate;
        const Cand& c = cands[pick];
        if (c.what < n) {
            x[c.what] ^= 1;
            prevalence += x[c.what] ? 1 : -1;
            if (!obs.handle(t, x[c.what] ? EventKind::Infection : EventKind::Recovery,
                            c.what, -1, -1, prevalence))
                break;
        } else {
            const int k = c.what - n;
            state[k] = c.target;
            if (!obs.handle(t, EventKind::PairTransition, pairs[k].first, pairs[k].second,
                            c.target, prevalence))
                break;
        }
    }
}

template <class Obs>
void run_asis(const AsisModel& model, const EpidemicParams& ep, const SimConfig& cfg,
              Obs& obs) {
    const int n = model.g0.node_count();
    check_x0(cfg.x0, n);
    const auto& edges = model.g0.edges();
    const int ne = static_cast<int>(edges.size());
    std::vector<int> active(ne, 1);
    if (!cfg.edges0.empty()) {
        if (static_cast<int>(cfg.edges0.size()) != ne)
            throw Error("SimConfig: edges0 length must equal the g0 edge count");
        active = cfg.edges0;
    }
    std::vector<double> psi(ne);
    for (int e = 0; e < ne; ++e) psi[e] = model.psi_at(edges[e].first, edges[e].second);

    std::vector<int> x = cfg.x0;
    int prevalence = std::accumulate(x.begin(), x.end(), 0);
    CounterRng rng(cfg.seed);

    std::vector<double> rates(n + ne, 0.0);
    std::vector<int> pressure(n, 0);

    double t = 0.0;
    while (true) {
        std::fill(pressure.begin(), pressure.end(), 0);
        for (int e = 0; e < ne; ++e) {
            if (!active[e]) continue;
            const auto [i, j] = edges[e];
            if (x[i]) ++pressure[j];
            if (x[j]) ++pressure[i];
        }
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = x[i] ? ep.delta(i) : ep.beta(i) * pressure[i];
            rates[i] = r;
            total += r;
        }
        for (int e = 0; e < ne; ++e) {
            const auto [i, j] = edges[e];
            const double r = active[e] ? model.phi(i) * x[i] + model.phi(j) * x[j]
                                       : psi[e];
            rates[n + e] = r;
            total += r;
        }
        if (total <= 0.0) break;
        t += rng.exponential(total);
        if (t > cfg.horizon) break;
        double u = rng.uniform01() * total;
        int pick = -1;
        for (int idx = 0; idx < n + ne; ++idx) {
            if (rates[idx] <= 0) continue;
            pick = idx;
            if (u < rates[idx]) break;
            u -= rates[idx];
        }
        if (pick < n) {
            x[pick] ^= 1;
            prevalence += x[pick] ? 1 : -1;
            if (!obs.handle(t, x[pick] ? EventKind::Infection : EventKind::Recovery,
                            pick, -1, -1, prevalence))
                break;
        } else {
            const int e = pick - n;
            active[e] ^= 1;
            if (!obs.handle(t, active[e] ? EventKind::EdgeRestore : EventKind::EdgeCut,
                            edges[e].first, edges[e].second, -1, prevalence))
                break;
        }
    }
}

int prevalence0(const std::vector<int>& x0) {
    return std::accumulate(x0.begin(), x0.end(), 0);
}

} // namespace

Trajectory gillespie_markov(const MarkovTemporalNet& net, const EpidemicParams& ep,
                            const SimConfig& cfg) {
    TrajectoryBuilder b(cfg, prevalence0(cfg.x0));
    run_markov(net, ep, cfg, b);
    return b.finish();
}

Trajectory gillespie_amei(const AmeiNet& net, const EpidemicParams& ep,
                          const SimConfig& cfg) {
    TrajectoryBuilder b(cfg, prevalence0(cfg.x0));
    run_amei(net, ep, cfg, b);
    return b.finish();
}

Trajectory gillespie_asis(const AsisModel& model, const EpidemicParams& ep,
                          const SimConfig& cfg) {
    TrajectoryBuilder b(cfg, prevalence0(cfg.x0));
    run_asis(model, ep, cfg, b);
    return b.finish();
}

std::vector<int> infection_state_at(const Trajectory& tr, std::vector<int> x0, double t) {
    for (const auto& e : tr.events) {
        if (e.time > t) break;
        if (e.kind == EventKind::Infection) x0[e.a] = 1;
        if (e.kind == EventKind::Recovery) x0[e.a] = 0;
    }
    return x0;
}

// ---- master equation --------------------------------------------------------

MarginalTable master_equation_marginals(const MarkovTemporalNet& net,
                                        const EpidemicParams& ep,
                                        const std::vector<double>& t_grid,
                                        const std::vector<int>& x0, int config0) {
    const int n = net.node_count();
    const int l = net.config_count();
    check_x0(x0, n);
    if (config0 < 0 || config0 >= l) throw Error("master_equation: config0 out of range");
    if (n > 10 || (1 << n) * l > 4096)
        throw CapError("master_equation: state space exceeds the 2^n L <= 4096 cap");

    const int nbits = 1 << n;
    const int dim = nbits * l;

    // outgoing transitions per joint state (bits | config << n)
    std::vector<std::vector<std::pair<int, double>>> out(dim);
    for (int conf = 0; conf < l; ++conf) {
        const auto& neigh = net.config(conf).neighbors();
        for (int bits = 0; bits < nbits; ++bits) {
            const int s = conf * nbits + bits;
            auto& row = out[s];
            for (int i = 0; i < n; ++i) {
                if (bits & (1 << i)) {
                    row.emplace_back(conf * nbits + (bits & ~(1 << i)), ep.delta(i));
                } else {
                    int inf = 0;
                    for (int j : neigh[i]) inf += (bits >> j) & 1;
                    if (inf > 0)
                        row.emplace_back(conf * nbits + (bits | (1 << i)), ep.beta(i) * inf);
                }
            }
            for (int k = 0; k < l; ++k) {
                if (k == conf) continue;
                const double r = net.rates()(conf, k);
                if (r > 0) row.emplace_back(k * nbits + bits, r);
            }
        }
    }

    const auto deriv = [&](const Eigen::VectorXd& rho, Eigen::VectorXd& d) {
        d.setZero();
        for (int s = 0; s < dim; ++s) {
            const double ps = rho(s);
            if (ps == 0.0) continue;
            for (const auto& [tgt, r] : out[s]) {
                const double flow = ps * r;
                d(tgt) += flow;
                d(s) -= flow;
            }
        }
    };

    Eigen::VectorXd rho = Eigen::VectorXd::Zero(dim);
    int bits0 = 0;
    for (int i = 0; i < n; ++i)
        if (x0[i]) bits0 |= 1 << i;
    rho(config0 * nbits + bits0) = 1.0;

    std::vector<double> grid = t_grid;
    std::sort(grid.begin(), grid.end());

    MarginalTable table;
    table.times = grid;
    table.marginals.resize(static_cast<int>(grid.size()), n);

    const auto record = [&](int row) {
        for (int i = 0; i < n; ++i) {
            double p = 0.0;
            for (int s = 0; s < dim; ++s)
                if ((s % nbits) & (1 << i)) p += rho(s);
            table.marginals(row, i) = p;
        }
    };

    // adaptive RK4 by step doubling
    Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    const auto rk4 = [&](const Eigen::VectorXd& y, double h, Eigen::VectorXd& ynext) {
        deriv(y, k1);
        tmp = y + 0.5 * h * k1;
        deriv(tmp, k2);
        tmp = y + 0.5 * h * k2;
        deriv(tmp, k3);
        tmp = y + h * k3;
        deriv(tmp, k4);
        ynext = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    double t = 0.0;
    double h = 1e-3;
    const double tol = 1e-10;
    Eigen::VectorXd big(dim), half(dim), half2(dim);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const double target = grid[gi];
        while (t < target - 1e-15) {
            double step = std::min(h, target - t);
            while (true) {
                rk4(rho, step, big);
                rk4(rho, 0.5 * step, half);
                rk4(half, 0.5 * step, half2);
                const double err = (big - half2).cwiseAbs().maxCoeff() / 15.0;
                if (err <= tol || step < 1e-12) {
                    rho = half2;
                    t += step;
                    const double grow = err > 0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
                    h = std::clamp(step * std::clamp(grow, 0.2, 5.0), 1e-12, 1.0);
                    break;
                }
                step *= 0.5;
            }
        }
        record(static_cast<int>(gi));
    }
    return table;
}

Eigen::MatrixXd mean_field_ode(const MetzlerMatrix& mat, const Eigen::VectorXd& p0,
                               const std::vector<double>& t_grid) {
    const int n = mat.dim();
    if (p0.size() != n) throw Error("mean_field_ode: dimension mismatch");
    if ((p0.array() < 0).any() || (p0.array() > 1).any())
        throw Error("mean_field_ode: p0 entries must lie in [0,1]");
    const Eigen::MatrixXd& m = mat.matrix();
    const double scale = std::max(1.0, m.cwiseAbs().rowwise().sum().maxCoeff());
    const double h0 = 1e-3 / scale;

    std::vector<double> grid = t_grid;
    std::sort(grid.begin(), grid.end());
    Eigen::MatrixXd outp(static_cast<int>(grid.size()), n);

    Eigen::VectorXd p = p0;
    double t = 0.0;
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        while (t < grid[gi] - 1e-15) {
            const double hstep = std::min(h0, grid[gi] - t);
            k1 = m * p;
            k2 = m * (p + 0.5 * hstep * k1);
            k3 = m * (p + 0.5 * hstep * k2);
            k4 = m * (p + hstep * k3);
            p += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += hstep;
        }
        outp.row(static_cast<int>(gi)) = p.transpose();
    }
    return outp;
}

// ---- metastable estimation ---------------------------------------------------

namespace {

int thread_budget() {
    if (const char* env = std::getenv("EPICTRL_THREADS")) {
        const int k = std::atoi(env);
        if (k > 0) return k;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

} // namespace

MetastableEstimate metastable_count(const RunSimulator& simulate_run, int runs,
                                    double burn_in_fraction) {
    if (runs < 100) throw Error("metastable_count: need at least 100 runs");
    if (!(burn_in_fraction >= 0) || !(burn_in_fraction < 1))
        throw Error("metastable_count: burn_in_fraction must lie in [0,1)");

    std::vector<WindowStats> stats(runs);
    const int nthreads = std::min(thread_budget(), runs);
    if (nthreads <= 1) {
        for (int r = 0; r < runs; ++r) stats[r] = simulate_run(r);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int w = 0; w < nthreads; ++w) {
            pool.emplace_back([&, w]() {
                for (int r = w; r < runs; r += nthreads) stats[r] = simulate_run(r);
            });
        }
        for (auto& th : pool) th.join();
    }

    MetastableEstimate est;
    double sum = 0.0, sumsq = 0.0;
    for (const auto& s : stats) {
        if (!s.survived) continue;
        ++est.surviving_runs;
        sum += s.mean_prevalence;
        sumsq += s.mean_prevalence * s.mean_prevalence;
    }
    est.survived_fraction = static_cast<double>(est.surviving_runs) / runs;
    if (est.survived_fraction < 0.05) {
        est.y_star = 0.0;
        est.stderr_ = 0.0;
        return est;
    }
    const int k = est.surviving_runs;
    est.y_star = sum / k;
    if (k > 1) {
        const double var = std::max(0.0, (sumsq - sum * sum / k) / (k - 1));
        est.stderr_ = std::sqrt(var / k);
    }
    return est;
}

namespace {

SimConfig substream(const SimConfig& base, int run_index) {
    SimConfig cfg = base;
    cfg.seed = base.seed ^ static_cast<std::uint64_t>(run_index);
    cfg.record_events = false;
    return cfg;
}

} // namespace

RunSimulator make_markov_runner(const MarkovTemporalNet& net, const EpidemicParams& ep,
                                const SimConfig& base, double burn_in_fraction) {
    return [&net, &ep, base, burn_in_fraction](int run) {
        const SimConfig cfg = substream(base, run);
        WindowAccumulator acc(burn_in_fraction * cfg.horizon, cfg.horizon,
                              std::accumulate(cfg.x0.begin(), cfg.x0.end(), 0));
        run_markov(net, ep, cfg, acc);
        return acc.finish();
    };
}

RunSimulator make_amei_runner(const AmeiNet& net, const EpidemicParams& ep,
                              const SimConfig& base, double burn_in_fraction) {
    return [&net, &ep, base, burn_in_fraction](int run) {
        const SimConfig cfg = substream(base, run);
        WindowAccumulator acc(burn_in_fraction * cfg.horizon, cfg.horizon,
                              std::accumulate(cfg.x0.begin(), cfg.x0.end(), 0));
        run_amei(net, ep, cfg, acc);
        return acc.finish();
    };
}

RunSimulator make_asis_runner(const AsisModel& model, const EpidemicParams& ep,
                              const SimConfig& base, double burn_in_fraction) {
    return [&model, &ep, base, burn_in_fraction](int run) {
        const SimConfig cfg = substream(base, run);
        WindowAccumulator acc(burn_in_fraction * cfg.horizon, cfg.horizon,
                              std::accumulate(cfg.x0.begin(), cfg.x0.end(), 0));
        run_asis(model, ep, cfg, acc);
        return acc.finish();
    };
}

} // namespace epictrl
