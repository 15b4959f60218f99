#include "epictrl/temporal.hpp"

#include <algorithm>
#include <cmath>

#include "epictrl/linalg.hpp"

namespace epictrl {

EpidemicParams::EpidemicParams(Eigen::VectorXd b, Eigen::VectorXd d)
    : beta(std::move(b)), delta(std::move(d)) {
    if (beta.size() != delta.size() || beta.size() == 0)
        throw Error("EpidemicParams: beta and delta must have equal positive length");
    if ((beta.array() <= 0).any() || (delta.array() <= 0).any())
        throw Error("EpidemicParams: all rates must be positive");
}

EpidemicParams EpidemicParams::homogeneous(int n, double beta, double delta) {
    return EpidemicParams(Eigen::VectorXd::Constant(n, beta),
                          Eigen::VectorXd::Constant(n, delta));
}

MarkovTemporalNet::MarkovTemporalNet(std::vector<StaticGraph> configs,
                                     Eigen::MatrixXd rates)
    : configs_(std::move(configs)), rates_(std::move(rates)) {
    if (configs_.empty()) throw Error("MarkovTemporalNet: need at least one configuration");
    const int n = configs_.front().node_count();
    for (const auto& g : configs_)
        if (g.node_count() != n)
            throw Error("MarkovTemporalNet: configurations must share the node set");
    const int l = config_count();
    if (rates_.rows() != l || rates_.cols() != l)
        throw Error("MarkovTemporalNet: rate matrix must be LxL");
    for (int k = 0; k < l; ++k) {
        for (int j = 0; j < l; ++j) {
            if (k == j) continue;
            if (!(rates_(k, j) >= 0.0) || !std::isfinite(rates_(k, j)))
                throw Error("MarkovTemporalNet: off-diagonal rates must be nonnegative and finite");
        }
    }
    for (int k = 0; k < l; ++k) {
        rates_(k, k) = 0.0;
        rates_(k, k) = -rates_.row(k).sum();
    }
}

EdgeProcess::EdgeProcess(Eigen::MatrixXd gen, std::vector<int> active)
    : generator(std::move(gen)), active_states(std::move(active)) {
    const int m = static_cast<int>(generator.rows());
    if (m < 1 || generator.cols() != m) throw Error("EdgeProcess: generator must be square, M >= 1");
    if (m > 64) throw Error("EdgeProcess: state count capped at 64");
    for (int i = 0; i < m; ++i) {
        double row = 0.0;
        for (int j = 0; j < m; ++j) {
            if (i != j && generator(i, j) < 0)
                throw Error("EdgeProcess: off-diagonal generator entries must be >= 0");
            row += generator(i, j);
        }
        if (std::abs(row) > 1e-9 * (1.0 + generator.cwiseAbs().maxCoeff()))
            throw Error("EdgeProcess: generator rows must sum to 0");
    }
    std::sort(active_states.begin(), active_states.end());
    active_states.erase(std::unique(active_states.begin(), active_states.end()),
                        active_states.end());
    for (int s : active_states)
        if (s < 0 || s >= m) throw Error("EdgeProcess: active state out of range");
}

bool EdgeProcess::is_active(int state) const {
    return std::binary_search(active_states.begin(), active_states.end(), state);
}

EdgeProcess EdgeProcess::two_state(double activation, double deactivation) {
    if (activation < 0 || deactivation < 0)
        throw Error("EdgeProcess::two_state: rates must be nonnegative");
    Eigen::MatrixXd q(2, 2);
    q << -deactivation, deactivation, activation, -activation;
    return EdgeProcess(q, {0});
}

void AmeiNet::set_process(int i, int j, EdgeProcess p) {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= n_ || i == j) throw Error("AmeiNet: invalid node pair");
    processes_.insert_or_assign(NodePair{i, j}, std::move(p));
}

const EdgeProcess* AmeiNet::process(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto it = processes_.find(NodePair{i, j});
    return it == processes_.end() ? nullptr : &it->second;
}

AsisModel::AsisModel(StaticGraph g, Eigen::VectorXd ph, std::map<NodePair, double> ps)
    : g0(std::move(g)), phi(std::move(ph)), psi(std::move(ps)) {
    if (phi.size() != g0.node_count()) throw Error("AsisModel: phi length must equal node count");
    if ((phi.array() < 0).any()) throw Error("AsisModel: cutting rates must be >= 0");
    for (const auto& [u, v] : g0.edges()) {
        auto it = psi.find(NodePair{u, v});
        if (it == psi.end())
            throw Error("AsisModel: psi missing for edge (" + std::to_string(u) + "," +
                        std::to_string(v) + ")");
        if (!(it->second > 0)) throw Error("AsisModel: reconnecting rates must be positive");
    }
    for (const auto& [e, r] : psi) {
        (void)r;
        if (!g0.has_edge(e.first, e.second))
            throw Error("AsisModel: psi defined for a non-edge of g0");
    }
}

AsisModel AsisModel::homogeneous(StaticGraph g, double phi, double psi) {
    const int n = g.node_count();
    std::map<NodePair, double> ps;
    for (const auto& e : g.edges()) ps[e] = psi;
    return AsisModel(std::move(g), Eigen::VectorXd::Constant(n, phi), std::move(ps));
}

double AsisModel::psi_at(int i, int j) const {
    if (i > j) std::swap(i, j);
    return psi.at(NodePair{i, j});
}

namespace {

// configuration order of the Markovian Karate network: active-class subsets
const std::vector<std::vector<int>> kKarateClassSubsets = {
    {1, 2, 3}, {1, 2}, {2, 3}, {1, 3}, {1}, {2}, {3}, {}};

void check_positive_rates(std::initializer_list<double> rates) {
    for (double r : rates)
        if (!(r > 0) || !std::isfinite(r)) throw Error("class rates must be positive and finite");
}

} // namespace

MarkovTemporalNet markov_karate(double p1, double q1, double p2, double q2,
                                double p3, double q3) {
    check_positive_rates({p1, q1, p2, q2, p3, q3});
    const StaticGraph g = karate();
    const Partition part = spectral_bisection(g);
    const EdgeClassification ec = classify_edges(g, part);
    const double p[4] = {0, p1, p2, p3};
    const double q[4] = {0, q1, q2, q3};

    std::vector<StaticGraph> configs;
    configs.reserve(kKarateClassSubsets.size());
    for (const auto& subset : kKarateClassSubsets) {
        std::vector<NodePair> edges;
        for (int e = 0; e < g.edge_count(); ++e) {
            const int c = ec.class_of[e];
            if (std::find(subset.begin(), subset.end(), c) != subset.end())
                edges.push_back(g.edges()[e]);
        }
        configs.emplace_back(g.node_count(), std::move(edges));
    }

    const int l = static_cast<int>(kKarateClassSubsets.size());
    Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(l, l);
    for (int k = 0; k < l; ++k) {
        for (int c = 1; c <= 3; ++c) {
            const auto& sk = kKarateClassSubsets[k];
            const bool active = std::find(sk.begin(), sk.end(), c) != sk.end();
            std::vector<int> target = sk;
            if (active)
                target.erase(std::find(target.begin(), target.end(), c));
            else {
                target.push_back(c);
                std::sort(target.begin(), target.end());
            }
            const auto it = std::find(kKarateClassSubsets.begin(), kKarateClassSubsets.end(), target);
            const int j = static_cast<int>(it - kKarateClassSubsets.begin());
            rates(k, j) = active ? q[c] : p[c];
        }
    }
    return MarkovTemporalNet(std::move(configs), std::move(rates));
}

AmeiNet amei_karate(double p1, double q1, double p2, double q2, double p3,
                    double q3) {
    check_positive_rates({p1, q1, p2, q2, p3, q3});
    const StaticGraph g = karate();
    const Partition part = spectral_bisection(g);
    const EdgeClassification ec = classify_edges(g, part);
    const double p[4] = {0, p1, p2, p3};
    const double q[4] = {0, q1, q2, q3};

    AmeiNet net(g.node_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        const int c = ec.class_of[e];
        net.set_process(g.edges()[e].first, g.edges()[e].second,
                        EdgeProcess::two_state(p[c], q[c]));
    }
    for (int i = 0; i < g.node_count(); ++i)
        for (int j = i + 1; j < g.node_count(); ++j)
            if (!g.has_edge(i, j)) net.set_process(i, j, EdgeProcess::two_state(0.0, 1.0));
    return net;
}

namespace {

// communicating classes of the generator's positive-transition digraph
std::vector<std::vector<int>> communicating_classes(const Eigen::MatrixXd& q) {
    const int m = static_cast<int>(q.rows());
    std::vector<std::vector<char>> reach(m, std::vector<char>(m, 0));
    for (int i = 0; i < m; ++i) {
        reach[i][i] = 1;
        for (int j = 0; j < m; ++j)
            if (i != j && q(i, j) > 0) reach[i][j] = 1;
    }
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
            if (reach[i][k])
                for (int j = 0; j < m; ++j)
                    if (reach[k][j]) reach[i][j] = 1;
    std::vector<int> cls(m, -1);
    std::vector<std::vector<int>> classes;
    for (int i = 0; i < m; ++i) {
        if (cls[i] >= 0) continue;
        classes.emplace_back();
        for (int j = 0; j < m; ++j) {
            if (cls[j] < 0 && reach[i][j] && reach[j][i]) {
                cls[j] = static_cast<int>(classes.size()) - 1;
                classes.back().push_back(j);
            }
        }
    }
    return classes;
}

} // namespace

double stationary_activation(const EdgeProcess& ep) {
    const int m = ep.state_count();
    if (m == 1) return ep.is_active(0) ? 1.0 : 0.0;

    const auto classes = communicating_classes(ep.generator);
    std::vector<const std::vector<int>*> closed;
    for (const auto& cl : classes) {
        bool is_closed = true;
        for (int s : cl) {
            for (int t = 0; t < m && is_closed; ++t) {
                if (ep.generator(s, t) > 0 &&
                    std::find(cl.begin(), cl.end(), t) == cl.end())
                    is_closed = false;
            }
            if (!is_closed) break;
        }
        if (is_closed) closed.push_back(&cl);
    }
    if (closed.size() != 1) throw Error("stationary distribution not unique");

    const auto& cl = *closed.front();
    const int mc = static_cast<int>(cl.size());
    Eigen::MatrixXd sub(mc, mc);
    for (int a = 0; a < mc; ++a)
        for (int b = 0; b < mc; ++b) sub(a, b) = ep.generator(cl[a], cl[b]);
    const Eigen::VectorXd pi = ctmc_stationary(sub);
    double act = 0.0;
    for (int a = 0; a < mc; ++a)
        if (ep.is_active(cl[a])) act += pi(a);
    return std::clamp(act, 0.0, 1.0);
}

Eigen::MatrixXd abar_matrix(const AmeiNet& net) {
    const int n = net.node_count();
    Eigen::MatrixXd abar = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [pair, ep] : net.processes()) {
        const double a = stationary_activation(ep);
        abar(pair.first, pair.second) = a;
        abar(pair.second, pair.first) = a;
    }
    return abar;
}

MarkovTemporalNet amei_to_markov(const AmeiNet& net, int max_configs) {
    std::vector<NodePair> pairs;
    std::vector<const EdgeProcess*> procs;
    long long total = 1;
    for (const auto& [pair, ep] : net.processes()) {
        pairs.push_back(pair);
        procs.push_back(&ep);
        total *= ep.state_count();
        if (total > max_configs)
            throw CapError("amei_to_markov: configuration count exceeds cap");
    }
    const int np = static_cast<int>(pairs.size());
    const int l = static_cast<int>(total);

    // configuration index <-> per-pair state tuple (mixed radix, pair 0 fastest)
    auto states_of = [&](int idx) {
        std::vector<int> s(np);
        for (int k = 0; k < np; ++k) {
            const int m = procs[k]->state_count();
            s[k] = idx % m;
            idx /= m;
        }
        return s;
    };
    auto index_of = [&](const std::vector<int>& s) {
        int idx = 0;
        for (int k = np - 1; k >= 0; --k) idx = idx * procs[k]->state_count() + s[k];
        return idx;
    };

    std::vector<StaticGraph> configs;
    configs.reserve(l);
    Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(l, l);
    for (int idx = 0; idx < l; ++idx) {
        const auto s = states_of(idx);
        std::vector<NodePair> edges;
        for (int k = 0; k < np; ++k)
            if (procs[k]->is_active(s[k])) edges.push_back(pairs[k]);
        configs.emplace_back(net.node_count(), std::move(edges));
        for (int k = 0; k < np; ++k) {
            for (int t = 0; t < procs[k]->state_count(); ++t) {
                if (t == s[k] || procs[k]->generator(s[k], t) <= 0) continue;
                auto s2 = s;
                s2[k] = t;
                rates(idx, index_of(s2)) += procs[k]->generator(s[k], t);
            }
        }
    }
    return MarkovTemporalNet(std::move(configs), std::move(rates));
}

} // namespace epictrl
