#include "epictrl/graph.hpp"

#include <algorithm>
#include <cmath>

#include "epictrl/linalg.hpp"

namespace epictrl {

StaticGraph::StaticGraph(int n, std::vector<NodePair> edges) : n_(n) {
    if (n <= 0) throw Error("StaticGraph: node count must be positive");
    for (auto& e : edges) {
        if (e.first > e.second) std::swap(e.first, e.second);
        if (e.first == e.second) throw Error("StaticGraph: self-loop at node " + std::to_string(e.first));
        if (e.first < 0 || e.second >= n)
            throw Error("StaticGraph: edge (" + std::to_string(e.first) + "," +
                        std::to_string(e.second) + ") out of range for n=" + std::to_string(n));
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
        throw Error("StaticGraph: duplicate edge");
    edges_ = std::move(edges);
    neigh_.assign(n_, {});
    for (const auto& [u, v] : edges_) {
        neigh_[u].push_back(v);
        neigh_[v].push_back(u);
    }
    for (auto& nb : neigh_) std::sort(nb.begin(), nb.end());
}

bool StaticGraph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges_.begin(), edges_.end(), NodePair{i, j});
}

Eigen::MatrixXd StaticGraph::adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& [u, v] : edges_) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

namespace {

// Zachary's karate club, 0-based, the standard 78-edge dataset.
constexpr int kKarateEdges[78][2] = {
    {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},
    {0, 8},   {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},
    {0, 21},  {0, 31},  {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},
    {1, 19},  {1, 21},  {1, 30},  {2, 3},   {2, 7},   {2, 8},   {2, 9},
    {2, 13},  {2, 27},  {2, 28},  {2, 32},  {3, 7},   {3, 12},  {3, 13},
    {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},  {6, 16},  {8, 30},
    {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33}, {15, 32},
    {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
    {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25},
    {24, 27}, {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31},
    {28, 33}, {29, 32}, {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33},
    {32, 33}};

// Force-directed layout, computed once and frozen (normalized to [0,1]^2).
const std::array<std::array<double, 2>, 34> kKarateLayout = {{
    {0.4724, 0.6366}, {0.3668, 0.5488}, {0.4663, 0.4612}, {0.2392, 0.5890},
    {0.6500, 0.7728}, {0.6554, 0.8568}, {0.5585, 0.8639}, {0.2569, 0.5379},
    {0.4332, 0.3693}, {0.8556, 0.3465}, {0.7799, 0.7988}, {0.3418, 0.8340},
    {0.0000, 0.6820}, {0.3617, 0.4673}, {0.4414, 0.0545}, {0.3400, 0.1239},
    {0.6671, 1.0000}, {0.2758, 0.7655}, {0.3399, 0.0009}, {0.6249, 0.5279},
    {0.1851, 0.0767}, {0.1884, 0.6975}, {0.1933, 0.1723}, {0.6626, 0.1629},
    {1.0000, 0.2220}, {0.8402, 0.2064}, {0.6755, 0.0000}, {0.7295, 0.2536},
    {0.6870, 0.3821}, {0.5985, 0.0790}, {0.3105, 0.3232}, {0.6728, 0.3075},
    {0.4401, 0.1989}, {0.5007, 0.2323},
}};

} // namespace

StaticGraph karate() {
    std::vector<NodePair> edges;
    edges.reserve(78);
    for (const auto& e : kKarateEdges) edges.emplace_back(e[0], e[1]);
    return StaticGraph(34, std::move(edges));
}

const std::array<std::array<double, 2>, 34>& karate_layout() { return kKarateLayout; }

bool is_connected(const StaticGraph& g) {
    const int n = g.node_count();
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : g.neighbors()[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == n;
}

Partition spectral_bisection(const StaticGraph& g) {
    if (!is_connected(g)) throw Error("graph not connected");
    const int n = g.node_count();
    Eigen::MatrixXd a = g.adjacency();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) lap(i, i) = a.row(i).sum();
    lap -= a;

    Eigen::VectorXd evals;
    Eigen::MatrixXd evecs;
    jacobi_symmetric_eig(lap, evals, evecs);
    Eigen::VectorXd fiedler = evecs.col(1);
    if (fiedler(0) < 0.0) fiedler = -fiedler;

    Partition p;
    p.cluster_of.resize(n);
    for (int i = 0; i < n; ++i) {
        // zero entries (|v_i| < 1e-12) go to cluster 1, with node 0's sign
        p.cluster_of[i] = (fiedler(i) > -1e-12) ? 1 : 2;
    }
    return p;
}

int EdgeClassification::count_class(int c) const {
    int k = 0;
    for (int x : class_of)
        if (x == c) ++k;
    return k;
}

EdgeClassification classify_edges(const StaticGraph& g, const Partition& p) {
    if (static_cast<int>(p.cluster_of.size()) != g.node_count())
        throw Error("classify_edges: partition does not cover the graph");
    EdgeClassification ec;
    ec.class_of.reserve(g.edge_count());
    for (const auto& [u, v] : g.edges()) {
        const int cu = p.cluster_of[u], cv = p.cluster_of[v];
        ec.class_of.push_back(cu != cv ? 3 : cu);
    }
    return ec;
}

} // namespace epictrl
