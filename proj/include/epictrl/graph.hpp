#pragma once

#include <Eigen/Dense>
#include <array>
#include <utility>
#include <vector>

#include "epictrl/errors.hpp"

namespace epictrl {

using NodePair = std::pair<int, int>; // normalized: first < second

// Undirected simple graph over n indexed nodes (0-based). Immutable after
// construction; the adjacency matrix is the source of truth for every
// graph-valued quantity downstream.
class StaticGraph {
public:
    StaticGraph(int n, std::vector<NodePair> edges);

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<NodePair>& edges() const { return edges_; }
    const std::vector<std::vector<int>>& neighbors() const { return neigh_; }
    int degree(int i) const { return static_cast<int>(neigh_[i].size()); }
    bool has_edge(int i, int j) const;

    // dense symmetric 0/1 matrix with zero diagonal
    Eigen::MatrixXd adjacency() const;

private:
    int n_;
    std::vector<NodePair> edges_; // sorted, normalized
    std::vector<std::vector<int>> neigh_;
};

// The bundled Zachary Karate Club network (34 nodes, 78 edges).
StaticGraph karate();

// Frozen 2-D layout for the karate nodes, in [0,1]^2 (used by SVG output).
const std::array<std::array<double, 2>, 34>& karate_layout();

struct Partition {
    std::vector<int> cluster_of; // per node, value 1 or 2
};

// Two-way split by the sign of the Fiedler vector of the combinatorial
// Laplacian. The vector is flipped so node 0's entry is >= 0; entries with
// |v_i| < 1e-12 go to cluster 1. Throws on disconnected input.
Partition spectral_bisection(const StaticGraph& g);

struct EdgeClassification {
    // parallel to g.edges(): 1 = within cluster 1, 2 = within cluster 2,
    // 3 = between clusters
    std::vector<int> class_of;

    int count_class(int c) const;
};

EdgeClassification classify_edges(const StaticGraph& g, const Partition& p);

bool is_connected(const StaticGraph& g);

} // namespace epictrl
