#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

#include "epictrl/graph.hpp"
#include "epictrl/model_io.hpp"
#include "epictrl/rng.hpp"

using namespace epictrl;

namespace {

// oracle: exhaustive minimum cut over all 2-partitions with both sides non-empty
std::vector<int> brute_force_min_cut(const StaticGraph& g) {
    const int n = g.node_count();
    REQUIRE(n <= 16);
    int best_cut = 1 << 30;
    unsigned best_mask = 1;
    for (unsigned mask = 1; mask < (1u << n) - 1; ++mask) {
        int cut = 0;
        for (const auto& [u, v] : g.edges())
            if (((mask >> u) & 1) != ((mask >> v) & 1)) ++cut;
        if (cut < best_cut) {
            best_cut = cut;
            best_mask = mask;
        }
    }
    std::vector<int> side(n);
    for (int i = 0; i < n; ++i) side[i] = (best_mask >> i) & 1;
    return side;
}

// oracle: Fiedler vector by Eigen's independent symmetric eigensolver
Eigen::VectorXd eigen_fiedler(const StaticGraph& g) {
    Eigen::MatrixXd a = g.adjacency();
    Eigen::MatrixXd lap = -a;
    for (int i = 0; i < g.node_count(); ++i) lap(i, i) = a.row(i).sum();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
    return es.eigenvectors().col(1);
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    REQUIRE(a.size() == b.size());
    bool direct = true, flipped = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        direct = direct && (a[i] == b[i]);
        flipped = flipped && (a[i] != b[i]);
    }
    return direct || flipped;
}

} // namespace

TEST_CASE("adjacency basics") {
    StaticGraph path2(2, {{0, 1}});
    Eigen::MatrixXd a = path2.adjacency();
    CHECK(a(0, 1) == 1.0);
    CHECK(a(1, 0) == 1.0);
    CHECK(a(0, 0) == 0.0);

    StaticGraph tri(3, {{0, 1}, {0, 2}, {1, 2}});
    Eigen::MatrixXd t = tri.adjacency();
    CHECK(t.sum() == 6.0);
    CHECK(t.diagonal().isZero());

    CHECK(karate().adjacency().sum() == 156.0);
}

TEST_CASE("graph validation") {
    CHECK_THROWS_AS(StaticGraph(3, {{0, 0}}), Error);
    CHECK_THROWS_AS(StaticGraph(3, {{0, 3}}), Error);
    CHECK_THROWS_AS(StaticGraph(3, {{0, 1}, {1, 0}}), Error); // duplicate after sorting
    CHECK_THROWS_AS(StaticGraph(0, {}), Error);
}

TEST_CASE("karate dataset") {
    const StaticGraph g = karate();
    CHECK(g.node_count() == 34);
    CHECK(g.edge_count() == 78);
    const Eigen::MatrixXd a = g.adjacency();
    CHECK(a.isApprox(a.transpose()));
    CHECK(a.diagonal().isZero());
}

TEST_CASE("spectral bisection identifies the two triangles") {
    // two triangles joined by a bridge: the min-cut oracle confirms the split
    StaticGraph g(6, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}, {2, 3}});
    const Partition p = spectral_bisection(g);
    const auto oracle = brute_force_min_cut(g);
    std::vector<int> got(6);
    for (int i = 0; i < 6; ++i) got[i] = p.cluster_of[i] == 1 ? 0 : 1;
    CHECK(same_partition(got, oracle));
}

TEST_CASE("spectral bisection matches the independent Fiedler oracle on a path") {
    StaticGraph g(4, {{0, 1}, {1, 2}, {2, 3}});
    const Partition p = spectral_bisection(g);
    CHECK(p.cluster_of[0] == p.cluster_of[1]);
    CHECK(p.cluster_of[2] == p.cluster_of[3]);
    CHECK(p.cluster_of[0] != p.cluster_of[2]);

    Eigen::VectorXd f = eigen_fiedler(g);
    if (f(0) < 0) f = -f;
    for (int i = 0; i < 4; ++i)
        CHECK(p.cluster_of[i] == (f(i) > 0 ? 1 : 2));
}

TEST_CASE("bisection rejects disconnected graphs") {
    StaticGraph g(4, {{0, 1}, {2, 3}});
    CHECK_THROWS_WITH_AS(spectral_bisection(g), "graph not connected", Error);
}

TEST_CASE("edge classification") {
    StaticGraph e(2, {{0, 1}});
    Partition p{{1, 2}};
    CHECK(classify_edges(e, p).class_of == std::vector<int>{3});

    StaticGraph tri(3, {{0, 1}, {0, 2}, {1, 2}});
    Partition all1{{1, 1, 1}};
    CHECK(classify_edges(tri, all1).class_of == std::vector<int>{1, 1, 1});

    const StaticGraph kg = karate();
    const Partition kp = spectral_bisection(kg);
    const EdgeClassification ec = classify_edges(kg, kp);
    CHECK(ec.count_class(1) + ec.count_class(2) + ec.count_class(3) == 78);

    // cut size of the partition equals the between-cluster class size
    int cut = 0;
    for (const auto& [u, v] : kg.edges())
        if (kp.cluster_of[u] != kp.cluster_of[v]) ++cut;
    CHECK(cut == ec.count_class(3));
}

TEST_CASE("bisection is invariant under node relabeling") {
    CounterRng rng(1234);
    int tested = 0;
    for (int attempt = 0; attempt < 60 && tested < 8; ++attempt) {
        const int n = 6 + static_cast<int>(rng.uniform_index(5));
        std::vector<NodePair> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform01() < 0.35) edges.emplace_back(i, j);
        StaticGraph g(n, edges);
        if (!is_connected(g)) continue;

        // skip near-degenerate Fiedler gaps: the bisection is only defined up
        // to the eigenspace there
        Eigen::MatrixXd a = g.adjacency();
        Eigen::MatrixXd lap = -a;
        for (int i = 0; i < n; ++i) lap(i, i) = a.row(i).sum();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
        if (es.eigenvalues()(2) - es.eigenvalues()(1) < 1e-6) continue;
        Eigen::VectorXd f = es.eigenvectors().col(1);
        if (f.cwiseAbs().minCoeff() < 1e-9) continue;

        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.uniform_index(i + 1)]);

        std::vector<NodePair> pedges;
        for (const auto& [u, v] : g.edges()) pedges.emplace_back(perm[u], perm[v]);
        StaticGraph pg(n, pedges);

        const Partition p1 = spectral_bisection(g);
        const Partition p2 = spectral_bisection(pg);
        std::vector<int> mapped(n), direct(n);
        for (int i = 0; i < n; ++i) {
            mapped[i] = p2.cluster_of[perm[i]] == 1 ? 0 : 1;
            direct[i] = p1.cluster_of[i] == 1 ? 0 : 1;
        }
        CHECK(same_partition(direct, mapped));
        ++tested;
    }
    CHECK(tested >= 5);
}

TEST_CASE("graph json round trip and validation") {
    const StaticGraph g = karate();
    const json j = graph_to_json(g);
    const StaticGraph g2 = graph_from_json(j);
    CHECK(g2.edges() == g.edges());

    CHECK_THROWS_AS(graph_from_json(json{{"n", 2}, {"edges", {{0, 2}}}}), Error);
    CHECK_THROWS_AS(graph_from_json(json{{"n", 2}, {"edges", {{1, 1}}}}), Error);
    CHECK_THROWS_AS(
        graph_from_json(json{{"n", 3}, {"edges", {{0, 1}, {1, 0}}}}), Error);
}
