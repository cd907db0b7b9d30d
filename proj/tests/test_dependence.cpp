#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "trp/dependence.hpp"
#include "trp/errors.hpp"

using namespace trp;

namespace {

DistanceMatrix random_distance(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = unif(rng);
    return {std::move(d)};
}

bool is_spanning_tree(const SpanningTree& tree) {
    if (tree.n_nodes <= 1) return tree.edges.empty();
    if (static_cast<int>(tree.edges.size()) != tree.n_nodes - 1) return false;
    // connectivity via BFS over the adjacency
    auto adj = tree.adjacency();
    std::vector<bool> seen(tree.n_nodes, false);
    std::vector<int> queue = {0};
    seen[0] = true;
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

}  // namespace

TEST_CASE("correlation of identical and negated rows") {
    Eigen::MatrixXd rows(3, 4);
    rows.row(0) << 0.01, -0.02, 0.03, 0.00;
    rows.row(1) = rows.row(0);
    rows.row(2) = -rows.row(0);
    auto c = correlation_from_rows(rows);
    CHECK(c.values(0, 1) == doctest::Approx(1.0));
    CHECK(c.values(0, 2) == doctest::Approx(-1.0));
    CHECK(c.values(0, 0) == 1.0);
}

TEST_CASE("zero-variance rows sanitize to zero correlation") {
    Eigen::MatrixXd rows(2, 5);
    rows.row(0) << 0.01, -0.02, 0.03, 0.0, 0.01;
    rows.row(1).setZero();
    auto c = correlation_from_rows(rows);
    CHECK(c.values(0, 1) == 0.0);
    CHECK(c.values(1, 0) == 0.0);
    CHECK(c.values(1, 1) == 1.0);

    auto d = distance_matrix(c);
    CHECK(d.values(0, 1) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("distance endpoints and direct values") {
    CorrelationMatrix c{Eigen::MatrixXd::Identity(3, 3)};
    c.values(0, 1) = c.values(1, 0) = 1.0;
    c.values(0, 2) = c.values(2, 0) = -1.0;
    c.values(1, 2) = c.values(2, 1) = 0.0;
    auto d = distance_matrix(c);
    CHECK(d.values(0, 1) == 0.0);
    CHECK(d.values(0, 2) == 1.0);
    CHECK(d.values(1, 2) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(d.values(0, 0) == 0.0);
}

TEST_CASE("distance stays in [0,1] and decreases in correlation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        double a = unif(rng), b = unif(rng);
        CorrelationMatrix c{Eigen::MatrixXd::Identity(2, 2)};
        c.values(0, 1) = c.values(1, 0) = a;
        auto da = distance_matrix(c).values(0, 1);
        CHECK(da >= 0.0);
        CHECK(da <= 1.0);
        c.values(0, 1) = c.values(1, 0) = b;
        auto db = distance_matrix(c).values(0, 1);
        if (a < b) CHECK(da >= db);
    }
}

TEST_CASE("build_mst forced and degenerate cases") {
    std::mt19937_64 rng(5);
    auto two = build_mst(random_distance(rng, 2));
    REQUIRE(two.edges.size() == 1);
    CHECK(two.edges[0].u == 0);
    CHECK(two.edges[0].v == 1);

    auto one = build_mst(random_distance(rng, 1));
    CHECK(one.edges.empty());
    CHECK(one.total_weight == 0.0);
}

TEST_CASE("brute force agrees with by-hand enumeration on three nodes") {
    Eigen::MatrixXd d(3, 3);
    d << 0.0, 0.1, 0.9,
         0.1, 0.0, 0.5,
         0.9, 0.5, 0.0;
    auto tree = brute_force_mst({d});
    CHECK(tree.total_weight == doctest::Approx(0.6));
    REQUIRE(tree.edges.size() == 2);
    CHECK(tree.edges[0].u == 0);
    CHECK(tree.edges[0].v == 1);
    CHECK(tree.edges[1].u == 1);
    CHECK(tree.edges[1].v == 2);

    auto fast = build_mst({d});
    CHECK(fast.total_weight == tree.total_weight);
}

TEST_CASE("brute force rejects more than eight nodes") {
    std::mt19937_64 rng(9);
    CHECK_THROWS_AS(brute_force_mst(random_distance(rng, 9)), UniverseTooLarge);
}

TEST_CASE("kruskal matches the exhaustive oracle on random instances") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 6);  // up to 7
        auto dist = random_distance(rng, n);
        auto fast = build_mst(dist);
        auto exact = brute_force_mst(dist);
        CHECK(fast.total_weight == exact.total_weight);
        CHECK(is_spanning_tree(fast));
        CHECK(is_spanning_tree(exact));
    }
}

TEST_CASE("six-node instance equals the 1296-tree enumeration") {
    std::mt19937_64 rng(23);
    auto dist = random_distance(rng, 6);
    auto fast = build_mst(dist);
    auto exact = brute_force_mst(dist);
    CHECK(fast.total_weight == exact.total_weight);
    CHECK(fast.edges.size() == 5);
}

TEST_CASE("kruskal tie-break is deterministic") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(4, 4, 0.5);
    d.diagonal().setZero();
    auto a = build_mst({d});
    auto b = build_mst({d});
    REQUIRE(a.edges.size() == 3);
    for (size_t i = 0; i < a.edges.size(); ++i) {
        CHECK(a.edges[i].u == b.edges[i].u);
        CHECK(a.edges[i].v == b.edges[i].v);
    }
    // lexicographically first choices win under total ties
    CHECK(a.edges[0].u == 0);
    CHECK(a.edges[0].v == 1);
    CHECK(a.edges[1].v == 2);
    CHECK(a.edges[2].v == 3);
}

TEST_CASE("pruefer decode yields a labeled tree") {
    std::vector<int> code = {3, 3, 0};
    auto edges = pruefer_decode(code);
    REQUIRE(edges.size() == 4);  // 5 nodes
    std::vector<int> degree(5, 0);
    for (auto [u, v] : edges) {
        ++degree[u];
        ++degree[v];
    }
    CHECK(degree[3] == 3);  // appears twice in the code
    CHECK(degree[0] == 2);
}
