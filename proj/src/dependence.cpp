#include "trp/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trp/errors.hpp"

namespace trp {

namespace {

class UnionFind {
  public:
    explicit UnionFind(int n) : id_(n), size_(n, 1) { std::iota(id_.begin(), id_.end(), 0); }

    int root(int i) {
        while (i != id_[i]) {
            id_[i] = id_[id_[i]];
            i = id_[i];
        }
        return i;
    }

    bool unite(int p, int q) {
        int a = root(p), b = root(q);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        id_[b] = a;
        size_[a] += size_[b];
        return true;
    }

  private:
    std::vector<int> id_;
    std::vector<int> size_;
};

// Canonical summation order so identical edge sets give bitwise-equal totals.
double edge_sum(std::vector<TreeEdge>& edges) {
    std::sort(edges.begin(), edges.end(),
              [](const TreeEdge& a, const TreeEdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    double total = 0.0;
    for (const auto& e : edges) total += e.weight;
    return total;
}

}  // namespace

std::vector<std::vector<int>> SpanningTree::adjacency() const {
    std::vector<std::vector<int>> adj(n_nodes);
    for (const auto& e : edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

CorrelationMatrix correlation_from_rows(const Eigen::MatrixXd& rows) {
    const int n = static_cast<int>(rows.rows());
    Eigen::MatrixXd centered = rows.colwise() - rows.rowwise().mean();
    Eigen::MatrixXd cross = centered * centered.transpose();
    Eigen::VectorXd norms = cross.diagonal().array().sqrt();

    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = cross(i, j) / (norms(i) * norms(j));

    // Sanitize: clip, drop non-finite, symmetrize, force unit diagonal.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = std::clamp(c(i, j), -1.0, 1.0);
            c(i, j) = std::isfinite(v) ? v : 0.0;
        }
    c = ((c + c.transpose()) / 2.0).eval();
    c.diagonal().setOnes();
    return {std::move(c)};
}

CorrelationMatrix correlation_matrix(const ReturnsPanel& panel, const ActiveSet& active) {
    Eigen::MatrixXd rows(active.n_active(), panel.n_periods());
    for (int a = 0; a < active.n_active(); ++a) rows.row(a) = panel.returns.row(active.indices[a]);
    return correlation_from_rows(rows);
}

DistanceMatrix distance_matrix(const CorrelationMatrix& corr) {
    Eigen::MatrixXd d = ((1.0 - corr.values.array()) / 2.0).sqrt().matrix();
    d.diagonal().setZero();
    return {std::move(d)};
}

SpanningTree build_mst(const DistanceMatrix& dist) {
    const int n = dist.n_nodes();
    SpanningTree tree;
    tree.n_nodes = n;
    if (n <= 1) return tree;

    std::vector<TreeEdge> all;
    all.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) all.push_back({i, j, dist.values(i, j)});
    std::sort(all.begin(), all.end(), [](const TreeEdge& a, const TreeEdge& b) {
        return std::tie(a.weight, a.u, a.v) < std::tie(b.weight, b.u, b.v);
    });

    UnionFind uf(n);
    for (const auto& e : all) {
        if (uf.unite(e.u, e.v)) {
            tree.edges.push_back(e);
            if (static_cast<int>(tree.edges.size()) == n - 1) break;
        }
    }
    tree.total_weight = edge_sum(tree.edges);
    return tree;
}

std::vector<std::pair<int, int>> pruefer_decode(std::span<const int> code) {
    const int n = static_cast<int>(code.size()) + 2;
    std::vector<int> degree(n, 1);
    for (int c : code) ++degree[c];

    std::vector<std::pair<int, int>> edges;
    edges.reserve(n - 1);
    std::vector<bool> used(n, false);
    for (int c : code) {
        for (int leaf = 0; leaf < n; ++leaf) {
            if (degree[leaf] == 1 && !used[leaf]) {
                edges.emplace_back(std::min(leaf, c), std::max(leaf, c));
                used[leaf] = true;
                --degree[c];
                break;
            }
        }
    }
    int a = -1, b = -1;
    for (int i = 0; i < n; ++i) {
        if (!used[i] && degree[i] == 1) (a < 0 ? a : b) = i;
    }
    edges.emplace_back(a, b);
    return edges;
}

SpanningTree brute_force_mst(const DistanceMatrix& dist) {
    const int n = dist.n_nodes();
    if (n > 8) throw UniverseTooLarge(n);

    SpanningTree best;
    best.n_nodes = n;
    if (n <= 1) return best;
    if (n == 2) {
        best.edges = {{0, 1, dist.values(0, 1)}};
        best.total_weight = dist.values(0, 1);
        return best;
    }

    const int len = n - 2;
    std::vector<int> code(len, 0);
    double best_weight = std::numeric_limits<double>::infinity();
    while (true) {
        auto pairs = pruefer_decode(code);
        std::vector<TreeEdge> edges;
        edges.reserve(pairs.size());
        for (auto [u, v] : pairs) edges.push_back({u, v, dist.values(u, v)});
        double w = edge_sum(edges);
        if (w < best_weight) {
            best_weight = w;
            best.edges = std::move(edges);
        }
        // next Pruefer sequence in base n
        int pos = len - 1;
        while (pos >= 0 && code[pos] == n - 1) code[pos--] = 0;
        if (pos < 0) break;
        ++code[pos];
    }
    best.total_weight = best_weight;
    return best;
}

}  // namespace trp
