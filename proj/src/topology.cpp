#include "trp/topology.hpp"

#include <algorithm>
#include <cmath>
#include <stack>

#include "trp/errors.hpp"

namespace trp {

namespace {

void finalize(RootedTopology& topo) {
    topo.branching.assign(topo.n_nodes, 0);
    for (int u = 0; u < topo.n_nodes; ++u) topo.branching[u] = static_cast<int>(topo.children[u].size());
    topo.max_branching = 1;
    for (int u = 0; u < topo.n_nodes; ++u)
        if (topo.branching[u] >= 1) topo.max_branching = std::max(topo.max_branching, topo.branching[u]);
}

// Iterative DFS over the adjacency lists, visiting neighbors in ascending
// order. Assigns parents and depths for every node reachable from `start`.
void dfs_assign(int start, const std::vector<std::vector<int>>& adj, std::vector<int>& parent,
                std::vector<int>& depth, std::vector<bool>& visited, RootedTopology& topo) {
    std::stack<std::pair<int, size_t>> stack;
    stack.push({start, 0});
    while (!stack.empty()) {
        auto& [node, next] = stack.top();
        if (next >= adj[node].size()) {
            stack.pop();
            continue;
        }
        int nbr = adj[node][next++];
        if (visited[nbr]) continue;
        visited[nbr] = true;
        parent[nbr] = node;
        depth[nbr] = depth[node] + 1;
        topo.children[node].push_back(nbr);
        stack.push({nbr, 0});
    }
}

}  // namespace

int RootedTopology::max_depth() const {
    int d = 0;
    for (int v = 0; v < n_nodes; ++v) d = std::max(d, depth[v]);
    return d;
}

int select_root(const SpanningTree& tree, const Eigen::VectorXd& active_signals, const RootMode& mode,
                std::span<const int> active_indices) {
    const int n = tree.n_nodes;
    if (n < 1) throw std::invalid_argument("cannot select a root in an empty tree");

    switch (mode.kind) {
        case RootModeKind::Hub: {
            std::vector<int> degree(n, 0);
            for (const auto& e : tree.edges) {
                ++degree[e.u];
                ++degree[e.v];
            }
            int best = 0;
            for (int v = 1; v < n; ++v)
                if (degree[v] > degree[best]) best = v;
            return best;
        }
        case RootModeKind::MaxMagnitude: {
            int best = 0;
            for (int v = 1; v < n; ++v)
                if (std::abs(active_signals(v)) > std::abs(active_signals(best))) best = v;
            return best;
        }
        case RootModeKind::FixedIndex: {
            auto it = std::find(active_indices.begin(), active_indices.end(), mode.fixed_index);
            if (it == active_indices.end()) throw FixedIndexNotActive(mode.fixed_index);
            return static_cast<int>(it - active_indices.begin());
        }
    }
    throw std::logic_error("unreachable root mode");
}

RootedTopology root_tree(const SpanningTree& tree, int root) {
    const int n = tree.n_nodes;
    if (root < 0 || root >= n) throw std::invalid_argument("root is not a tree node");

    RootedTopology topo;
    topo.n_nodes = n;
    topo.root = root;
    topo.parent.assign(n, -1);
    topo.children.assign(n, {});
    topo.depth.assign(n, 0);

    auto adj = tree.adjacency();
    std::vector<bool> visited(n, false);
    visited[root] = true;
    dfs_assign(root, adj, topo.parent, topo.depth, visited, topo);
    // children ascending comes out of the ascending neighbor order already,
    // but keep the invariant explicit
    for (auto& ch : topo.children) std::sort(ch.begin(), ch.end());
    finalize(topo);
    return topo;
}

RootedTopology anchor_market_sector(const SpanningTree& real_tree, std::span<const int> sector_ordinals) {
    if (sector_ordinals.empty()) throw NoSectorEtfs();
    const int n_real = real_tree.n_nodes;
    const int dummy = n_real;

    RootedTopology topo;
    topo.n_nodes = n_real + 1;
    topo.root = dummy;
    topo.is_dummy_root = true;
    topo.parent.assign(topo.n_nodes, -1);
    topo.children.assign(topo.n_nodes, {});
    topo.depth.assign(topo.n_nodes, 0);

    std::vector<int> anchors(sector_ordinals.begin(), sector_ordinals.end());
    std::sort(anchors.begin(), anchors.end());

    // Fix every (root, ETF) edge as a tree edge up front, then let the DFS
    // claim the rest of the augmented graph. Cycles introduced by multiple
    // anchors are broken by visit order.
    std::vector<bool> visited(topo.n_nodes, false);
    visited[dummy] = true;
    for (int x : anchors) {
        visited[x] = true;
        topo.parent[x] = dummy;
        topo.depth[x] = 1;
        topo.children[dummy].push_back(x);
    }
    auto adj = real_tree.adjacency();
    for (int x : anchors) dfs_assign(x, adj, topo.parent, topo.depth, visited, topo);

    for (int v = 0; v < n_real; ++v)
        if (!visited[v]) throw std::invalid_argument("real-asset tree is not connected");
    for (auto& ch : topo.children) std::sort(ch.begin(), ch.end());
    finalize(topo);
    return topo;
}

RootedTopology fallback_augmented_mst(const ReturnsPanel& panel, const ActiveSet& active) {
    const int n = active.n_active();
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(n + 1, panel.n_periods());
    for (int a = 0; a < n; ++a) rows.row(a) = panel.returns.row(active.indices[a]);
    // row n stays all-zero: the dummy market asset

    auto corr = correlation_from_rows(rows);
    auto dist = distance_matrix(corr);
    auto tree = build_mst(dist);
    RootedTopology topo = root_tree(tree, n);
    topo.is_dummy_root = true;
    return topo;
}

std::vector<int> sector_etf_ordinals(const ReturnsPanel& panel, const ActiveSet& active) {
    std::vector<int> out;
    for (int a = 0; a < active.n_active(); ++a)
        if (panel.assets[active.indices[a]].is_sector_etf) out.push_back(a);
    return out;
}

SubtreeMass subtree_mass(const RootedTopology& topo, const Eigen::VectorXd& active_signals, double p) {
    SubtreeMass out;
    out.exponent = p;
    out.masses.assign(topo.n_nodes, 0.0);

    // Deepest nodes first so children are done before their parents.
    std::vector<int> order(topo.n_nodes);
    for (int v = 0; v < topo.n_nodes; ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return topo.depth[a] > topo.depth[b]; });

    const int n_real = topo.n_real();
    for (int v : order) {
        double m = v < n_real ? std::pow(std::abs(active_signals(v)), p) : 0.0;
        for (int c : topo.children[v]) m += out.masses[c];
        out.masses[v] = m;
    }
    return out;
}

}  // namespace trp
