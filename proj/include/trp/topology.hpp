#pragma once

#include <span>
#include <vector>

#include "trp/dependence.hpp"
#include "trp/types.hpp"

namespace trp {

/// A spanning tree oriented away from a chosen root. Nodes are active-set
/// ordinals 0..n_real-1; when is_dummy_root is set, the market root is the
/// extra node with id n_nodes - 1 and carries no signal or weight.
struct RootedTopology {
    int n_nodes = 0;
    int root = -1;
    bool is_dummy_root = false;
    std::vector<int> parent;                 // -1 at the root
    std::vector<std::vector<int>> children;  // ascending node id
    std::vector<int> branching;              // b(u) = |children[u]|
    std::vector<int> depth;                  // depth(root) = 0
    int max_branching = 1;                   // B; 1 when there are no internal nodes

    int n_real() const { return is_dummy_root ? n_nodes - 1 : n_nodes; }
    int max_depth() const;
};

/// Sum of |s_i|^p over each node's subtree, real assets only. Diagnostic
/// quantity; the propagation never reads it.
struct SubtreeMass {
    std::vector<double> masses;
    double exponent = 1.0;
};

/// Root choice for the MST variant. Hub picks a node of maximal undirected
/// degree, MaxMagnitude a node of maximal |s|; ties go to the lowest ordinal.
/// FixedIndex designates a panel index, which must be active.
int select_root(const SpanningTree& tree, const Eigen::VectorXd& active_signals, const RootMode& mode,
                std::span<const int> active_indices);

/// Orients the tree away from the root. The orientation is unique; children
/// are listed in ascending ordinal.
RootedTopology root_tree(const SpanningTree& tree, int root);

/// Sector-anchored spanning tree: adds a dummy market root connected to every
/// sector ETF, then extracts a rooted spanning tree by DFS. The (root, ETF)
/// edges are fixed as tree edges before traversal, so every sector ETF sits at
/// depth one. DFS visits neighbors in ascending ordinal.
RootedTopology anchor_market_sector(const SpanningTree& real_tree, std::span<const int> sector_ordinals);

/// Fallback when no sector ETFs are active: appends a zero-return dummy asset,
/// rebuilds the MST on the augmented universe, and roots at the dummy. The
/// dummy's sanitized correlations are 0, so it sits at distance sqrt(1/2) from
/// every real asset.
RootedTopology fallback_augmented_mst(const ReturnsPanel& panel, const ActiveSet& active);

/// Active ordinals whose tickers begin with "XL".
std::vector<int> sector_etf_ordinals(const ReturnsPanel& panel, const ActiveSet& active);

SubtreeMass subtree_mass(const RootedTopology& topo, const Eigen::VectorXd& active_signals, double p);

}  // namespace trp
