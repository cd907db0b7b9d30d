#pragma once

#include <span>
#include <utility>
#include <vector>

#include "trp/types.hpp"

namespace trp {

/// Sanitized correlation matrix: symmetric, unit diagonal, entries in [-1, 1].
struct CorrelationMatrix {
    Eigen::MatrixXd values;
};

/// Correlation distance sqrt((1 - C) / 2): symmetric, zero diagonal, entries in [0, 1].
struct DistanceMatrix {
    Eigen::MatrixXd values;

    int n_nodes() const { return static_cast<int>(values.rows()); }
};

struct TreeEdge {
    int u;  // u < v
    int v;
    double weight;
};

struct SpanningTree {
    int n_nodes = 0;
    std::vector<TreeEdge> edges;  // sorted by (u, v); exactly n_nodes - 1 entries
    double total_weight = 0.0;

    std::vector<std::vector<int>> adjacency() const;  // neighbor lists, ascending
};

/// Pearson correlation of the given rows over their full length, then
/// sanitized: clip to [-1, 1], non-finite entries to 0, symmetrize, unit
/// diagonal. Total on any input, including zero-variance rows.
CorrelationMatrix correlation_from_rows(const Eigen::MatrixXd& rows);

/// Correlation of the active rows of the panel over the full history.
CorrelationMatrix correlation_matrix(const ReturnsPanel& panel, const ActiveSet& active);

DistanceMatrix distance_matrix(const CorrelationMatrix& corr);

/// Minimum spanning tree of the complete graph on the distance matrix.
/// Kruskal with edges ordered by (weight, min index, max index), so ties
/// resolve deterministically.
SpanningTree build_mst(const DistanceMatrix& dist);

/// Exhaustive minimum over all labeled spanning trees, enumerated via Pruefer
/// sequences. Exponential; rejects more than 8 nodes. Test oracle for build_mst.
SpanningTree brute_force_mst(const DistanceMatrix& dist);

/// Edge list of the labeled tree encoded by a Pruefer sequence on
/// code.size() + 2 nodes.
std::vector<std::pair<int, int>> pruefer_decode(std::span<const int> code);

}  // namespace trp
