#pragma once

#include <string>
#include <vector>

#include "trp/flow_model.hpp"
#include "trp/propagation.hpp"
#include "trp/types.hpp"

namespace trp {

/// Shortest round-trip decimal form, locale-independent; keeps repeated runs
/// byte-identical.
std::string format_double(double v);

/// Ticker names of a topology's nodes: the active tickers plus "SPY" for the
/// dummy root when present.
std::vector<std::string> topology_node_names(const ReturnsPanel& panel, const ActiveSet& active,
                                             const RootedTopology& topo);

/// `ticker,signal,g_factor,weight` over the full universe, preceded by a
/// comment line carrying rho, leverage, variant, and the topology hash.
std::string weights_csv(const AllocationResult& result, const ReturnsPanel& panel,
                        const SignalVector& signals, const TrpConfig& cfg);

std::string weights_json(const AllocationResult& result, const ReturnsPanel& panel,
                         const SignalVector& signals, const TrpConfig& cfg);

std::string mst_dot(const SpanningTree& tree, const std::vector<std::string>& names);
std::string mst_json(const SpanningTree& tree, const std::vector<std::string>& names);

std::string rooted_dot(const RootedTopology& topo, const std::vector<std::string>& names);
std::string rooted_json(const RootedTopology& topo, const std::vector<std::string>& names);

/// Wide CSV matching the load_returns format.
std::string returns_csv(const ReturnsPanel& panel);

/// Parameters, label maps, and seed for a generated panel.
std::string synth_sidecar_json(const FlowModelParams& params, const NestedUniverse& universe, int periods);

}  // namespace trp
