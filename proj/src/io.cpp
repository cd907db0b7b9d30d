#include "trp/io.hpp"

#include <charconv>
#include <sstream>

#include <json.hpp>

namespace trp {

namespace {

const char* variant_name(Variant v) { return v == Variant::MstRooted ? "mst" : "sector"; }

nlohmann::ordered_json edge_json(const TreeEdge& e, const std::vector<std::string>& names) {
    return {{"u", names[e.u]}, {"v", names[e.v]}, {"weight", e.weight}};
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<std::string> topology_node_names(const ReturnsPanel& panel, const ActiveSet& active,
                                             const RootedTopology& topo) {
    std::vector<std::string> names;
    names.reserve(topo.n_nodes);
    for (int idx : active.indices) names.push_back(panel.assets[idx].ticker);
    if (topo.is_dummy_root) names.emplace_back("SPY");
    return names;
}

std::string weights_csv(const AllocationResult& result, const ReturnsPanel& panel,
                        const SignalVector& signals, const TrpConfig& cfg) {
    std::ostringstream out;
    std::string hash = "none";
    if (!result.active.empty())
        hash = topology_hash(result.topology, topology_node_names(panel, result.active, result.topology));
    out << "# rho=" << format_double(cfg.rho) << " leverage=" << format_double(cfg.leverage)
        << " variant=" << variant_name(result.variant) << " topology=" << hash
        << " status=" << to_string(result.portfolio.status) << "\n";
    out << "ticker,signal,g_factor,weight\n";
    for (int i = 0; i < panel.n_assets(); ++i) {
        out << panel.assets[i].ticker << ',' << format_double(signals(i)) << ','
            << format_double(result.g_full(i)) << ',' << format_double(result.portfolio.weights(i))
            << "\n";
    }
    return out.str();
}

std::string weights_json(const AllocationResult& result, const ReturnsPanel& panel,
                         const SignalVector& signals, const TrpConfig& cfg) {
    std::string hash = "none";
    if (!result.active.empty())
        hash = topology_hash(result.topology, topology_node_names(panel, result.active, result.topology));

    nlohmann::ordered_json j;
    j["rho"] = cfg.rho;
    j["leverage"] = cfg.leverage;
    j["variant"] = variant_name(result.variant);
    j["topology"] = hash;
    j["status"] = to_string(result.portfolio.status);
    j["gross"] = result.portfolio.gross;
    auto rows = nlohmann::ordered_json::array();
    for (int i = 0; i < panel.n_assets(); ++i) {
        rows.push_back({{"ticker", panel.assets[i].ticker},
                        {"signal", signals(i)},
                        {"g_factor", result.g_full(i)},
                        {"weight", result.portfolio.weights(i)}});
    }
    j["weights"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string mst_dot(const SpanningTree& tree, const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "graph {\n";
    for (const auto& e : tree.edges)
        out << "  \"" << names[e.u] << "\" -- \"" << names[e.v] << "\" [weight="
            << format_double(e.weight) << "];\n";
    out << "}\n";
    return out.str();
}

std::string mst_json(const SpanningTree& tree, const std::vector<std::string>& names) {
    nlohmann::ordered_json j;
    j["nodes"] = names;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : tree.edges) edges.push_back(edge_json(e, names));
    j["edges"] = std::move(edges);
    j["total_weight"] = tree.total_weight;
    return j.dump(2) + "\n";
}

std::string rooted_dot(const RootedTopology& topo, const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "digraph {\n  rankdir=TB;\n";
    for (int level = 0; level <= topo.max_depth(); ++level) {
        out << "  { rank=same;";
        for (int v = 0; v < topo.n_nodes; ++v)
            if (topo.depth[v] == level) out << " \"" << names[v] << "\";";
        out << " }\n";
    }
    for (int v = 0; v < topo.n_nodes; ++v)
        if (v != topo.root) out << "  \"" << names[topo.parent[v]] << "\" -> \"" << names[v] << "\";\n";
    out << "}\n";
    return out.str();
}

std::string rooted_json(const RootedTopology& topo, const std::vector<std::string>& names) {
    nlohmann::ordered_json parents, depths, branching;
    for (int v = 0; v < topo.n_nodes; ++v) {
        if (v != topo.root) parents[names[v]] = names[topo.parent[v]];
        depths[names[v]] = topo.depth[v];
        branching[names[v]] = topo.branching[v];
    }
    nlohmann::ordered_json j;
    j["root"] = names[topo.root];
    j["parents"] = std::move(parents);
    j["depths"] = std::move(depths);
    j["branching"] = std::move(branching);
    return j.dump(2) + "\n";
}

std::string returns_csv(const ReturnsPanel& panel) {
    std::ostringstream out;
    for (int i = 0; i < panel.n_assets(); ++i) {
        if (i) out << ',';
        out << panel.assets[i].ticker;
    }
    out << "\n";
    for (int t = 0; t < panel.n_periods(); ++t) {
        for (int i = 0; i < panel.n_assets(); ++i) {
            if (i) out << ',';
            out << format_double(panel.returns(i, t));
        }
        out << "\n";
    }
    return out.str();
}

std::string synth_sidecar_json(const FlowModelParams& params, const NestedUniverse& universe,
                               int periods) {
    nlohmann::ordered_json j;
    j["seed"] = params.seed;
    j["periods"] = periods;
    j["theta_market"] = params.effective_theta_market();
    j["theta_sector"] = params.effective_theta_sector();
    j["theta_basket"] = params.effective_theta_basket();
    j["sigma_eps"] = params.effective_sigma();
    if (params.lambda) j["lambda"] = *params.lambda;
    nlohmann::ordered_json sectors, baskets;
    for (size_t i = 0; i < universe.assets.size(); ++i) {
        sectors[universe.assets[i].ticker] = universe.sector_of[i];
        baskets[universe.assets[i].ticker] = universe.basket_of[i];
    }
    j["sector_of"] = std::move(sectors);
    j["basket_of"] = std::move(baskets);
    return j.dump(2) + "\n";
}

}  // namespace trp
