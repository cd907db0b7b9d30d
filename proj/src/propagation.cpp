#include "trp/propagation.hpp"

#include <algorithm>
#include <cmath>

#include "trp/data_model.hpp"
#include "trp/errors.hpp"

namespace trp {

namespace {

constexpr double kIdentityTol = 1e-12;

double path_product(const RootedTopology& topo, const TopoFactors& factors, int v) {
    std::vector<int> chain;  // ancestors of v, root first
    for (int u = topo.parent[v]; u != -1; u = topo.parent[u]) chain.push_back(u);
    std::reverse(chain.begin(), chain.end());
    double prod = 1.0;
    for (int u : chain) prod *= factors.alpha[u];
    return prod;
}

Portfolio zero_portfolio(int n, double leverage, AllocStatus status) {
    Portfolio p;
    p.pre_norm = Eigen::VectorXd::Zero(n);
    p.weights = Eigen::VectorXd::Zero(n);
    p.gross = 0.0;
    p.leverage_target = leverage;
    p.status = status;
    return p;
}

}  // namespace

const char* to_string(AllocStatus status) {
    switch (status) {
        case AllocStatus::Ok: return "ok";
        case AllocStatus::EmptyActiveSet: return "empty-active-set";
        case AllocStatus::DegenerateSignal: return "degenerate-signal";
        case AllocStatus::AllWeightsPruned: return "all-weights-pruned";
        case AllocStatus::NeutralizedToZero: return "neutralized-to-zero";
    }
    return "unknown";
}

double alpha(int b, double rho) {
    if (b < 1) throw std::invalid_argument("branching number must be >= 1");
    return (1.0 - rho) + rho / b;
}

TopoFactors topo_factors(const RootedTopology& topo, double rho) {
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must lie in [0, 1]");
    const int n = topo.n_nodes;

    TopoFactors f;
    f.rho = rho;
    f.g.assign(n, 0.0);
    f.alpha.assign(n, 1.0);
    f.beta.assign(n, 1.0);
    for (int u = 0; u < n; ++u) {
        if (topo.branching[u] >= 1) {
            f.alpha[u] = alpha(topo.branching[u], rho);
            f.beta[u] = topo.branching[u] * (1.0 - rho) + rho;
        }
    }
    f.gamma_bound = topo.max_branching * (1.0 - rho) + rho;

    // Top-down recursion; parents always appear at smaller depth.
    std::vector<int> order(n);
    for (int v = 0; v < n; ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return topo.depth[a] < topo.depth[b]; });
    for (int v : order) f.g[v] = v == topo.root ? 1.0 : f.alpha[topo.parent[v]] * f.g[topo.parent[v]];

    for (int v = 0; v < n; ++v) {
        if (std::abs(f.g[v] - path_product(topo, f, v)) > kIdentityTol)
            throw std::logic_error("recursion disagrees with path product");
    }
    return f;
}

double level_mass(const TopoFactors& factors, const RootedTopology& topo, int level) {
    if (level < 0) throw std::invalid_argument("level must be >= 0");
    double total = 0.0;
    for (int v = 0; v < topo.n_nodes; ++v)
        if (topo.depth[v] == level) total += factors.g[v];
    return total;
}

Eigen::VectorXd raw_portfolio(const Eigen::VectorXd& active_signals, const TopoFactors& factors,
                              const RootedTopology& topo) {
    const int n_real = topo.n_real();
    if (active_signals.size() != n_real)
        throw std::invalid_argument("signal count does not match real node count");
    Eigen::VectorXd x(n_real);
    for (int v = 0; v < n_real; ++v) x(v) = active_signals(v) * factors.g[v];
    return x;
}

NormalizeResult normalize_leverage(const Eigen::VectorXd& x, double leverage) {
    if (leverage <= 0.0) throw std::invalid_argument("leverage must be positive");
    const double norm = x.lpNorm<1>();
    if (norm > 0.0) return {leverage * x / norm, false};
    return {Eigen::VectorXd::Zero(x.size()), true};
}

PostprocessResult postprocess(const Eigen::VectorXd& weights, std::optional<double> cap,
                              std::optional<double> min_weight, bool renormalize, double leverage) {
    if (cap && *cap <= 0.0) throw std::invalid_argument("cap must be positive");
    if (min_weight && *min_weight < 0.0) throw std::invalid_argument("min weight must be >= 0");

    Eigen::VectorXd w = weights;
    if (cap) w = w.cwiseMax(-*cap).cwiseMin(*cap);
    if (min_weight) {
        for (int i = 0; i < w.size(); ++i)
            if (std::abs(w(i)) < *min_weight) w(i) = 0.0;
    }
    const double gross = w.lpNorm<1>();
    if (gross == 0.0) return {std::move(w), weights.lpNorm<1>() > 0.0};
    if (renormalize) w *= leverage / gross;
    return {std::move(w), false};
}

NeutralizeResult neutralize_depth_one(const Eigen::VectorXd& weights, const RootedTopology& topo,
                                      double leverage) {
    if (!topo.is_dummy_root) throw std::invalid_argument("neutralization needs a dummy-rooted topology");
    const int n_real = topo.n_real();
    if (weights.size() != n_real) throw std::invalid_argument("weight count does not match real node count");

    // Group = one depth-one child of the root together with its subtree.
    std::vector<int> group(n_real, -1);
    for (int v = 0; v < n_real; ++v) {
        int u = v;
        while (topo.depth[u] > 1) u = topo.parent[u];
        group[v] = u;
    }

    Eigen::VectorXd w = weights;
    for (int anchor : topo.children[topo.root]) {
        double sum = 0.0;
        int count = 0;
        for (int v = 0; v < n_real; ++v)
            if (group[v] == anchor) {
                sum += w(v);
                ++count;
            }
        if (count == 0) continue;
        const double mean = sum / count;
        for (int v = 0; v < n_real; ++v)
            if (group[v] == anchor) w(v) -= mean;
    }

    const double gross = w.lpNorm<1>();
    if (gross == 0.0) return {std::move(w), true};
    w *= leverage / gross;
    return {std::move(w), false};
}

AllocationResult allocate(const ReturnsPanel& panel, const SignalVector& signals, const TrpConfig& cfg,
                          Variant variant) {
    if (cfg.neutralize_depth_one && variant == Variant::MstRooted)
        throw std::invalid_argument("depth-one neutralization requires the sector-anchored variant");

    const int n = panel.n_assets();
    AllocationResult out;
    out.variant = variant;
    out.active = active_set(panel, signals, cfg);
    out.g_full = Eigen::VectorXd::Zero(n);

    if (out.active.empty()) {
        out.portfolio = zero_portfolio(n, cfg.leverage, AllocStatus::EmptyActiveSet);
        return out;
    }

    Eigen::VectorXd s_active(out.active.n_active());
    for (int a = 0; a < out.active.n_active(); ++a) s_active(a) = signals(out.active.indices[a]);

    if (variant == Variant::MstRooted) {
        auto corr = correlation_matrix(panel, out.active);
        auto tree = build_mst(distance_matrix(corr));
        int root = select_root(tree, s_active, cfg.root_mode, out.active.indices);
        out.topology = root_tree(tree, root);
    } else {
        auto etfs = sector_etf_ordinals(panel, out.active);
        if (!etfs.empty()) {
            auto corr = correlation_matrix(panel, out.active);
            auto tree = build_mst(distance_matrix(corr));
            out.topology = anchor_market_sector(tree, etfs);
        } else {
            out.topology = fallback_augmented_mst(panel, out.active);
        }
    }

    out.factors = topo_factors(out.topology, cfg.rho);
    out.masses = subtree_mass(out.topology, s_active, cfg.subtree_exponent);

    Eigen::VectorXd x = raw_portfolio(s_active, out.factors, out.topology);
    auto normalized = normalize_leverage(x, cfg.leverage);
    Eigen::VectorXd w = normalized.weights;
    AllocStatus status = normalized.degenerate ? AllocStatus::DegenerateSignal : AllocStatus::Ok;

    if (status == AllocStatus::Ok && (variant == Variant::SectorAnchored || cfg.force_postprocess)) {
        auto processed =
            postprocess(w, cfg.cap, cfg.min_weight, cfg.renormalize_after_postprocess, cfg.leverage);
        w = processed.weights;
        if (processed.all_pruned) status = AllocStatus::AllWeightsPruned;
    }
    if (status == AllocStatus::Ok && cfg.neutralize_depth_one) {
        auto neutral = neutralize_depth_one(w, out.topology, cfg.leverage);
        w = neutral.weights;
        if (neutral.zeroed) status = AllocStatus::NeutralizedToZero;
    }

    Portfolio p;
    p.pre_norm = Eigen::VectorXd::Zero(n);
    p.weights = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < out.active.n_active(); ++a) {
        const int i = out.active.indices[a];
        p.pre_norm(i) = x(a);
        p.weights(i) = w(a);
        out.g_full(i) = out.factors.g[a];
    }
    p.gross = p.weights.lpNorm<1>();
    p.leverage_target = cfg.leverage;
    p.status = status;
    out.portfolio = std::move(p);
    return out;
}

StabilityCertificate stability_certificate(const TopoFactors& factors, const RootedTopology& topo,
                                           const Eigen::VectorXd& s, const Eigen::VectorXd& s_prime,
                                           double leverage) {
    const int n_real = topo.n_real();
    double a = 0.0, b = 0.0;
    for (int v = 0; v < n_real; ++v) {
        a += std::abs(factors.g[v] * s(v));
        b += std::abs(factors.g[v] * s_prime(v));
    }
    StabilityCertificate cert;
    cert.gamma = std::min(a, b);
    cert.lipschitz_constant =
        cert.gamma > 0.0 ? 2.0 * leverage / cert.gamma : std::numeric_limits<double>::infinity();
    return cert;
}

std::string topology_hash(const RootedTopology& topo, const std::vector<std::string>& node_names) {
    if (static_cast<int>(node_names.size()) != topo.n_nodes)
        throw std::invalid_argument("one name per topology node required");

    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        h ^= 0xff;
        h *= 1099511628211ULL;
    };
    mix(topo.is_dummy_root ? "dummy" : "real");
    mix(node_names[topo.root]);
    for (int v = 0; v < topo.n_nodes; ++v) {
        if (v == topo.root) continue;
        mix(node_names[v]);
        mix(node_names[topo.parent[v]]);
    }

    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace trp
