#include "trp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "trp/data_model.hpp"
#include "trp/errors.hpp"
#include "trp/flow_model.hpp"

namespace trp {

namespace {

constexpr double kIdentityTol = 1e-10;
constexpr int kRhoGridSize = 11;  // {0, 0.1, ..., 1}

double rho_grid(int i) { return i / 10.0; }

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return lo + ((rng() >> 11) * 0x1.0p-53) * (hi - lo);
}

SpanningTree tree_from_pairs(int n, const std::vector<std::pair<int, int>>& pairs) {
    SpanningTree tree;
    tree.n_nodes = n;
    for (auto [u, v] : pairs) tree.edges.push_back({std::min(u, v), std::max(u, v), 0.0});
    std::sort(tree.edges.begin(), tree.edges.end(),
              [](const TreeEdge& a, const TreeEdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    return tree;
}

RootedTopology random_topology(std::mt19937_64& rng, int max_nodes) {
    const int n = uniform_int(rng, 2, std::max(2, max_nodes));
    SpanningTree tree;
    if (n == 2) {
        tree = tree_from_pairs(2, {{0, 1}});
    } else {
        std::vector<int> code(n - 2);
        for (int& c : code) c = uniform_int(rng, 0, n - 1);
        tree = tree_from_pairs(n, pruefer_decode(code));
    }
    return root_tree(tree, uniform_int(rng, 0, n - 1));
}

Eigen::VectorXd random_signals(std::mt19937_64& rng, int n) {
    GaussianSampler gauss(rng());
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s(i) = gauss.next();
    return s;
}

struct RandomUniverse {
    ReturnsPanel panel;
    SignalVector signals;
    TrpConfig cfg;
};

// Flow-model panel with random shape and loadings; optionally relabels a few
// assets as XL* sector ETFs.
RandomUniverse random_universe(std::mt19937_64& rng, int max_assets, int n_etfs) {
    const int sectors = uniform_int(rng, 2, 4);
    const int baskets = uniform_int(rng, 1, 3);
    const int max_per_basket = std::max(1, max_assets / (sectors * baskets));
    const int per_basket = uniform_int(rng, 1, std::min(4, max_per_basket));
    auto universe = make_nested_universe(sectors, baskets, per_basket, false);

    FlowModelParams params;
    params.theta_market = uniform_real(rng, 0.05, 0.6);
    params.theta_sector = uniform_real(rng, 0.05, 0.5);
    params.theta_basket = uniform_real(rng, 0.05, 0.5);
    params.sigma_eps = uniform_real(rng, 0.05, 0.4);
    params.sector_of = universe.sector_of;
    params.basket_of = universe.basket_of;
    params.seed = rng();

    RandomUniverse out;
    out.panel = generate_returns(params, universe, uniform_int(rng, 30, 90));

    const int n = out.panel.n_assets();
    for (int k = 0; k < std::min(n_etfs, n); ++k) {
        int i = uniform_int(rng, 0, n - 1);
        out.panel.assets[i] = AssetId("XL" + std::to_string(k) + out.panel.assets[i].ticker);
    }

    out.signals = random_signals(rng, n);
    out.cfg.lookback = 0;
    out.cfg.magnitude_threshold = 1e-6;
    out.cfg.signal_threshold = 1e-3;
    out.cfg.leverage = uniform_real(rng, 0.5, 4.0);
    return out;
}

struct CheckRun {
    CheckRecord record;

    explicit CheckRun(std::string name, double tolerance) {
        record.name = std::move(name);
        record.tolerance = tolerance;
    }

    void add(double slack, bool failed) {
        ++record.instances;
        record.worst_slack = std::max(record.worst_slack, slack);
        if (failed || slack > record.tolerance) ++record.failures;
    }

    CheckRecord finish() {
        record.pass = record.failures == 0;
        return record;
    }
};

std::mt19937_64 check_rng(const VerifyOptions& opt, const std::string& name) {
    return std::mt19937_64(opt.seed ^ fnv1a(name));
}

// -------------------------------------------------------------------------
// named checks

CheckRecord check_distance_bounds(const VerifyOptions& opt) {
    CheckRun run("distance-bounds", kIdentityTol);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        const int n = uniform_int(rng, 2, 16);
        const int t = uniform_int(rng, 2, 60);
        Eigen::MatrixXd rows(n, t);
        GaussianSampler gauss(rng());
        for (int r = 0; r < n; ++r) {
            const int kind = uniform_int(rng, 0, 5);
            for (int c = 0; c < t; ++c) rows(r, c) = gauss.next();
            if (kind == 0) rows.row(r).setZero();                         // zero-variance
            if (kind == 1) rows.row(r).setConstant(uniform_real(rng, -2.0, 2.0));  // constant
            if (kind == 2) rows.row(r) *= 1e6;                            // large scale
        }
        auto dist = distance_matrix(correlation_from_rows(rows));
        double slack = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                slack = std::max(slack, dist.values(a, b) - 1.0);
                slack = std::max(slack, -dist.values(a, b));
                slack = std::max(slack, std::abs(dist.values(a, b) - dist.values(b, a)));
                if (a == b) slack = std::max(slack, std::abs(dist.values(a, b)));
            }
        run.add(slack, false);
    }
    return run.finish();
}

CheckRecord check_path_product(const VerifyOptions& opt) {
    CheckRun run("path-product-equals-recursion", kIdentityTol);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto topo = random_topology(rng, opt.max_nodes);
        double slack = 0.0;
        for (int gi = 0; gi < kRhoGridSize; ++gi)
            slack = std::max(slack, path_product_slack(topo, topo_factors(topo, rho_grid(gi))));
        run.add(slack, false);
    }
    return run.finish();
}

CheckRecord check_rho_zero_limit(const VerifyOptions& opt) {
    CheckRun run("rho-zero-limit", 1e-12);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto u = random_universe(rng, opt.max_nodes, i % 3 == 0 ? uniform_int(rng, 1, 3) : 0);
        u.cfg.rho = 0.0;
        const Variant variant = i % 2 == 0 ? Variant::MstRooted : Variant::SectorAnchored;
        auto result = allocate(u.panel, u.signals, u.cfg, variant);
        if (result.active.empty()) {
            run.add(0.0, result.portfolio.weights.lpNorm<1>() != 0.0);
            continue;
        }
        double denom = 0.0;
        for (int idx : result.active.indices) denom += std::abs(u.signals(idx));
        Eigen::VectorXd expected = Eigen::VectorXd::Zero(u.panel.n_assets());
        for (int idx : result.active.indices) expected(idx) = u.cfg.leverage * u.signals(idx) / denom;
        run.add((result.portfolio.weights - expected).cwiseAbs().maxCoeff(), false);
    }
    return run.finish();
}

CheckRecord check_rho_one_equal_split(const VerifyOptions& opt) {
    CheckRun run("rho-one-equal-split", kIdentityTol);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto topo = random_topology(rng, opt.max_nodes);
        auto factors = topo_factors(topo, 1.0);
        double slack = 0.0;
        for (int u = 0; u < topo.n_nodes; ++u) {
            if (topo.branching[u] < 1) continue;
            double child_sum = 0.0;
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (int v : topo.children[u]) {
                child_sum += factors.g[v];
                lo = std::min(lo, factors.g[v]);
                hi = std::max(hi, factors.g[v]);
            }
            slack = std::max(slack, std::abs(child_sum - factors.g[u]));  // conservative split
            slack = std::max(slack, hi - lo);                             // equal split
        }
        run.add(slack, false);
    }
    return run.finish();
}

CheckRecord check_mass_amplification(const VerifyOptions& opt) {
    CheckRun run("mass-amplification", kIdentityTol);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto topo = random_topology(rng, opt.max_nodes);
        double slack = 0.0;
        for (int gi = 0; gi < kRhoGridSize; ++gi)
            slack = std::max(slack, mass_amplification_slack(topo, topo_factors(topo, rho_grid(gi))));
        run.add(slack, false);
    }
    return run.finish();
}

CheckRecord check_level_mass_bound(const VerifyOptions& opt) {
    CheckRun run("level-mass-bound", kIdentityTol);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto topo = random_topology(rng, opt.max_nodes);
        double slack = 0.0;
        for (int gi = 0; gi < kRhoGridSize; ++gi)
            slack = std::max(slack, level_mass_slack(topo, topo_factors(topo, rho_grid(gi))));
        run.add(slack, false);
    }
    return run.finish();
}

CheckRecord check_factor_bounds(const VerifyOptions& opt) {
    CheckRun run("factor-bounds", kIdentityTol);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto topo = random_topology(rng, opt.max_nodes);
        double slack = 0.0;
        for (int gi = 0; gi < kRhoGridSize; ++gi)
            slack = std::max(slack, factor_bounds_slack(topo, topo_factors(topo, rho_grid(gi))));
        run.add(slack, false);
    }
    return run.finish();
}

CheckRecord check_sign_preservation(const VerifyOptions& opt) {
    CheckRun run("sign-preservation", 0.0);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto topo = random_topology(rng, opt.max_nodes);
        auto factors = topo_factors(topo, rho_grid(i % kRhoGridSize));
        Eigen::VectorXd s = random_signals(rng, topo.n_real());
        for (int v = 0; v < s.size(); v += 4) s(v) = 0.0;  // exercise the zero case
        auto w = normalize_leverage(raw_portfolio(s, factors, topo), 2.0).weights;
        double slack = 0.0;
        for (int v = 0; v < s.size(); ++v) {
            if (s(v) == 0.0) {
                slack = std::max(slack, std::abs(w(v)));
            } else if (s(v) * w(v) <= 0.0) {
                slack = std::max(slack, std::abs(w(v)) > 0.0 ? std::abs(w(v)) : 1.0);
            }
        }
        run.add(slack, false);
    }
    return run.finish();
}

CheckRecord check_scale_symmetry(const VerifyOptions& opt) {
    CheckRun run("scale-symmetry", 1e-12);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto topo = random_topology(rng, opt.max_nodes);
        auto factors = topo_factors(topo, rho_grid(i % kRhoGridSize));
        Eigen::VectorXd s = random_signals(rng, topo.n_real());
        const double lev = uniform_real(rng, 0.5, 4.0);
        auto weigh = [&](const Eigen::VectorXd& sig) {
            return normalize_leverage(raw_portfolio(sig, factors, topo), lev).weights;
        };
        Eigen::VectorXd base = weigh(s);
        double slack = (weigh(2.7 * s) - base).lpNorm<1>();
        slack = std::max(slack, (weigh(-s) + base).lpNorm<1>());
        run.add(slack, false);
    }
    return run.finish();
}

CheckRecord check_p_independence(const VerifyOptions& opt) {
    CheckRun run("p-independence", 0.0);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto u = random_universe(rng, opt.max_nodes, 0);
        u.cfg.rho = rho_grid(i % kRhoGridSize);
        Eigen::VectorXd w1, w2, w3;
        for (double p : {1.0, 2.0, 3.0}) {
            u.cfg.subtree_exponent = p;
            auto result = allocate(u.panel, u.signals, u.cfg, Variant::MstRooted);
            (p == 1.0 ? w1 : p == 2.0 ? w2 : w3) = result.portfolio.weights;
        }
        // bitwise identity, not closeness
        bool same = w1.size() == w2.size() && w1.size() == w3.size();
        double slack = 0.0;
        if (same) {
            slack = std::max((w1 - w2).cwiseAbs().maxCoeff(), (w1 - w3).cwiseAbs().maxCoeff());
            for (int v = 0; v < w1.size(); ++v)
                same = same && w1(v) == w2(v) && w1(v) == w3(v);
        }
        run.add(slack, !same);
    }
    return run.finish();
}

CheckRecord check_depth_one(const VerifyOptions& opt) {
    CheckRun run("depth-one-sector-etfs", 0.0);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto u = random_universe(rng, opt.max_nodes, uniform_int(rng, 1, 5));
        auto result = allocate(u.panel, u.signals, u.cfg, Variant::SectorAnchored);
        if (result.active.empty()) {
            run.add(0.0, false);
            continue;
        }
        auto etfs = sector_etf_ordinals(u.panel, result.active);
        double slack = 0.0;
        for (int x : etfs) slack = std::max(slack, std::abs(result.topology.depth[x] - 1.0));
        run.add(slack, false);
    }
    return run.finish();
}

CheckRecord check_connectivity(const VerifyOptions& opt) {
    CheckRun run("spanning-tree-connectivity", 0.0);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto u = random_universe(rng, opt.max_nodes, uniform_int(rng, 0, 5));
        auto result = allocate(u.panel, u.signals, u.cfg, Variant::SectorAnchored);
        if (result.active.empty()) {
            run.add(0.0, false);
            continue;
        }
        const auto& topo = result.topology;
        bool ok = topo.parent[topo.root] == -1 && topo.depth[topo.root] == 0 && topo.is_dummy_root;
        int unreachable = 0;
        for (int v = 0; v < topo.n_nodes; ++v) {
            if (v == topo.root) continue;
            ok = ok && topo.parent[v] >= 0 && topo.depth[v] == topo.depth[topo.parent[v]] + 1;
            // every node must reach the root through parents without cycles
            int steps = 0, node = v;
            while (node != topo.root && steps <= topo.n_nodes) {
                node = topo.parent[node];
                ++steps;
            }
            if (node != topo.root) ++unreachable;
        }
        int child_edges = 0;
        for (const auto& ch : topo.children) child_edges += static_cast<int>(ch.size());
        ok = ok && child_edges == topo.n_nodes - 1 && unreachable == 0;
        run.add(static_cast<double>(unreachable), !ok);
    }
    return run.finish();
}

CheckRecord check_mst_oracle(const VerifyOptions& opt) {
    CheckRun run("mst-oracle-equality", 0.0);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        const int n = uniform_int(rng, 2, 7);
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) d(a, b) = d(b, a) = uniform_real(rng, 0.0, 1.0);
        DistanceMatrix dist{std::move(d)};
        const double fast = build_mst(dist).total_weight;
        const double exact = brute_force_mst(dist).total_weight;
        run.add(std::abs(fast - exact), fast != exact);
    }
    return run.finish();
}

CheckRecord check_lipschitz(const VerifyOptions& opt) {
    CheckRun run("lipschitz-conditional", kIdentityTol);
    auto rng = check_rng(opt, run.record.name);
    int produced = 0;
    while (produced < opt.instances) {
        auto topo = random_topology(rng, opt.max_nodes);
        auto factors = topo_factors(topo, rho_grid(produced % kRhoGridSize));
        const double lev = uniform_real(rng, 0.5, 4.0);
        Eigen::VectorXd s = random_signals(rng, topo.n_real());
        Eigen::VectorXd s2 = random_signals(rng, topo.n_real());
        auto cert = stability_certificate(factors, topo, s, s2, lev);
        if (cert.gamma <= 0.01) continue;  // conditional bound needs mass away from zero
        ++produced;
        auto weigh = [&](const Eigen::VectorXd& sig) {
            return normalize_leverage(raw_portfolio(sig, factors, topo), lev).weights;
        };
        const double lhs = (weigh(s) - weigh(s2)).lpNorm<1>();
        const double rhs = cert.lipschitz_constant * (s - s2).lpNorm<1>();
        run.add(lhs - rhs, false);
    }
    return run.finish();
}

CheckRecord check_tier_ordering(const VerifyOptions& opt) {
    CheckRun run("tier-ordering", 0.0);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        FlowModelParams params;
        params.sector_of = {0, 0, 1, 1};
        params.basket_of = {0, 1, 2, 3};
        const int kind = i % 3;
        if (kind == 0) {
            params.theta_market = uniform_real(rng, 0.0, 1.0);
            params.theta_sector = uniform_real(rng, 0.05, 1.0);
            params.theta_basket = uniform_real(rng, 0.05, 1.0);
            params.sigma_eps = uniform_real(rng, 0.0, 1.0);
        } else if (kind == 1) {
            params.lambda = uniform_real(rng, 0.01, 0.99);
        } else {
            params.theta_basket = 0.0;  // degenerate on purpose
        }
        bool failed = false;
        double slack = 0.0;
        try {
            auto tiers = tier_ordering_check(params);
            slack = std::max(tiers.rho_sector - tiers.rho_basket, tiers.rho_cross - tiers.rho_sector);
            failed = kind == 2 || slack >= 0.0;  // degenerate case must throw
        } catch (const DegenerateTiers&) {
            failed = kind != 2;
        }
        run.add(slack, failed);
    }
    return run.finish();
}

CheckRecord check_leverage_identity(const VerifyOptions& opt) {
    CheckRun run("leverage-identity", 1e-12);
    auto rng = check_rng(opt, run.record.name);
    for (int i = 0; i < opt.instances; ++i) {
        auto topo = random_topology(rng, opt.max_nodes);
        auto factors = topo_factors(topo, rho_grid(i % kRhoGridSize));
        const double lev = uniform_real(rng, 0.5, 4.0);
        Eigen::VectorXd s = random_signals(rng, topo.n_real());
        if (i % 7 == 0) s.setZero();
        auto result = normalize_leverage(raw_portfolio(s, factors, topo), lev);
        if (result.degenerate) {
            run.add(result.weights.lpNorm<1>(), s.lpNorm<1>() != 0.0);
        } else {
            run.add(std::abs(result.weights.lpNorm<1>() - lev), false);
        }
    }
    return run.finish();
}

}  // namespace

double path_product_slack(const RootedTopology& topo, const TopoFactors& factors) {
    double slack = 0.0;
    for (int v = 0; v < topo.n_nodes; ++v) {
        double prod = 1.0;
        std::vector<int> chain;
        for (int u = topo.parent[v]; u != -1; u = topo.parent[u]) chain.push_back(u);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) prod *= factors.alpha[*it];
        slack = std::max(slack, std::abs(factors.g[v] - prod));
    }
    return slack;
}

double mass_amplification_slack(const RootedTopology& topo, const TopoFactors& factors) {
    double slack = 0.0;
    for (int u = 0; u < topo.n_nodes; ++u) {
        const int b = topo.branching[u];
        if (b < 1) continue;
        double child_sum = 0.0;
        for (int v : topo.children[u]) child_sum += factors.g[v];
        const double beta = b * (1.0 - factors.rho) + factors.rho;
        slack = std::max(slack, std::abs(child_sum - beta * factors.g[u]));
        slack = std::max(slack, 1.0 - beta);  // beta >= 1 always
        if (b > 1 && factors.rho < 1.0 && beta <= 1.0) slack = std::max(slack, 1.0);  // strictness
    }
    return slack;
}

double level_mass_slack(const RootedTopology& topo, const TopoFactors& factors) {
    double slack = 0.0;
    for (int level = 0; level <= topo.max_depth(); ++level) {
        const double bound = std::pow(factors.gamma_bound, level);
        slack = std::max(slack, level_mass(factors, topo, level) - bound);
    }
    return slack;
}

double factor_bounds_slack(const RootedTopology& topo, const TopoFactors& factors) {
    const double step = (1.0 - factors.rho) + factors.rho / topo.max_branching;
    double slack = 0.0;
    for (int v = 0; v < topo.n_nodes; ++v) {
        const double g = factors.g[v];
        slack = std::max(slack, g - 1.0);
        slack = std::max(slack, std::pow(step, topo.depth[v]) - g);
        slack = std::max(slack, std::pow(1.0 - factors.rho, topo.depth[v]) - g);
    }
    return slack;
}

VerifyReport run_verify(const VerifyOptions& options) {
    VerifyReport report;
    report.seed = options.seed;
    report.instances = options.instances;
    report.checks = {
        check_distance_bounds(options),  check_path_product(options),
        check_rho_zero_limit(options),   check_rho_one_equal_split(options),
        check_mass_amplification(options), check_level_mass_bound(options),
        check_factor_bounds(options),    check_sign_preservation(options),
        check_scale_symmetry(options),   check_p_independence(options),
        check_depth_one(options),        check_connectivity(options),
        check_mst_oracle(options),       check_lipschitz(options),
        check_tier_ordering(options),    check_leverage_identity(options),
    };
    report.overall = std::all_of(report.checks.begin(), report.checks.end(),
                                 [](const CheckRecord& c) { return c.pass; });
    return report;
}

std::string report_json(const VerifyReport& report) {
    nlohmann::ordered_json j;
    j["seed"] = report.seed;
    j["instances"] = report.instances;
    j["overall"] = report.overall;
    auto checks = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"instances", c.instances},
                          {"failures", c.failures},
                          {"worst_slack", c.worst_slack},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass}});
    }
    j["checks"] = std::move(checks);
    return j.dump(2) + "\n";
}

}  // namespace trp
