#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "trp/data_model.hpp"
#include "trp/flow_model.hpp"
#include "trp/propagation.hpp"

using namespace trp;

namespace {

SpanningTree make_tree(int n, std::vector<std::pair<int, int>> pairs) {
    SpanningTree tree;
    tree.n_nodes = n;
    for (auto [u, v] : pairs) tree.edges.push_back({std::min(u, v), std::max(u, v), 0.0});
    return tree;
}

RootedTopology random_topology(std::mt19937_64& rng, int max_nodes) {
    const int n = 2 + static_cast<int>(rng() % (max_nodes - 1));
    if (n == 2) return root_tree(make_tree(2, {{0, 1}}), static_cast<int>(rng() % 2));
    std::vector<int> code(n - 2);
    for (int& c : code) c = static_cast<int>(rng() % n);
    auto tree = make_tree(n, pruefer_decode(code));
    return root_tree(tree, static_cast<int>(rng() % n));
}

Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, int n) {
    GaussianSampler gauss(rng());
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s(i) = gauss.next();
    return s;
}

struct Universe {
    ReturnsPanel panel;
    SignalVector signals;
};

Universe random_universe(std::mt19937_64& rng, bool with_etfs) {
    auto universe = make_nested_universe(2 + rng() % 2, 1 + rng() % 2, 1 + rng() % 3, with_etfs);
    FlowModelParams params;
    params.sector_of = universe.sector_of;
    params.basket_of = universe.basket_of;
    params.seed = rng();
    Universe out;
    out.panel = generate_returns(params, universe, 50 + rng() % 40);
    out.signals = gaussian_vector(rng, out.panel.n_assets());
    return out;
}

}  // namespace

TEST_CASE("alpha endpoints and interior value") {
    CHECK(alpha(1, 0.0) == 1.0);
    CHECK(alpha(7, 0.0) == 1.0);
    CHECK(alpha(3, 1.0) == doctest::Approx(1.0 / 3.0));
    CHECK(alpha(2, 0.5) == doctest::Approx(0.75));
    CHECK_THROWS_AS(alpha(0, 0.5), std::invalid_argument);
}

TEST_CASE("topo_factors limit cases") {
    std::mt19937_64 rng(47);
    auto topo = random_topology(rng, 30);

    auto at_zero = topo_factors(topo, 0.0);
    for (double g : at_zero.g) CHECK(g == 1.0);

    // chain with unit branching keeps g at 1 for any rho
    auto chain = root_tree(make_tree(3, {{0, 1}, {1, 2}}), 0);
    auto factors = topo_factors(chain, 0.77);
    CHECK(factors.g[2] == doctest::Approx(1.0));

    CHECK_THROWS_AS(topo_factors(topo, 1.5), std::invalid_argument);
}

TEST_CASE("three children at rho 0.25 match the beta identity") {
    auto star = root_tree(make_tree(4, {{0, 1}, {0, 2}, {0, 3}}), 0);
    auto factors = topo_factors(star, 0.25);
    const double expected_child = 0.75 + 0.25 / 3.0;  // 5/6
    double child_sum = 0.0;
    for (int v = 1; v < 4; ++v) {
        CHECK(factors.g[v] == doctest::Approx(expected_child));
        child_sum += factors.g[v];
    }
    const double beta = 3 * 0.75 + 0.25;
    CHECK(child_sum == doctest::Approx(beta));
    CHECK(factors.beta[0] == doctest::Approx(beta));
    CHECK(factors.alpha[0] == doctest::Approx(expected_child));
}

TEST_CASE("level masses on a full binary tree") {
    auto tree = make_tree(7, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {2, 6}});
    auto topo = root_tree(tree, 0);
    auto factors = topo_factors(topo, 0.0);
    CHECK(level_mass(factors, topo, 0) == doctest::Approx(1.0));
    CHECK(level_mass(factors, topo, 1) == doctest::Approx(2.0));
    CHECK(level_mass(factors, topo, 2) == doctest::Approx(4.0));
    CHECK(factors.gamma_bound == doctest::Approx(2.0));  // bound is tight at rho 0

    // conservative endpoint: every level carries at most mass 1
    auto conservative = topo_factors(topo, 1.0);
    for (int level = 0; level <= topo.max_depth(); ++level)
        CHECK(level_mass(conservative, topo, level) <= 1.0 + 1e-12);
}

TEST_CASE("raw portfolio scales signals by g and keeps signs") {
    std::mt19937_64 rng(53);
    auto topo = random_topology(rng, 20);
    auto factors = topo_factors(topo, 0.6);
    Eigen::VectorXd s = gaussian_vector(rng, topo.n_real());
    s(0) = 0.0;
    auto x = raw_portfolio(s, factors, topo);
    CHECK(x(0) == 0.0);
    for (int v = 0; v < s.size(); ++v) {
        CHECK(x(v) == s(v) * factors.g[v]);
        if (s(v) != 0.0) CHECK(x(v) * s(v) > 0.0);
    }

    auto identity = topo_factors(topo, 0.0);
    auto raw = raw_portfolio(s, identity, topo);
    for (int v = 0; v < s.size(); ++v) CHECK(raw(v) == s(v));
}

TEST_CASE("leverage normalization") {
    Eigen::VectorXd x(2);
    x << 1.0, -1.0;
    auto result = normalize_leverage(x, 2.0);
    CHECK_FALSE(result.degenerate);
    CHECK(result.weights(0) == doctest::Approx(1.0));
    CHECK(result.weights(1) == doctest::Approx(-1.0));
    CHECK(result.weights.lpNorm<1>() == doctest::Approx(2.0));

    auto degenerate = normalize_leverage(Eigen::VectorXd::Zero(3), 1.0);
    CHECK(degenerate.degenerate);
    CHECK(degenerate.weights.lpNorm<1>() == 0.0);

    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd v = gaussian_vector(rng, 1 + rng() % 30);
        const double lev = 0.5 + (rng() % 100) / 25.0;
        auto r = normalize_leverage(v, lev);
        CHECK(std::abs(r.weights.lpNorm<1>() - lev) < 1e-12);
    }
}

TEST_CASE("postprocess clip, prune, renormalize") {
    Eigen::VectorXd w(2);
    w << 0.9, -0.2;
    auto clipped = postprocess(w, 0.5, std::nullopt, false, 1.0);
    CHECK(clipped.weights(0) == doctest::Approx(0.5));
    CHECK(clipped.weights(1) == doctest::Approx(-0.2));

    Eigen::VectorXd small(2);
    small << 0.5, 0.0005;
    auto pruned = postprocess(small, std::nullopt, 0.001, false, 1.0);
    CHECK(pruned.weights(0) == doctest::Approx(0.5));
    CHECK(pruned.weights(1) == 0.0);

    // no cap, no threshold: identity
    auto noop = postprocess(w, std::nullopt, std::nullopt, false, 1.0);
    CHECK((noop.weights.array() == w.array()).all());

    // boundary |w| == eta survives (strict inequality prunes)
    Eigen::VectorXd edge(2);
    edge << 0.5, 0.001;
    auto kept = postprocess(edge, std::nullopt, 0.001, false, 1.0);
    CHECK(kept.weights(1) == doctest::Approx(0.001));

    auto all_pruned = postprocess(small, std::nullopt, 10.0, false, 1.0);
    CHECK(all_pruned.all_pruned);
    CHECK(all_pruned.weights.lpNorm<1>() == 0.0);

    auto renorm = postprocess(w, 0.5, std::nullopt, true, 1.0);
    CHECK(renorm.weights.lpNorm<1>() == doctest::Approx(1.0));
}

TEST_CASE("depth-one neutralization demeans each group") {
    // root -> {1} -> {0, 2}: one depth-one group holding everything
    auto tree = make_tree(3, {{0, 1}, {1, 2}});
    std::vector<int> etfs = {1};
    auto topo = anchor_market_sector(tree, etfs);

    Eigen::VectorXd w(3);
    w << 0.3, 0.0, 0.1;
    auto result = neutralize_depth_one(w, topo, 1.0);
    // demeaned group mean (0.3 + 0.0 + 0.1)/3; sums to zero, regrossed to 1
    double group_sum = result.weights.sum();
    CHECK(std::abs(group_sum) < 1e-12);
    CHECK(result.weights.lpNorm<1>() == doctest::Approx(1.0));

    // two-member group example: (0.3, 0.1) -> (0.1, -0.1) before regrossing
    auto pair_tree = make_tree(2, {{0, 1}});
    std::vector<int> pair_etf = {0};
    auto pair_topo = anchor_market_sector(pair_tree, pair_etf);
    Eigen::VectorXd pw(2);
    pw << 0.3, 0.1;
    auto pair_result = neutralize_depth_one(pw, pair_topo, 0.2);
    CHECK(pair_result.weights(0) == doctest::Approx(0.1));
    CHECK(pair_result.weights(1) == doctest::Approx(-0.1));

    // an already-neutral portfolio is a fixed point up to regrossing
    Eigen::VectorXd neutral(2);
    neutral << 0.1, -0.1;
    auto fixed = neutralize_depth_one(neutral, pair_topo, 0.2);
    CHECK(fixed.weights(0) == doctest::Approx(0.1));
    CHECK(fixed.weights(1) == doctest::Approx(-0.1));

    // equal weights in a group cancel entirely
    Eigen::VectorXd flat = Eigen::VectorXd::Constant(2, 0.5);
    auto zeroed = neutralize_depth_one(flat, pair_topo, 1.0);
    CHECK(zeroed.zeroed);
}

TEST_CASE("group sums vanish on random portfolios") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 20);
        std::vector<int> code(n - 2);
        for (int& c : code) c = static_cast<int>(rng() % n);
        auto tree = make_tree(n, pruefer_decode(code));
        std::vector<int> etfs;
        const int n_etfs = 1 + static_cast<int>(rng() % 3);
        while (static_cast<int>(etfs.size()) < n_etfs) {
            int x = static_cast<int>(rng() % n);
            if (std::find(etfs.begin(), etfs.end(), x) == etfs.end()) etfs.push_back(x);
        }
        auto topo = anchor_market_sector(tree, etfs);
        Eigen::VectorXd w = gaussian_vector(rng, n);
        auto result = neutralize_depth_one(w, topo, 1.5);
        if (result.zeroed) continue;

        // recompute group membership independently and check each sum
        for (int anchor : topo.children[topo.root]) {
            double sum = 0.0;
            for (int v = 0; v < n; ++v) {
                int node = v;
                while (topo.depth[node] > 1) node = topo.parent[node];
                if (node == anchor) sum += result.weights(v);
            }
            CHECK(std::abs(sum) < 1e-12);
        }
        CHECK(result.weights.lpNorm<1>() == doctest::Approx(1.5));
    }
}

TEST_CASE("allocate at rho zero is normalized raw-signal allocation") {
    std::mt19937_64 rng(67);
    auto u = random_universe(rng, false);
    TrpConfig cfg;
    cfg.rho = 0.0;
    cfg.leverage = 2.0;
    cfg.magnitude_threshold = 1e-9;

    auto result = allocate(u.panel, u.signals, cfg, Variant::MstRooted);
    REQUIRE_FALSE(result.active.empty());
    double denom = 0.0;
    for (int idx : result.active.indices) denom += std::abs(u.signals(idx));
    for (int idx : result.active.indices) {
        CHECK(result.portfolio.weights(idx) ==
              doctest::Approx(2.0 * u.signals(idx) / denom).epsilon(1e-12));
    }
}

TEST_CASE("allocate with a single active asset pins the full book") {
    ReturnsPanel panel;
    panel.assets = {AssetId("AAA"), AssetId("BBB")};
    panel.returns.resize(2, 3);
    panel.returns << 0.01, -0.02, 0.01, 0.0, 0.0, 0.0;
    SignalVector s(2);
    s << -0.5, 0.9;  // BBB is filtered out by zero magnitude

    TrpConfig cfg;
    cfg.magnitude_threshold = 1e-6;
    cfg.leverage = 1.0;
    auto result = allocate(panel, s, cfg, Variant::MstRooted);
    CHECK(result.portfolio.weights(0) == doctest::Approx(-1.0));
    CHECK(result.portfolio.weights(1) == 0.0);
    CHECK(result.portfolio.status == AllocStatus::Ok);
}

TEST_CASE("allocate flags an empty active set") {
    ReturnsPanel panel;
    panel.assets = {AssetId("AAA")};
    panel.returns.resize(1, 2);
    panel.returns << 0.01, 0.02;
    SignalVector s(1);
    s << 1e-9;  // below tau

    auto result = allocate(panel, s, TrpConfig{}, Variant::MstRooted);
    CHECK(result.portfolio.status == AllocStatus::EmptyActiveSet);
    CHECK(result.portfolio.weights.lpNorm<1>() == 0.0);
}

TEST_CASE("allocate equals the composition of its stages") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 50; ++trial) {
        auto u = random_universe(rng, trial % 2 == 1);
        TrpConfig cfg;
        cfg.rho = (trial % 11) / 10.0;
        cfg.leverage = 1.7;
        cfg.magnitude_threshold = 1e-9;
        cfg.cap = 0.4;
        cfg.min_weight = 0.01;
        const Variant variant = trial % 2 == 1 ? Variant::SectorAnchored : Variant::MstRooted;

        auto end_to_end = allocate(u.panel, u.signals, cfg, variant);

        // manual composition of the module operations
        auto active = active_set(u.panel, u.signals, cfg);
        REQUIRE(active.indices == end_to_end.active.indices);
        if (active.empty()) continue;
        Eigen::VectorXd s_active(active.n_active());
        for (int a = 0; a < active.n_active(); ++a) s_active(a) = u.signals(active.indices[a]);

        RootedTopology topo;
        if (variant == Variant::MstRooted) {
            auto tree = build_mst(distance_matrix(correlation_matrix(u.panel, active)));
            topo = root_tree(tree, select_root(tree, s_active, cfg.root_mode, active.indices));
        } else {
            auto etfs = sector_etf_ordinals(u.panel, active);
            if (!etfs.empty()) {
                auto tree = build_mst(distance_matrix(correlation_matrix(u.panel, active)));
                topo = anchor_market_sector(tree, etfs);
            } else {
                topo = fallback_augmented_mst(u.panel, active);
            }
        }
        auto factors = topo_factors(topo, cfg.rho);
        auto x = raw_portfolio(s_active, factors, topo);
        auto w = normalize_leverage(x, cfg.leverage).weights;
        if (variant == Variant::SectorAnchored)
            w = postprocess(w, cfg.cap, cfg.min_weight, false, cfg.leverage).weights;

        for (int a = 0; a < active.n_active(); ++a) {
            CHECK(end_to_end.portfolio.weights(active.indices[a]) == w(a));
            CHECK(end_to_end.portfolio.pre_norm(active.indices[a]) == x(a));
        }
    }
}

TEST_CASE("variant one outputs are bitwise independent of the exponent") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 30; ++trial) {
        auto u = random_universe(rng, false);
        TrpConfig cfg;
        cfg.rho = 0.4;
        Eigen::VectorXd w_p1, w_p2, w_p3;
        for (double p : {1.0, 2.0, 3.0}) {
            cfg.subtree_exponent = p;
            auto result = allocate(u.panel, u.signals, cfg, Variant::MstRooted);
            (p == 1.0 ? w_p1 : p == 2.0 ? w_p2 : w_p3) = result.portfolio.weights;
        }
        for (int i = 0; i < w_p1.size(); ++i) {
            CHECK(w_p1(i) == w_p2(i));
            CHECK(w_p1(i) == w_p3(i));
        }
    }
}

TEST_CASE("scale symmetry holds with the topology fixed") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 200; ++trial) {
        auto topo = random_topology(rng, 40);
        auto factors = topo_factors(topo, (trial % 11) / 10.0);
        Eigen::VectorXd s = gaussian_vector(rng, topo.n_real());
        auto weigh = [&](const Eigen::VectorXd& sig) {
            return normalize_leverage(raw_portfolio(sig, factors, topo), 3.0).weights;
        };
        auto base = weigh(s);
        CHECK((weigh(2.7 * s) - base).lpNorm<1>() < 1e-12);
        CHECK((weigh(-s) + base).lpNorm<1>() < 1e-12);
        CHECK((weigh(0.003 * s) - base).lpNorm<1>() < 1e-9);  // small positive scale
    }
}

TEST_CASE("stability certificate bounds portfolio moves empirically") {
    std::mt19937_64 rng(83);
    int checked = 0;
    while (checked < 300) {
        auto topo = random_topology(rng, 40);
        auto factors = topo_factors(topo, (checked % 11) / 10.0);
        Eigen::VectorXd s = gaussian_vector(rng, topo.n_real());
        Eigen::VectorXd s2 = gaussian_vector(rng, topo.n_real());
        const double lev = 2.0;
        auto cert = stability_certificate(factors, topo, s, s2, lev);
        if (cert.gamma <= 0.01) continue;
        ++checked;
        auto weigh = [&](const Eigen::VectorXd& sig) {
            return normalize_leverage(raw_portfolio(sig, factors, topo), lev).weights;
        };
        const double lhs = (weigh(s) - weigh(s2)).lpNorm<1>();
        CHECK(lhs <= cert.lipschitz_constant * (s - s2).lpNorm<1>() + 1e-12);
    }

    // gamma of zero means no finite constant
    auto topo = random_topology(rng, 5);
    auto factors = topo_factors(topo, 0.5);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(topo.n_real());
    auto cert = stability_certificate(factors, topo, z, z, 1.0);
    CHECK(cert.gamma == 0.0);
    CHECK(std::isinf(cert.lipschitz_constant));
}

TEST_CASE("neutralize requires the sector variant") {
    std::mt19937_64 rng(89);
    auto u = random_universe(rng, false);
    TrpConfig cfg;
    cfg.neutralize_depth_one = true;
    CHECK_THROWS_AS(allocate(u.panel, u.signals, cfg, Variant::MstRooted), std::invalid_argument);
}

TEST_CASE("topology hash is stable and input-sensitive") {
    auto tree = make_tree(3, {{0, 1}, {1, 2}});
    auto topo = root_tree(tree, 0);
    std::vector<std::string> names = {"A", "B", "C"};
    auto h1 = topology_hash(topo, names);
    auto h2 = topology_hash(topo, names);
    CHECK(h1 == h2);
    CHECK(h1.size() == 16);

    auto other = root_tree(tree, 1);
    CHECK(topology_hash(other, names) != h1);
}
