#include "trp/flow_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

#include "trp/dependence.hpp"
#include "trp/errors.hpp"

namespace trp {

namespace {

void validate_labels(const FlowModelParams& params) {
    const int n = params.n_assets();
    if (n == 0) throw InconsistentLabels("no assets labeled");
    if (static_cast<int>(params.basket_of.size()) != n)
        throw InconsistentLabels("sector and basket label counts differ");
    std::unordered_map<int, int> basket_sector;
    for (int i = 0; i < n; ++i) {
        if (params.sector_of[i] < 0 || params.basket_of[i] < 0)
            throw InconsistentLabels("negative label id");
        auto [it, inserted] = basket_sector.try_emplace(params.basket_of[i], params.sector_of[i]);
        if (!inserted && it->second != params.sector_of[i])
            throw InconsistentLabels("basket " + std::to_string(params.basket_of[i]) +
                                     " spans multiple sectors");
    }
    if (params.lambda && (*params.lambda < 0.0 || *params.lambda > 1.0))
        throw std::invalid_argument("lambda must lie in [0, 1]");
}

}  // namespace

double FlowModelParams::effective_theta_market() const {
    return lambda ? std::sqrt(*lambda) : theta_market;
}
double FlowModelParams::effective_theta_sector() const {
    return lambda ? std::sqrt(*lambda) : theta_sector;
}
double FlowModelParams::effective_theta_basket() const {
    return lambda ? std::sqrt(*lambda) : theta_basket;
}
double FlowModelParams::effective_sigma() const { return lambda ? std::sqrt(1.0 - *lambda) : sigma_eps; }

NestedUniverse make_nested_universe(int n_sectors, int baskets_per_sector, int assets_per_basket,
                                    bool with_sector_etfs) {
    if (n_sectors < 1 || baskets_per_sector < 1 || assets_per_basket < 1)
        throw std::invalid_argument("universe dimensions must be positive");

    NestedUniverse u;
    u.n_sectors = n_sectors;
    int basket_id = 0;
    for (int s = 0; s < n_sectors; ++s) {
        for (int b = 0; b < baskets_per_sector; ++b, ++basket_id) {
            for (int a = 0; a < assets_per_basket; ++a) {
                u.assets.emplace_back("S" + std::to_string(s) + "B" + std::to_string(b) + "A" +
                                      std::to_string(a));
                u.sector_of.push_back(s);
                u.basket_of.push_back(basket_id);
            }
        }
        if (with_sector_etfs) {
            u.assets.emplace_back("XL" + std::string(1, static_cast<char>('A' + s % 26)) +
                                  (s >= 26 ? std::to_string(s / 26) : ""));
            u.sector_of.push_back(s);
            u.basket_of.push_back(basket_id++);  // singleton basket for the ETF
        }
    }
    u.n_baskets = basket_id;
    return u;
}

double GaussianSampler::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 53-bit uniforms; u1 shifted into (0, 1] so the log is finite.
    const double u1 = 1.0 - (rng_() >> 11) * 0x1.0p-53;
    const double u2 = (rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

ReturnsPanel generate_returns(const FlowModelParams& params, const NestedUniverse& universe, int periods) {
    if (periods < 1) throw std::invalid_argument("periods must be >= 1");
    if (universe.sector_of != params.sector_of || universe.basket_of != params.basket_of)
        throw InconsistentLabels("params and universe labels disagree");
    validate_labels(params);

    const int n = params.n_assets();
    const int n_sectors = 1 + *std::max_element(params.sector_of.begin(), params.sector_of.end());
    const int n_baskets = 1 + *std::max_element(params.basket_of.begin(), params.basket_of.end());
    const double tm = params.effective_theta_market();
    const double ts = params.effective_theta_sector();
    const double tb = params.effective_theta_basket();
    const double sigma = params.effective_sigma();

    ReturnsPanel panel;
    panel.assets = universe.assets;
    panel.returns.resize(n, periods);

    GaussianSampler gauss(params.seed);
    std::vector<double> z_sector(n_sectors), z_basket(n_baskets);
    for (int t = 0; t < periods; ++t) {
        const double z_market = gauss.next();
        for (int s = 0; s < n_sectors; ++s) z_sector[s] = gauss.next();
        for (int b = 0; b < n_baskets; ++b) z_basket[b] = gauss.next();
        for (int i = 0; i < n; ++i) {
            panel.returns(i, t) = tm * z_market + ts * z_sector[params.sector_of[i]] +
                                  tb * z_basket[params.basket_of[i]] + sigma * gauss.next();
        }
    }
    return panel;
}

PopulationCovariance population_covariance(const FlowModelParams& params) {
    validate_labels(params);
    const int n = params.n_assets();
    const double m2 = params.effective_theta_market() * params.effective_theta_market();
    const double s2 = params.effective_theta_sector() * params.effective_theta_sector();
    const double b2 = params.effective_theta_basket() * params.effective_theta_basket();
    const double e2 = params.effective_sigma() * params.effective_sigma();

    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j)
                cov(i, j) = m2 + s2 + b2 + e2;
            else if (params.basket_of[i] == params.basket_of[j])
                cov(i, j) = m2 + s2 + b2;
            else if (params.sector_of[i] == params.sector_of[j])
                cov(i, j) = m2 + s2;
            else
                cov(i, j) = m2;
        }
    }
    return {std::move(cov)};
}

TierReport tier_ordering_check(const FlowModelParams& params) {
    const double m2 = params.effective_theta_market() * params.effective_theta_market();
    const double s2 = params.effective_theta_sector() * params.effective_theta_sector();
    const double b2 = params.effective_theta_basket() * params.effective_theta_basket();
    const double var = m2 + s2 + b2 + params.effective_sigma() * params.effective_sigma();
    if (var <= 0.0) throw DegenerateTiers("total variance is zero");

    TierReport report;
    report.rho_basket = (m2 + s2 + b2) / var;
    report.rho_sector = (m2 + s2) / var;
    report.rho_cross = m2 / var;
    if (!(report.rho_basket > report.rho_sector))
        throw DegenerateTiers("basket and sector tiers coincide");
    if (!(report.rho_sector > report.rho_cross))
        throw DegenerateTiers("sector and cross-sector tiers coincide");
    return report;
}

RegimeStats mst_regime_probe(const FlowModelParams& params, const NestedUniverse& universe, int periods) {
    if (universe.n_sectors < 2) throw std::invalid_argument("probe needs at least 2 sectors");
    std::vector<int> baskets_in_sector(universe.n_sectors, 0);
    {
        std::vector<bool> seen(universe.n_baskets, false);
        for (size_t i = 0; i < universe.basket_of.size(); ++i) {
            if (!seen[universe.basket_of[i]]) {
                seen[universe.basket_of[i]] = true;
                ++baskets_in_sector[universe.sector_of[i]];
            }
        }
    }
    for (int c : baskets_in_sector)
        if (c < 2) throw std::invalid_argument("probe needs at least 2 baskets per sector");

    auto panel = generate_returns(params, universe, periods);
    auto corr = correlation_from_rows(panel.returns);
    auto tree = build_mst(distance_matrix(corr));

    RegimeStats stats;
    stats.n_edges = static_cast<int>(tree.edges.size());
    std::vector<int> degree(tree.n_nodes, 0);
    int intra_basket = 0, intra_sector = 0, cross = 0;
    for (const auto& e : tree.edges) {
        ++degree[e.u];
        ++degree[e.v];
        if (universe.basket_of[e.u] == universe.basket_of[e.v])
            ++intra_basket;
        else if (universe.sector_of[e.u] == universe.sector_of[e.v])
            ++intra_sector;
        else
            ++cross;
    }
    if (stats.n_edges > 0) {
        stats.intra_basket_fraction = static_cast<double>(intra_basket) / stats.n_edges;
        stats.intra_sector_fraction = static_cast<double>(intra_sector) / stats.n_edges;
        stats.cross_sector_fraction = static_cast<double>(cross) / stats.n_edges;
    }
    stats.max_degree = degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
    return stats;
}

}  // namespace trp
