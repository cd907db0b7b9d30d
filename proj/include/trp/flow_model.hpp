#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "trp/types.hpp"

namespace trp {

/// Three-level nested flow model: every asset loads a market shock, its
/// sector's shock, and its basket's shock, plus idiosyncratic noise. All
/// shocks are independent with unit variance.
struct FlowModelParams {
    double theta_market = 0.3;
    double theta_sector = 0.2;
    double theta_basket = 0.15;
    double sigma_eps = 0.1;
    /// When set, overrides the loadings: all three become sqrt(lambda) and
    /// sigma_eps becomes sqrt(1 - lambda).
    std::optional<double> lambda;
    std::vector<int> sector_of;  // per asset
    std::vector<int> basket_of;  // per asset; each basket lies within one sector
    std::uint64_t seed = 0;

    int n_assets() const { return static_cast<int>(sector_of.size()); }
    double effective_theta_market() const;
    double effective_theta_sector() const;
    double effective_theta_basket() const;
    double effective_sigma() const;
};

struct PopulationCovariance {
    Eigen::MatrixXd values;
};

struct TierReport {
    double rho_basket = 0.0;  // same basket
    double rho_sector = 0.0;  // same sector, different basket
    double rho_cross = 0.0;   // different sector
};

struct RegimeStats {
    double intra_basket_fraction = 0.0;
    double intra_sector_fraction = 0.0;  // same sector, different basket
    double cross_sector_fraction = 0.0;
    int max_degree = 0;
    int n_edges = 0;
};

/// Assets plus sector/basket labels, baskets numbered globally. Ticker scheme
/// is S<sector>B<basket>A<asset>; sector ETFs, when requested, are one XL*
/// name per sector in a singleton basket.
struct NestedUniverse {
    std::vector<AssetId> assets;
    std::vector<int> sector_of;
    std::vector<int> basket_of;
    int n_sectors = 0;
    int n_baskets = 0;
};

NestedUniverse make_nested_universe(int n_sectors, int baskets_per_sector, int assets_per_basket,
                                    bool with_sector_etfs = false);

/// Gaussian draws via Box-Muller on mt19937_64 bits. Pinned by hand because
/// std::normal_distribution is implementation-defined; a given seed must
/// reproduce the same panel everywhere.
class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}
    double next();

  private:
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Draws T periods of returns for the labeled universe. Deterministic given
/// the seed: per period the market shock is drawn first, then sector shocks in
/// ascending sector id, basket shocks in ascending basket id, then per-asset
/// noise.
ReturnsPanel generate_returns(const FlowModelParams& params, const NestedUniverse& universe, int periods);

/// Analytic covariance implied by the loadings and labels.
PopulationCovariance population_covariance(const FlowModelParams& params);

/// Population correlation tiers; throws DegenerateTiers when any two coincide.
TierReport tier_ordering_check(const FlowModelParams& params);

/// Generates a panel, builds the MST over the correlation distances of all
/// assets, and classifies the edges by label. High intra-basket fractions
/// signal hierarchy recovery; a large max degree signals the star regime.
RegimeStats mst_regime_probe(const FlowModelParams& params, const NestedUniverse& universe, int periods);

}  // namespace trp
