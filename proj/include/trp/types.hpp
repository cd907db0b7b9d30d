#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace trp {

/// One asset in the universe. Sector ETFs are recognized by ticker prefix.
struct AssetId {
    std::string ticker;
    bool is_sector_etf = false;

    explicit AssetId(std::string t) : ticker(std::move(t)) {
        is_sector_etf = ticker.size() >= 2 && ticker[0] == 'X' && ticker[1] == 'L';
    }
};

/// Asset-by-period return history. Rows are assets, columns are periods.
struct ReturnsPanel {
    std::vector<AssetId> assets;
    Eigen::MatrixXd returns;  // N x T

    int n_assets() const { return static_cast<int>(assets.size()); }
    int n_periods() const { return static_cast<int>(returns.cols()); }
};

/// Signed cross-sectional signal, aligned to the panel's asset order.
using SignalVector = Eigen::VectorXd;

enum class RootModeKind { Hub, MaxMagnitude, FixedIndex };

struct RootMode {
    RootModeKind kind = RootModeKind::Hub;
    int fixed_index = 0;  // panel index, used by FixedIndex only

    static RootMode hub() { return {RootModeKind::Hub, 0}; }
    static RootMode max_magnitude() { return {RootModeKind::MaxMagnitude, 0}; }
    static RootMode fixed(int panel_index) { return {RootModeKind::FixedIndex, panel_index}; }
};

enum class Variant { MstRooted, SectorAnchored };

struct TrpConfig {
    int lookback = 0;                   // k; 0 means full history
    double magnitude_threshold = 1e-8;  // epsilon, strict filter m_i > epsilon
    double signal_threshold = 1e-3;     // tau, strict filter |s_i| > tau
    double rho = 0.5;                   // split/replication mix in [0, 1]
    double leverage = 1.0;              // target gross exposure L
    RootMode root_mode;
    std::optional<double> cap;         // clip bound c, post-processing
    std::optional<double> min_weight;  // prune threshold eta, post-processing
    double subtree_exponent = 1.0;     // p, diagnostics only
    bool renormalize_after_postprocess = false;
    bool neutralize_depth_one = false;
    bool force_postprocess = false;  // apply clip/prune in the MST variant too
};

/// Assets passing both activity filters, in ascending panel order.
struct ActiveSet {
    std::vector<int> indices;           // subset of {0..N-1}, ascending
    Eigen::VectorXd recent_magnitudes;  // length N, over the whole universe

    int n_active() const { return static_cast<int>(indices.size()); }
    bool empty() const { return indices.empty(); }
};

}  // namespace trp
