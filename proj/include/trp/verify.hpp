#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trp/propagation.hpp"

namespace trp {

struct VerifyOptions {
    std::uint64_t seed = 42;
    int instances = 1000;  // per check
    int max_nodes = 64;
};

struct CheckRecord {
    std::string name;
    int instances = 0;
    int failures = 0;
    double worst_slack = 0.0;  // positive means "amount of violation"
    double tolerance = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::uint64_t seed = 0;
    int instances = 0;
    std::vector<CheckRecord> checks;
    bool overall = false;  // true iff zero failures anywhere
};

/// Runs every named proposition check over seeded random instances (rho is
/// swept over the grid {0, 0.1, ..., 1} inside each instance).
VerifyReport run_verify(const VerifyOptions& options);

std::string report_json(const VerifyReport& report);

// Per-instance residuals, exposed so tests can feed corrupted inputs and see
// the corresponding check trip. A residual <= 0 means the property holds;
// positive values measure the violation.

/// max_v |g_v - prod of ancestor alphas|
double path_product_slack(const RootedTopology& topo, const TopoFactors& factors);

/// max over internal u of |sum_child g - (b(u)(1-rho)+rho) g_u|, and positive
/// when beta dips below 1 or fails to exceed 1 for b > 1, rho < 1.
double mass_amplification_slack(const RootedTopology& topo, const TopoFactors& factors);

/// max over levels of (level mass - gamma_bound^level)
double level_mass_slack(const RootedTopology& topo, const TopoFactors& factors);

/// max over nodes of the bound violation (1-rho+rho/B)^d <= g <= 1, plus the
/// weaker (1-rho)^d lower bound
double factor_bounds_slack(const RootedTopology& topo, const TopoFactors& factors);

}  // namespace trp
