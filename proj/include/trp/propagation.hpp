#pragma once

#include <string>

#include "trp/topology.hpp"
#include "trp/types.hpp"

namespace trp {

/// Per-node propagation state for a fixed rooted topology and rho.
/// g is 1 at the root and alpha[parent] * g[parent] elsewhere; alpha and beta
/// are meaningful for internal nodes only (leaves hold 1).
struct TopoFactors {
    double rho = 0.0;
    std::vector<double> g;
    std::vector<double> alpha;  // (1 - rho) + rho / b(u)
    std::vector<double> beta;   // b(u) (1 - rho) + rho
    double gamma_bound = 1.0;   // B (1 - rho) + rho, per-level growth cap
};

enum class AllocStatus { Ok, EmptyActiveSet, DegenerateSignal, AllWeightsPruned, NeutralizedToZero };

const char* to_string(AllocStatus status);

/// Final long/short book over the full universe; inactive assets hold zeros.
struct Portfolio {
    Eigen::VectorXd pre_norm;  // x_i = s_i * g_i, length N
    Eigen::VectorXd weights;   // length N
    double gross = 0.0;        // sum |w|
    double leverage_target = 0.0;
    AllocStatus status = AllocStatus::Ok;
};

/// Everything the pipeline produced along the way; Portfolio is the contract,
/// the rest feeds reports and output files.
struct AllocationResult {
    Portfolio portfolio;
    ActiveSet active;
    RootedTopology topology;
    TopoFactors factors;
    SubtreeMass masses;
    Eigen::VectorXd g_full;  // length N, 0 for inactive assets
    Variant variant = Variant::MstRooted;
};

struct StabilityCertificate {
    double gamma = 0.0;               // lower bound on ||diag(g) s||_1
    double lipschitz_constant = 0.0;  // 2 L / gamma; infinite when gamma <= 0
};

/// Split/replication coefficient (1 - rho) + rho / b, in (0, 1] for b >= 1.
double alpha(int b, double rho);

/// Topological factors by top-down recursion from g_root = 1. Cross-checks the
/// recursion against the ancestor-path product before returning.
TopoFactors topo_factors(const RootedTopology& topo, double rho);

/// Sum of g over the nodes at the given depth.
double level_mass(const TopoFactors& factors, const RootedTopology& topo, int level);

/// Pre-normalization exposures x_v = s_v * g_v over the real assets.
Eigen::VectorXd raw_portfolio(const Eigen::VectorXd& active_signals, const TopoFactors& factors,
                              const RootedTopology& topo);

struct NormalizeResult {
    Eigen::VectorXd weights;
    bool degenerate = false;  // ||x||_1 was zero; weights are all zero
};

/// w = L x / ||x||_1. A zero exposure vector yields a zero portfolio plus a
/// degenerate flag rather than an error.
NormalizeResult normalize_leverage(const Eigen::VectorXd& x, double leverage);

struct PostprocessResult {
    Eigen::VectorXd weights;
    bool all_pruned = false;
};

/// Clip to [-cap, cap], zero entries with |w| < min_weight, then optionally
/// rescale the survivors back to gross leverage.
PostprocessResult postprocess(const Eigen::VectorXd& weights, std::optional<double> cap,
                              std::optional<double> min_weight, bool renormalize, double leverage);

struct NeutralizeResult {
    Eigen::VectorXd weights;
    bool zeroed = false;  // demeaning cancelled everything
};

/// Demeans each depth-one subtree of a dummy-rooted topology so every group
/// sums to zero, then restores gross leverage.
NeutralizeResult neutralize_depth_one(const Eigen::VectorXd& weights, const RootedTopology& topo,
                                      double leverage);

/// End-to-end allocator: activity filter, correlation distance, spanning tree,
/// rooted propagation, leverage normalization, and variant-specific
/// post-processing. Equals the composition of the individual steps.
AllocationResult allocate(const ReturnsPanel& panel, const SignalVector& signals, const TrpConfig& cfg,
                          Variant variant);

/// Certificate for the conditional L1 stability bound, from the smaller of the
/// two exposure norms.
StabilityCertificate stability_certificate(const TopoFactors& factors, const RootedTopology& topo,
                                           const Eigen::VectorXd& s, const Eigen::VectorXd& s_prime,
                                           double leverage);

/// FNV-1a hash of the rooted topology (root, parent relation, node names);
/// stable across runs for identical inputs.
std::string topology_hash(const RootedTopology& topo, const std::vector<std::string>& node_names);

}  // namespace trp
