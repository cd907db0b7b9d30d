#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "trp/data_model.hpp"
#include "trp/errors.hpp"
#include "trp/flow_model.hpp"
#include "trp/io.hpp"
#include "trp/propagation.hpp"
#include "trp/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitDegenerate = 2;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out_path);
    if (!file.is_open()) throw trp::Error("cannot open output file: " + out_path);
    file << text;
}

trp::RootMode parse_root_mode(const std::string& text) {
    if (text == "hub") return trp::RootMode::hub();
    if (text == "maxmag") return trp::RootMode::max_magnitude();
    if (text.rfind("fixed:", 0) == 0) return trp::RootMode::fixed(std::stoi(text.substr(6)));
    throw CLI::ValidationError("--root", "expected hub, maxmag, or fixed:IDX");
}

struct AllocateArgs {
    std::string returns_path, signals_path, out_path;
    std::string variant = "mst";
    std::string root = "hub";
    std::string format = "csv";
    trp::TrpConfig cfg;
    std::optional<double> cap, min_weight;
};

int run_allocate(const AllocateArgs& args) {
    auto panel = trp::load_returns(args.returns_path);
    auto signals = trp::load_signals(args.signals_path, panel);

    trp::TrpConfig cfg = args.cfg;
    cfg.root_mode = parse_root_mode(args.root);
    cfg.cap = args.cap;
    cfg.min_weight = args.min_weight;
    const trp::Variant variant =
        args.variant == "sector" ? trp::Variant::SectorAnchored : trp::Variant::MstRooted;

    auto result = trp::allocate(panel, signals, cfg, variant);
    emit(args.format == "json" ? trp::weights_json(result, panel, signals, cfg)
                               : trp::weights_csv(result, panel, signals, cfg),
         args.out_path);

    if (result.portfolio.status != trp::AllocStatus::Ok) {
        std::cerr << "degenerate portfolio: " << trp::to_string(result.portfolio.status) << "\n";
        return kExitDegenerate;
    }
    return kExitOk;
}

struct TreeArgs {
    std::string returns_path, signals_path, out_path;
    std::string variant = "mst";
    std::string root = "hub";
    std::string format = "dot";
    bool rooted = false;
    trp::TrpConfig cfg;
};

int run_tree(const TreeArgs& args) {
    auto panel = trp::load_returns(args.returns_path);
    trp::SignalVector signals;
    trp::TrpConfig cfg = args.cfg;
    cfg.root_mode = parse_root_mode(args.root);
    if (args.signals_path.empty()) {
        // no signals: treat the whole universe as active
        signals = trp::SignalVector::Ones(panel.n_assets());
        cfg.magnitude_threshold = -1.0;
        cfg.signal_threshold = -1.0;
    } else {
        signals = trp::load_signals(args.signals_path, panel);
    }

    auto active = trp::active_set(panel, signals, cfg);
    if (active.empty()) {
        std::cerr << "no active assets\n";
        return kExitDegenerate;
    }

    if (!args.rooted) {
        auto corr = trp::correlation_matrix(panel, active);
        auto tree = trp::build_mst(trp::distance_matrix(corr));
        std::vector<std::string> names;
        for (int idx : active.indices) names.push_back(panel.assets[idx].ticker);
        emit(args.format == "json" ? trp::mst_json(tree, names) : trp::mst_dot(tree, names),
             args.out_path);
        return kExitOk;
    }

    const trp::Variant variant =
        args.variant == "sector" ? trp::Variant::SectorAnchored : trp::Variant::MstRooted;
    auto result = trp::allocate(panel, signals, cfg, variant);
    auto names = trp::topology_node_names(panel, result.active, result.topology);
    emit(args.format == "json" ? trp::rooted_json(result.topology, names)
                               : trp::rooted_dot(result.topology, names),
         args.out_path);
    return kExitOk;
}

struct SynthArgs {
    int sectors = 4, baskets = 3, per_basket = 4, periods = 500;
    double theta_m = 0.3, theta_s = 0.2, theta_b = 0.15, sigma = 0.1;
    std::optional<double> lambda;
    bool sector_etfs = false;
    std::uint64_t seed = 0;
    std::string out_path;
};

int run_synth(const SynthArgs& args) {
    auto universe = trp::make_nested_universe(args.sectors, args.baskets, args.per_basket,
                                              args.sector_etfs);
    trp::FlowModelParams params;
    params.theta_market = args.theta_m;
    params.theta_sector = args.theta_s;
    params.theta_basket = args.theta_b;
    params.sigma_eps = args.sigma;
    params.lambda = args.lambda;
    params.sector_of = universe.sector_of;
    params.basket_of = universe.basket_of;
    params.seed = args.seed;

    auto panel = trp::generate_returns(params, universe, args.periods);
    emit(trp::returns_csv(panel), args.out_path);
    if (!args.out_path.empty())
        emit(trp::synth_sidecar_json(params, universe, args.periods), args.out_path + ".json");
    return kExitOk;
}

struct VerifyArgs {
    trp::VerifyOptions options;
    std::string out_path;
    std::string format = "text";
};

int run_verify_cmd(const VerifyArgs& args) {
    auto report = trp::run_verify(args.options);
    if (args.format == "json") {
        emit(trp::report_json(report), args.out_path);
    } else {
        std::ostringstream out;
        for (const auto& c : report.checks) {
            out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " instances=" << c.instances
                << " failures=" << c.failures << " worst_slack=" << trp::format_double(c.worst_slack)
                << "\n";
        }
        out << (report.overall ? "OVERALL PASS" : "OVERALL FAIL") << "\n";
        emit(out.str(), args.out_path);
    }
    return report.overall ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topological risk parity: tree-based long/short signal allocation"};
    app.require_subcommand(1);

    AllocateArgs alloc;
    auto* cmd_alloc = app.add_subcommand("allocate", "Map signals and returns into portfolio weights");
    cmd_alloc->add_option("--returns", alloc.returns_path, "returns CSV (wide)")->required();
    cmd_alloc->add_option("--signals", alloc.signals_path, "signals CSV (ticker,signal)")->required();
    cmd_alloc->add_option("--rho", alloc.cfg.rho, "split/replication mix in [0,1]");
    cmd_alloc->add_option("--leverage", alloc.cfg.leverage, "target gross leverage");
    cmd_alloc->add_option("--variant", alloc.variant, "mst or sector")
        ->check(CLI::IsMember({"mst", "sector"}));
    cmd_alloc->add_option("--root", alloc.root, "hub, maxmag, or fixed:IDX");
    cmd_alloc->add_option("--lookback", alloc.cfg.lookback, "activity lookback k (0 = full history)");
    cmd_alloc->add_option("--epsilon", alloc.cfg.magnitude_threshold, "recent-magnitude threshold");
    cmd_alloc->add_option("--tau", alloc.cfg.signal_threshold, "signal magnitude threshold");
    cmd_alloc->add_option("--exponent", alloc.cfg.subtree_exponent, "subtree mass exponent p");
    cmd_alloc->add_option("--cap", alloc.cap, "clip weights to [-cap, cap]");
    cmd_alloc->add_option("--min-weight", alloc.min_weight, "zero weights below this magnitude");
    cmd_alloc->add_flag("--renormalize", alloc.cfg.renormalize_after_postprocess,
                        "restore gross leverage after clip/prune");
    cmd_alloc->add_flag("--neutralize", alloc.cfg.neutralize_depth_one,
                        "demean each depth-one group (sector variant)");
    cmd_alloc->add_flag("--force-postprocess", alloc.cfg.force_postprocess,
                        "apply clip/prune in the mst variant too");
    cmd_alloc->add_option("--format", alloc.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd_alloc->add_option("--out", alloc.out_path, "output path (default stdout)");

    TreeArgs tree;
    auto* cmd_tree = app.add_subcommand("tree", "Dump the spanning tree or rooted topology");
    cmd_tree->add_option("--returns", tree.returns_path, "returns CSV (wide)")->required();
    cmd_tree->add_option("--signals", tree.signals_path, "optional signals CSV; omit to use all assets");
    cmd_tree->add_flag("--rooted", tree.rooted, "emit the rooted topology instead of the MST");
    cmd_tree->add_option("--variant", tree.variant, "mst or sector (rooted only)")
        ->check(CLI::IsMember({"mst", "sector"}));
    cmd_tree->add_option("--root", tree.root, "hub, maxmag, or fixed:IDX");
    cmd_tree->add_option("--lookback", tree.cfg.lookback, "activity lookback k (0 = full history)");
    cmd_tree->add_option("--epsilon", tree.cfg.magnitude_threshold, "recent-magnitude threshold");
    cmd_tree->add_option("--tau", tree.cfg.signal_threshold, "signal magnitude threshold");
    cmd_tree->add_option("--format", tree.format, "dot or json")
        ->check(CLI::IsMember({"dot", "json"}));
    cmd_tree->add_option("--out", tree.out_path, "output path (default stdout)");

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a nested flow-model returns panel");
    cmd_synth->add_option("--sectors", synth.sectors, "number of sectors");
    cmd_synth->add_option("--baskets", synth.baskets, "baskets per sector");
    cmd_synth->add_option("--per-basket", synth.per_basket, "assets per basket");
    cmd_synth->add_option("--periods", synth.periods, "number of periods T");
    cmd_synth->add_option("--theta-m", synth.theta_m, "market loading");
    cmd_synth->add_option("--theta-s", synth.theta_s, "sector loading");
    cmd_synth->add_option("--theta-b", synth.theta_b, "basket loading");
    cmd_synth->add_option("--sigma", synth.sigma, "idiosyncratic volatility");
    cmd_synth->add_option("--lambda", synth.lambda,
                          "common-flow strength; overrides loadings when set");
    cmd_synth->add_flag("--sector-etfs", synth.sector_etfs, "add one XL* name per sector");
    cmd_synth->add_option("--seed", synth.seed, "generator seed");
    cmd_synth->add_option("--out", synth.out_path, "returns CSV path; sidecar written as PATH.json");

    VerifyArgs verify;
    auto* cmd_verify = app.add_subcommand("verify", "Run the proposition property suites");
    cmd_verify->add_option("--seed", verify.options.seed, "base seed");
    cmd_verify->add_option("--instances", verify.options.instances, "instances per check")
        ->check(CLI::PositiveNumber);
    cmd_verify->add_option("--max-nodes", verify.options.max_nodes, "largest random tree")
        ->check(CLI::Range(2, 512));
    cmd_verify->add_option("--format", verify.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd_verify->add_option("--out", verify.out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);     // prints help or the error message
        return code == 0 ? 0 : kExitInputError;
    }

    try {
        if (cmd_alloc->parsed()) return run_allocate(alloc);
        if (cmd_tree->parsed()) return run_tree(tree);
        if (cmd_synth->parsed()) return run_synth(synth);
        if (cmd_verify->parsed()) return run_verify_cmd(verify);
    } catch (const trp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
