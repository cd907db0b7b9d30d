#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "trp/data_model.hpp"
#include "trp/errors.hpp"

using namespace trp;

namespace {

struct TempFile {
    std::filesystem::path path;

    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("trp_data_test_" + std::to_string(++counter) + ".csv");
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

ReturnsPanel small_panel() {
    ReturnsPanel panel;
    panel.assets = {AssetId("AAA"), AssetId("BBB")};
    panel.returns.resize(2, 2);
    panel.returns << 0.01, -0.03, 0.0, 0.0;
    return panel;
}

}  // namespace

TEST_CASE("load_returns parses a wide csv") {
    TempFile f("AAA,BBB,XLK\n0.01,0.02,-0.01\n-0.005,0.0,0.003\n");
    auto panel = load_returns(f.path.string());
    CHECK(panel.n_assets() == 3);
    CHECK(panel.n_periods() == 2);
    CHECK(panel.assets[2].ticker == "XLK");
    CHECK(panel.assets[2].is_sector_etf);
    CHECK_FALSE(panel.assets[0].is_sector_etf);
    CHECK(panel.returns(0, 0) == doctest::Approx(0.01));
    CHECK(panel.returns(2, 1) == doctest::Approx(0.003));
}

TEST_CASE("load_returns rejects bad input") {
    CHECK_THROWS_AS(load_returns("/nonexistent/file.csv"), MissingFile);

    TempFile nan_cell("A,B\n0.01,NaN\n0.0,0.0\n");
    CHECK_THROWS_AS(load_returns(nan_cell.path.string()), NonFiniteValue);

    TempFile no_data("A,B\n");
    CHECK_THROWS_AS(load_returns(no_data.path.string()), ParseError);

    TempFile one_row("A,B\n0.1,0.2\n");
    CHECK_THROWS_AS(load_returns(one_row.path.string()), ParseError);

    TempFile junk("A,B\n0.1,abc\n0.0,0.0\n");
    CHECK_THROWS_AS(load_returns(junk.path.string()), ParseError);

    TempFile ragged("A,B\n0.1\n0.0,0.0\n");
    CHECK_THROWS_AS(load_returns(ragged.path.string()), ParseError);

    TempFile dup("A,A\n0.1,0.2\n0.0,0.0\n");
    CHECK_THROWS_AS(load_returns(dup.path.string()), ParseError);
}

TEST_CASE("load_signals aligns by ticker") {
    TempFile returns("AAA,BBB\n0.01,0.02\n0.0,0.01\n");
    auto panel = load_returns(returns.path.string());

    TempFile signals("ticker,signal\nBBB,-0.4\nAAA,0.9\n");
    auto s = load_signals(signals.path.string(), panel);
    CHECK(s(0) == doctest::Approx(0.9));
    CHECK(s(1) == doctest::Approx(-0.4));

    TempFile headerless("BBB,-0.4\nAAA,0.9\n");
    auto s2 = load_signals(headerless.path.string(), panel);
    CHECK(s2(0) == doctest::Approx(0.9));

    TempFile unknown("AAA,0.9\nBBB,0.1\nZZZ,1.0\n");
    CHECK_THROWS_AS(load_signals(unknown.path.string(), panel), ParseError);

    TempFile missing("AAA,0.9\n");
    CHECK_THROWS_AS(load_signals(missing.path.string(), panel), ParseError);

    TempFile infinite("AAA,inf\nBBB,0.1\n");
    CHECK_THROWS_AS(load_signals(infinite.path.string(), panel), NonFiniteValue);
}

TEST_CASE("recent_magnitude means absolute returns over the window") {
    auto panel = small_panel();
    auto m = recent_magnitude(panel, 2);
    CHECK(m(0) == doctest::Approx(0.02));  // (|0.01| + |-0.03|) / 2
    CHECK(m(1) == doctest::Approx(0.0));

    // k = T equals the full-history mean
    auto full = recent_magnitude(panel, panel.n_periods());
    CHECK(full(0) == doctest::Approx(panel.returns.row(0).cwiseAbs().mean()));

    CHECK_THROWS_AS(recent_magnitude(panel, 3), LookbackExceedsHistory);
    CHECK_THROWS_AS(recent_magnitude(panel, 0), std::invalid_argument);
}

TEST_CASE("recent_magnitude only sees the last k periods") {
    ReturnsPanel panel;
    panel.assets = {AssetId("AAA")};
    panel.returns.resize(1, 3);
    panel.returns << 10.0, 0.02, 0.04;
    auto m = recent_magnitude(panel, 2);
    CHECK(m(0) == doctest::Approx(0.03));
}

TEST_CASE("active_set applies both strict filters") {
    auto panel = small_panel();
    TrpConfig cfg;
    cfg.lookback = 2;
    cfg.magnitude_threshold = 0.01;
    cfg.signal_threshold = 1e-3;

    SignalVector s(2);
    s << 0.5, 0.5;
    auto active = active_set(panel, s, cfg);
    REQUIRE(active.n_active() == 1);
    CHECK(active.indices[0] == 0);  // asset 1 fails m > epsilon

    // boundary: |s| == tau is excluded
    s << 0.5, 1e-3;
    cfg.magnitude_threshold = 1e-9;
    ReturnsPanel live = panel;
    live.returns.row(1) << 0.01, 0.01;
    auto boundary = active_set(live, s, cfg);
    REQUIRE(boundary.n_active() == 1);
    CHECK(boundary.indices[0] == 0);

    // all pass
    s << 0.5, -0.5;
    auto all = active_set(live, s, cfg);
    CHECK(all.n_active() == 2);

    // m == epsilon is excluded too
    cfg.magnitude_threshold = 0.02;
    auto m_boundary = active_set(panel, s, cfg);
    CHECK(m_boundary.empty());
}

TEST_CASE("active_set is monotone in the thresholds") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-0.05, 0.05);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 20);
        const int t = 2 + static_cast<int>(rng() % 30);
        ReturnsPanel panel;
        for (int i = 0; i < n; ++i) panel.assets.emplace_back("A" + std::to_string(i));
        panel.returns.resize(n, t);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < t; ++j) panel.returns(i, j) = unif(rng);
        SignalVector s(n);
        for (int i = 0; i < n; ++i) s(i) = unif(rng) * 40.0;

        TrpConfig lo, hi;
        lo.lookback = hi.lookback = 0;
        lo.magnitude_threshold = 0.005;
        hi.magnitude_threshold = 0.012;
        lo.signal_threshold = 0.05;
        hi.signal_threshold = 0.5;

        auto big = active_set(panel, s, lo);
        auto small = active_set(panel, s, hi);
        for (int idx : small.indices) {
            CHECK(std::find(big.indices.begin(), big.indices.end(), idx) != big.indices.end());
        }
        // filter semantics hold exactly
        for (int idx : big.indices) {
            CHECK(big.recent_magnitudes(idx) > lo.magnitude_threshold);
            CHECK(std::abs(s(idx)) > lo.signal_threshold);
        }
    }
}

TEST_CASE("recent_magnitude ignores the sign of returns") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-0.05, 0.05);
    for (int trial = 0; trial < 100; ++trial) {
        const int t = 2 + static_cast<int>(rng() % 20);
        ReturnsPanel panel;
        panel.assets = {AssetId("AAA")};
        panel.returns.resize(1, t);
        for (int j = 0; j < t; ++j) panel.returns(0, j) = unif(rng);

        ReturnsPanel flipped = panel;
        flipped.returns = -panel.returns;
        const int k = 1 + static_cast<int>(rng() % t);
        CHECK(recent_magnitude(panel, k)(0) == recent_magnitude(flipped, k)(0));
    }
}
