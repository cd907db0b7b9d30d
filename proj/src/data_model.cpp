#include "trp/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "trp/errors.hpp"

namespace trp {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

// Locale-independent double parse. Returns false on trailing junk or empty input.
bool parse_double(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !cell.empty();
}

}  // namespace

ReturnsPanel load_returns(const std::string& path) {
    std::ifstream file(path);
    if (!file.is_open()) throw MissingFile(path);

    std::string header;
    if (!std::getline(file, header)) throw ParseError("empty returns file", 0, 0);

    ReturnsPanel panel;
    std::unordered_set<std::string> seen;
    for (const auto& ticker : split_csv_line(header)) {
        if (ticker.empty()) throw ParseError("empty ticker in header", 0, static_cast<int>(panel.assets.size()));
        if (!seen.insert(ticker).second) throw ParseError("duplicate ticker: " + ticker, 0, 0);
        panel.assets.emplace_back(ticker);
    }
    const int n = panel.n_assets();
    if (n == 0) throw ParseError("header has no tickers", 0, 0);

    std::vector<std::vector<double>> rows;
    std::string line;
    int row_no = 0;
    while (std::getline(file, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != n)
            throw ParseError("expected " + std::to_string(n) + " cells, got " + std::to_string(cells.size()),
                             row_no, 0);
        std::vector<double> row(n);
        for (int j = 0; j < n; ++j) {
            double v;
            if (!parse_double(cells[j], v)) throw ParseError("non-numeric cell '" + cells[j] + "'", row_no, j);
            if (!std::isfinite(v))
                throw NonFiniteValue("non-finite return for " + panel.assets[j].ticker + " at row " +
                                     std::to_string(row_no));
            row[j] = v;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("returns file has no data rows", 1, 0);
    if (rows.size() < 2) throw ParseError("need at least 2 periods of returns", 1, 0);

    const int t = static_cast<int>(rows.size());
    panel.returns.resize(n, t);
    for (int col = 0; col < t; ++col)
        for (int i = 0; i < n; ++i) panel.returns(i, col) = rows[col][i];
    return panel;
}

SignalVector load_signals(const std::string& path, const ReturnsPanel& panel) {
    std::ifstream file(path);
    if (!file.is_open()) throw MissingFile(path);

    std::unordered_map<std::string, int> position;
    for (int i = 0; i < panel.n_assets(); ++i) position[panel.assets[i].ticker] = i;

    SignalVector signals = SignalVector::Zero(panel.n_assets());
    std::vector<bool> filled(panel.n_assets(), false);

    std::string line;
    int row_no = 0;
    while (std::getline(file, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 2) throw ParseError("signals rows must be ticker,signal", row_no, 0);
        double v;
        if (!parse_double(cells[1], v)) {
            if (row_no == 1) continue;  // header line
            throw ParseError("non-numeric signal '" + cells[1] + "'", row_no, 1);
        }
        if (!std::isfinite(v)) throw NonFiniteValue("non-finite signal for " + cells[0]);
        auto it = position.find(cells[0]);
        if (it == position.end()) throw ParseError("unknown ticker '" + cells[0] + "'", row_no, 0);
        if (filled[it->second]) throw ParseError("duplicate signal for '" + cells[0] + "'", row_no, 0);
        signals(it->second) = v;
        filled[it->second] = true;
    }
    for (int i = 0; i < panel.n_assets(); ++i)
        if (!filled[i]) throw ParseError("missing signal for '" + panel.assets[i].ticker + "'");
    return signals;
}

Eigen::VectorXd recent_magnitude(const ReturnsPanel& panel, int k) {
    if (k < 1) throw std::invalid_argument("lookback must be positive");
    const int t = panel.n_periods();
    if (k > t) throw LookbackExceedsHistory(k, t);
    return panel.returns.rightCols(k).cwiseAbs().rowwise().mean();
}

ActiveSet active_set(const ReturnsPanel& panel, const SignalVector& signals, const TrpConfig& cfg) {
    if (signals.size() != panel.n_assets())
        throw std::invalid_argument("signal length does not match panel asset count");
    const int k = cfg.lookback > 0 ? cfg.lookback : panel.n_periods();

    ActiveSet out;
    out.recent_magnitudes = recent_magnitude(panel, k);
    for (int i = 0; i < panel.n_assets(); ++i) {
        if (out.recent_magnitudes(i) > cfg.magnitude_threshold &&
            std::abs(signals(i)) > cfg.signal_threshold)
            out.indices.push_back(i);
    }
    return out;
}

}  // namespace trp
