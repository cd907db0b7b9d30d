#pragma once

#include <string>

#include "trp/types.hpp"

namespace trp {

/// Reads a wide returns CSV: first row tickers, each following row one period.
/// Rejects non-numeric and non-finite cells, duplicate or empty tickers, and
/// histories shorter than two periods (correlation would be undefined).
ReturnsPanel load_returns(const std::string& path);

/// Reads a two-column `ticker,signal` CSV and aligns it to the panel order.
/// Every panel ticker must appear exactly once; unknown tickers are rejected.
SignalVector load_signals(const std::string& path, const ReturnsPanel& panel);

/// m_i = mean of |r_it| over the last k periods, per asset.
Eigen::VectorXd recent_magnitude(const ReturnsPanel& panel, int k);

/// Assets with m_i > epsilon and |s_i| > tau (both strict). An empty result is
/// a valid outcome; the allocator maps it to an all-zero portfolio.
ActiveSet active_set(const ReturnsPanel& panel, const SignalVector& signals, const TrpConfig& cfg);

}  // namespace trp
