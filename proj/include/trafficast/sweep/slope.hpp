#pragma once

#include <map>

#include "trafficast/sweep/sweep.hpp"

namespace trafficast::sweep {

/// Log-linear robustness fit: ln(metric) = m * window + c. The slope m
/// measures how fast the error grows with the forecasting window; the
/// intercept c is the initial error level.
struct SlopeFit {
    double m = 0.0;
    double c = 0.0;
    double fit_r_squared = 0.0;
    std::size_t excluded_points = 0;
};

/// Drops non-positive values (counted), then least-squares on [1, window].
/// Throws InsufficientPositive when fewer than 3 positive values remain.
SlopeFit fit_log_slope(std::span<const double> windows, std::span<const double> values);

struct SlopeRow {
    std::string model;
    Quantity quantity = Quantity::speed;
    std::string metric;        // rmse | mae | r2 | one_minus_r2
    std::string target_split;  // train | test
    SlopeFit fit;
    bool defined = true;  // false when too few positive points survived
};

/// Eq. 4 fits for every (model, quantity, metric) cell of the sweep, on
/// normalized-unit metrics (the slope is invariant to the unit scale).
/// `r2` rows fit the raw R-squared values with exclusions; `one_minus_r2`
/// rows fit ln(1 - R^2) restricted to R^2 < 1.
std::vector<SlopeRow> compute_slopes(const SweepResult& result, const std::string& target_split);

struct Rankings {
    // quantity -> window -> model ids, best test RMSE first.
    std::map<std::string, std::map<std::size_t, std::vector<std::string>>> per_window;
    // quantity -> (model id, test-RMSE slope) ascending by slope.
    std::map<std::string, std::vector<std::pair<std::string, double>>> robustness;
};

/// Per-window ranking by test RMSE (ties: lower MAE, then id) and the
/// robustness ranking by ascending RMSE slope.
Rankings rank_models(const SweepResult& result);

} // namespace trafficast::sweep
