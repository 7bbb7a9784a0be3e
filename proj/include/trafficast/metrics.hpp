#pragma once

#include <span>

namespace trafficast {

/// Root mean squared error: sqrt(mean((truth - predicted)^2)).
double rmse(std::span<const double> truth, std::span<const double> predicted);

/// Mean absolute error: mean(|truth - predicted|).
double mae(std::span<const double> truth, std::span<const double> predicted);

/// Coefficient of determination 1 - SS_res/SS_tot. May be negative for
/// predictors worse than the truth mean. Throws ZeroVariance for constant
/// truth (the denominator vanishes).
double r_squared(std::span<const double> truth, std::span<const double> predicted);

struct MetricTriple {
    double rmse = 0.0;
    double mae = 0.0;
    double r_squared = 0.0;
    bool r_squared_defined = true;
    std::size_t n = 0;
};

/// All three metrics in one pass; a constant-truth R^2 is recorded as
/// undefined instead of throwing.
MetricTriple compute_metrics(std::span<const double> truth, std::span<const double> predicted);

} // namespace trafficast
