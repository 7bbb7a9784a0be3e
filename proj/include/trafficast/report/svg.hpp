#pragma once

#include <string>

#include "trafficast/sweep/slope.hpp"

namespace trafficast::report {

/// Degradation chart: one panel per metric (RMSE, MAE, 1-R^2) and quantity,
/// per-window points on a log-scaled vertical axis with the fitted line
/// e^(m*w + c) overlaid. Purely a function of its inputs; no clock or
/// randomness, so identical inputs give identical bytes.
/// Throws NothingToPlot when the filter selects no plottable cell.
std::string emit_degradation_svg(const sweep::SweepResult& result,
                                 const std::vector<sweep::SlopeRow>& fits,
                                 const std::vector<std::string>& model_filter);

} // namespace trafficast::report
