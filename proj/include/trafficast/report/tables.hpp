#pragma once

#include <string>

#include "trafficast/sweep/slope.hpp"
#include "trafficast/sweep/sweep.hpp"

namespace trafficast::report {

/// 17-significant-digit float formatting (lossless double round trip).
std::string format_double(double value);

enum class TimingPolicy {
    zeroed,  // deterministic output, wall-clock stays in the manifest
    actual,
};

/// Metrics table: header `model,quantity,window,unit_system,split,rmse,mae,
/// r2,seconds,status`, four rows per grid cell, sorted by (model, quantity,
/// window, unit_system, split).
std::string emit_metrics_csv(const sweep::SweepResult& result,
                             TimingPolicy timing = TimingPolicy::zeroed);

/// Rebuilds a sweep result (metrics and statuses; configuration fields are
/// not stored in the CSV) from emit_metrics_csv output.
sweep::SweepResult parse_metrics_csv(const std::string& text);

/// Slope table: header `model,quantity,metric,target_split,m,c,fit_r2,excluded`.
std::string emit_slope_csv(const std::vector<sweep::SlopeRow>& rows);

} // namespace trafficast::report
