#pragma once

#include <string>

#include "trafficast/sweep/slope.hpp"

namespace trafficast::report {

/// Run manifest: master seed, strategy, profile, window range, the resolved
/// hyperparameters of every model in the run, data fingerprints, failure
/// count and wall-clock totals. JSON text with stable key order.
std::string emit_manifest(const sweep::SweepResult& result);

/// Human-readable sweep digest: per-window leaders, robustness ranking and
/// any failed cells.
std::string emit_markdown_summary(const sweep::SweepResult& result,
                                  const std::vector<sweep::SlopeRow>& slopes);

} // namespace trafficast::report
