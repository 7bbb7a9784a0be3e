#pragma once

#include <span>
#include <vector>

#include "trafficast/matrix.hpp"
#include "trafficast/series.hpp"

namespace trafficast {

enum class Strategy { direct, recursive };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

/// Lagged input windows paired with horizon targets.
/// Direct: row for origin t is [x_{t-lag+1} .. x_t] with target x_{t+horizon}.
/// Recursive: targets are always one step ahead; the horizon is applied at
/// inference by feeding predictions back (see the sweep runner).
struct SupervisedSet {
    Matrix inputs;
    std::vector<double> targets;
    std::size_t lag = 1;
    std::size_t horizon = 1;
    Strategy strategy = Strategy::direct;
    NormalizationParams norm;

    std::size_t size() const { return targets.size(); }
};

SupervisedSet make_supervised(std::span<const double> series, std::size_t lag,
                              std::size_t horizon, Strategy strategy,
                              const NormalizationParams& norm = {});

} // namespace trafficast
