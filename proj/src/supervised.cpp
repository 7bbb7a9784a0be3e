#include "trafficast/supervised.hpp"

#include "trafficast/errors.hpp"

namespace trafficast {

std::string to_string(Strategy s) {
    return s == Strategy::direct ? "direct" : "recursive";
}

Strategy strategy_from_string(const std::string& name) {
    if (name == "direct") return Strategy::direct;
    if (name == "recursive") return Strategy::recursive;
    throw InvalidArgument("unknown strategy '" + name + "' (expected direct or recursive)");
}

SupervisedSet make_supervised(std::span<const double> series, std::size_t lag,
                              std::size_t horizon, Strategy strategy,
                              const NormalizationParams& norm) {
    if (lag == 0 || horizon == 0) throw InvalidArgument("lag and horizon must be positive");
    const std::size_t target_step = strategy == Strategy::direct ? horizon : 1;
    if (series.size() <= lag + target_step) {
        throw TooShort("series of length " + std::to_string(series.size()) +
                       " too short for lag " + std::to_string(lag) + " and horizon " +
                       std::to_string(target_step));
    }

    const std::size_t rows = series.size() - lag - target_step + 1;
    SupervisedSet out;
    out.inputs = Matrix(rows, lag);
    out.targets.resize(rows);
    out.lag = lag;
    out.horizon = horizon;
    out.strategy = strategy;
    out.norm = norm;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < lag; ++j) out.inputs.at(r, j) = series[r + j];
        out.targets[r] = series[r + lag + target_step - 1];
    }
    return out;
}

} // namespace trafficast
