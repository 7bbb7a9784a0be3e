#include "trafficast/models/filters.hpp"

#include <cmath>
#include <limits>

#include "trafficast/errors.hpp"

namespace trafficast::models {

KalmanState kalman_step(const KalmanState& state, double observation) {
    if (!std::isfinite(observation)) throw NonFiniteError("kalman_step: non-finite observation");
    KalmanState next = state;
    const double predicted_variance = state.variance + state.process_noise;
    const double gain = predicted_variance / (predicted_variance + state.measurement_noise);
    next.estimate = state.estimate + gain * (observation - state.estimate);
    next.variance = (1.0 - gain) * predicted_variance;
    return next;
}

double kalman_variance_fixed_point(double q, double r) {
    // P = (P+Q)R/(P+Q+R)  =>  P^2 + QP - QR = 0, positive root.
    return (-q + std::sqrt(q * q + 4.0 * q * r)) / 2.0;
}

AlphaBetaState alpha_beta_step(const AlphaBetaState& state, double observation) {
    if (!std::isfinite(observation)) {
        throw NonFiniteError("alpha_beta_step: non-finite observation");
    }
    AlphaBetaState next = state;
    const double predicted = state.position + state.velocity * state.dt;
    const double residual = observation - predicted;
    next.position = predicted + state.alpha * residual;
    next.velocity = state.velocity + (state.beta / state.dt) * residual;
    return next;
}

std::vector<double> KalmanFilterModel::rolling_forecast(std::span<const double> series,
                                                        std::size_t horizon) const {
    std::vector<double> out(series.size(), std::numeric_limits<double>::quiet_NaN());
    if (series.empty()) return out;
    KalmanState state{series[0], r_, q_, r_};
    for (std::size_t origin = 0; origin < series.size(); ++origin) {
        if (origin > 0) state = kalman_step(state, series[origin]);
        const std::size_t target = origin + horizon;
        if (target < series.size()) out[target] = state.estimate;
    }
    return out;
}

std::vector<double> AlphaBetaModel::rolling_forecast(std::span<const double> series,
                                                     std::size_t horizon) const {
    std::vector<double> out(series.size(), std::numeric_limits<double>::quiet_NaN());
    if (series.empty()) return out;
    AlphaBetaState state{series[0], 0.0, alpha_, beta_, 1.0};
    for (std::size_t origin = 0; origin < series.size(); ++origin) {
        if (origin > 0) state = alpha_beta_step(state, series[origin]);
        const std::size_t target = origin + horizon;
        if (target < series.size()) {
            out[target] = state.position + static_cast<double>(horizon) * state.velocity * state.dt;
        }
    }
    return out;
}

} // namespace trafficast::models
