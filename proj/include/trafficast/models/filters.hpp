#pragma once

#include "trafficast/models/forecaster.hpp"

namespace trafficast::models {

/// Scalar random-walk Kalman filter state (state = the measured quantity).
struct KalmanState {
    double estimate = 0.0;
    double variance = 0.0;
    double process_noise = 0.001;    // Q
    double measurement_noise = 0.01; // R
};

/// Predict/update cycle for one observation; returns the posterior state.
KalmanState kalman_step(const KalmanState& state, double observation);

/// Fixed point of the steady-state variance P = (P+Q)R/(P+Q+R).
double kalman_variance_fixed_point(double q, double r);

struct AlphaBetaState {
    double position = 0.0;
    double velocity = 0.0;
    double alpha = 0.85;
    double beta = 0.005;
    double dt = 1.0;
};

AlphaBetaState alpha_beta_step(const AlphaBetaState& state, double observation);

/// Kalman filter as a rolling forecaster; h-step forecast under the random
/// walk model is the current estimate. Seeded with the first observation
/// (estimate = x0, variance = R).
class KalmanFilterModel final : public SequentialForecaster {
public:
    explicit KalmanFilterModel(double q = 0.001, double r = 0.01) : q_(q), r_(r) {}
    std::vector<double> rolling_forecast(std::span<const double> series,
                                         std::size_t horizon) const override;

private:
    double q_;
    double r_;
};

/// Alpha-beta tracker; h-step forecast extrapolates position + h*dt*velocity.
class AlphaBetaModel final : public SequentialForecaster {
public:
    AlphaBetaModel(double alpha = 0.85, double beta = 0.005) : alpha_(alpha), beta_(beta) {}
    std::vector<double> rolling_forecast(std::span<const double> series,
                                         std::size_t horizon) const override;

private:
    double alpha_;
    double beta_;
};

} // namespace trafficast::models
