#pragma once

#include "trafficast/models/forecaster.hpp"
#include "trafficast/supervised.hpp"

namespace trafficast::models {

/// Autoregressive linear model: prediction = intercept + coefficients . window.
class LinearArModel final : public Forecaster {
public:
    LinearArModel(std::size_t lag, std::size_t horizon, double intercept,
                  std::vector<double> coefficients)
        : lag_(lag), horizon_(horizon), intercept_(intercept),
          coefficients_(std::move(coefficients)) {}

    std::size_t lag() const override { return lag_; }
    std::size_t horizon() const override { return horizon_; }
    double predict(std::span<const double> window) const override;

    double intercept() const { return intercept_; }
    const std::vector<double>& coefficients() const { return coefficients_; }

private:
    std::size_t lag_;
    std::size_t horizon_;
    double intercept_;
    std::vector<double> coefficients_;
};

/// Ordinary least squares on any lagged supervised set (intercept included).
LinearArModel fit_linear_regression(const SupervisedSet& train);

/// One-step autoregression on a raw series. Requires length > 2*lag.
LinearArModel fit_linear_ar(std::span<const double> train, std::size_t lag);

} // namespace trafficast::models
