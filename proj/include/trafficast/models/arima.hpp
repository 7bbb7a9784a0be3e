#pragma once

#include <string>

#include "trafficast/models/forecaster.hpp"

namespace trafficast::models {

struct ArimaOrders {
    std::size_t p = 2;
    std::size_t d = 1;
    std::size_t q = 2;
};

/// ARIMA(p,d,q) fitted by conditional sum of squares on the differenced
/// series. Forecasts iterate the ARMA recurrence with future shocks at zero
/// and integrate the differences back.
class ArimaModel final : public SequentialForecaster {
public:
    ArimaModel(ArimaOrders orders, std::vector<double> ar, std::vector<double> ma,
               double intercept, bool converged, std::string warning)
        : orders_(orders), ar_(std::move(ar)), ma_(std::move(ma)), intercept_(intercept),
          converged_(converged), warning_(std::move(warning)) {}

    const ArimaOrders& orders() const { return orders_; }
    const std::vector<double>& ar_coefficients() const { return ar_; }
    const std::vector<double>& ma_coefficients() const { return ma_; }
    double intercept() const { return intercept_; }
    bool converged() const { return converged_; }
    const std::string& warning() const { return warning_; }

    std::size_t min_history() const override { return orders_.d + orders_.p + 1; }
    std::vector<double> rolling_forecast(std::span<const double> series,
                                         std::size_t horizon) const override;

    /// Forecast `horizon` steps past the end of `history`.
    double forecast(std::span<const double> history, std::size_t horizon) const;

private:
    ArimaOrders orders_;
    std::vector<double> ar_;
    std::vector<double> ma_;
    double intercept_;
    bool converged_;
    std::string warning_;
};

struct ArimaFitOptions {
    std::size_t max_iterations = 500;
    double tolerance = 1e-8;
};

/// Conditional-sum-of-squares estimation (residuals before the first usable
/// index are zero), refined with a derivative-free simplex search.
/// Stationarity and invertibility are enforced by reflecting offending
/// polynomial roots inside the unit circle.
ArimaModel fit_arima(std::span<const double> train, ArimaOrders orders = {},
                     ArimaFitOptions options = {});

} // namespace trafficast::models
