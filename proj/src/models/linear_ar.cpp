#include "trafficast/models/linear_ar.hpp"

#include "trafficast/errors.hpp"
#include "trafficast/linalg.hpp"

namespace trafficast::models {

double LinearArModel::predict(std::span<const double> window) const {
    if (window.size() != lag_) {
        throw DimensionMismatch("linear model expects a window of length " + std::to_string(lag_));
    }
    return intercept_ + dot(coefficients_, window);
}

LinearArModel fit_linear_regression(const SupervisedSet& train) {
    const std::size_t n = train.size();
    const std::size_t lag = train.lag;
    Matrix design(n, lag + 1);
    for (std::size_t i = 0; i < n; ++i) {
        design.at(i, 0) = 1.0;
        const auto row = train.inputs.row(i);
        for (std::size_t j = 0; j < lag; ++j) design.at(i, j + 1) = row[j];
    }
    const auto coeffs = ols_fit(design, train.targets);
    std::vector<double> slope(coeffs.begin() + 1, coeffs.end());
    return {lag, train.horizon, coeffs[0], std::move(slope)};
}

LinearArModel fit_linear_ar(std::span<const double> train, std::size_t lag) {
    if (train.size() <= 2 * lag) {
        throw TooShort("linear AR fit needs more than 2*lag samples, got " +
                       std::to_string(train.size()));
    }
    return fit_linear_regression(make_supervised(train, lag, 1, Strategy::direct));
}

} // namespace trafficast::models
