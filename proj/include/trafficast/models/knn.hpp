#pragma once

#include "trafficast/matrix.hpp"
#include "trafficast/models/forecaster.hpp"

namespace trafficast::models {

/// Nearest-window forecaster: stores training windows with their successor
/// values; a query is answered by averaging the successors of the k closest
/// stored windows (Euclidean distance, ties to the earliest time index).
class KnnForecaster final : public Forecaster {
public:
    KnnForecaster(Matrix windows, std::vector<double> successors, std::size_t k);

    std::size_t lag() const override { return windows_.cols(); }
    double predict(std::span<const double> query) const override;

    std::size_t k() const { return k_; }
    std::size_t stored() const { return successors_.size(); }

private:
    Matrix windows_;
    std::vector<double> successors_;
    std::size_t k_;
};

/// Builds the store from a series segment: windows of `sequence_length`
/// paired with the value `horizon` steps after each window.
KnnForecaster fit_knn(std::span<const double> train, std::size_t sequence_length = 5,
                      std::size_t k = 5, std::size_t horizon = 1);

} // namespace trafficast::models
