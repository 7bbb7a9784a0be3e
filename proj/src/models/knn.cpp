#include "trafficast/models/knn.hpp"

#include <algorithm>

#include "trafficast/errors.hpp"
#include "trafficast/supervised.hpp"

namespace trafficast::models {

KnnForecaster::KnnForecaster(Matrix windows, std::vector<double> successors, std::size_t k)
    : windows_(std::move(windows)), successors_(std::move(successors)), k_(k) {
    if (successors_.size() != windows_.rows()) {
        throw DimensionMismatch("knn: successor count != window count");
    }
    if (successors_.empty()) throw EmptyInput("knn: no stored windows");
    if (k_ == 0 || k_ > successors_.size()) {
        throw InvalidArgument("knn: k must be in [1, stored windows]");
    }
}

double KnnForecaster::predict(std::span<const double> query) const {
    if (query.size() != windows_.cols()) {
        throw DimensionMismatch("knn query length != stored window length");
    }
    const std::size_t m = windows_.rows();
    std::vector<std::pair<double, std::size_t>> ranked(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = windows_.row(i);
        double d2 = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            const double d = row[j] - query[j];
            d2 += d * d;
        }
        ranked[i] = {d2, i};
    }
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k_),
                      ranked.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k_; ++i) sum += successors_[ranked[i].second];
    return sum / static_cast<double>(k_);
}

KnnForecaster fit_knn(std::span<const double> train, std::size_t sequence_length, std::size_t k,
                      std::size_t horizon) {
    auto set = make_supervised(train, sequence_length, horizon, Strategy::direct);
    return {std::move(set.inputs), std::move(set.targets), k};
}

} // namespace trafficast::models
