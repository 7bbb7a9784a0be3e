#include "trafficast/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "trafficast/errors.hpp"

namespace trafficast {

namespace {

void check_pair(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size()) {
        throw DimensionMismatch("metric inputs differ in length: " + std::to_string(truth.size()) +
                                " vs " + std::to_string(predicted.size()));
    }
    if (truth.empty()) throw EmptyInput("metric inputs are empty");
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!std::isfinite(truth[i]) || !std::isfinite(predicted[i])) {
            throw NonFiniteError("metric input " + std::to_string(i) + " is not finite");
        }
    }
}

} // namespace

double rmse(std::span<const double> truth, std::span<const double> predicted) {
    check_pair(truth, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - predicted[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(truth.size()));
}

double mae(std::span<const double> truth, std::span<const double> predicted) {
    check_pair(truth, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth[i] - predicted[i]);
    return sum / static_cast<double>(truth.size());
}

double r_squared(std::span<const double> truth, std::span<const double> predicted) {
    check_pair(truth, predicted);
    if (truth.size() < 2) throw ZeroVariance("r_squared needs at least 2 samples");
    double mean = 0.0;
    for (const double y : truth) mean += y;
    mean /= static_cast<double>(truth.size());

    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double r = truth[i] - predicted[i];
        const double d = truth[i] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot <= 0.0) throw ZeroVariance("truth has zero variance; r_squared undefined");
    return 1.0 - ss_res / ss_tot;
}

MetricTriple compute_metrics(std::span<const double> truth, std::span<const double> predicted) {
    MetricTriple out;
    out.rmse = rmse(truth, predicted);
    out.mae = mae(truth, predicted);
    out.n = truth.size();
    try {
        out.r_squared = r_squared(truth, predicted);
    } catch (const ZeroVariance&) {
        out.r_squared = std::numeric_limits<double>::quiet_NaN();
        out.r_squared_defined = false;
    }
    return out;
}

} // namespace trafficast
