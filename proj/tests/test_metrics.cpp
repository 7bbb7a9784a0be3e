#include <cmath>
#include <vector>

#include "doctest.h"
#include "trafficast/errors.hpp"
#include "trafficast/metrics.hpp"
#include "trafficast/rng.hpp"

using namespace trafficast;

namespace {

// Naive loop oracle, kept independent of the library implementation.
double oracle_rmse(const std::vector<double>& y, const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - p[i]) * (y[i] - p[i]);
    return std::sqrt(s / static_cast<double>(y.size()));
}

double oracle_mae(const std::vector<double>& y, const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(y[i] - p[i]);
    return s / static_cast<double>(y.size());
}

double oracle_r2(const std::vector<double>& y, const std::vector<double>& p) {
    double mean = 0.0;
    for (const double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double res = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        res += (y[i] - p[i]) * (y[i] - p[i]);
        tot += (y[i] - mean) * (y[i] - mean);
    }
    return 1.0 - res / tot;
}

} // namespace

TEST_CASE("rmse hand-evaluated examples") {
    const std::vector<double> same{1.0, 2.0, 3.0};
    CHECK(rmse(same, same) == 0.0);

    CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) ==
          doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));

    const std::vector<double> shifted{1.0 - 2.5, 2.0 - 2.5, 3.0 - 2.5};
    CHECK(rmse(same, shifted) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("mae hand-evaluated examples") {
    const std::vector<double> same{5.0, 6.0};
    CHECK(mae(same, same) == 0.0);
    CHECK(mae(std::vector<double>{0, 0}, std::vector<double>{3, -4}) == doctest::Approx(3.5));
    const std::vector<double> shifted{5.0 + 1.25, 6.0 + 1.25};
    CHECK(mae(same, shifted) == doctest::Approx(1.25));
}

TEST_CASE("r_squared hand-evaluated examples") {
    const std::vector<double> truth{1, 2, 3};
    CHECK(r_squared(truth, truth) == doctest::Approx(1.0));

    const std::vector<double> at_mean{2, 2, 2};
    CHECK(r_squared(truth, at_mean) == doctest::Approx(0.0));

    CHECK(r_squared(truth, std::vector<double>{3, 2, 1}) == doctest::Approx(-3.0));
}

TEST_CASE("metric input validation") {
    const std::vector<double> y{1, 2};
    CHECK_THROWS_AS(rmse(y, std::vector<double>{1}), DimensionMismatch);
    CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), EmptyInput);
    CHECK_THROWS_AS(r_squared(std::vector<double>{4, 4, 4}, std::vector<double>{1, 2, 3}),
                    ZeroVariance);
}

TEST_CASE("metrics match the naive oracle on 1000 random pairs") {
    RngStream rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.index(64);
        std::vector<double> y(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform(-100.0, 100.0);
            p[i] = rng.uniform(-100.0, 100.0);
        }
        CHECK(std::abs(rmse(y, p) - oracle_rmse(y, p)) <= 1e-12);
        CHECK(std::abs(mae(y, p) - oracle_mae(y, p)) <= 1e-12);
        CHECK(rmse(y, p) >= mae(y, p));
        CHECK(rmse(y, p) == rmse(p, y));
        CHECK(mae(y, p) == mae(p, y));
        double spread = 0.0;
        for (std::size_t i = 1; i < n; ++i) spread += std::abs(y[i] - y[0]);
        if (spread > 0.0) {
            CHECK(std::abs(r_squared(y, p) - oracle_r2(y, p)) <= 1e-12);
        }
    }
}

TEST_CASE("r_squared is not symmetric in its arguments") {
    const std::vector<double> truth{1, 2, 3, 4};
    const std::vector<double> predicted{1.1, 2.0, 2.9, 4.2};
    CHECK(r_squared(truth, predicted) != r_squared(predicted, truth));
}

TEST_CASE("compute_metrics flags undefined r_squared") {
    const std::vector<double> constant{3, 3, 3};
    const std::vector<double> predicted{1, 2, 3};
    const auto triple = compute_metrics(constant, predicted);
    CHECK_FALSE(triple.r_squared_defined);
    CHECK(triple.rmse >= triple.mae);
    CHECK(triple.n == 3);
}
