#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "trafficast/errors.hpp"
#include "trafficast/metrics.hpp"
#include "trafficast/models/knn.hpp"
#include "trafficast/models/svr.hpp"
#include "trafficast/rng.hpp"

using namespace trafficast;
using namespace trafficast::models;

namespace {

double svr_dual_objective(const Matrix& inputs, const std::vector<double>& targets,
                          const std::vector<double>& beta, double epsilon, double gamma) {
    const std::size_t n = targets.size();
    auto kernel = [&](std::size_t a, std::size_t b) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < inputs.cols(); ++j) {
            const double d = inputs.at(a, j) - inputs.at(b, j);
            d2 += d * d;
        }
        return std::exp(-gamma * d2);
    };
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) quad += beta[i] * beta[j] * kernel(i, j);
    }
    double linear = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += epsilon * std::abs(beta[i]) - targets[i] * beta[i];
    }
    return 0.5 * quad + linear;
}

// Long-run projected-subgradient solver for the same dual, used as an
// independent oracle on small problems.
std::vector<double> oracle_dual_solve(const Matrix& inputs, const std::vector<double>& targets,
                                      double cost, double epsilon, double gamma) {
    const std::size_t n = targets.size();
    std::vector<std::vector<double>> k(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < inputs.cols(); ++c) {
                const double d = inputs.at(i, c) - inputs.at(j, c);
                d2 += d * d;
            }
            k[i][j] = std::exp(-gamma * d2);
        }
    }
    std::vector<double> beta(n, 0.0), grad(n);
    const double lr = 0.02;
    for (int it = 0; it < 400000; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double g = -targets[i];
            for (std::size_t j = 0; j < n; ++j) g += k[i][j] * beta[j];
            g += epsilon * (beta[i] > 0 ? 1.0 : (beta[i] < 0 ? -1.0 : 0.0));
            grad[i] = g;
        }
        for (std::size_t i = 0; i < n; ++i) beta[i] -= lr * grad[i];
        // Project back onto sum(beta) = 0 intersected with the box.
        for (int round = 0; round < 8; ++round) {
            double mean = 0.0;
            for (const double b : beta) mean += b;
            mean /= static_cast<double>(n);
            for (double& b : beta) b = std::clamp(b - mean, -cost, cost);
        }
    }
    return beta;
}

} // namespace

TEST_CASE("knn averages the successors of the nearest windows") {
    Matrix windows{{0, 0}, {1, 1}, {2, 2}};
    KnnForecaster knn(windows, {10, 20, 30}, 2);
    const std::vector<double> query{0, 0};
    CHECK(knn.predict(query) == doctest::Approx(15.0));
}

TEST_CASE("knn exact match with k=1") {
    Matrix windows{{5, 6}, {9, 1}, {0, 3}};
    KnnForecaster knn(windows, {1.5, 2.5, 3.5}, 1);
    CHECK(knn.predict(std::vector<double>{9, 1}) == doctest::Approx(2.5));
}

TEST_CASE("knn repeated identical windows return their shared successor") {
    Matrix windows{{1, 2}, {1, 2}, {1, 2}, {1, 2}, {1, 2}, {7, 7}};
    KnnForecaster knn(windows, {4, 4, 4, 4, 4, 99}, 5);
    CHECK(knn.predict(std::vector<double>{1, 2}) == doctest::Approx(4.0));
}

TEST_CASE("knn output stays within the stored successor range") {
    RngStream rng(3);
    std::vector<double> series;
    for (int i = 0; i < 200; ++i) series.push_back(rng.uniform(0.0, 50.0));
    const auto knn = fit_knn(series, 5, 5, 1);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 5; i < series.size(); ++i) {
        lo = std::min(lo, series[i]);
        hi = std::max(hi, series[i]);
    }
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> query(5);
        for (double& q : query) q = rng.uniform(0.0, 50.0);
        const double out = knn.predict(query);
        CHECK(out >= lo);
        CHECK(out <= hi);
    }
}

TEST_CASE("knn dimension checks") {
    Matrix windows{{1, 2}, {3, 4}};
    KnnForecaster knn(windows, {1, 2}, 1);
    CHECK_THROWS_AS(knn.predict(std::vector<double>{1, 2, 3}), DimensionMismatch);
    CHECK_THROWS_AS(KnnForecaster(windows, {1, 2}, 5), InvalidArgument);
}

TEST_CASE("svr with all targets inside the tube has no support vectors") {
    Matrix inputs{{0}, {1}, {2}, {3}};
    const std::vector<double> targets(4, 2.5);
    const auto model = fit_svr(inputs, targets, 10.0, 0.01, 1.0);
    CHECK(model.support_vector_count() == 0);
    CHECK(model.predict(std::vector<double>{1.7}) == doctest::Approx(2.5));
}

TEST_CASE("svr single point predicts within the tube") {
    Matrix inputs{{0.4}};
    const std::vector<double> targets{3.0};
    const auto model = fit_svr(inputs, targets, 10.0, 0.05, 1.0);
    CHECK(std::abs(model.predict(std::vector<double>{0.4}) - 3.0) <= 0.05 + 1e-9);
}

TEST_CASE("svr fits a noiseless sine") {
    const std::size_t n = 200;
    Matrix inputs(n, 1);
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * 3.14159265358979 * static_cast<double>(i) / (n - 1);
        inputs.at(i, 0) = x;
        targets[i] = std::sin(x);
    }
    const auto model = fit_svr(inputs, targets, 10.0, 0.01, 1.0);
    std::vector<double> predicted(n);
    for (std::size_t i = 0; i < n; ++i) predicted[i] = model.predict(inputs.row(i));
    CHECK(rmse(targets, predicted) < 0.05);

    // Box constraint holds for every dual coefficient.
    for (const double c : model.dual_coefficients()) CHECK(std::abs(c) <= 10.0 + 1e-9);
}

TEST_CASE("svr matches a projected-gradient dual oracle on a small problem") {
    const std::size_t n = 20;
    Matrix inputs(n, 1);
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * 3.14159265358979 * static_cast<double>(i) / (n - 1);
        inputs.at(i, 0) = x;
        targets[i] = std::sin(x);
    }
    const double cost = 10.0, epsilon = 0.01, gamma = 1.0;
    const auto model = SvrModel::fit(inputs, targets, cost, epsilon, gamma);

    std::vector<double> beta(n, 0.0);
    {
        // Reconstruct the full dual vector from the stored support set.
        std::size_t k = 0;
        for (std::size_t i = 0; i < n && k < model.dual_coefficients().size(); ++i) {
            if (inputs.at(i, 0) == model.support_inputs().at(k, 0)) {
                beta[i] = model.dual_coefficients()[k];
                ++k;
            }
        }
        REQUIRE(k == model.dual_coefficients().size());
    }
    const auto oracle_beta = oracle_dual_solve(inputs, targets, cost, epsilon, gamma);

    const double f_model = svr_dual_objective(inputs, targets, beta, epsilon, gamma);
    const double f_oracle = svr_dual_objective(inputs, targets, oracle_beta, epsilon, gamma);
    // The SMO solution must reach the oracle's objective (small slack for the
    // finite KKT tolerance on both sides).
    CHECK(f_model <= f_oracle + 5e-3);
}

TEST_CASE("svr prediction is invariant under training row permutation") {
    RngStream rng(77);
    const std::size_t n = 60;
    Matrix inputs(n, 2);
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        inputs.at(i, 0) = rng.uniform(-1.0, 1.0);
        inputs.at(i, 1) = rng.uniform(-1.0, 1.0);
        targets[i] = std::sin(2.0 * inputs.at(i, 0)) * std::cos(inputs.at(i, 1));
    }
    const auto base = SvrModel::fit(inputs, targets, 10.0, 0.01, 0.5);

    const auto perm = RngStream(1).permutation(n);
    Matrix shuffled(n, 2);
    std::vector<double> shuffled_targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        shuffled.at(i, 0) = inputs.at(perm[i], 0);
        shuffled.at(i, 1) = inputs.at(perm[i], 1);
        shuffled_targets[i] = targets[perm[i]];
    }
    const auto permuted = SvrModel::fit(shuffled, shuffled_targets, 10.0, 0.01, 0.5);

    for (int trial = 0; trial < 30; ++trial) {
        const std::vector<double> x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        CHECK(std::abs(base.predict(x) - permuted.predict(x)) < 0.02);
    }
}
