#include <cmath>
#include <vector>

#include "doctest.h"
#include "trafficast/errors.hpp"
#include "trafficast/models/arima.hpp"
#include "trafficast/models/filters.hpp"
#include "trafficast/models/linear_ar.hpp"
#include "trafficast/rng.hpp"

using namespace trafficast;
using namespace trafficast::models;

TEST_CASE("linear AR reproduces a constant series exactly") {
    const std::vector<double> series(30, 4.5);
    const auto model = fit_linear_ar(series, 2);
    const std::vector<double> window{4.5, 4.5};
    CHECK(model.predict(window) == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("linear AR recovers a known autoregression") {
    std::vector<double> series{1.0};
    for (int i = 1; i < 60; ++i) series.push_back(0.5 * series.back());
    const auto model = fit_linear_ar(series, 1);
    CHECK(std::abs(model.coefficients()[0] - 0.5) < 1e-8);
    CHECK(std::abs(model.intercept()) < 1e-8);
}

TEST_CASE("linear AR noiseless training error is at numerical zero") {
    RngStream rng(3);
    std::vector<double> series{0.3, -0.1, 0.2};
    const std::vector<double> coef{0.4, -0.25, 0.1};
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = series.size();
        series.push_back(0.05 + coef[0] * series[n - 1] + coef[1] * series[n - 2] +
                         coef[2] * series[n - 3]);
    }
    const auto model = fit_linear_ar(series, 3);
    double worst = 0.0;
    for (std::size_t t = 3; t < series.size(); ++t) {
        const std::vector<double> window{series[t - 3], series[t - 2], series[t - 1]};
        worst = std::max(worst, std::abs(model.predict(window) - series[t]));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("linear AR rejects short series") {
    CHECK_THROWS_AS(fit_linear_ar(std::vector<double>(6, 1.0), 3), TooShort);
}

TEST_CASE("kalman step hand-evaluated") {
    KalmanState state{0.0, 0.01, 0.001, 0.01};
    const auto next = kalman_step(state, 1.0);
    CHECK(next.estimate == doctest::Approx(0.011 / 0.021).epsilon(1e-9));
    CHECK(next.variance < 0.011);

    // Zero innovation leaves the estimate unchanged and shrinks variance.
    KalmanState s2{3.0, 0.05, 0.001, 0.01};
    const auto n2 = kalman_step(s2, 3.0);
    CHECK(n2.estimate == 3.0);
    CHECK(n2.variance < s2.variance);
}

TEST_CASE("kalman variance converges to the analytic fixed point") {
    const double fp = kalman_variance_fixed_point(0.001, 0.01);
    // Fixed point satisfies its defining equation.
    CHECK(fp == doctest::Approx((fp + 0.001) * 0.01 / (fp + 0.001 + 0.01)).epsilon(1e-14));

    KalmanState state{0.0, 1.0, 0.001, 0.01};
    double previous_gap = std::abs(state.variance - fp);
    for (int i = 0; i < 1000; ++i) {
        state = kalman_step(state, std::sin(0.01 * i));
        const double gap = std::abs(state.variance - fp);
        CHECK(state.variance > 0.0);
        CHECK(gap <= previous_gap + 1e-15);
        previous_gap = gap;
    }
    CHECK(previous_gap < 1e-9);
}

TEST_CASE("alpha-beta step hand-evaluated") {
    AlphaBetaState state;
    const auto next = alpha_beta_step(state, 1.0);
    CHECK(next.position == doctest::Approx(0.85));
    CHECK(next.velocity == doctest::Approx(0.005));

    // Observation exactly at the predicted position changes nothing.
    AlphaBetaState moving{2.0, 0.5, 0.85, 0.005, 1.0};
    const auto same = alpha_beta_step(moving, 2.5);
    CHECK(same.position == doctest::Approx(2.5));
    CHECK(same.velocity == doctest::Approx(0.5));
}

TEST_CASE("alpha-beta velocity locks onto a unit ramp") {
    AlphaBetaState state{0.0, 0.0, 0.85, 0.005, 1.0};
    for (int t = 1; t <= 2000; ++t) state = alpha_beta_step(state, static_cast<double>(t));
    CHECK(std::abs(state.velocity - 1.0) < 1e-3);
}

TEST_CASE("arima on a linear ramp forecasts the continued ramp") {
    std::vector<double> series;
    for (int t = 0; t < 120; ++t) series.push_back(2.0 + 0.7 * t);
    const auto model = fit_arima(series, ArimaOrders{0, 1, 0});
    for (std::size_t h : {1u, 5u, 20u}) {
        const double forecast = model.forecast(series, h);
        CHECK(std::abs(forecast - (series.back() + 0.7 * static_cast<double>(h))) < 1e-9);
    }
}

TEST_CASE("arima on a constant series forecasts flat") {
    const std::vector<double> series(100, 42.0);
    const auto model = fit_arima(series);
    for (const double c : model.ar_coefficients()) CHECK(std::abs(c) < 1e-6);
    for (const double c : model.ma_coefficients()) CHECK(std::abs(c) < 1e-6);
    CHECK(std::abs(model.forecast(series, 10) - 42.0) < 1e-6);
}

TEST_CASE("arima differencing gives exact translation invariance") {
    RngStream rng(17);
    std::vector<double> series{50.0};
    for (int i = 0; i < 300; ++i) {
        series.push_back(series.back() + rng.normal(0.0, 1.0));
    }
    std::vector<double> shifted(series);
    for (double& v : shifted) v += 123.0;

    const auto a = fit_arima(series);
    const auto b = fit_arima(shifted);
    const auto fa = a.rolling_forecast(series, 4);
    const auto fb = b.rolling_forecast(shifted, 4);
    for (std::size_t i = 0; i < fa.size(); ++i) {
        if (std::isnan(fa[i])) {
            CHECK(std::isnan(fb[i]));
        } else {
            CHECK(std::abs(fb[i] - (fa[i] + 123.0)) < 1e-9);
        }
    }
}

TEST_CASE("arima recovers known ARMA coefficients from a simulated series") {
    // Simulated ARIMA(2,1,2): the differenced series follows
    // w_t = 0.5 w_{t-1} - 0.3 w_{t-2} + e_t + 0.2 e_{t-1} + 0.1 e_{t-2}.
    RngStream rng(2);
    const double ar1 = 0.5, ar2 = -0.3, ma1 = 0.2, ma2 = 0.1, sigma = 0.1;
    std::vector<double> w{0.0, 0.0}, e{0.0, 0.0};
    for (int t = 2; t < 5000; ++t) {
        const double shock = rng.normal(0.0, sigma);
        w.push_back(ar1 * w[t - 1] + ar2 * w[t - 2] + shock + ma1 * e[t - 1] + ma2 * e[t - 2]);
        e.push_back(shock);
    }
    std::vector<double> series{100.0};
    for (const double dv : w) series.push_back(series.back() + dv);

    const auto model = fit_arima(series);
    CHECK(std::abs(model.ar_coefficients()[0] - ar1) < 0.08);
    CHECK(std::abs(model.ar_coefficients()[1] - ar2) < 0.08);
    CHECK(std::abs(model.ma_coefficients()[0] - ma1) < 0.08);
    CHECK(std::abs(model.ma_coefficients()[1] - ma2) < 0.08);
}

TEST_CASE("arima enforces minimum sample count") {
    CHECK_THROWS_AS(fit_arima(std::vector<double>(20, 1.0)), TooShort);
}

TEST_CASE("rolling forecasts only use past observations") {
    // A deterministic check that the target index is never touched: forecasts
    // for index t must not change when values after t change.
    RngStream rng(5);
    std::vector<double> series;
    for (int i = 0; i < 200; ++i) series.push_back(10.0 + rng.normal(0.0, 1.0));

    KalmanFilterModel kalman;
    const auto base = kalman.rolling_forecast(series, 3);
    auto mutated = series;
    for (std::size_t i = 150; i < mutated.size(); ++i) mutated[i] += 50.0;
    const auto changed = kalman.rolling_forecast(mutated, 3);
    for (std::size_t t = 0; t < 150; ++t) {
        if (!std::isnan(base[t])) CHECK(base[t] == changed[t]);
    }
}
