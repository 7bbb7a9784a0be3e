#include <cmath>
#include <vector>

#include "doctest.h"
#include "trafficast/errors.hpp"
#include "trafficast/linalg.hpp"
#include "trafficast/matrix.hpp"
#include "trafficast/optim.hpp"
#include "trafficast/rng.hpp"

using namespace trafficast;

TEST_CASE("ols_fit interpolates an exact line") {
    Matrix design{{1, 0}, {1, 1}, {1, 2}};
    const std::vector<double> targets{1, 3, 5};
    const auto coeffs = ols_fit(design, targets);
    REQUIRE(coeffs.size() == 2);
    CHECK(coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(coeffs[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ols_fit constant column") {
    Matrix design{{1}, {1}, {1}};
    const std::vector<double> targets{2, 2, 2};
    const auto coeffs = ols_fit(design, targets);
    CHECK(coeffs[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ols_fit recovers known coefficients on a noiseless design") {
    RngStream rng(42);
    const std::vector<double> truth{0.3, -1.2, 4.0};
    Matrix design(200, 3);
    std::vector<double> targets(200);
    for (std::size_t i = 0; i < 200; ++i) {
        double y = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            design.at(i, j) = rng.uniform(-1.0, 1.0);
            y += design.at(i, j) * truth[j];
        }
        targets[i] = y;
    }
    const auto coeffs = ols_fit(design, targets);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(coeffs[j] - truth[j]) < 1e-9);
}

TEST_CASE("ols_fit residual is orthogonal to every design column") {
    RngStream rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 30 + rng.index(40);
        const std::size_t p = 2 + rng.index(5);
        Matrix design(n, p);
        std::vector<double> targets(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) design.at(i, j) = rng.uniform(-2.0, 2.0);
            targets[i] = rng.uniform(-5.0, 5.0);
        }
        const auto coeffs = ols_fit(design, targets);
        const auto fitted = matvec(design, coeffs);
        std::vector<double> residual(n);
        for (std::size_t i = 0; i < n; ++i) residual[i] = targets[i] - fitted[i];
        for (std::size_t j = 0; j < p; ++j) {
            double inner = 0.0;
            for (std::size_t i = 0; i < n; ++i) inner += design.at(i, j) * residual[i];
            CHECK(std::abs(inner) < 1e-8);
        }
    }
}

TEST_CASE("ols_fit rank-deficient system returns the minimum-norm solution") {
    // Two identical columns: any split of the weight fits; minimum norm
    // places the same coefficient on both.
    Matrix design{{1, 1}, {2, 2}, {3, 3}};
    const std::vector<double> targets{2, 4, 6};
    const auto coeffs = ols_fit(design, targets);
    CHECK(coeffs[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(coeffs[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ols_fit input validation") {
    Matrix design{{1, 0}, {1, 1}, {1, 2}};
    CHECK_THROWS_AS(ols_fit(design, std::vector<double>{1, 2}), DimensionMismatch);
    Matrix bad{{1, 0}, {1, std::nan("")}, {1, 2}};
    CHECK_THROWS_AS(ols_fit(bad, std::vector<double>{1, 2, 3}), NonFiniteError);
    CHECK_THROWS_AS(ols_fit(design, std::vector<double>{1, 2, std::nan("")}), NonFiniteError);
}

TEST_CASE("adam zero gradient is a fixed point") {
    std::vector<double> params{1.5, -2.0};
    const std::vector<double> grads{0.0, 0.0};
    auto state = AdamState::for_size(2);
    const auto [next, next_state] = adam_update(params, grads, state);
    CHECK(next == params);
    CHECK(next_state.step_index == 1);
}

TEST_CASE("adam first step moves by about the learning rate") {
    const std::vector<double> params{1.0};
    const std::vector<double> grads{1.0};
    auto state = AdamState::for_size(1);
    const auto [next, next_state] = adam_update(params, grads, state);
    CHECK(next[0] == doctest::Approx(1.0 - 0.001).epsilon(1e-6));
}

TEST_CASE("adam per-step displacement converges to the learning rate") {
    std::vector<double> params{0.0};
    const std::vector<double> grads{1.0};
    auto state = AdamState::for_size(1);
    double previous = params[0];
    double step_size = 0.0;
    for (int i = 0; i < 10000; ++i) {
        adam_step(params, grads, state);
        step_size = previous - params[0];
        previous = params[0];
    }
    CHECK(std::abs(step_size - 0.001) < 0.001 * 0.01);
    CHECK(state.step_index == 10000);
}

TEST_CASE("adam is deterministic and checks dimensions") {
    std::vector<double> a{0.3, 0.7};
    std::vector<double> b{0.3, 0.7};
    const std::vector<double> grads{0.11, -0.23};
    auto sa = AdamState::for_size(2);
    auto sb = AdamState::for_size(2);
    for (int i = 0; i < 50; ++i) {
        adam_step(a, grads, sa);
        adam_step(b, grads, sb);
    }
    CHECK(a == b);
    CHECK(sa.first_moment == sb.first_moment);

    auto bad = AdamState::for_size(3);
    CHECK_THROWS_AS(adam_step(a, grads, bad), DimensionMismatch);
}

TEST_CASE("numeric_gradient of x squared") {
    const std::vector<double> x{3.0};
    const auto grad = numeric_gradient(
        [](std::span<const double> v) { return v[0] * v[0]; }, x, 1e-5);
    CHECK(std::abs(grad[0] - 6.0) < 1e-6);
}

TEST_CASE("numeric_gradient of a constant is zero") {
    const std::vector<double> x{1.0, -4.0, 2.5};
    const auto grad =
        numeric_gradient([](std::span<const double>) { return 7.0; }, x, 1e-5);
    for (const double g : grad) CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("numeric_gradient of a quadratic form matches 2Ax") {
    const Matrix a{{2, 1, 0}, {1, 3, -1}, {0, -1, 1}};
    const std::vector<double> x{1.0, -2.0, 0.5};
    const auto grad = numeric_gradient(
        [&](std::span<const double> v) {
            double sum = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) sum += v[i] * a.at(i, j) * v[j];
            return sum;
        },
        x, 1e-5);
    // 2Ax computed by hand for this A and x.
    const std::vector<double> expected{0.0, -11.0, 5.0};
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(grad[i] - expected[i]) < 1e-6);
}

TEST_CASE("numeric_gradient of a linear function equals its coefficients") {
    const std::vector<double> coeffs{0.5, -1.25, 3.0, 0.01};
    const std::vector<double> x{1.0, 2.0, -0.5, 4.0};
    const double eps = 1e-5;
    const auto grad = numeric_gradient(
        [&](std::span<const double> v) {
            double sum = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) sum += coeffs[i] * v[i];
            return sum;
        },
        x, eps);
    for (std::size_t i = 0; i < coeffs.size(); ++i) CHECK(std::abs(grad[i] - coeffs[i]) < 10 * eps);
}

TEST_CASE("numeric_gradient rejects non-finite probes") {
    const std::vector<double> x{0.0};
    CHECK_THROWS_AS(numeric_gradient(
                        [](std::span<const double> v) { return std::sqrt(v[0]); }, x, 1e-5),
                    NonFiniteError);
}

TEST_CASE("nelder_mead minimizes a shifted quadratic") {
    const std::vector<double> x0{0.0, 0.0};
    const auto result = nelder_mead(
        [](std::span<const double> v) {
            const double a = v[0] - 3.0;
            const double b = v[1] + 1.0;
            return a * a + b * b;
        },
        x0, 0.5, 500, 1e-12);
    CHECK(result.converged);
    CHECK(std::abs(result.x[0] - 3.0) < 1e-4);
    CHECK(std::abs(result.x[1] + 1.0) < 1e-4);
}

TEST_CASE("rng streams are deterministic and label-separated") {
    RngStream a(derive_seed(99, "model-a"));
    RngStream b(derive_seed(99, "model-a"));
    RngStream c(derive_seed(99, "model-b"));
    bool saw_difference = false;
    for (int i = 0; i < 16; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) saw_difference = true;
    }
    CHECK(saw_difference);

    RngStream s1(123), s2(123);
    auto p1 = s1.permutation(40);
    auto p2 = s2.permutation(40);
    CHECK(p1 == p2);
}

TEST_CASE("matrix initializer validates row lengths") {
    CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), DimensionMismatch);
}
