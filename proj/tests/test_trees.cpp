#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "trafficast/errors.hpp"
#include "trafficast/metrics.hpp"
#include "trafficast/models/boosting.hpp"
#include "trafficast/models/forest.hpp"
#include "trafficast/models/tree.hpp"
#include "trafficast/rng.hpp"

using namespace trafficast;
using namespace trafficast::models;

namespace {

// Brute-force best single split, used as the oracle for the greedy splitter.
struct BruteSplit {
    std::size_t feature = 0;
    double threshold = 0.0;
    double reduction = 0.0;
    bool valid = false;
};

BruteSplit brute_force_split(const Matrix& inputs, const std::vector<double>& targets,
                             std::size_t min_leaf) {
    const std::size_t n = inputs.rows();
    double mean = 0.0;
    for (const double y : targets) mean += y;
    mean /= static_cast<double>(n);
    double parent = 0.0;
    for (const double y : targets) parent += (y - mean) * (y - mean);

    BruteSplit best;
    for (std::size_t f = 0; f < inputs.cols(); ++f) {
        std::vector<double> values;
        for (std::size_t i = 0; i < n; ++i) values.push_back(inputs.at(i, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 1; k < values.size(); ++k) {
            const double threshold = (values[k - 1] + values[k]) / 2.0;
            double ls = 0, lq = 0, rs = 0, rq = 0;
            std::size_t ln = 0, rn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (inputs.at(i, f) < threshold) {
                    ls += targets[i];
                    lq += targets[i] * targets[i];
                    ++ln;
                } else {
                    rs += targets[i];
                    rq += targets[i] * targets[i];
                    ++rn;
                }
            }
            if (ln < min_leaf || rn < min_leaf) continue;
            const double sse = (lq - ls * ls / static_cast<double>(ln)) +
                               (rq - rs * rs / static_cast<double>(rn));
            const double reduction = parent - sse;
            if (reduction > best.reduction) {
                best = {f, threshold, reduction, true};
            }
        }
    }
    return best;
}

} // namespace

TEST_CASE("constant targets give a single leaf") {
    Matrix inputs(12, 2);
    for (std::size_t i = 0; i < 12; ++i) {
        inputs.at(i, 0) = static_cast<double>(i);
        inputs.at(i, 1) = static_cast<double>(i % 3);
    }
    const std::vector<double> targets(12, 3.25);
    const auto tree = fit_regression_tree(inputs, targets, std::nullopt, 1);
    CHECK(tree.split_count() == 0);
    CHECK(tree.predict(inputs.row(4)) == doctest::Approx(3.25));
}

TEST_CASE("step data is separated by one exact split") {
    Matrix inputs(20, 1);
    std::vector<double> targets(20);
    for (std::size_t i = 0; i < 20; ++i) {
        inputs.at(i, 0) = static_cast<double>(i);  // x < 5 -> 0, else 10
        targets[i] = i < 5 ? 0.0 : 10.0;
    }
    const auto tree = fit_regression_tree(inputs, targets, std::nullopt, 1);
    CHECK(tree.split_count() == 1);
    const auto& root = tree.nodes()[0];
    CHECK(root.threshold > 4.0);
    CHECK(root.threshold < 5.0);

    const auto oracle = brute_force_split(inputs, targets, 1);
    CHECK(root.feature == static_cast<int>(oracle.feature));
    CHECK(root.threshold == doctest::Approx(oracle.threshold));

    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(tree.predict(inputs.row(i)) == doctest::Approx(targets[i]));
    }
}

TEST_CASE("greedy split matches the brute-force oracle on random data") {
    RngStream rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 40 + rng.index(40);
        Matrix inputs(n, 3);
        std::vector<double> targets(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 3; ++j) inputs.at(i, j) = rng.uniform(-4.0, 4.0);
            targets[i] = inputs.at(i, 1) > 0 ? rng.uniform(8.0, 10.0) : rng.uniform(0.0, 2.0);
        }
        const auto tree = fit_regression_tree(inputs, targets, 1, 2);
        const auto oracle = brute_force_split(inputs, targets, 2);
        REQUIRE(oracle.valid);
        REQUIRE(tree.split_count() == 1);
        CHECK(tree.nodes()[0].feature == static_cast<int>(oracle.feature));
        CHECK(tree.nodes()[0].threshold == doctest::Approx(oracle.threshold));
    }
}

TEST_CASE("max_splits zero collapses to the target mean") {
    Matrix inputs(10, 1);
    std::vector<double> targets(10);
    for (std::size_t i = 0; i < 10; ++i) {
        inputs.at(i, 0) = static_cast<double>(i);
        targets[i] = static_cast<double>(i);
    }
    const auto tree = fit_regression_tree(inputs, targets, 0, 1);
    CHECK(tree.split_count() == 0);
    CHECK(tree.predict(inputs.row(0)) == doctest::Approx(4.5));
}

TEST_CASE("tree predictions are piecewise constant") {
    RngStream rng(9);
    Matrix inputs(60, 2);
    std::vector<double> targets(60);
    for (std::size_t i = 0; i < 60; ++i) {
        inputs.at(i, 0) = static_cast<double>(rng.index(20));
        inputs.at(i, 1) = static_cast<double>(rng.index(20));
        targets[i] = rng.uniform(0.0, 5.0);
    }
    const auto tree = fit_regression_tree(inputs, targets, std::nullopt, 3);
    // Thresholds sit at integer midpoints, so +-1e-9 never crosses one.
    for (std::size_t i = 0; i < 60; ++i) {
        std::vector<double> x{inputs.at(i, 0), inputs.at(i, 1)};
        const double base = tree.predict(x);
        x[0] += 1e-9;
        x[1] -= 1e-9;
        CHECK(tree.predict(x) == base);
    }
}

TEST_CASE("forest determinism and identical-tree hook") {
    RngStream rng(12);
    Matrix inputs(80, 4);
    std::vector<double> targets(80);
    for (std::size_t i = 0; i < 80; ++i) {
        for (std::size_t j = 0; j < 4; ++j) inputs.at(i, j) = rng.uniform(0.0, 1.0);
        targets[i] = inputs.at(i, 0) * 3.0 + rng.normal(0.0, 0.1);
    }

    const auto a = fit_random_forest(inputs, targets, 777);
    const auto b = fit_random_forest(inputs, targets, 777);
    CHECK(a.oob_error() == b.oob_error());
    CHECK(a.predict(inputs.row(0)) == b.predict(inputs.row(0)));
    CHECK(a.oob_error() > 0.0);

    ForestFitOptions no_bagging;
    no_bagging.bootstrap = false;
    no_bagging.feature_subsample = false;
    no_bagging.num_trees = 7;
    const auto degenerate = RandomForestModel::fit(inputs, targets, no_bagging);
    const double whole = degenerate.predict(inputs.row(3));
    CHECK(whole == doctest::Approx(degenerate.tree_prediction(0, inputs.row(3))));
}

TEST_CASE("forest matches a deep single tree on a noiseless signal") {
    RngStream rng(4);
    Matrix inputs(500, 1);
    std::vector<double> targets(500);
    for (std::size_t i = 0; i < 500; ++i) {
        inputs.at(i, 0) = rng.uniform(0.0, 10.0);
        targets[i] = inputs.at(i, 0);
    }
    const auto forest = fit_random_forest(inputs, targets, 5);
    const auto deep_tree = fit_regression_tree(inputs, targets, std::nullopt, 1);

    // Held-out points drawn from the same distribution.
    Matrix test_inputs(200, 1);
    std::vector<double> truth(200), predicted(200), oracle(200);
    for (std::size_t i = 0; i < 200; ++i) {
        test_inputs.at(i, 0) = rng.uniform(0.5, 9.5);
        truth[i] = test_inputs.at(i, 0);
        predicted[i] = forest.predict(test_inputs.row(i));
        oracle[i] = deep_tree.predict(test_inputs.row(i));
    }
    const double spread = std::sqrt(100.0 / 12.0);  // std of U(0,10)
    CHECK(rmse(truth, predicted) < 0.1 * spread);
    CHECK(rmse(truth, oracle) < 0.1 * spread);
}

TEST_CASE("forest beats the median of its members on noisy data") {
    RngStream rng(21);
    Matrix inputs(240, 4);
    std::vector<double> targets(240);
    for (std::size_t i = 0; i < 240; ++i) {
        for (std::size_t j = 0; j < 4; ++j) inputs.at(i, j) = rng.uniform(-1.0, 1.0);
        targets[i] = std::sin(3.0 * inputs.at(i, 0)) + 0.5 * inputs.at(i, 1) +
                     rng.normal(0.0, 0.3);
    }
    const auto forest = fit_random_forest(inputs, targets, 6);

    Matrix test_inputs(300, 4);
    std::vector<double> truth(300), forest_pred(300);
    for (std::size_t i = 0; i < 300; ++i) {
        for (std::size_t j = 0; j < 4; ++j) test_inputs.at(i, j) = rng.uniform(-1.0, 1.0);
        truth[i] = std::sin(3.0 * test_inputs.at(i, 0)) + 0.5 * test_inputs.at(i, 1);
        forest_pred[i] = forest.predict(test_inputs.row(i));
    }
    std::vector<double> member_rmse;
    std::vector<double> member_pred(300);
    for (std::size_t t = 0; t < forest.trees().size(); ++t) {
        for (std::size_t i = 0; i < 300; ++i) {
            member_pred[i] = forest.tree_prediction(t, test_inputs.row(i));
        }
        member_rmse.push_back(rmse(truth, member_pred));
    }
    std::sort(member_rmse.begin(), member_rmse.end());
    CHECK(rmse(truth, forest_pred) <= member_rmse[member_rmse.size() / 2]);
}

TEST_CASE("boosting with zero cycles predicts the mean") {
    Matrix inputs(10, 1);
    std::vector<double> targets{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    for (std::size_t i = 0; i < 10; ++i) inputs.at(i, 0) = static_cast<double>(i);
    BoostFitOptions options;
    options.cycles = 0;
    const auto model = BoostedEnsemble::fit(inputs, targets, options);
    CHECK(model.predict(inputs.row(2)) == doctest::Approx(5.5));
}

TEST_CASE("one unit-rate boosting step nails separable data") {
    // Points split cleanly at x ~ 5: residuals after F0 are +-5 and a single
    // stage with learning rate 1 removes them entirely.
    Matrix inputs{{0}, {1}, {2}, {3}, {4}, {10}, {11}, {12}, {13}, {14}};
    const std::vector<double> targets{0, 0, 0, 0, 0, 10, 10, 10, 10, 10};
    BoostFitOptions options;
    options.cycles = 1;
    options.learning_rate = 1.0;
    const auto model = BoostedEnsemble::fit(inputs, targets, options);
    CHECK(model.initial_prediction() == doctest::Approx(5.0));
    CHECK(model.stage_train_rmse().back() == doctest::Approx(0.0));
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(model.predict(inputs.row(i)) == doctest::Approx(targets[i]));
    }
}

TEST_CASE("boosting training error never increases across cycles") {
    RngStream rng(8);
    Matrix inputs(120, 3);
    std::vector<double> targets(120);
    for (std::size_t i = 0; i < 120; ++i) {
        for (std::size_t j = 0; j < 3; ++j) inputs.at(i, j) = rng.uniform(-2.0, 2.0);
        targets[i] = inputs.at(i, 0) * inputs.at(i, 1) + rng.normal(0.0, 0.2);
    }
    const auto model = fit_gradient_boost(inputs, targets, 0.1);
    CHECK(model.stage_count() == 100);
    const auto& curve = model.stage_train_rmse();
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1] + 1e-12);
}

TEST_CASE("ensemble input validation") {
    Matrix empty(0, 3);
    CHECK_THROWS_AS(fit_regression_tree(empty, std::vector<double>{}, std::nullopt, 1),
                    EmptyInput);
    Matrix tiny(5, 1);
    std::vector<double> t5(5, 1.0);
    CHECK_THROWS_AS(fit_random_forest(tiny, t5, 1), TooShort);
    CHECK_THROWS_AS(fit_gradient_boost(tiny, t5, 0.1), TooShort);
}
