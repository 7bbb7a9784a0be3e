#include "trafficast/models/boosting.hpp"

#include <cmath>

#include "trafficast/errors.hpp"

namespace trafficast::models {

BoostedEnsemble BoostedEnsemble::fit(const Matrix& inputs, std::span<const double> targets,
                                     const BoostFitOptions& options) {
    const std::size_t n = inputs.rows();
    if (n == 0) throw EmptyInput("boosting fit on zero rows");
    if (n < 10) throw TooShort("boosting needs at least 10 rows");
    if (targets.size() != n) throw DimensionMismatch("boosting: target count != rows");
    if (options.learning_rate <= 0.0 || options.learning_rate > 1.0) {
        throw InvalidArgument("boosting learning rate must be in (0, 1]");
    }

    BoostedEnsemble model;
    model.input_dim_ = inputs.cols();
    model.learning_rate_ = options.learning_rate;

    double mean = 0.0;
    for (const double y : targets) mean += y;
    model.initial_ = mean / static_cast<double>(n);

    std::vector<double> residuals(n);
    for (std::size_t i = 0; i < n; ++i) residuals[i] = targets[i] - model.initial_;

    TreeFitOptions tree_options;
    tree_options.max_splits = options.max_splits;
    tree_options.min_leaf = 1;

    model.stages_.reserve(options.cycles);
    model.stage_train_rmse_.reserve(options.cycles);
    for (std::size_t cycle = 0; cycle < options.cycles; ++cycle) {
        auto stage = RegressionTree::fit(inputs, residuals, tree_options);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            residuals[i] -= options.learning_rate * stage.predict(inputs.row(i));
            sq += residuals[i] * residuals[i];
        }
        model.stages_.push_back(std::move(stage));
        model.stage_train_rmse_.push_back(std::sqrt(sq / static_cast<double>(n)));
    }
    return model;
}

double BoostedEnsemble::predict(std::span<const double> features) const {
    double out = initial_;
    for (const auto& stage : stages_) out += learning_rate_ * stage.predict(features);
    return out;
}

BoostedEnsemble fit_gradient_boost(const Matrix& inputs, std::span<const double> targets,
                                   double learning_rate) {
    BoostFitOptions options;
    options.learning_rate = learning_rate;
    return BoostedEnsemble::fit(inputs, targets, options);
}

} // namespace trafficast::models
