#pragma once

#include "trafficast/models/tree.hpp"

namespace trafficast::models {

struct BoostFitOptions {
    std::size_t cycles = 100;        // NumLearningCycles
    std::size_t max_splits = 10;     // MaxNumSplits per stage tree
    double learning_rate = 0.1;
};

/// Least-squares gradient boosting: starting from the target mean, each
/// cycle fits a small tree to the current residuals and adds it scaled by
/// the learning rate.
class BoostedEnsemble final : public Forecaster {
public:
    std::size_t lag() const override { return input_dim_; }
    double predict(std::span<const double> features) const override;

    double initial_prediction() const { return initial_; }
    std::size_t stage_count() const { return stages_.size(); }
    double learning_rate() const { return learning_rate_; }
    /// Training RMSE after each cycle (non-increasing by construction).
    const std::vector<double>& stage_train_rmse() const { return stage_train_rmse_; }

    static BoostedEnsemble fit(const Matrix& inputs, std::span<const double> targets,
                               const BoostFitOptions& options);

private:
    std::vector<RegressionTree> stages_;
    double initial_ = 0.0;
    double learning_rate_ = 0.1;
    std::size_t input_dim_ = 0;
    std::vector<double> stage_train_rmse_;
};

BoostedEnsemble fit_gradient_boost(const Matrix& inputs, std::span<const double> targets,
                                   double learning_rate = 0.1);

} // namespace trafficast::models
