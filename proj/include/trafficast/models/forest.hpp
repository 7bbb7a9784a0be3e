#pragma once

#include "trafficast/models/tree.hpp"

namespace trafficast::models {

struct ForestFitOptions {
    std::size_t num_trees = 100;
    std::size_t min_leaf = 5;
    bool bootstrap = true;           // test hook: off makes every tree identical
    bool feature_subsample = true;   // ceil(p/3) features per split when on
    std::uint64_t seed = 0;
};

/// Bagged regression trees, prediction = mean over members. Each tree draws
/// its bootstrap and split features from a stream derived as
/// hash(seed, tree_index), so results do not depend on training order.
class RandomForestModel final : public Forecaster {
public:
    std::size_t lag() const override { return input_dim_; }
    double predict(std::span<const double> features) const override;

    double oob_error() const { return oob_error_; }
    std::size_t oob_excluded() const { return oob_excluded_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }
    double tree_prediction(std::size_t index, std::span<const double> features) const {
        return trees_[index].predict(features);
    }

    static RandomForestModel fit(const Matrix& inputs, std::span<const double> targets,
                                 const ForestFitOptions& options);

private:
    std::vector<RegressionTree> trees_;
    std::size_t input_dim_ = 0;
    double oob_error_ = 0.0;
    std::size_t oob_excluded_ = 0;
};

RandomForestModel fit_random_forest(const Matrix& inputs, std::span<const double> targets,
                                    std::uint64_t seed);

} // namespace trafficast::models
