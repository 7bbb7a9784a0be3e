#pragma once

#include <optional>

#include "trafficast/matrix.hpp"
#include "trafficast/models/forecaster.hpp"
#include "trafficast/rng.hpp"

namespace trafficast::models {

struct TreeFitOptions {
    std::optional<std::size_t> max_splits;  // cap on internal nodes
    std::size_t min_leaf = 5;
    std::size_t feature_subsample = 0;      // 0 = consider every feature
    RngStream* rng = nullptr;               // stream for feature subsampling
};

/// CART-style regression tree: greedy binary splits minimizing the summed
/// squared error, thresholds at midpoints between consecutive distinct
/// feature values. Splits are applied best-reduction-first so a split cap
/// keeps the most valuable ones; ties break toward the lowest feature index,
/// then the lowest threshold.
class RegressionTree final : public Forecaster {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double prediction = 0.0;
    };

    std::size_t lag() const override { return input_dim_; }
    double predict(std::span<const double> features) const override;

    std::size_t split_count() const { return split_count_; }
    std::size_t leaf_count() const { return nodes_.size() - split_count_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    static RegressionTree fit(const Matrix& inputs, std::span<const double> targets,
                              const TreeFitOptions& options);

private:
    std::vector<Node> nodes_;
    std::size_t input_dim_ = 0;
    std::size_t split_count_ = 0;
};

/// Spec'd entry point for a standalone tree.
RegressionTree fit_regression_tree(const Matrix& inputs, std::span<const double> targets,
                                   std::optional<std::size_t> max_splits = std::nullopt,
                                   std::size_t min_leaf = 5);

} // namespace trafficast::models
