#include "trafficast/models/forest.hpp"

#include <cmath>

#include "trafficast/errors.hpp"

namespace trafficast::models {

RandomForestModel RandomForestModel::fit(const Matrix& inputs, std::span<const double> targets,
                                         const ForestFitOptions& options) {
    const std::size_t n = inputs.rows();
    if (n == 0) throw EmptyInput("random forest fit on zero rows");
    if (n < 20) throw TooShort("random forest needs at least 20 rows");
    if (targets.size() != n) throw DimensionMismatch("random forest: target count != rows");

    const std::size_t p = inputs.cols();
    const std::size_t per_split =
        options.feature_subsample ? (p + 2) / 3 : 0;  // ceil(p/3), 0 = all

    RandomForestModel model;
    model.input_dim_ = p;
    model.trees_.reserve(options.num_trees);

    std::vector<std::vector<std::uint32_t>> in_bag(options.num_trees);
    Matrix sample_inputs(n, p);
    std::vector<double> sample_targets(n);

    for (std::size_t t = 0; t < options.num_trees; ++t) {
        RngStream rng(derive_seed(options.seed, "forest-tree-" + std::to_string(t)));
        in_bag[t].assign(n, 0);

        TreeFitOptions tree_options;
        tree_options.min_leaf = options.min_leaf;
        tree_options.feature_subsample = per_split;
        tree_options.rng = &rng;

        if (options.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t pick = rng.index(n);
                in_bag[t][pick] += 1;
                for (std::size_t j = 0; j < p; ++j) sample_inputs.at(i, j) = inputs.at(pick, j);
                sample_targets[i] = targets[pick];
            }
            model.trees_.push_back(RegressionTree::fit(sample_inputs, sample_targets, tree_options));
        } else {
            for (auto& c : in_bag[t]) c = 1;
            model.trees_.push_back(RegressionTree::fit(inputs, targets, tree_options));
        }
    }

    // Out-of-bag error: score each row with the trees that never saw it.
    double sq_sum = 0.0;
    std::size_t scored = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        std::size_t votes = 0;
        for (std::size_t t = 0; t < options.num_trees; ++t) {
            if (in_bag[t][i] == 0) {
                sum += model.trees_[t].predict(inputs.row(i));
                ++votes;
            }
        }
        if (votes == 0) {
            ++model.oob_excluded_;
            continue;
        }
        const double err = targets[i] - sum / static_cast<double>(votes);
        sq_sum += err * err;
        ++scored;
    }
    model.oob_error_ = scored > 0 ? std::sqrt(sq_sum / static_cast<double>(scored))
                                  : std::numeric_limits<double>::quiet_NaN();
    return model;
}

double RandomForestModel::predict(std::span<const double> features) const {
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict(features);
    return sum / static_cast<double>(trees_.size());
}

RandomForestModel fit_random_forest(const Matrix& inputs, std::span<const double> targets,
                                    std::uint64_t seed) {
    ForestFitOptions options;
    options.seed = seed;
    return RandomForestModel::fit(inputs, targets, options);
}

} // namespace trafficast::models
