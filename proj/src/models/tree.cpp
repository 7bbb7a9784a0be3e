#include "trafficast/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "trafficast/errors.hpp"

namespace trafficast::models {

namespace {

struct SplitCandidate {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double reduction = 0.0;
    std::size_t boundary = 0;  // rows [0, boundary) of the sorted node go left
};

struct OpenNode {
    int node_index;
    std::vector<std::size_t> rows;  // sorted by the chosen feature once split
    SplitCandidate split;
    std::size_t seq;
};

double node_sse(std::span<const double> targets, const std::vector<std::size_t>& rows,
                double& mean_out) {
    double sum = 0.0;
    for (const std::size_t r : rows) sum += targets[r];
    const double mean = sum / static_cast<double>(rows.size());
    double sse = 0.0;
    for (const std::size_t r : rows) {
        const double d = targets[r] - mean;
        sse += d * d;
    }
    mean_out = mean;
    return sse;
}

// Exhaustive scan over midpoint thresholds of each candidate feature.
SplitCandidate best_split(const Matrix& inputs, std::span<const double> targets,
                          std::vector<std::size_t>& rows, const TreeFitOptions& options,
                          double parent_sse) {
    SplitCandidate best;
    const std::size_t n = rows.size();
    if (n < 2 * options.min_leaf) return best;

    std::vector<std::size_t> features;
    const std::size_t p = inputs.cols();
    if (options.feature_subsample == 0 || options.feature_subsample >= p) {
        features.resize(p);
        std::iota(features.begin(), features.end(), std::size_t{0});
    } else {
        // Draw without replacement, then order for deterministic tie-breaks.
        std::vector<std::size_t> pool(p);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t k = 0; k < options.feature_subsample; ++k) {
            std::swap(pool[k], pool[k + options.rng->index(p - k)]);
        }
        features.assign(pool.begin(),
                        pool.begin() + static_cast<std::ptrdiff_t>(options.feature_subsample));
        std::sort(features.begin(), features.end());
    }

    std::vector<std::size_t> order(rows);
    for (const std::size_t feature : features) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = inputs.at(a, feature);
            const double vb = inputs.at(b, feature);
            return va < vb || (va == vb && a < b);
        });

        double left_sum = 0.0;
        double left_sq = 0.0;
        double total_sum = 0.0;
        double total_sq = 0.0;
        for (const std::size_t r : order) {
            total_sum += targets[r];
            total_sq += targets[r] * targets[r];
        }
        for (std::size_t k = 1; k < n; ++k) {
            const double y = targets[order[k - 1]];
            left_sum += y;
            left_sq += y * y;
            const double prev = inputs.at(order[k - 1], feature);
            const double next = inputs.at(order[k], feature);
            if (!(next > prev)) continue;
            if (k < options.min_leaf || n - k < options.min_leaf) continue;

            const double right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse_left =
                std::max(0.0, left_sq - left_sum * left_sum / static_cast<double>(k));
            const double sse_right =
                std::max(0.0, right_sq - right_sum * right_sum / static_cast<double>(n - k));
            const double reduction = parent_sse - sse_left - sse_right;
            const double threshold = prev + (next - prev) / 2.0;
            // Features and thresholds are scanned in ascending order, so
            // keeping the first strictly-better candidate implements the
            // (lowest feature, lowest threshold) tie-break.
            if (reduction > best.reduction && reduction > 0.0) {
                best.valid = true;
                best.feature = feature;
                best.threshold = threshold;
                best.reduction = reduction;
                best.boundary = k;
            }
        }
    }

    if (best.valid) {
        std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
            const double va = inputs.at(a, best.feature);
            const double vb = inputs.at(b, best.feature);
            return va < vb || (va == vb && a < b);
        });
    }
    return best;
}

} // namespace

RegressionTree RegressionTree::fit(const Matrix& inputs, std::span<const double> targets,
                                   const TreeFitOptions& options) {
    if (inputs.rows() == 0) throw EmptyInput("regression tree fit on zero rows");
    if (targets.size() != inputs.rows()) {
        throw DimensionMismatch("regression tree: target count != row count");
    }
    if (options.min_leaf == 0) throw InvalidArgument("min_leaf must be positive");

    RegressionTree tree;
    tree.input_dim_ = inputs.cols();

    std::vector<std::size_t> all_rows(inputs.rows());
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

    double root_mean = 0.0;
    const double root_sse = node_sse(targets, all_rows, root_mean);
    tree.nodes_.push_back({-1, 0.0, -1, -1, root_mean});

    const std::size_t max_splits =
        options.max_splits.value_or(std::numeric_limits<std::size_t>::max());
    if (max_splits == 0 || inputs.rows() < 2 * options.min_leaf) return tree;

    std::vector<OpenNode> open;
    std::size_t next_seq = 0;
    {
        OpenNode root{0, std::move(all_rows), {}, next_seq++};
        root.split = best_split(inputs, targets, root.rows, options, root_sse);
        if (root.split.valid) open.push_back(std::move(root));
    }

    std::size_t splits = 0;
    while (!open.empty() && splits < max_splits) {
        // Best reduction first; earlier nodes win ties.
        std::size_t pick = 0;
        for (std::size_t i = 1; i < open.size(); ++i) {
            if (open[i].split.reduction > open[pick].split.reduction ||
                (open[i].split.reduction == open[pick].split.reduction &&
                 open[i].seq < open[pick].seq)) {
                pick = i;
            }
        }
        OpenNode node = std::move(open[pick]);
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));

        std::vector<std::size_t> left_rows(node.rows.begin(),
                                           node.rows.begin() +
                                               static_cast<std::ptrdiff_t>(node.split.boundary));
        std::vector<std::size_t> right_rows(node.rows.begin() +
                                                static_cast<std::ptrdiff_t>(node.split.boundary),
                                            node.rows.end());

        double left_mean = 0.0;
        double right_mean = 0.0;
        const double left_sse = node_sse(targets, left_rows, left_mean);
        const double right_sse = node_sse(targets, right_rows, right_mean);

        const int left_index = static_cast<int>(tree.nodes_.size());
        tree.nodes_.push_back({-1, 0.0, -1, -1, left_mean});
        const int right_index = static_cast<int>(tree.nodes_.size());
        tree.nodes_.push_back({-1, 0.0, -1, -1, right_mean});

        Node& parent = tree.nodes_[static_cast<std::size_t>(node.node_index)];
        parent.feature = static_cast<int>(node.split.feature);
        parent.threshold = node.split.threshold;
        parent.left = left_index;
        parent.right = right_index;
        ++splits;

        OpenNode left{left_index, std::move(left_rows), {}, next_seq++};
        left.split = best_split(inputs, targets, left.rows, options, left_sse);
        if (left.split.valid) open.push_back(std::move(left));

        OpenNode right{right_index, std::move(right_rows), {}, next_seq++};
        right.split = best_split(inputs, targets, right.rows, options, right_sse);
        if (right.split.valid) open.push_back(std::move(right));
    }

    tree.split_count_ = splits;
    return tree;
}

double RegressionTree::predict(std::span<const double> features) const {
    if (features.size() != input_dim_) {
        throw DimensionMismatch("tree expects " + std::to_string(input_dim_) + " features");
    }
    std::size_t node = 0;
    while (nodes_[node].feature >= 0) {
        const Node& n = nodes_[node];
        node = static_cast<std::size_t>(
            features[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
    }
    return nodes_[node].prediction;
}

RegressionTree fit_regression_tree(const Matrix& inputs, std::span<const double> targets,
                                   std::optional<std::size_t> max_splits, std::size_t min_leaf) {
    TreeFitOptions options;
    options.max_splits = max_splits;
    options.min_leaf = min_leaf;
    return RegressionTree::fit(inputs, targets, options);
}

} // namespace trafficast::models
