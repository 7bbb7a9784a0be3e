#include "trafficast/sweep/slope.hpp"

#include <algorithm>
#include <cmath>

#include "trafficast/errors.hpp"
#include "trafficast/linalg.hpp"

namespace trafficast::sweep {

SlopeFit fit_log_slope(std::span<const double> windows, std::span<const double> values) {
    if (windows.size() != values.size()) {
        throw DimensionMismatch("fit_log_slope: window/value length mismatch");
    }
    SlopeFit fit;
    std::vector<double> w, ln;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > 0.0 && std::isfinite(values[i])) {
            w.push_back(windows[i]);
            ln.push_back(std::log(values[i]));
        } else {
            ++fit.excluded_points;
        }
    }
    if (w.size() < 3) {
        throw InsufficientPositive("log-slope fit needs at least 3 positive values, got " +
                                   std::to_string(w.size()));
    }

    Matrix design(w.size(), 2);
    for (std::size_t i = 0; i < w.size(); ++i) {
        design.at(i, 0) = 1.0;
        design.at(i, 1) = w[i];
    }
    const auto coeffs = ols_fit(design, ln);
    fit.c = coeffs[0];
    fit.m = coeffs[1];

    double ss_res = 0.0;
    double mean = 0.0;
    for (const double v : ln) mean += v;
    mean /= static_cast<double>(ln.size());
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < ln.size(); ++i) {
        const double predicted = fit.c + fit.m * w[i];
        ss_res += (ln[i] - predicted) * (ln[i] - predicted);
        ss_tot += (ln[i] - mean) * (ln[i] - mean);
    }
    fit.fit_r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res < 1e-24 ? 1.0 : 0.0);
    return fit;
}

namespace {

struct SeriesAccumulator {
    std::vector<double> windows;
    std::vector<double> rmse, mae, r2, one_minus_r2;
};

void push_row(std::vector<SlopeRow>& rows, const std::string& model, Quantity quantity,
              const std::string& metric, const std::string& split,
              std::span<const double> windows, std::span<const double> values) {
    SlopeRow row;
    row.model = model;
    row.quantity = quantity;
    row.metric = metric;
    row.target_split = split;
    try {
        row.fit = fit_log_slope(windows, values);
    } catch (const InsufficientPositive&) {
        row.defined = false;
        row.fit = {};
        row.fit.excluded_points = windows.size();
    }
    rows.push_back(std::move(row));
}

} // namespace

std::vector<SlopeRow> compute_slopes(const SweepResult& result, const std::string& target_split) {
    if (target_split != "train" && target_split != "test") {
        throw InvalidArgument("slope target split must be train or test");
    }
    const bool use_test = target_split == "test";

    // Group cells by (model, quantity) preserving sweep order.
    std::vector<std::pair<std::string, Quantity>> keys;
    std::map<std::pair<std::string, int>, SeriesAccumulator> groups;
    for (const auto& cell : result.cells) {
        if (!cell.ok()) continue;
        const std::pair<std::string, int> key{cell.task.model_id,
                                              static_cast<int>(cell.task.quantity)};
        if (groups.find(key) == groups.end()) {
            keys.emplace_back(cell.task.model_id, cell.task.quantity);
        }
        auto& acc = groups[key];
        const MetricTriple& triple = use_test ? cell.test_normalized : cell.train_normalized;
        acc.windows.push_back(static_cast<double>(cell.task.window));
        acc.rmse.push_back(triple.rmse);
        acc.mae.push_back(triple.mae);
        acc.r2.push_back(triple.r_squared_defined ? triple.r_squared : -1.0);
        acc.one_minus_r2.push_back(triple.r_squared_defined && triple.r_squared < 1.0
                                       ? 1.0 - triple.r_squared
                                       : 0.0);
    }

    std::vector<SlopeRow> rows;
    for (const auto& [model, quantity] : keys) {
        const auto& acc = groups[{model, static_cast<int>(quantity)}];
        push_row(rows, model, quantity, "rmse", target_split, acc.windows, acc.rmse);
        push_row(rows, model, quantity, "mae", target_split, acc.windows, acc.mae);
        push_row(rows, model, quantity, "r2", target_split, acc.windows, acc.r2);
        push_row(rows, model, quantity, "one_minus_r2", target_split, acc.windows,
                 acc.one_minus_r2);
    }
    std::sort(rows.begin(), rows.end(), [](const SlopeRow& a, const SlopeRow& b) {
        return std::tie(a.model, a.quantity, a.metric, a.target_split) <
               std::tie(b.model, b.quantity, b.metric, b.target_split);
    });
    return rows;
}

Rankings rank_models(const SweepResult& result) {
    Rankings rankings;

    // Per-window ranking on normalized test RMSE.
    std::map<std::pair<std::string, std::size_t>,
             std::vector<std::tuple<double, double, std::string>>>
        buckets;
    for (const auto& cell : result.cells) {
        if (!cell.ok()) continue;
        buckets[{to_string(cell.task.quantity), cell.task.window}].emplace_back(
            cell.test_normalized.rmse, cell.test_normalized.mae, cell.task.model_id);
    }
    for (auto& [key, entries] : buckets) {
        std::sort(entries.begin(), entries.end());
        auto& ordered = rankings.per_window[key.first][key.second];
        for (const auto& [unused_rmse, unused_mae, id] : entries) ordered.push_back(id);
    }

    // Robustness ranking by ascending test-RMSE slope.
    for (const auto& row : compute_slopes(result, "test")) {
        if (row.metric != "rmse" || !row.defined) continue;
        rankings.robustness[to_string(row.quantity)].emplace_back(row.model, row.fit.m);
    }
    for (auto& [quantity, entries] : rankings.robustness) {
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) {
                      return a.second < b.second || (a.second == b.second && a.first < b.first);
                  });
    }
    return rankings;
}

} // namespace trafficast::sweep
