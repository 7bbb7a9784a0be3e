#pragma once

#include <array>
#include <cstdint>

#include "trafficast/metrics.hpp"
#include "trafficast/models/registry.hpp"
#include "trafficast/series.hpp"
#include "trafficast/supervised.hpp"

namespace trafficast::sweep {

struct ForecastTask {
    std::string model_id;
    Quantity quantity = Quantity::speed;
    std::size_t window = 1;  // forecasting window, 1..20
    Strategy strategy = Strategy::direct;
    std::uint64_t seed = 0;
};

std::uint64_t task_seed(std::uint64_t master_seed, const std::string& model_id,
                        Quantity quantity, std::size_t window);

struct CellResult {
    ForecastTask task;
    MetricTriple train_normalized, train_raw;
    MetricTriple test_normalized, test_raw;
    double seconds = 0.0;
    std::string status = "ok";  // ok | failed:<reason>
    std::string warning;

    bool ok() const { return status == "ok"; }
};

struct SweepConfig {
    std::vector<std::string> models;  // empty = every registered model
    std::size_t min_window = 1;
    std::size_t max_window = 20;
    Strategy strategy = Strategy::direct;
    models::Profile profile = models::Profile::reduced;
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;
};

struct SweepData {
    TrafficSeries speed;
    TrafficSeries flow;
    SplitSpec split;
};

struct QuantitySummary {
    std::size_t length = 0;
    std::uint64_t checksum = 0;
    NormalizationParams norm;
};

struct SweepResult {
    SweepConfig config;
    std::vector<CellResult> cells;  // ordered by (model, quantity, window)
    QuantitySummary speed_summary;
    QuantitySummary flow_summary;

    const CellResult* find(const std::string& model, Quantity q, std::size_t window) const;
    std::size_t failed_count() const;
};

/// Runs the full (model x quantity x window) grid. Work items execute on up
/// to `workers` threads; every task owns a seed derived from (master seed,
/// model, quantity, window), so results are identical for any worker count.
/// Per-cell failures are recorded, never propagated.
SweepResult run_sweep(const SweepData& data, const SweepConfig& config);

/// FNV-1a over the binary series values (data fingerprint for manifests).
std::uint64_t series_checksum(std::span<const double> values);

} // namespace trafficast::sweep
