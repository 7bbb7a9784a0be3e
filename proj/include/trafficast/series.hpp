#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace trafficast {

enum class Quantity { speed, flow };

std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& name);

/// Seconds between consecutive samples; the data granularity is fixed at
/// five minutes throughout.
inline constexpr std::int64_t kSampleSeconds = 300;
inline constexpr std::size_t kSamplesPerDay = 288;

/// A uniformly sampled scalar traffic series (speed in mph or flow in
/// vehicles per 5 minutes). Values are finite and non-negative.
struct TrafficSeries {
    Quantity quantity = Quantity::speed;
    std::int64_t start_epoch_seconds = 0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    /// Throws when values are empty, non-finite or negative.
    void validate() const;
};

struct SplitSpec {
    double train_fraction;
    double validation_fraction;
    double test_fraction;

    /// Fractions must be positive and sum to 1 within 1e-12.
    SplitSpec(double train, double validation, double test);
    SplitSpec() : SplitSpec(0.8, 0.1, 0.1) {}
};

/// Contiguous chronological segments: floor(train*n), floor(validation*n),
/// remainder. No shuffling. Throws TooShort when n < 10.
std::tuple<TrafficSeries, TrafficSeries, TrafficSeries> split_series(const TrafficSeries& series,
                                                                     const SplitSpec& spec);

struct NormalizationParams {
    double min = 0.0;
    double max = 1.0;

    double apply(double x) const { return (x - min) / (max - min); }
    double invert(double y) const { return y * (max - min) + min; }
    double scale() const { return max - min; }
};

/// Min/max over `values`; throws DegenerateRange when constant.
NormalizationParams fit_minmax(std::span<const double> values);

std::vector<double> apply_normalization(std::span<const double> values,
                                        const NormalizationParams& params);
std::vector<double> invert_normalization(std::span<const double> values,
                                         const NormalizationParams& params);

/// Normalizes a series to [0, 1] with params fitted on that same series.
std::pair<TrafficSeries, NormalizationParams> minmax_normalize(const TrafficSeries& series);

// Timestamp helpers (UTC, "YYYY-MM-DD HH:MM:SS").
std::string format_timestamp(std::int64_t epoch_seconds);
std::int64_t parse_timestamp(const std::string& text);

/// 2024-01-01 00:00:00 UTC, the default origin for generated series.
std::int64_t default_start_timestamp();

} // namespace trafficast
