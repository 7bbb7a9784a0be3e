#pragma once

#include <cstdint>

#include "trafficast/series.hpp"

namespace trafficast {

/// Shape of a generated traffic-like day: a base level, a full-day sinusoid,
/// two rush-hour bumps (mean-centred so the long-run mean stays at `base`),
/// and white noise. All amplitudes must be non-negative.
struct SyntheticProfile {
    double base = 180.0;
    double daily_amplitude = 90.0;
    double peak_amplitude = 110.0;
    double noise_sigma = 12.0;

    static SyntheticProfile speed_like() { return {62.0, 6.0, 9.0, 1.6}; }
    static SyntheticProfile flow_like() { return {180.0, 90.0, 110.0, 12.0}; }
};

/// Deterministic series of days*288 samples, fully determined by
/// (days, seed, profile). Values are clamped at zero.
TrafficSeries generate_synthetic(std::size_t days, std::uint64_t seed,
                                 const SyntheticProfile& profile,
                                 Quantity quantity = Quantity::flow);

} // namespace trafficast
