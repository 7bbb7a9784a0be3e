#include "trafficast/synthetic.hpp"

#include <cmath>

#include "trafficast/errors.hpp"
#include "trafficast/rng.hpp"

namespace trafficast {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Rush-hour bumps at 08:00 and 17:30 as fractions of the day.
constexpr double kMorningCenter = 8.0 / 24.0;
constexpr double kMorningWidth = 0.05;
constexpr double kEveningCenter = 17.5 / 24.0;
constexpr double kEveningWidth = 0.06;
constexpr double kEveningScale = 0.9;

double bump(double u, double center, double width) {
    const double z = (u - center) / width;
    return std::exp(-0.5 * z * z);
}

// Mean of the combined bump shape over one day, subtracted so the bumps do
// not shift the series mean.
double bump_mean() {
    double sum = 0.0;
    for (std::size_t k = 0; k < kSamplesPerDay; ++k) {
        const double u = static_cast<double>(k) / static_cast<double>(kSamplesPerDay);
        sum += bump(u, kMorningCenter, kMorningWidth) +
               kEveningScale * bump(u, kEveningCenter, kEveningWidth);
    }
    return sum / static_cast<double>(kSamplesPerDay);
}

} // namespace

TrafficSeries generate_synthetic(std::size_t days, std::uint64_t seed,
                                 const SyntheticProfile& profile, Quantity quantity) {
    if (days == 0) throw InvalidArgument("synthetic series needs at least one day");
    if (profile.daily_amplitude < 0.0 || profile.peak_amplitude < 0.0 ||
        profile.noise_sigma < 0.0) {
        throw InvalidProfile("synthetic profile amplitudes must be non-negative");
    }

    static const double centred_offset = bump_mean();

    RngStream rng(derive_seed(seed, "synthetic"));
    TrafficSeries out;
    out.quantity = quantity;
    out.start_epoch_seconds = default_start_timestamp();
    out.values.resize(days * kSamplesPerDay);
    for (std::size_t t = 0; t < out.values.size(); ++t) {
        const double u =
            static_cast<double>(t % kSamplesPerDay) / static_cast<double>(kSamplesPerDay);
        const double daily = profile.daily_amplitude * std::sin(kTwoPi * (u - 0.25));
        const double peaks =
            profile.peak_amplitude * (bump(u, kMorningCenter, kMorningWidth) +
                                      kEveningScale * bump(u, kEveningCenter, kEveningWidth) -
                                      centred_offset);
        const double noise = profile.noise_sigma > 0.0 ? rng.normal(0.0, profile.noise_sigma) : 0.0;
        out.values[t] = std::max(0.0, profile.base + daily + peaks + noise);
    }
    return out;
}

} // namespace trafficast
