#include "trafficast/series.hpp"

#include <cmath>
#include <cstdio>

#include "trafficast/errors.hpp"

namespace trafficast {

std::string to_string(Quantity q) {
    return q == Quantity::speed ? "speed" : "flow";
}

Quantity quantity_from_string(const std::string& name) {
    if (name == "speed") return Quantity::speed;
    if (name == "flow") return Quantity::flow;
    throw InvalidArgument("unknown quantity '" + name + "' (expected speed or flow)");
}

void TrafficSeries::validate() const {
    if (values.empty()) throw EmptyInput("traffic series has no samples");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw NonFiniteError("traffic series sample " + std::to_string(i) + " is not finite");
        }
        if (values[i] < 0.0) {
            throw InvalidArgument("traffic series sample " + std::to_string(i) + " is negative");
        }
    }
}

SplitSpec::SplitSpec(double train, double validation, double test)
    : train_fraction(train), validation_fraction(validation), test_fraction(test) {
    if (train <= 0.0 || validation <= 0.0 || test <= 0.0) {
        throw InvalidArgument("split fractions must be positive");
    }
    if (std::abs(train + validation + test - 1.0) > 1e-12) {
        throw InvalidArgument("split fractions must sum to 1");
    }
}

std::tuple<TrafficSeries, TrafficSeries, TrafficSeries> split_series(const TrafficSeries& series,
                                                                     const SplitSpec& spec) {
    const std::size_t n = series.size();
    if (n < 10) throw TooShort("split requires at least 10 samples, got " + std::to_string(n));

    const auto n_train =
        static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
    const auto n_valid =
        static_cast<std::size_t>(std::floor(spec.validation_fraction * static_cast<double>(n)));

    auto segment = [&](std::size_t begin, std::size_t end) {
        TrafficSeries out;
        out.quantity = series.quantity;
        out.start_epoch_seconds =
            series.start_epoch_seconds + static_cast<std::int64_t>(begin) * kSampleSeconds;
        out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(begin),
                          series.values.begin() + static_cast<std::ptrdiff_t>(end));
        return out;
    };
    return {segment(0, n_train), segment(n_train, n_train + n_valid),
            segment(n_train + n_valid, n)};
}

NormalizationParams fit_minmax(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("cannot fit normalization on an empty series");
    double lo = values[0];
    double hi = values[0];
    for (const double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
        throw DegenerateRange("series is constant; min/max normalization undefined");
    }
    return {lo, hi};
}

std::vector<double> apply_normalization(std::span<const double> values,
                                        const NormalizationParams& params) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = params.apply(values[i]);
    return out;
}

std::vector<double> invert_normalization(std::span<const double> values,
                                         const NormalizationParams& params) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = params.invert(values[i]);
    return out;
}

std::pair<TrafficSeries, NormalizationParams> minmax_normalize(const TrafficSeries& series) {
    const NormalizationParams params = fit_minmax(series.values);
    TrafficSeries out = series;
    out.values = apply_normalization(series.values, params);
    return {std::move(out), params};
}

namespace {

// Civil-calendar conversion (proleptic Gregorian), days since 1970-01-01.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

} // namespace

std::string format_timestamp(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    std::int64_t year = 0;
    unsigned month = 0;
    unsigned day = 0;
    civil_from_days(days, year, month, day);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u %02lld:%02lld:%02lld",
                  static_cast<long long>(year), month, day, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
    return buf;
}

std::int64_t parse_timestamp(const std::string& text) {
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    const int got = std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%d", &year, &month, &day, &hour,
                                &minute, &second);
    if (got < 5) throw InvalidArgument("unparseable timestamp '" + text + "'");
    return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400 +
           hour * 3600 + minute * 60 + second;
}

std::int64_t default_start_timestamp() {
    return days_from_civil(2024, 1, 1) * 86400;
}

} // namespace trafficast
