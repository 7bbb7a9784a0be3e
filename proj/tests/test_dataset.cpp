#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "trafficast/errors.hpp"
#include "trafficast/pems.hpp"
#include "trafficast/series.hpp"
#include "trafficast/supervised.hpp"
#include "trafficast/synthetic.hpp"

using namespace trafficast;

namespace {

// Mirrors the station export layout: per-lane columns, then the aggregate
// speed/flow pair, lane-point count and observation share.
const char* kStationSample =
    "Lane 4 Speed,Lane 4 Flow (V,Lane 5 Speed (,Lane 5 Flow (V,Speed (mph),Flow (Veh/5 Mi,"
    "# Lane Points,% Observed\n"
    "67.30,31,62.70,20,70.00,158,5,0.00\n"
    "67.00,30,62.50,20,69.70,154,5,0.00\n"
    "66.90,30,62.40,19,69.60,150,5,0.00\n"
    "66.80,29,62.30,18,69.50,145,5,0.00\n"
    "66.80,27,62.30,18,69.50,138,5,0.00\n"
    "66.70,26,62.20,17,69.40,132,5,0.00\n"
    "66.60,25,62.10,16,69.30,126,5,0.00\n"
    "66.60,24,62.10,15,69.30,121,5,0.00\n";

} // namespace

TEST_CASE("parse_pems_csv extracts the aggregate columns") {
    const auto speed = parse_pems_csv(kStationSample, Quantity::speed);
    const std::vector<double> expected_speed{70.00, 69.70, 69.60, 69.50,
                                             69.50, 69.40, 69.30, 69.30};
    CHECK(speed.values == expected_speed);

    const auto flow = parse_pems_csv(kStationSample, Quantity::flow);
    const std::vector<double> expected_flow{158, 154, 150, 145, 138, 132, 126, 121};
    CHECK(flow.values == expected_flow);
}

TEST_CASE("parse_pems_csv error paths") {
    CHECK_THROWS_AS(parse_pems_csv("Speed (mph),Flow (Veh/5 Mi\n", Quantity::speed), EmptyInput);
    CHECK_THROWS_AS(parse_pems_csv("Speed (mph)\n70.0\n", Quantity::flow), MissingColumn);
    CHECK_THROWS_AS(parse_pems_csv("Speed (mph),Flow (Veh/5 Mi\n70.0,abc\n", Quantity::flow),
                    MalformedRow);
    try {
        parse_pems_csv("Speed (mph)\n70.0\nnot-a-number\n", Quantity::speed);
        FAIL("expected MalformedRow");
    } catch (const MalformedRow& e) {
        CHECK(e.row == 2);
    }
}

TEST_CASE("lane columns are never matched as aggregates") {
    const char* text =
        "Lane 1 Speed (mph),Speed (mph),Flow (Veh/5 Min),Extra\n"
        "11.0,60.0,100,0\n";
    const auto speed = parse_pems_csv(text, Quantity::speed);
    CHECK(speed.values == std::vector<double>{60.0});
}

TEST_CASE("synthetic generator is deterministic") {
    const SyntheticProfile profile{200.0, 100.0, 80.0, 10.0};
    const auto a = generate_synthetic(3, 11, profile);
    const auto b = generate_synthetic(3, 11, profile);
    CHECK(a.values == b.values);
    CHECK(a.values.size() == 3 * kSamplesPerDay);

    const auto c = generate_synthetic(3, 12, profile);
    CHECK(a.values != c.values);
}

TEST_CASE("noiseless synthetic series is exactly daily-periodic") {
    const SyntheticProfile profile{200.0, 100.0, 80.0, 0.0};
    const auto s = generate_synthetic(2, 5, profile);
    for (std::size_t t = 0; t + kSamplesPerDay < s.values.size(); ++t) {
        CHECK(s.values[t] == s.values[t + kSamplesPerDay]);
    }
}

TEST_CASE("noiseless synthetic mean stays near the base level") {
    const SyntheticProfile profile{200.0, 100.0, 80.0, 0.0};
    const auto s = generate_synthetic(7, 1, profile);
    double mean = 0.0;
    for (const double v : s.values) mean += v;
    mean /= static_cast<double>(s.values.size());
    CHECK(mean > 195.0);
    CHECK(mean < 205.0);
}

TEST_CASE("synthetic values are non-negative and profiles validated") {
    const auto s = generate_synthetic(2, 3, SyntheticProfile{5.0, 30.0, 10.0, 20.0});
    for (const double v : s.values) CHECK(v >= 0.0);
    CHECK_THROWS_AS(generate_synthetic(1, 0, SyntheticProfile{10, -1, 0, 0}), InvalidProfile);
}

TEST_CASE("split_series produces the 80/10/10 chronology") {
    TrafficSeries series;
    series.values.resize(100);
    for (std::size_t i = 0; i < 100; ++i) series.values[i] = static_cast<double>(i);
    const auto [train, valid, test] = split_series(series, SplitSpec{});
    CHECK(train.size() == 80);
    CHECK(valid.size() == 10);
    CHECK(test.size() == 10);
    CHECK(train.values.front() == 0.0);
    CHECK(valid.values.front() == 80.0);
    CHECK(test.values.back() == 99.0);

    // Concatenation reproduces the original exactly.
    std::vector<double> joined;
    joined.insert(joined.end(), train.values.begin(), train.values.end());
    joined.insert(joined.end(), valid.values.begin(), valid.values.end());
    joined.insert(joined.end(), test.values.begin(), test.values.end());
    CHECK(joined == series.values);
}

TEST_CASE("split_series minimum size and fraction validation") {
    TrafficSeries series;
    series.values.assign(10, 1.0);
    const auto [train, valid, test] = split_series(series, SplitSpec{});
    CHECK(train.size() == 8);
    CHECK(valid.size() == 1);
    CHECK(test.size() == 1);

    series.values.assign(9, 1.0);
    CHECK_THROWS_AS(split_series(series, SplitSpec{}), TooShort);
    CHECK_THROWS_AS(SplitSpec(0.5, 0.5, 0.5), InvalidArgument);
}

TEST_CASE("minmax normalization and its inverse") {
    TrafficSeries series;
    series.values = {0.0, 5.0, 10.0};
    const auto [normed, params] = minmax_normalize(series);
    CHECK(params.min == 0.0);
    CHECK(params.max == 10.0);
    CHECK(normed.values == std::vector<double>{0.0, 0.5, 1.0});

    series.values = {3.1, 99.7, 42.0, 17.3, 55.5};
    const auto [n2, p2] = minmax_normalize(series);
    const auto restored = invert_normalization(n2.values, p2);
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        CHECK(std::abs(restored[i] - series.values[i]) <= 1e-12);
    }

    series.values = {7.0, 7.0, 7.0};
    CHECK_THROWS_AS(minmax_normalize(series), DegenerateRange);
}

TEST_CASE("make_supervised direct windows") {
    std::vector<double> series(10);
    for (std::size_t i = 0; i < 10; ++i) series[i] = static_cast<double>(i + 1);

    const auto h1 = make_supervised(series, 3, 1, Strategy::direct);
    CHECK(h1.size() == 7);
    CHECK(h1.inputs.row(0)[0] == 1.0);
    CHECK(h1.inputs.row(0)[2] == 3.0);
    CHECK(h1.targets[0] == 4.0);

    const auto h2 = make_supervised(series, 3, 2, Strategy::direct);
    CHECK(h2.size() == 6);
    CHECK(h2.targets[0] == 5.0);

    CHECK_THROWS_AS(make_supervised(std::vector<double>(10, 1.0), 10, 1, Strategy::direct),
                    TooShort);
}

TEST_CASE("make_supervised recursive always targets one step ahead") {
    std::vector<double> series(12);
    for (std::size_t i = 0; i < 12; ++i) series[i] = static_cast<double>(i);
    const auto set = make_supervised(series, 4, 7, Strategy::recursive);
    CHECK(set.horizon == 7);
    CHECK(set.size() == 12 - 4 - 1 + 1);
    CHECK(set.targets[0] == 4.0);
}

TEST_CASE("canonical csv round trip") {
    TrafficSeries series;
    series.quantity = Quantity::flow;
    series.start_epoch_seconds = default_start_timestamp();
    series.values = {158, 154, 150.25, 145};
    const std::string text = to_canonical_csv(series);
    CHECK(text.rfind("timestamp,value\n", 0) == 0);
    const auto parsed = parse_canonical_csv(text, Quantity::flow);
    CHECK(parsed.values == series.values);
    CHECK(parsed.start_epoch_seconds == series.start_epoch_seconds);
    CHECK(to_canonical_csv(parsed) == text);
}

TEST_CASE("timestamp formatting round trip") {
    const std::int64_t t0 = default_start_timestamp();
    CHECK(format_timestamp(t0) == "2024-01-01 00:00:00");
    CHECK(parse_timestamp("2024-01-01 00:05:00") == t0 + 300);
    const std::int64_t later = t0 + 86400 * 40 + 3600 * 7 + 60 * 35;
    CHECK(parse_timestamp(format_timestamp(later)) == later);
}
