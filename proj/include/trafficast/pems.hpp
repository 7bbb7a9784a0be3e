#pragma once

#include <string>
#include <string_view>

#include "trafficast/series.hpp"

namespace trafficast {

/// Extracts the station-aggregate speed or flow column from a PeMS station
/// CSV export. Header matching is prefix-based ("Speed (mph)" /
/// "Flow (Veh/5 Mi") to tolerate truncated export headers; per-lane columns
/// are ignored.
TrafficSeries parse_pems_csv(std::string_view text, Quantity quantity);

/// Canonical internal form: header `timestamp,value`, one sample per row.
std::string to_canonical_csv(const TrafficSeries& series);
TrafficSeries parse_canonical_csv(std::string_view text, Quantity quantity);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);
TrafficSeries load_series_csv(const std::string& path, Quantity quantity);

} // namespace trafficast
