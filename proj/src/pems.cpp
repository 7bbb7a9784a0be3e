#include "trafficast/pems.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "trafficast/errors.hpp"

namespace trafficast {

namespace {

constexpr std::string_view kSpeedHeader = "Speed (mph)";
constexpr std::string_view kFlowHeader = "Flow (Veh/5 Mi";

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (const char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(ch);
        }
    }
    cells.push_back(cell);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = end + 1;
    }
    return lines;
}

double parse_cell(const std::string& raw, std::size_t row_index) {
    const std::string cell = trim(raw);
    if (cell.empty()) throw MalformedRow(row_index, "empty cell");
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size()) {
        throw MalformedRow(row_index, "cell '" + cell + "' is not numeric");
    }
    if (!std::isfinite(v)) throw MalformedRow(row_index, "cell '" + cell + "' is not finite");
    return v;
}

} // namespace

TrafficSeries parse_pems_csv(std::string_view text, Quantity quantity) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw EmptyInput("PeMS document has no header row");

    const auto header = split_csv_line(lines[0]);
    const std::string_view wanted = quantity == Quantity::speed ? kSpeedHeader : kFlowHeader;
    std::size_t column = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (trim(header[j]).rfind(wanted, 0) == 0) {
            column = j;
            break;
        }
    }
    if (column == header.size()) {
        throw MissingColumn("aggregate column '" + std::string(wanted) + "' not found in header");
    }

    TrafficSeries out;
    out.quantity = quantity;
    out.start_epoch_seconds = default_start_timestamp();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(std::string(lines[i])).empty()) continue;
        const auto cells = split_csv_line(lines[i]);
        if (column >= cells.size()) throw MalformedRow(i, "missing aggregate cell");
        out.values.push_back(parse_cell(cells[column], i));
    }
    if (out.values.empty()) throw EmptyInput("PeMS document has no data rows");
    return out;
}

std::string to_canonical_csv(const TrafficSeries& series) {
    std::string out = "timestamp,value\n";
    char buf[64];
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const std::int64_t ts =
            series.start_epoch_seconds + static_cast<std::int64_t>(i) * kSampleSeconds;
        std::snprintf(buf, sizeof(buf), "%.17g", series.values[i]);
        out += format_timestamp(ts);
        out += ',';
        out += buf;
        out += '\n';
    }
    return out;
}

TrafficSeries parse_canonical_csv(std::string_view text, Quantity quantity) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw EmptyInput("canonical CSV has no header");
    TrafficSeries out;
    out.quantity = quantity;
    bool first_row = true;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(std::string(lines[i])).empty()) continue;
        const auto cells = split_csv_line(lines[i]);
        if (cells.size() < 2) throw MalformedRow(i, "expected timestamp,value");
        if (first_row) {
            out.start_epoch_seconds = parse_timestamp(trim(cells[0]));
            first_row = false;
        }
        out.values.push_back(parse_cell(cells[1], i));
    }
    if (out.values.empty()) throw EmptyInput("canonical CSV has no data rows");
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

TrafficSeries load_series_csv(const std::string& path, Quantity quantity) {
    const std::string text = read_text_file(path);
    // Canonical files start with the timestamp header; anything else is
    // treated as a PeMS station export.
    if (text.rfind("timestamp,", 0) == 0) return parse_canonical_csv(text, quantity);
    return parse_pems_csv(text, quantity);
}

} // namespace trafficast
