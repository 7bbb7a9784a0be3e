#include "trafficast/report/tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "trafficast/errors.hpp"

namespace trafficast::report {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::string sanitize(const std::string& text) {
    std::string out = text;
    for (char& ch : out) {
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    }
    return out;
}

struct Row {
    const sweep::CellResult* cell;
    bool raw_units;
    bool train_split;
};

const MetricTriple& triple_of(const Row& row) {
    if (row.train_split) return row.raw_units ? row.cell->train_raw : row.cell->train_normalized;
    return row.raw_units ? row.cell->test_raw : row.cell->test_normalized;
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (const char ch : line) {
        if (ch == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell.push_back(ch);
        }
    }
    out.push_back(cell);
    return out;
}

} // namespace

std::string emit_metrics_csv(const sweep::SweepResult& result, TimingPolicy timing) {
    std::vector<const sweep::CellResult*> cells;
    cells.reserve(result.cells.size());
    for (const auto& cell : result.cells) cells.push_back(&cell);
    std::sort(cells.begin(), cells.end(),
              [](const sweep::CellResult* a, const sweep::CellResult* b) {
                  return std::tie(a->task.model_id, a->task.quantity, a->task.window) <
                         std::tie(b->task.model_id, b->task.quantity, b->task.window);
              });

    std::string out = "model,quantity,window,unit_system,split,rmse,mae,r2,seconds,status\n";
    for (const auto* cell : cells) {
        for (const bool raw_units : {false, true}) {
            for (const bool train_split : {false, true}) {  // "test" < "train"
                const Row row{cell, raw_units, train_split};
                out += cell->task.model_id;
                out += ',';
                out += to_string(cell->task.quantity);
                out += ',';
                out += std::to_string(cell->task.window);
                out += ',';
                out += raw_units ? "raw" : "normalized";
                out += ',';
                out += train_split ? "train" : "test";
                out += ',';
                if (!cell->ok()) {
                    out += "nan,nan,nan,";
                    out += format_double(0.0);
                    out += ',';
                    out += sanitize(cell->status);
                } else {
                    const MetricTriple& t = triple_of(row);
                    out += format_double(t.rmse);
                    out += ',';
                    out += format_double(t.mae);
                    out += ',';
                    out += t.r_squared_defined ? format_double(t.r_squared) : "nan";
                    out += ',';
                    out += format_double(timing == TimingPolicy::actual ? cell->seconds : 0.0);
                    out += ',';
                    out += t.r_squared_defined ? "ok" : "r2_undefined";
                }
                out += '\n';
            }
        }
    }
    return out;
}

sweep::SweepResult parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw EmptyInput("metrics CSV is empty");
    if (line.rfind("model,quantity,window", 0) != 0) {
        throw Error("metrics CSV header not recognized");
    }

    std::map<std::tuple<std::string, std::string, std::size_t>, sweep::CellResult> cells;
    std::vector<std::tuple<std::string, std::string, std::size_t>> order;
    std::size_t line_index = 1;
    while (std::getline(in, line)) {
        ++line_index;
        if (line.empty()) continue;
        const auto parts = split_cells(line);
        if (parts.size() != 10) throw MalformedRow(line_index, "expected 10 columns");

        const std::string& model = parts[0];
        const std::string& quantity = parts[1];
        const std::size_t window = static_cast<std::size_t>(std::stoul(parts[2]));
        const bool raw_units = parts[3] == "raw";
        const bool train_split = parts[4] == "train";

        const auto key = std::make_tuple(model, quantity, window);
        if (cells.find(key) == cells.end()) {
            order.push_back(key);
            sweep::CellResult cell;
            cell.task.model_id = model;
            cell.task.quantity = quantity_from_string(quantity);
            cell.task.window = window;
            cells[key] = cell;
        }
        sweep::CellResult& cell = cells[key];
        cell.seconds = std::max(cell.seconds, std::strtod(parts[8].c_str(), nullptr));

        const std::string& status = parts[9];
        if (status.rfind("failed:", 0) == 0) {
            cell.status = status;
            continue;
        }
        MetricTriple triple;
        triple.rmse = std::strtod(parts[5].c_str(), nullptr);
        triple.mae = std::strtod(parts[6].c_str(), nullptr);
        triple.r_squared = std::strtod(parts[7].c_str(), nullptr);
        triple.r_squared_defined = status != "r2_undefined";
        if (!triple.r_squared_defined) triple.r_squared = std::numeric_limits<double>::quiet_NaN();
        if (train_split) {
            (raw_units ? cell.train_raw : cell.train_normalized) = triple;
        } else {
            (raw_units ? cell.test_raw : cell.test_normalized) = triple;
        }
        cell.status = "ok";
    }

    sweep::SweepResult result;
    for (const auto& key : order) result.cells.push_back(cells[key]);
    return result;
}

std::string emit_slope_csv(const std::vector<sweep::SlopeRow>& rows) {
    std::vector<const sweep::SlopeRow*> sorted;
    for (const auto& row : rows) sorted.push_back(&row);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        return std::tie(a->model, a->quantity, a->metric, a->target_split) <
               std::tie(b->model, b->quantity, b->metric, b->target_split);
    });

    std::string out = "model,quantity,metric,target_split,m,c,fit_r2,excluded\n";
    for (const auto* row : sorted) {
        out += row->model;
        out += ',';
        out += to_string(row->quantity);
        out += ',';
        out += row->metric;
        out += ',';
        out += row->target_split;
        out += ',';
        if (row->defined) {
            out += format_double(row->fit.m);
            out += ',';
            out += format_double(row->fit.c);
            out += ',';
            out += format_double(row->fit.fit_r_squared);
        } else {
            out += "nan,nan,nan";
        }
        out += ',';
        out += std::to_string(row->fit.excluded_points);
        out += '\n';
    }
    return out;
}

} // namespace trafficast::report
