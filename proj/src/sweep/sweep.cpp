#include "trafficast/sweep/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "trafficast/errors.hpp"

namespace trafficast::sweep {

using models::DataUnits;
using models::FitInputs;
using models::FittedModel;
using models::ModelInfo;
using models::ModelKind;

std::uint64_t task_seed(std::uint64_t master_seed, const std::string& model_id,
                        Quantity quantity, std::size_t window) {
    std::uint64_t seed = derive_seed(master_seed, model_id);
    seed = derive_seed(seed, to_string(quantity));
    return derive_seed(seed, static_cast<std::uint64_t>(window));
}

std::uint64_t series_checksum(std::span<const double> values) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const double v : values) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (bits >> (8 * byte)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

const CellResult* SweepResult::find(const std::string& model, Quantity q,
                                    std::size_t window) const {
    for (const auto& cell : cells) {
        if (cell.task.model_id == model && cell.task.quantity == q && cell.task.window == window) {
            return &cell;
        }
    }
    return nullptr;
}

std::size_t SweepResult::failed_count() const {
    std::size_t count = 0;
    for (const auto& cell : cells) count += cell.ok() ? 0 : 1;
    return count;
}

namespace {

struct QuantityData {
    Quantity quantity = Quantity::speed;
    std::vector<double> raw_full;
    std::size_t valid_begin = 0;
    std::size_t test_begin = 0;
    NormalizationParams norm;
    std::vector<double> norm_full;

    std::span<const double> raw_segment(bool test) const {
        return test ? std::span<const double>(raw_full).subspan(test_begin)
                    : std::span<const double>(raw_full).subspan(0, valid_begin);
    }
    std::span<const double> norm_segment(bool test) const {
        return test ? std::span<const double>(norm_full).subspan(test_begin)
                    : std::span<const double>(norm_full).subspan(0, valid_begin);
    }
    std::span<const double> segment(DataUnits units, bool test) const {
        return units == DataUnits::raw ? raw_segment(test) : norm_segment(test);
    }
    std::span<const double> validation_segment(DataUnits units) const {
        const auto& full = units == DataUnits::raw ? raw_full : norm_full;
        return std::span<const double>(full).subspan(valid_begin, test_begin - valid_begin);
    }
};

QuantityData prepare_quantity(const TrafficSeries& series, const SplitSpec& spec) {
    series.validate();
    QuantityData data;
    data.quantity = series.quantity;
    data.raw_full = series.values;
    const std::size_t n = data.raw_full.size();
    if (n < 10) throw TooShort("series too short to split");
    const auto n_train = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(n)));
    const auto n_valid = static_cast<std::size_t>(
        std::floor(spec.validation_fraction * static_cast<double>(n)));
    data.valid_begin = n_train;
    data.test_begin = n_train + n_valid;
    data.norm = fit_minmax(std::span<const double>(data.raw_full).subspan(0, n_train));
    data.norm_full = apply_normalization(data.raw_full, data.norm);
    return data;
}

// One scheduling unit: a fitted model evaluated over a list of windows.
// Direct-strategy window models refit per window (one unit per window);
// recursive and sequential models fit once per (model, quantity).
struct WorkUnit {
    const ModelInfo* info = nullptr;
    const QuantityData* data = nullptr;
    std::vector<std::size_t> windows;
    std::vector<std::size_t> cell_indices;
    std::uint64_t fit_seed = 0;
    std::size_t fit_window = 1;  // horizon the fit targets (direct only)
};

void eval_windowed(const models::Forecaster& model, std::span<const double> segment,
                   std::size_t lag, std::size_t window, Strategy strategy,
                   std::vector<double>& truth, std::vector<double>& predicted) {
    truth.clear();
    predicted.clear();
    if (segment.size() <= lag + window) {
        throw TooShort("segment of " + std::to_string(segment.size()) +
                       " samples cannot evaluate lag " + std::to_string(lag) + " at window " +
                       std::to_string(window));
    }
    std::vector<double> buffer(lag);
    for (std::size_t origin = lag - 1; origin + window < segment.size(); ++origin) {
        std::copy(segment.begin() + static_cast<std::ptrdiff_t>(origin - lag + 1),
                  segment.begin() + static_cast<std::ptrdiff_t>(origin + 1), buffer.begin());
        double value = 0.0;
        if (strategy == Strategy::direct) {
            value = model.predict(buffer);
        } else {
            for (std::size_t step = 0; step < window; ++step) {
                value = model.predict(buffer);
                if (lag > 1) {
                    std::rotate(buffer.begin(), buffer.begin() + 1, buffer.end());
                }
                buffer.back() = value;
            }
        }
        truth.push_back(segment[origin + window]);
        predicted.push_back(value);
    }
}

void eval_sequential(const models::SequentialForecaster& model, const QuantityData& data,
                     std::size_t window, bool test, std::vector<double>& truth,
                     std::vector<double>& predicted) {
    // Rolling forecasts over the whole series; scored where the target index
    // falls inside the segment. Only past observations feed each forecast.
    const auto forecasts = model.rolling_forecast(data.raw_full, window);
    const std::size_t begin = test ? data.test_begin : 0;
    const std::size_t end = test ? data.raw_full.size() : data.valid_begin;
    truth.clear();
    predicted.clear();
    for (std::size_t t = begin; t < end; ++t) {
        if (std::isnan(forecasts[t])) continue;
        truth.push_back(data.raw_full[t]);
        predicted.push_back(forecasts[t]);
    }
    if (truth.empty()) throw TooShort("no valid forecast origins in segment");
}

struct UnitMetrics {
    MetricTriple normalized;
    MetricTriple raw;
};

UnitMetrics score(std::span<const double> truth, std::span<const double> predicted,
                  DataUnits units, const NormalizationParams& norm) {
    UnitMetrics out;
    if (units == DataUnits::raw) {
        out.raw = compute_metrics(truth, predicted);
        out.normalized = compute_metrics(apply_normalization(truth, norm),
                                         apply_normalization(predicted, norm));
    } else {
        out.normalized = compute_metrics(truth, predicted);
        out.raw = compute_metrics(invert_normalization(truth, norm),
                                  invert_normalization(predicted, norm));
    }
    return out;
}

void run_unit(const WorkUnit& unit, const SweepConfig& config, std::vector<CellResult>& cells) {
    const ModelInfo& info = *unit.info;
    const QuantityData& data = *unit.data;
    const auto t0 = std::chrono::steady_clock::now();

    FittedModel fitted;
    std::string fit_error;
    SupervisedSet train_set, validation_set;
    try {
        FitInputs in;
        in.seed = unit.fit_seed;
        in.profile = config.profile;
        if (info.kind == ModelKind::sequential) {
            in.train_series = std::span<const double>(data.raw_full).subspan(0, data.valid_begin);
        } else {
            const std::size_t horizon =
                config.strategy == Strategy::direct ? unit.fit_window : 1;
            train_set = make_supervised(data.segment(info.units, false), info.lag, horizon,
                                        config.strategy, data.norm);
            try {
                validation_set = make_supervised(data.validation_segment(info.units), info.lag,
                                                 horizon, config.strategy, data.norm);
            } catch (const TooShort&) {
                validation_set = SupervisedSet{};
            }
            in.train = &train_set;
            in.validation = &validation_set;
        }
        fitted = info.fit(in);
    } catch (const std::exception& e) {
        fit_error = e.what();
    }
    const double fit_seconds = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0).count();
    const double fit_share = fit_seconds / static_cast<double>(unit.windows.size());

    std::vector<double> truth, predicted;
    for (std::size_t k = 0; k < unit.windows.size(); ++k) {
        CellResult& cell = cells[unit.cell_indices[k]];
        const std::size_t window = unit.windows[k];
        const auto e0 = std::chrono::steady_clock::now();
        if (!fit_error.empty()) {
            cell.status = "failed:" + fit_error;
            continue;
        }
        try {
            UnitMetrics train_metrics, test_metrics;
            if (info.kind == ModelKind::sequential) {
                eval_sequential(*fitted.sequential_model, data, window, false, truth, predicted);
                train_metrics = score(truth, predicted, DataUnits::raw, data.norm);
                eval_sequential(*fitted.sequential_model, data, window, true, truth, predicted);
                test_metrics = score(truth, predicted, DataUnits::raw, data.norm);
            } else {
                eval_windowed(*fitted.window_model, data.segment(info.units, false), info.lag,
                              window, config.strategy, truth, predicted);
                train_metrics = score(truth, predicted, info.units, data.norm);
                eval_windowed(*fitted.window_model, data.segment(info.units, true), info.lag,
                              window, config.strategy, truth, predicted);
                test_metrics = score(truth, predicted, info.units, data.norm);
            }
            cell.train_normalized = train_metrics.normalized;
            cell.train_raw = train_metrics.raw;
            cell.test_normalized = test_metrics.normalized;
            cell.test_raw = test_metrics.raw;
            cell.warning = fitted.warning;
            cell.status = "ok";
        } catch (const std::exception& e) {
            cell.status = std::string("failed:") + e.what();
        }
        cell.seconds = fit_share + std::chrono::duration<double>(
                                       std::chrono::steady_clock::now() - e0).count();
    }
}

} // namespace

SweepResult run_sweep(const SweepData& data, const SweepConfig& config) {
    if (config.min_window == 0 || config.max_window < config.min_window) {
        throw InvalidArgument("invalid window range");
    }
    if (data.speed.quantity != Quantity::speed || data.flow.quantity != Quantity::flow) {
        throw InvalidArgument("sweep inputs must be one speed series and one flow series");
    }

    std::vector<std::string> ids = config.models;
    if (ids.empty()) ids = models::all_model_ids();
    std::vector<const ModelInfo*> infos;
    for (const auto& id : ids) {
        const ModelInfo* info = models::find_model(id);
        if (info == nullptr) throw InvalidArgument("unknown model id '" + id + "'");
        infos.push_back(info);
    }

    const QuantityData speed_data = prepare_quantity(data.speed, data.split);
    const QuantityData flow_data = prepare_quantity(data.flow, data.split);
    const QuantityData* quantities[2] = {&speed_data, &flow_data};

    SweepResult result;
    result.config = config;
    result.config.models = ids;
    result.speed_summary = {speed_data.raw_full.size(), series_checksum(speed_data.raw_full),
                            speed_data.norm};
    result.flow_summary = {flow_data.raw_full.size(), series_checksum(flow_data.raw_full),
                           flow_data.norm};

    // Complete grid in deterministic order.
    std::vector<WorkUnit> units;
    for (const ModelInfo* info : infos) {
        for (const QuantityData* qd : quantities) {
            const bool fit_once =
                info->kind == ModelKind::sequential || config.strategy == Strategy::recursive;
            WorkUnit* unit = nullptr;
            for (std::size_t window = config.min_window; window <= config.max_window; ++window) {
                CellResult cell;
                cell.task = {info->id, qd->quantity, window, config.strategy,
                             task_seed(config.master_seed, info->id, qd->quantity, window)};
                cell.status = "failed:not run";
                result.cells.push_back(cell);
                const std::size_t cell_index = result.cells.size() - 1;

                if (unit == nullptr || !fit_once) {
                    units.push_back({});
                    unit = &units.back();
                    unit->info = info;
                    unit->data = qd;
                    unit->fit_window = window;
                    unit->fit_seed =
                        task_seed(config.master_seed, info->id, qd->quantity,
                                  fit_once ? config.min_window : window);
                }
                unit->windows.push_back(window);
                unit->cell_indices.push_back(cell_index);
            }
        }
    }

    const std::size_t workers = std::max<std::size_t>(1, config.workers);
    if (workers == 1 || units.size() <= 1) {
        for (const auto& unit : units) run_unit(unit, config, result.cells);
    } else {
        std::atomic<std::size_t> cursor{0};
        auto drain = [&] {
            while (true) {
                const std::size_t u = cursor.fetch_add(1);
                if (u >= units.size()) break;
                run_unit(units[u], config, result.cells);
            }
        };
        std::vector<std::thread> pool;
        const std::size_t spawn = std::min(workers, units.size());
        pool.reserve(spawn);
        for (std::size_t w = 0; w < spawn; ++w) pool.emplace_back(drain);
        for (auto& t : pool) t.join();
    }
    return result;
}

} // namespace trafficast::sweep
