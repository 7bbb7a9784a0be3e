#include "trafficast/report/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "trafficast/errors.hpp"

namespace trafficast::report {

namespace {

constexpr double kPanelWidth = 320.0;
constexpr double kPanelHeight = 240.0;
constexpr double kMarginLeft = 48.0;
constexpr double kMarginRight = 12.0;
constexpr double kMarginTop = 28.0;
constexpr double kMarginBottom = 32.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Series {
    std::string model;
    std::vector<double> windows;
    std::vector<double> values;  // positive only
    const sweep::SlopeRow* fit = nullptr;
};

double metric_value(const sweep::CellResult& cell, const std::string& metric) {
    const MetricTriple& t = cell.test_normalized;
    if (metric == "rmse") return t.rmse;
    if (metric == "mae") return t.mae;
    if (!t.r_squared_defined || t.r_squared >= 1.0) return 0.0;  // dropped (non-positive)
    return 1.0 - t.r_squared;
}

} // namespace

std::string emit_degradation_svg(const sweep::SweepResult& result,
                                 const std::vector<sweep::SlopeRow>& fits,
                                 const std::vector<std::string>& model_filter) {
    const std::vector<std::string> metrics{"rmse", "mae", "one_minus_r2"};
    const std::vector<std::string> metric_labels{"test RMSE (normalized)",
                                                 "test MAE (normalized)", "test 1-R2"};

    std::set<std::string> wanted(model_filter.begin(), model_filter.end());
    auto selected = [&](const std::string& id) {
        return wanted.empty() || wanted.count(id) > 0;
    };

    // Stable model order and color assignment from the sweep cell order.
    std::vector<std::string> model_order;
    std::set<std::string> seen;
    std::set<std::string> quantity_set;
    for (const auto& cell : result.cells) {
        if (!cell.ok() || !selected(cell.task.model_id)) continue;
        if (seen.insert(cell.task.model_id).second) model_order.push_back(cell.task.model_id);
        quantity_set.insert(to_string(cell.task.quantity));
    }
    if (model_order.empty()) throw NothingToPlot("no model selected for the degradation plot");
    std::vector<std::string> quantities(quantity_set.begin(), quantity_set.end());

    std::map<std::string, std::size_t> color_of;
    for (std::size_t i = 0; i < model_order.size(); ++i) color_of[model_order[i]] = i;

    const double total_width =
        kMarginLeft + (kPanelWidth + kMarginRight) * static_cast<double>(metrics.size());
    const double total_height =
        kMarginTop + (kPanelHeight + kMarginBottom) * static_cast<double>(quantities.size());

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(total_width) +
           "\" height=\"" + num(total_height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t qi = 0; qi < quantities.size(); ++qi) {
        const std::string& quantity = quantities[qi];
        for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
            const std::string& metric = metrics[mi];
            const double x0 = kMarginLeft + (kPanelWidth + kMarginRight) * static_cast<double>(mi);
            const double y0 = kMarginTop + (kPanelHeight + kMarginBottom) * static_cast<double>(qi);

            // Collect per-model positive series for this panel.
            std::vector<Series> series;
            double w_min = 1e300, w_max = -1e300, v_min = 1e300, v_max = -1e300;
            for (const auto& model : model_order) {
                Series s;
                s.model = model;
                for (const auto& cell : result.cells) {
                    if (!cell.ok() || cell.task.model_id != model ||
                        to_string(cell.task.quantity) != quantity) {
                        continue;
                    }
                    const double value = metric_value(cell, metric);
                    if (value <= 0.0 || !std::isfinite(value)) continue;
                    s.windows.push_back(static_cast<double>(cell.task.window));
                    s.values.push_back(value);
                }
                if (s.windows.empty()) continue;
                for (const auto& fit : fits) {
                    if (fit.model == model && to_string(fit.quantity) == quantity &&
                        fit.metric == metric && fit.target_split == "test" && fit.defined) {
                        s.fit = &fit;
                        break;
                    }
                }
                for (std::size_t i = 0; i < s.windows.size(); ++i) {
                    w_min = std::min(w_min, s.windows[i]);
                    w_max = std::max(w_max, s.windows[i]);
                    v_min = std::min(v_min, s.values[i]);
                    v_max = std::max(v_max, s.values[i]);
                }
                series.push_back(std::move(s));
            }
            if (series.empty()) continue;
            if (w_max <= w_min) w_max = w_min + 1.0;
            double ln_lo = std::log(v_min);
            double ln_hi = std::log(v_max);
            if (ln_hi - ln_lo < 1e-9) {
                ln_lo -= 0.5;
                ln_hi += 0.5;
            }
            const double pad = 0.05 * (ln_hi - ln_lo);
            ln_lo -= pad;
            ln_hi += pad;

            auto map_x = [&](double w) {
                return x0 + (w - w_min) / (w_max - w_min) * kPanelWidth;
            };
            auto map_y = [&](double value) {
                const double u = (std::log(value) - ln_lo) / (ln_hi - ln_lo);
                return y0 + kPanelHeight - u * kPanelHeight;
            };

            svg += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" +
                   num(kPanelWidth) + "\" height=\"" + num(kPanelHeight) +
                   "\" fill=\"none\" stroke=\"#888\"/>\n";
            svg += "<text x=\"" + num(x0 + 4.0) + "\" y=\"" + num(y0 - 8.0) + "\">" + quantity +
                   ": " + metric_labels[mi] + "</text>\n";
            svg += "<text x=\"" + num(x0 + kPanelWidth / 2.0) + "\" y=\"" +
                   num(y0 + kPanelHeight + 24.0) + "\" text-anchor=\"middle\">forecasting "
                   "window</text>\n";

            for (const auto& s : series) {
                const char* color = kPalette[color_of[s.model] % 10];
                if (s.fit != nullptr && s.windows.size() >= 2) {
                    const double y_start = s.fit->fit.c + s.fit->fit.m * w_min;
                    const double y_end = s.fit->fit.c + s.fit->fit.m * w_max;
                    svg += "<polyline class=\"fit m-" + s.model + "\" fill=\"none\" stroke=\"" +
                           color + "\" stroke-dasharray=\"4 2\" points=\"" + num(map_x(w_min)) +
                           "," + num(map_y(std::exp(y_start))) + " " + num(map_x(w_max)) + "," +
                           num(map_y(std::exp(y_end))) + "\"/>\n";
                }
                for (std::size_t i = 0; i < s.windows.size(); ++i) {
                    svg += "<circle class=\"pt m-" + s.model + "\" cx=\"" +
                           num(map_x(s.windows[i])) + "\" cy=\"" + num(map_y(s.values[i])) +
                           "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
                }
            }
        }
    }

    // Legend along the top edge.
    double legend_x = kMarginLeft;
    for (const auto& model : model_order) {
        const char* color = kPalette[color_of[model] % 10];
        svg += "<circle cx=\"" + num(legend_x) + "\" cy=\"10\" r=\"3\" fill=\"" + color +
               "\"/><text x=\"" + num(legend_x + 6.0) + "\" y=\"14\">" + model + "</text>\n";
        legend_x += 12.0 + 7.0 * static_cast<double>(model.size());
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace trafficast::report
