#include "trafficast/models/arima.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "trafficast/errors.hpp"
#include "trafficast/linalg.hpp"
#include "trafficast/matrix.hpp"
#include "trafficast/optim.hpp"
#include "trafficast/supervised.hpp"

namespace trafficast::models {

namespace {

std::vector<double> difference(std::span<const double> x, std::size_t d) {
    std::vector<double> w(x.begin(), x.end());
    for (std::size_t round = 0; round < d; ++round) {
        for (std::size_t i = w.size(); i-- > 1;) w[i] -= w[i - 1];
        w.erase(w.begin());
    }
    return w;
}

// Conditional one-step residuals of an ARMA(p,q) with intercept; entries
// before index p use zero for unavailable terms.
void arma_residuals(std::span<const double> w, std::span<const double> ar,
                    std::span<const double> ma, double intercept, std::vector<double>& e) {
    const std::size_t p = ar.size();
    const std::size_t q = ma.size();
    e.assign(w.size(), 0.0);
    for (std::size_t t = p; t < w.size(); ++t) {
        double pred = intercept;
        for (std::size_t i = 0; i < p; ++i) pred += ar[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) {
            if (t >= j + 1) pred += ma[j] * e[t - 1 - j];
        }
        e[t] = w[t] - pred;
    }
}

double css_objective(std::span<const double> w, std::span<const double> params, std::size_t p,
                     std::size_t q, std::vector<double>& scratch) {
    const double intercept = params[0];
    const std::span<const double> ar = params.subspan(1, p);
    const std::span<const double> ma = params.subspan(1 + p, q);
    arma_residuals(w, ar, ma, intercept, scratch);
    double ss = 0.0;
    for (std::size_t t = p; t < scratch.size(); ++t) ss += scratch[t] * scratch[t];
    return std::isfinite(ss) ? ss : 1e300;
}

// Inverse characteristic roots of 1 - a1 B - a2 B^2 (or 1 + b1 B + b2 B^2
// when `ma_sign` flips the coefficients); stationarity/invertibility means
// every inverse root lies strictly inside the unit circle. Offending roots
// are reflected (r -> 1/conj(r)).
std::vector<double> reflect_degree2(std::span<const double> coeffs, bool ma_sign, bool& changed) {
    std::vector<double> out(coeffs.begin(), coeffs.end());
    if (out.empty()) return out;
    const double sign = ma_sign ? -1.0 : 1.0;
    const double a1 = sign * out[0];
    const double a2 = out.size() > 1 ? sign * out[1] : 0.0;

    auto reflect = [&changed](std::complex<double> r) {
        const double mag = std::abs(r);
        if (mag >= 1.0 - 1e-9) {
            changed = true;
            r = std::conj(r) / (mag * mag);
            r *= (1.0 - 1e-6);
        }
        return r;
    };

    std::complex<double> r1, r2;
    if (out.size() == 1 || a2 == 0.0) {
        r1 = reflect(std::complex<double>(a1, 0.0));
        out[0] = sign * r1.real();
        if (out.size() > 1) out[1] = 0.0;
        return out;
    }
    // Inverse roots solve r^2 - a1 r - a2 = 0.
    const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 + 4.0 * a2, 0.0));
    r1 = reflect((std::complex<double>(a1, 0.0) + disc) / 2.0);
    r2 = reflect((std::complex<double>(a1, 0.0) - disc) / 2.0);
    out[0] = sign * (r1 + r2).real();
    out[1] = sign * (-(r1 * r2)).real();
    return out;
}

} // namespace

ArimaModel fit_arima(std::span<const double> train, ArimaOrders orders, ArimaFitOptions options) {
    if (train.size() < 50) {
        throw TooShort("ARIMA fit needs at least 50 samples, got " + std::to_string(train.size()));
    }
    if (orders.p > 2 || orders.q > 2 || orders.d > 1) {
        throw InvalidArgument("ARIMA orders are limited to p,q <= 2 and d <= 1");
    }
    for (const double v : train) {
        if (!std::isfinite(v)) throw NonFiniteError("ARIMA fit: non-finite sample");
    }

    const std::vector<double> w = difference(train, orders.d);
    const std::size_t p = orders.p;
    const std::size_t q = orders.q;

    // Hannan-Rissanen start: a long autoregression supplies residual
    // estimates, then one least-squares pass on lagged values and lagged
    // residuals initializes every coefficient at once. This keeps the
    // simplex polish out of the AR/MA cancellation valley.
    std::vector<double> params(1 + p + q, 0.0);
    const std::size_t long_order = std::min<std::size_t>(20, w.size() / 10);
    if (p + q > 0 && long_order >= 1 && w.size() > 3 * (long_order + p + q)) {
        Matrix long_design(w.size() - long_order, long_order + 1);
        std::vector<double> long_targets(w.size() - long_order);
        for (std::size_t t = long_order; t < w.size(); ++t) {
            long_design.at(t - long_order, 0) = 1.0;
            for (std::size_t i = 0; i < long_order; ++i) {
                long_design.at(t - long_order, i + 1) = w[t - 1 - i];
            }
            long_targets[t - long_order] = w[t];
        }
        const auto long_coeffs = ols_fit(long_design, long_targets);
        std::vector<double> resid(w.size(), 0.0);
        for (std::size_t t = long_order; t < w.size(); ++t) {
            double pred = long_coeffs[0];
            for (std::size_t i = 0; i < long_order; ++i) pred += long_coeffs[i + 1] * w[t - 1 - i];
            resid[t] = w[t] - pred;
        }

        const std::size_t start = long_order + std::max(p, q);
        Matrix design(w.size() - start, 1 + p + q);
        std::vector<double> targets(w.size() - start);
        for (std::size_t t = start; t < w.size(); ++t) {
            design.at(t - start, 0) = 1.0;
            for (std::size_t i = 0; i < p; ++i) design.at(t - start, 1 + i) = w[t - 1 - i];
            for (std::size_t j = 0; j < q; ++j) design.at(t - start, 1 + p + j) = resid[t - 1 - j];
            targets[t - start] = w[t];
        }
        params = ols_fit(design, targets);
    } else {
        double mean = 0.0;
        for (const double v : w) mean += v;
        params[0] = w.empty() ? 0.0 : mean / static_cast<double>(w.size());
    }

    bool converged = true;
    std::string warning;
    if (p + q > 0) {
        std::vector<double> scratch;
        const auto result = nelder_mead(
            [&](std::span<const double> x) { return css_objective(w, x, p, q, scratch); }, params,
            0.1, options.max_iterations, options.tolerance);
        params = result.x;
        converged = result.converged;
        if (!converged) {
            warning = "conditional-sum-of-squares search hit the iteration budget; "
                      "returning the best parameters found";
        }
    }

    std::vector<double> ar(params.begin() + 1, params.begin() + 1 + static_cast<long>(p));
    std::vector<double> ma(params.begin() + 1 + static_cast<long>(p), params.end());
    bool reflected = false;
    ar = reflect_degree2(ar, false, reflected);
    ma = reflect_degree2(ma, true, reflected);
    if (reflected && warning.empty()) {
        warning = "polynomial roots reflected inside the unit circle";
    }
    return {orders, std::move(ar), std::move(ma), params[0], converged, std::move(warning)};
}

double ArimaModel::forecast(std::span<const double> history, std::size_t horizon) const {
    const std::size_t p = orders_.p;
    const std::size_t q = orders_.q;
    std::vector<double> w = difference(history, orders_.d);
    std::vector<double> e;
    arma_residuals(w, ar_, ma_, intercept_, e);

    double level = history.empty() ? 0.0 : history.back();
    double result = 0.0;
    for (std::size_t step = 1; step <= horizon; ++step) {
        double pred = intercept_;
        for (std::size_t i = 0; i < p; ++i) {
            const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(w.size()) - 1 -
                                       static_cast<std::ptrdiff_t>(i);
            if (idx >= 0) pred += ar_[i] * w[static_cast<std::size_t>(idx)];
        }
        for (std::size_t j = 0; j < q; ++j) {
            const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(e.size()) - 1 -
                                       static_cast<std::ptrdiff_t>(j);
            if (idx >= 0) pred += ma_[j] * e[static_cast<std::size_t>(idx)];
        }
        w.push_back(pred);
        e.push_back(0.0);
        if (orders_.d == 1) {
            level += pred;
            result = level;
        } else {
            result = pred;
        }
    }
    return result;
}

std::vector<double> ArimaModel::rolling_forecast(std::span<const double> series,
                                                 std::size_t horizon) const {
    const std::size_t n = series.size();
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    const std::size_t p = orders_.p;
    const std::size_t q = orders_.q;

    std::vector<double> w = difference(series, orders_.d);
    std::vector<double> e;
    arma_residuals(w, ar_, ma_, intercept_, e);

    // One multi-step forecast per origin, shocks after the origin set to 0.
    std::vector<double> fw(horizon);
    for (std::size_t origin = min_history() - 1; origin < n; ++origin) {
        const std::size_t target = origin + horizon;
        if (target >= n) break;
        const std::size_t wlen = origin + 1 - orders_.d;  // w entries available at the origin

        double level = series[origin];
        double value = 0.0;
        for (std::size_t step = 1; step <= horizon; ++step) {
            double pred = intercept_;
            for (std::size_t i = 0; i < p; ++i) {
                const std::ptrdiff_t k =
                    static_cast<std::ptrdiff_t>(step) - 2 - static_cast<std::ptrdiff_t>(i);
                const double lagged =
                    k >= 0 ? fw[static_cast<std::size_t>(k)]
                           : w[wlen + step - 2 - i];  // in-sample differenced value
                pred += ar_[i] * lagged;
            }
            for (std::size_t j = 0; j < q; ++j) {
                const std::ptrdiff_t k =
                    static_cast<std::ptrdiff_t>(step) - 2 - static_cast<std::ptrdiff_t>(j);
                const double shock = k >= 0 ? 0.0 : e[wlen + step - 2 - j];
                pred += ma_[j] * shock;
            }
            fw[step - 1] = pred;
            if (orders_.d == 1) {
                level += pred;
                value = level;
            } else {
                value = pred;
            }
        }
        out[target] = value;
    }
    return out;
}

} // namespace trafficast::models
