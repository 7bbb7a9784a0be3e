#include "trafficast/optim.hpp"

#include <algorithm>
#include <cmath>

#include "trafficast/errors.hpp"

namespace trafficast {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
    const std::size_t n = params.size();
    if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
        throw DimensionMismatch("adam_step: params, grads and moments must share one length");
    }
    state.step_index += 1;
    const double t = static_cast<double>(state.step_index);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * g;
        state.second_moment[i] = state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.first_moment[i] / bc1;
        const double v_hat = state.second_moment[i] / bc2;
        params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

std::pair<std::vector<double>, AdamState> adam_update(std::span<const double> params,
                                                      std::span<const double> grads,
                                                      const AdamState& state) {
    std::vector<double> next(params.begin(), params.end());
    AdamState next_state = state;
    adam_step(next, grads, next_state);
    return {std::move(next), std::move(next_state)};
}

std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double eps) {
    std::vector<double> probe(x.begin(), x.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double original = probe[i];
        probe[i] = original + eps;
        const double fp = f(probe);
        probe[i] = original - eps;
        const double fm = f(probe);
        probe[i] = original;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NonFiniteError("numeric_gradient: probe evaluated non-finite at coordinate " +
                                 std::to_string(i));
        }
        grad[i] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, double step,
                             std::size_t max_iterations, double tol) {
    const std::size_t n = x0.size();
    auto safe_eval = [&](std::span<const double> x) {
        const double v = f(x);
        return std::isfinite(v) ? v : 1e300;
    };

    std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(x0.begin(), x0.end()));
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += (simplex[i + 1][i] != 0.0 ? step * std::abs(simplex[i + 1][i]) : step);
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = safe_eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    NelderMeadResult result;
    std::vector<double> centroid(n), trial(n), trial2(n);

    for (result.iterations = 0; result.iterations < max_iterations; ++result.iterations) {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order[0];
        const std::size_t worst = order[n];
        const std::size_t second_worst = order[n - 1];

        if (values[worst] - values[best] < tol) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        // Reflection.
        for (std::size_t j = 0; j < n; ++j) trial[j] = centroid[j] + (centroid[j] - simplex[worst][j]);
        double f_trial = safe_eval(trial);
        if (f_trial < values[best]) {
            // Expansion.
            for (std::size_t j = 0; j < n; ++j)
                trial2[j] = centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]);
            const double f_trial2 = safe_eval(trial2);
            if (f_trial2 < f_trial) {
                simplex[worst] = trial2;
                values[worst] = f_trial2;
            } else {
                simplex[worst] = trial;
                values[worst] = f_trial;
            }
            continue;
        }
        if (f_trial < values[second_worst]) {
            simplex[worst] = trial;
            values[worst] = f_trial;
            continue;
        }
        // Contraction (outside if the reflected point improved on the worst).
        if (f_trial < values[worst]) {
            for (std::size_t j = 0; j < n; ++j)
                trial2[j] = centroid[j] + 0.5 * (trial[j] - centroid[j]);
        } else {
            for (std::size_t j = 0; j < n; ++j)
                trial2[j] = centroid[j] + 0.5 * (simplex[worst][j] - centroid[j]);
        }
        const double f_contract = safe_eval(trial2);
        if (f_contract < std::min(f_trial, values[worst])) {
            simplex[worst] = trial2;
            values[worst] = f_contract;
            continue;
        }
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j)
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            values[i] = safe_eval(simplex[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (values[i] < values[best]) best = i;
    }
    result.x = simplex[best];
    result.value = values[best];
    return result;
}

} // namespace trafficast
