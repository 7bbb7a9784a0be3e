#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace trafficast {

/// Bias-corrected Adam state. Moment vectors always match the parameter
/// vector length; step_index counts completed updates.
struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::size_t step_index = 0;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_size(std::size_t n, double learning_rate = 0.001) {
        AdamState s;
        s.first_moment.assign(n, 0.0);
        s.second_moment.assign(n, 0.0);
        s.learning_rate = learning_rate;
        return s;
    }
};

/// In-place Adam update; the workhorse used by the training loops.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

/// Pure-value variant of the same recurrence.
std::pair<std::vector<double>, AdamState> adam_update(std::span<const double> params,
                                                      std::span<const double> grads,
                                                      const AdamState& state);

/// Central-difference gradient: (f(x + eps*e_i) - f(x - eps*e_i)) / (2 eps).
std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double eps);

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimizer. `step` sets the initial simplex spread
/// per coordinate; stops when the simplex objective spread drops below `tol`
/// or after `max_iterations`.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, double step = 0.1,
                             std::size_t max_iterations = 500, double tol = 1e-8);

} // namespace trafficast
