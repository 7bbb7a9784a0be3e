#pragma once

#include <cstdint>

#include "trafficast/matrix.hpp"
#include "trafficast/models/forecaster.hpp"

namespace trafficast::models {

struct MlpFitOptions {
    std::size_t hidden = 10;
    std::size_t max_epochs = 100;
    double initial_lambda = 1e-3;
    double lambda_ceiling = 1e10;
    double sse_tolerance = 1e-10;
};

/// One-hidden-layer perceptron (tanh hidden, linear output) trained with
/// Levenberg-Marquardt: solve (J^T J + lambda I) delta = J^T r, accept the
/// step only when the SSE drops.
class MlpModel final : public Forecaster {
public:
    std::size_t lag() const override { return input_dim_; }
    double predict(std::span<const double> features) const override;

    std::size_t hidden() const { return hidden_; }
    std::size_t param_count() const { return params_.size(); }
    const std::vector<double>& params() const { return params_; }
    std::vector<double>& params() { return params_; }

    /// SSE after each accepted step (strictly decreasing).
    const std::vector<double>& accepted_sse() const { return accepted_sse_; }
    /// Norm of every attempted step, accepted or not.
    const std::vector<double>& step_norms() const { return step_norms_; }
    std::size_t singular_steps() const { return singular_steps_; }

    static MlpModel fit(const Matrix& inputs, std::span<const double> targets,
                        std::uint64_t seed, const MlpFitOptions& options = {});

private:
    friend MlpModel make_mlp_for_test(std::size_t, std::size_t, std::uint64_t);
    MlpModel() = default;

    std::size_t input_dim_ = 0;
    std::size_t hidden_ = 0;
    std::vector<double> params_;  // W1 (hidden x lag), b1, w2, b2
    std::vector<double> accepted_sse_;
    std::vector<double> step_norms_;
    std::size_t singular_steps_ = 0;
};

MlpModel fit_mlp(const Matrix& inputs, std::span<const double> targets, std::uint64_t seed);

/// Freshly initialized network without training (gradient-check support).
MlpModel make_mlp_for_test(std::size_t input_dim, std::size_t hidden, std::uint64_t seed);

/// Mean-squared-error gradient of an MLP at its current parameters.
std::vector<double> mlp_loss_gradient(const MlpModel& model, const Matrix& inputs,
                                      std::span<const double> targets);

} // namespace trafficast::models
