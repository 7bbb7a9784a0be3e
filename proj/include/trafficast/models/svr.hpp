#pragma once

#include <string>

#include "trafficast/matrix.hpp"
#include "trafficast/models/forecaster.hpp"

namespace trafficast::models {

struct SvrFitOptions {
    double kkt_tolerance = 1e-3;
    std::size_t max_pair_updates_per_row = 10;  // budget = 10 * n pair steps
};

/// Epsilon-insensitive support vector regression with an RBF kernel,
/// f(x) = sum_i coeff_i * exp(-gamma * |x - x_i|^2) + bias,
/// trained by pairwise coordinate optimization of the dual (SMO-style) with
/// deterministic most-violating-pair selection.
class SvrModel final : public Forecaster {
public:
    std::size_t lag() const override { return support_inputs_.cols(); }
    double predict(std::span<const double> features) const override;

    const Matrix& support_inputs() const { return support_inputs_; }
    const std::vector<double>& dual_coefficients() const { return coefficients_; }
    std::size_t support_vector_count() const;
    double bias() const { return bias_; }
    double gamma() const { return gamma_; }
    double cost() const { return cost_; }
    double epsilon_tube() const { return epsilon_; }
    bool converged() const { return converged_; }
    const std::string& warning() const { return warning_; }

    static SvrModel fit(const Matrix& inputs, std::span<const double> targets, double cost,
                        double epsilon_tube, double gamma, const SvrFitOptions& options = {});

private:
    Matrix support_inputs_;
    std::vector<double> coefficients_;  // alpha_i - alpha_i^*
    double bias_ = 0.0;
    double gamma_ = 1.0;
    double cost_ = 1.0;
    double epsilon_ = 0.0;
    bool converged_ = true;
    std::string warning_;
};

SvrModel fit_svr(const Matrix& inputs, std::span<const double> targets, double cost,
                 double epsilon_tube, double gamma);

} // namespace trafficast::models
