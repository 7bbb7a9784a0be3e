#include "trafficast/models/mlp.hpp"

#include <cmath>

#include "trafficast/errors.hpp"
#include "trafficast/linalg.hpp"
#include "trafficast/rng.hpp"

namespace trafficast::models {

namespace {

struct MlpLayout {
    std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
};

MlpLayout layout(std::size_t input_dim, std::size_t hidden) {
    MlpLayout l;
    l.w1 = 0;
    l.b1 = hidden * input_dim;
    l.w2 = l.b1 + hidden;
    l.b2 = l.w2 + hidden;
    l.total = l.b2 + 1;
    return l;
}

double forward(const double* p, const MlpLayout& l, std::size_t input_dim, std::size_t hidden,
               std::span<const double> x, double* activations) {
    double y = p[l.b2];
    for (std::size_t u = 0; u < hidden; ++u) {
        double pre = p[l.b1 + u];
        const double* w = p + l.w1 + u * input_dim;
        for (std::size_t j = 0; j < input_dim; ++j) pre += w[j] * x[j];
        const double a = std::tanh(pre);
        if (activations != nullptr) activations[u] = a;
        y += p[l.w2 + u] * a;
    }
    return y;
}

} // namespace

double MlpModel::predict(std::span<const double> features) const {
    if (features.size() != input_dim_) {
        throw DimensionMismatch("mlp expects " + std::to_string(input_dim_) + " features");
    }
    const MlpLayout l = layout(input_dim_, hidden_);
    return forward(params_.data(), l, input_dim_, hidden_, features, nullptr);
}

MlpModel MlpModel::fit(const Matrix& inputs, std::span<const double> targets, std::uint64_t seed,
                       const MlpFitOptions& options) {
    const std::size_t n = inputs.rows();
    if (n < 20) throw TooShort("mlp fit needs at least 20 rows");
    if (targets.size() != n) throw DimensionMismatch("mlp: target count != rows");

    MlpModel model = make_mlp_for_test(inputs.cols(), options.hidden, seed);
    const std::size_t input_dim = inputs.cols();
    const std::size_t hidden = options.hidden;
    const MlpLayout l = layout(input_dim, hidden);
    const std::size_t np = l.total;

    std::vector<double> activations(hidden);
    Matrix jacobian(n, np);
    std::vector<double> residuals(n);

    auto evaluate_sse = [&](const std::vector<double>& p) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r =
                forward(p.data(), l, input_dim, hidden, inputs.row(i), nullptr) - targets[i];
            sse += r * r;
        }
        return sse;
    };

    double lambda = options.initial_lambda;
    double sse = evaluate_sse(model.params_);
    model.accepted_sse_.push_back(sse);

    for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
        if (lambda > options.lambda_ceiling) break;

        // Jacobian of the residuals at the current parameters.
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = inputs.row(i);
            const double y = forward(model.params_.data(), l, input_dim, hidden, x,
                                     activations.data());
            residuals[i] = y - targets[i];
            double* row = jacobian.row(i).data();
            for (std::size_t u = 0; u < hidden; ++u) {
                const double a = activations[u];
                const double da = model.params_[l.w2 + u] * (1.0 - a * a);
                for (std::size_t j = 0; j < input_dim; ++j) row[l.w1 + u * input_dim + j] = da * x[j];
                row[l.b1 + u] = da;
                row[l.w2 + u] = a;
            }
            row[l.b2] = 1.0;
        }

        // Normal system J^T J + lambda I and right-hand side J^T r.
        Matrix normal(np, np);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = jacobian.row(i);
            for (std::size_t a = 0; a < np; ++a) {
                const double ra = row[a];
                if (ra == 0.0) continue;
                for (std::size_t b = a; b < np; ++b) normal.at(a, b) += ra * row[b];
            }
        }
        for (std::size_t a = 0; a < np; ++a) {
            for (std::size_t b = 0; b < a; ++b) normal.at(a, b) = normal.at(b, a);
            normal.at(a, a) += lambda;
        }
        const auto jt_r = transpose_matvec(jacobian, residuals);

        std::vector<double> delta = cholesky_solve(normal, jt_r);
        if (delta.empty()) {
            // Damped factorization failed: plain gradient step instead.
            ++model.singular_steps_;
            delta = jt_r;
            for (double& d : delta) d /= std::max(lambda, 1.0);
        }
        double step_norm = 0.0;
        for (const double d : delta) step_norm += d * d;
        model.step_norms_.push_back(std::sqrt(step_norm));

        std::vector<double> candidate = model.params_;
        for (std::size_t k = 0; k < np; ++k) candidate[k] -= delta[k];
        const double candidate_sse = evaluate_sse(candidate);
        if (candidate_sse < sse) {
            const double drop = sse - candidate_sse;
            model.params_ = std::move(candidate);
            sse = candidate_sse;
            model.accepted_sse_.push_back(sse);
            lambda /= 10.0;
            if (drop < options.sse_tolerance) break;
        } else {
            lambda *= 10.0;
        }
    }
    return model;
}

MlpModel fit_mlp(const Matrix& inputs, std::span<const double> targets, std::uint64_t seed) {
    return MlpModel::fit(inputs, targets, seed);
}

MlpModel make_mlp_for_test(std::size_t input_dim, std::size_t hidden, std::uint64_t seed) {
    MlpModel model;
    model.input_dim_ = input_dim;
    model.hidden_ = hidden;
    const MlpLayout l = layout(input_dim, hidden);
    model.params_.assign(l.total, 0.0);
    RngStream rng(derive_seed(seed, "mlp-init"));
    const double limit1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
    for (std::size_t k = 0; k < hidden * input_dim; ++k) {
        model.params_[l.w1 + k] = rng.uniform(-limit1, limit1);
    }
    const double limit2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    for (std::size_t u = 0; u < hidden; ++u) model.params_[l.w2 + u] = rng.uniform(-limit2, limit2);
    return model;
}

std::vector<double> mlp_loss_gradient(const MlpModel& model, const Matrix& inputs,
                                      std::span<const double> targets) {
    const std::size_t n = inputs.rows();
    const std::size_t hidden = model.hidden();
    const std::size_t input_dim = model.lag();
    const MlpLayout l = layout(input_dim, hidden);
    std::vector<double> grad(l.total, 0.0);
    std::vector<double> activations(hidden);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = inputs.row(i);
        const double y =
            forward(model.params().data(), l, input_dim, hidden, x, activations.data());
        const double dy = 2.0 * (y - targets[i]) * inv;
        grad[l.b2] += dy;
        for (std::size_t u = 0; u < hidden; ++u) {
            const double a = activations[u];
            grad[l.w2 + u] += dy * a;
            const double dpre = dy * model.params()[l.w2 + u] * (1.0 - a * a);
            grad[l.b1 + u] += dpre;
            for (std::size_t j = 0; j < input_dim; ++j) grad[l.w1 + u * input_dim + j] += dpre * x[j];
        }
    }
    return grad;
}

} // namespace trafficast::models
