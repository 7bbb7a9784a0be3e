#include "trafficast/models/svr.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "trafficast/errors.hpp"

namespace trafficast::models {

namespace {

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// On-demand kernel rows with a bounded FIFO cache; the optimizer revisits a
// small active set, so hit rates stay high without storing the full Gram.
class KernelRows {
public:
    KernelRows(const Matrix& inputs, double gamma, std::size_t max_rows)
        : inputs_(inputs), gamma_(gamma), max_rows_(std::max<std::size_t>(max_rows, 8)) {}

    const std::vector<double>& row(std::size_t i) {
        auto it = cache_.find(i);
        if (it != cache_.end()) return it->second;
        const std::size_t n = inputs_.rows();
        std::vector<double> values(n);
        const auto xi = inputs_.row(i);
        for (std::size_t j = 0; j < n; ++j) values[j] = rbf(xi, inputs_.row(j), gamma_);
        if (cache_.size() >= max_rows_) {
            cache_.erase(order_.front());
            order_.pop_front();
        }
        order_.push_back(i);
        return cache_.emplace(i, std::move(values)).first->second;
    }

private:
    const Matrix& inputs_;
    double gamma_;
    std::size_t max_rows_;
    std::unordered_map<std::size_t, std::vector<double>> cache_;
    std::deque<std::size_t> order_;
};

} // namespace

SvrModel SvrModel::fit(const Matrix& inputs, std::span<const double> targets, double cost,
                       double epsilon_tube, double gamma, const SvrFitOptions& options) {
    const std::size_t n = inputs.rows();
    if (n == 0) throw EmptyInput("svr fit on zero rows");
    if (targets.size() != n) throw DimensionMismatch("svr: target count != rows");
    if (cost <= 0.0 || gamma <= 0.0) throw InvalidArgument("svr: cost and gamma must be positive");
    if (epsilon_tube < 0.0) throw InvalidArgument("svr: epsilon tube must be non-negative");

    // Dual variables alpha/alpha* live in the combined coefficient
    // beta_i = alpha_i - alpha_i^*; the solver tracks the pair explicitly.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> alpha_star(n, 0.0);
    std::vector<double> g(n, 0.0);  // sum_j beta_j K(i, j)

    const std::size_t cache_rows =
        std::max<std::size_t>(64, std::min<std::size_t>(n, 50'000'000 / (8 * std::max<std::size_t>(n, 1))));
    KernelRows kernel(inputs, gamma, cache_rows);

    const std::size_t budget = options.max_pair_updates_per_row * n;
    bool converged = false;
    std::size_t used = 0;

    double m_up = 0.0;
    double m_low = 0.0;
    for (; used < budget; ++used) {
        // Most-violating pair over the 2n variables: "up" candidates can grow
        // their coefficient, "low" candidates can shrink toward it.
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        std::size_t up_index = n;
        std::size_t low_index = n;
        bool up_is_star = false;
        bool low_is_star = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double base = targets[i] - g[i];
            const double v_plus = base - epsilon_tube;   // alpha_i direction
            const double v_minus = base + epsilon_tube;  // alpha_i^* direction
            if (alpha[i] < cost && v_plus > m_up) {
                m_up = v_plus;
                up_index = i;
                up_is_star = false;
            }
            if (alpha_star[i] > 0.0 && v_minus > m_up) {
                m_up = v_minus;
                up_index = i;
                up_is_star = true;
            }
            if (alpha[i] > 0.0 && v_plus < m_low) {
                m_low = v_plus;
                low_index = i;
                low_is_star = false;
            }
            if (alpha_star[i] < cost && v_minus < m_low) {
                m_low = v_minus;
                low_index = i;
                low_is_star = true;
            }
        }
        if (up_index == n || low_index == n || m_up - m_low < options.kkt_tolerance) {
            converged = true;
            break;
        }

        const std::size_t p = up_index;
        const std::size_t q = low_index;
        // Copy the first row: fetching the second may evict it from cache.
        const std::vector<double> row_p = kernel.row(p);
        const std::vector<double>& row_q = kernel.row(q);
        double eta = row_p[p] + row_q[q] - 2.0 * row_p[q];
        if (eta < 1e-12) eta = 1e-12;

        // The step adds w to beta_p and removes w from beta_q, whichever of
        // (alpha, alpha*) realizes that change; the box limits each side.
        double w = (m_up - m_low) / eta;
        w = std::min(w, up_is_star ? alpha_star[p] : cost - alpha[p]);
        w = std::min(w, low_is_star ? cost - alpha_star[q] : alpha[q]);
        if (!(w > 0.0)) {
            converged = true;  // numerically pinned; bracket is already tight
            break;
        }

        if (up_is_star) {
            alpha_star[p] -= w;
        } else {
            alpha[p] += w;
        }
        if (low_is_star) {
            alpha_star[q] += w;
        } else {
            alpha[q] -= w;
        }
        for (std::size_t l = 0; l < n; ++l) g[l] += w * (row_p[l] - row_q[l]);
    }

    // Bias from interior variables, falling back to the bracket midpoint.
    double b = 0.0;
    std::size_t interior = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 0.0 && alpha[i] < cost) {
            b += targets[i] - g[i] - epsilon_tube;
            ++interior;
        } else if (alpha_star[i] > 0.0 && alpha_star[i] < cost) {
            b += targets[i] - g[i] + epsilon_tube;
            ++interior;
        }
    }
    if (interior > 0) {
        b /= static_cast<double>(interior);
    } else {
        b = (m_up + m_low) / 2.0;
        if (!std::isfinite(b)) b = 0.0;
    }

    SvrModel model;
    model.gamma_ = gamma;
    model.cost_ = cost;
    model.epsilon_ = epsilon_tube;
    model.bias_ = b;
    model.converged_ = converged;
    if (!converged) {
        model.warning_ = "svr pair-update budget exhausted before reaching the KKT tolerance";
    }

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(alpha[i] - alpha_star[i]) > 1e-12) keep.push_back(i);
    }
    model.support_inputs_ = Matrix(keep.size(), inputs.cols());
    model.coefficients_.resize(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const std::size_t i = keep[k];
        model.coefficients_[k] = alpha[i] - alpha_star[i];
        for (std::size_t j = 0; j < inputs.cols(); ++j) {
            model.support_inputs_.at(k, j) = inputs.at(i, j);
        }
    }
    if (model.support_inputs_.rows() == 0) {
        // Constant model: keep the input width for dimension checks.
        model.support_inputs_ = Matrix(0, inputs.cols());
    }
    return model;
}

double SvrModel::predict(std::span<const double> features) const {
    if (features.size() != support_inputs_.cols()) {
        throw DimensionMismatch("svr expects " + std::to_string(support_inputs_.cols()) +
                                " features");
    }
    double out = bias_;
    for (std::size_t i = 0; i < support_inputs_.rows(); ++i) {
        out += coefficients_[i] * rbf(support_inputs_.row(i), features, gamma_);
    }
    return out;
}

std::size_t SvrModel::support_vector_count() const {
    return coefficients_.size();
}

SvrModel fit_svr(const Matrix& inputs, std::span<const double> targets, double cost,
                 double epsilon_tube, double gamma) {
    return SvrModel::fit(inputs, targets, cost, epsilon_tube, gamma);
}

} // namespace trafficast::models
