#include "trafficast/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "trafficast/errors.hpp"

namespace trafficast {

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
    if (x.size() != m.cols()) throw DimensionMismatch("matvec: vector length != cols");
    std::vector<double> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), x);
    return out;
}

std::vector<double> transpose_matvec(const Matrix& m, std::span<const double> x) {
    if (x.size() != m.rows()) throw DimensionMismatch("transpose_matvec: vector length != rows");
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += row[j] * xi;
    }
    return out;
}

namespace {

// Householder QR with column pivoting, applied in place. `a` is n x p
// (column entries strided by p). Reflectors are applied to `b` as they are
// formed; `perm` records the column permutation.
struct PivotedQr {
    Matrix r;                       // upper trapezoid after elimination
    std::vector<std::size_t> perm;  // original index of each pivoted column
    std::size_t rank = 0;
};

PivotedQr pivoted_qr(Matrix a, std::vector<double>& b, double rank_tol) {
    const std::size_t n = a.rows();
    const std::size_t p = a.cols();
    PivotedQr out;
    out.perm.resize(p);
    for (std::size_t j = 0; j < p; ++j) out.perm[j] = j;

    std::vector<double> v(n);
    double first_pivot = 0.0;
    const std::size_t steps = std::min(n, p);
    for (std::size_t k = 0; k < steps; ++k) {
        // Pivot: move the column with the largest remaining norm to position k.
        std::size_t best = k;
        double best_norm = -1.0;
        for (std::size_t j = k; j < p; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += a.at(i, j) * a.at(i, j);
            if (s > best_norm) {
                best_norm = s;
                best = j;
            }
        }
        if (best != k) {
            for (std::size_t i = 0; i < n; ++i) std::swap(a.at(i, k), a.at(i, best));
            std::swap(out.perm[k], out.perm[best]);
        }

        const double sigma = std::sqrt(std::max(best_norm, 0.0));
        if (k == 0) first_pivot = sigma;
        if (sigma <= rank_tol * std::max(first_pivot, 1e-300)) break;
        out.rank = k + 1;

        const double alpha = a.at(k, k) > 0.0 ? -sigma : sigma;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < n; ++i) {
            v[i] = a.at(i, k);
            if (i == k) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 <= 0.0) {
            a.at(k, k) = alpha;
            continue;
        }
        const double scale = 2.0 / vnorm2;
        for (std::size_t j = k; j < p; ++j) {
            double w = 0.0;
            for (std::size_t i = k; i < n; ++i) w += v[i] * a.at(i, j);
            w *= scale;
            for (std::size_t i = k; i < n; ++i) a.at(i, j) -= w * v[i];
        }
        double wb = 0.0;
        for (std::size_t i = k; i < n; ++i) wb += v[i] * b[i];
        wb *= scale;
        for (std::size_t i = k; i < n; ++i) b[i] -= wb * v[i];
        a.at(k, k) = alpha;
        for (std::size_t i = k + 1; i < n; ++i) a.at(i, k) = 0.0;
    }
    out.r = std::move(a);
    return out;
}

// Minimum-norm solution of the rank-deficient triangular system
// [R11 R12] z = c through a second (unpivoted) QR of the transpose.
std::vector<double> min_norm_solve(const Matrix& r, std::size_t rank, std::size_t p,
                                   std::span<const double> c) {
    // m = [R11 R12]^T, p x rank.
    Matrix m(p, rank);
    for (std::size_t i = 0; i < rank; ++i) {
        for (std::size_t j = i; j < p; ++j) m.at(j, i) = r.at(i, j);
    }

    // Householder QR of m, keeping the reflectors to reconstruct Q2 * w.
    std::vector<std::vector<double>> reflectors;
    reflectors.reserve(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        double sigma2 = 0.0;
        for (std::size_t i = k; i < p; ++i) sigma2 += m.at(i, k) * m.at(i, k);
        const double sigma = std::sqrt(sigma2);
        const double alpha = m.at(k, k) > 0.0 ? -sigma : sigma;
        std::vector<double> v(p, 0.0);
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < p; ++i) {
            v[i] = m.at(i, k);
            if (i == k) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 > 0.0) {
            const double scale = 2.0 / vnorm2;
            for (std::size_t j = k; j < rank; ++j) {
                double w = 0.0;
                for (std::size_t i = k; i < p; ++i) w += v[i] * m.at(i, j);
                w *= scale;
                for (std::size_t i = k; i < p; ++i) m.at(i, j) -= w * v[i];
            }
            for (double& x : v) x *= std::sqrt(scale);  // store normalized so H = I - vv^T
        }
        reflectors.push_back(std::move(v));
        m.at(k, k) = alpha;
    }

    // m now holds R2 (rank x rank upper triangular in its top block):
    // [R11 R12]^T = Q2 R2, so [R11 R12] = R2^T Q2^T. Solve R2^T w = c.
    std::vector<double> w(rank, 0.0);
    for (std::size_t i = 0; i < rank; ++i) {
        double s = c[i];
        for (std::size_t j = 0; j < i; ++j) s -= m.at(j, i) * w[j];
        const double d = m.at(i, i);
        w[i] = d != 0.0 ? s / d : 0.0;
    }

    // z = Q2 * [w; 0]: apply reflectors in reverse order.
    std::vector<double> z(p, 0.0);
    std::copy(w.begin(), w.end(), z.begin());
    for (std::size_t k = rank; k-- > 0;) {
        const auto& v = reflectors[k];
        double s = 0.0;
        for (std::size_t i = 0; i < p; ++i) s += v[i] * z[i];
        for (std::size_t i = 0; i < p; ++i) z[i] -= s * v[i];
    }
    return z;
}

} // namespace

std::vector<double> ols_fit(const Matrix& design, std::span<const double> targets,
                            double rank_tol) {
    const std::size_t n = design.rows();
    const std::size_t p = design.cols();
    if (targets.size() != n) {
        throw DimensionMismatch("ols_fit: target length " + std::to_string(targets.size()) +
                                " != row count " + std::to_string(n));
    }
    if (n == 0 || p == 0) throw EmptyInput("ols_fit: empty system");
    if (n < p) throw DimensionMismatch("ols_fit: fewer rows than columns");
    if (!design.all_finite()) throw NonFiniteError("ols_fit: non-finite design entry");
    for (const double t : targets) {
        if (!std::isfinite(t)) throw NonFiniteError("ols_fit: non-finite target entry");
    }

    std::vector<double> b(targets.begin(), targets.end());
    PivotedQr qr = pivoted_qr(design, b, rank_tol);

    std::vector<double> pivoted(p, 0.0);
    if (qr.rank == p) {
        for (std::size_t i = p; i-- > 0;) {
            double s = b[i];
            for (std::size_t j = i + 1; j < p; ++j) s -= qr.r.at(i, j) * pivoted[j];
            pivoted[i] = s / qr.r.at(i, i);
        }
    } else if (qr.rank > 0) {
        pivoted = min_norm_solve(qr.r, qr.rank, p, b);
    }

    std::vector<double> coeffs(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) coeffs[qr.perm[j]] = pivoted[j];
    return coeffs;
}

std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> rhs) {
    const std::size_t n = a.rows();
    if (a.cols() != n || rhs.size() != n) throw DimensionMismatch("cholesky_solve: shape");
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) return {};
                l.at(i, i) = std::sqrt(s);
            } else {
                l.at(i, j) = s / l.at(j, j);
            }
        }
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= l.at(i, k) * y[k];
        y[i] = s / l.at(i, i);
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l.at(k, i) * x[k];
        x[i] = s / l.at(i, i);
    }
    return x;
}

} // namespace trafficast
