#pragma once

#include <span>
#include <vector>

#include "trafficast/matrix.hpp"

namespace trafficast {

/// Least-squares fit of `design * x = targets` through Householder QR with
/// column pivoting. Rank-deficient systems (pivot below rank_tol relative to
/// the largest pivot) resolve to the minimum-norm solution via a complete
/// orthogonal decomposition. The normal-equations matrix is never formed.
std::vector<double> ols_fit(const Matrix& design, std::span<const double> targets,
                            double rank_tol = 1e-10);

/// Solves the SPD system `a * x = rhs` by Cholesky. Returns empty when the
/// factorization breaks down (matrix not positive definite).
std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> rhs);

std::vector<double> matvec(const Matrix& m, std::span<const double> x);
std::vector<double> transpose_matvec(const Matrix& m, std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);

} // namespace trafficast
