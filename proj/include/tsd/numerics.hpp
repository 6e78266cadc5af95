#pragma once

#include "tsd/tensor.hpp"

namespace tsd {

/// Relative singular-value cutoff used for pseudo-inverses and rank counts.
inline constexpr double kDefaultSvdCutoff = 1e-8;

/// Minimizer of 1/2||B - X A||_F^2 + rho/2 ||X - M_prev||_F^2, i.e.
/// X = (rho M_prev + B A^T)(rho I + A A^T)^{-1}.
///
/// The SPD system is solved by Cholesky; an SVD solve takes over only when
/// the factorization reports failure.
[[nodiscard]] Matrix ridge_right_solve(const Matrix& B, const Matrix& A, const Matrix& M_prev,
                                       double rho);

/// Same minimizer from precomputed B A^T and A A^T.
[[nodiscard]] Matrix ridge_right_solve_normal(const Matrix& BAt, const Matrix& AAt,
                                              const Matrix& M_prev, double rho);

/// Minimal-norm minimizer of ||B - X A||_F through the SVD pseudo-inverse of A.
/// Singular values at or below cutoff * sigma_max are treated as zero.
[[nodiscard]] Matrix lstsq_right(const Matrix& B, const Matrix& A,
                                 double cutoff = kDefaultSvdCutoff);

/// Number of singular values strictly above rel_tol * sigma_max.
[[nodiscard]] std::size_t numerical_rank(const Matrix& M, double rel_tol = kDefaultSvdCutoff);

}  // namespace tsd
