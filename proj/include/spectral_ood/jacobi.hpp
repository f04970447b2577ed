#pragma once

#include "spectral_ood/types.hpp"

namespace spectral_ood {

/// Full eigendecomposition of a dense symmetric matrix.
/// Eigenvalues descend; each eigenvector's largest-magnitude entry is
/// positive (first such index on ties); exactly equal eigenvalues are
/// ordered by lexicographically larger eigenvector first.
struct SymmetricEigen {
    Vector values;
    Matrix vectors;  // columns
    int sweeps = 0;
};

/// Cyclic Jacobi with row-major (p, q) traversal. Stops when the
/// off-diagonal Frobenius norm drops below `rel_tol * ||A||_F`.
/// Throws ConfigError on non-square or asymmetric (> 1e-10) input.
SymmetricEigen symmetric_eigen(const Matrix& a, double rel_tol = 1e-12, int max_sweeps = 100);

/// Moore-Penrose inverse of a symmetric PSD matrix, discarding eigenvalues
/// below `rel_tol * lambda_max`.
Matrix symmetric_pinv(const Matrix& a, double rel_tol = 1e-10);

/// Orthogonal projector onto the column span of `columns`.
Matrix column_projector(const Matrix& columns, double rel_tol = 1e-10);

}  // namespace spectral_ood
