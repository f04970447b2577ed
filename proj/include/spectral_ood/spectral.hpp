#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "spectral_ood/graph.hpp"
#include "spectral_ood/types.hpp"

namespace spectral_ood {

/// Top-k spectral data of a normalized adjacency.
struct SpectralEmbedding {
    Vector eigenvalues;   // full spectrum, descending
    Matrix eigenvectors;  // full orthonormal basis, columns match eigenvalues
    Matrix basis;         // V_k
    Vector sigma;         // top-k eigenvalues clamped at zero
    int clamped = 0;      // number of negative top-k eigenvalues clamped

    int rank() const { return static_cast<int>(basis.cols()); }
};

SpectralEmbedding eigendecompose(const Matrix& normalized, int k);

/// Z = D^{-1/2} V_k sqrt(Sigma_k); row x is f(x).
Matrix closed_form_embedding(const GraphBundle& bundle, const SpectralEmbedding& spectral);

/// Smallest ||A - F F^T||_F^2 over N x k factors F:
/// sum of lambda^2 minus the squares of the k largest positive eigenvalues.
double eckart_young_residual(const Vector& eigenvalues, int k);

struct FactorizeOptions {
    double step = 1.0;
    int max_iters = 10000;
    double tol = 1e-13;
    std::uint64_t seed = 0;
};

struct LossPoint {
    int iteration = 0;
    double loss = 0.0;
};

struct FactorizationState {
    Matrix factor;
    std::vector<LossPoint> loss_trace;
    bool converged = false;
    int iterations = 0;

    double final_loss() const { return loss_trace.back().loss; }
};

/// Gradient descent on ||A - F F^T||_F^2 with Armijo backtracking (halving) line
/// search. Throws NumericError on a non-finite loss.
FactorizationState lowrank_factorize(const Matrix& normalized, int k, const FactorizeOptions& opts = {});

struct ReconstructionGap {
    double loss_gap = 0.0;
    double subspace_gap = 0.0;
    bool degenerate = false;  // lambda_k == lambda_{k+1}; subspace gap is not meaningful
};

ReconstructionGap reconstruction_gap(const Matrix& factor, const Matrix& normalized, const SpectralEmbedding& spectral);
ReconstructionGap reconstruction_gap(const FactorizationState& state, const Matrix& normalized,
                                     const SpectralEmbedding& spectral);

/// `iter,loss` with losses in scientific notation.
void write_trace_csv(std::ostream& out, const FactorizationState& state);

}  // namespace spectral_ood
