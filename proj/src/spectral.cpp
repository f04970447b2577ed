#include "spectral_ood/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <random>

#include "spectral_ood/jacobi.hpp"
#include "spectral_ood/loss.hpp"

namespace spectral_ood {

namespace {

// Sufficient-decrease fraction of the backtracking line search.
constexpr double kArmijo = 1e-4;

}  // namespace

SpectralEmbedding eigendecompose(const Matrix& normalized, int k) {
    const auto n = normalized.rows();
    if (k < 1 || k > n) {
        throw ConfigError("rank k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
    }
    const auto eig = symmetric_eigen(normalized);
    SpectralEmbedding out;
    out.eigenvalues = eig.values;
    out.eigenvectors = eig.vectors;
    out.basis = eig.vectors.leftCols(k);
    out.sigma = eig.values.head(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (out.sigma(i) < 0.0) {
            out.sigma(i) = 0.0;
            ++out.clamped;
        }
    }
    if (out.clamped > 0) {
        std::clog << "warning: clamped " << out.clamped << " negative top-" << k << " eigenvalue(s) to zero\n";
    }
    return out;
}

Matrix closed_form_embedding(const GraphBundle& bundle, const SpectralEmbedding& spectral) {
    if (bundle.size() != spectral.basis.rows()) {
        throw ConfigError("embedding: bundle has " + std::to_string(bundle.size()) + " vertices, basis has " +
                          std::to_string(spectral.basis.rows()) + " rows");
    }
    Matrix z = spectral.basis * spectral.sigma.cwiseSqrt().asDiagonal();
    for (Eigen::Index x = 0; x < z.rows(); ++x) z.row(x) /= std::sqrt(bundle.degrees(x));
    return z;
}

double eckart_young_residual(const Vector& eigenvalues, int k) {
    std::vector<double> positive;
    double total = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        total += eigenvalues(i) * eigenvalues(i);
        if (eigenvalues(i) > 0.0) positive.push_back(eigenvalues(i));
    }
    std::sort(positive.begin(), positive.end(), std::greater<>());
    for (std::size_t i = 0; i < positive.size() && i < static_cast<std::size_t>(k); ++i) {
        total -= positive[i] * positive[i];
    }
    return std::max(total, 0.0);
}

FactorizationState lowrank_factorize(const Matrix& normalized, int k, const FactorizeOptions& opts) {
    const auto n = normalized.rows();
    if (normalized.cols() != n) throw ConfigError("factorization target must be square");
    if ((normalized - normalized.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw ConfigError("factorization target must be symmetric");
    }
    if (k < 1 || k > n) throw ConfigError("rank k must lie in [1, N]");
    if (!(opts.step > 0.0) || opts.max_iters < 1 || !(opts.tol >= 0.0)) {
        throw ConfigError("factorizer options: step > 0, max_iters >= 1, tol >= 0 required");
    }

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n) * k);
    FactorizationState state;
    state.factor.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) state.factor(i, j) = scale * normal(rng);
    }

    auto objective = [&](const Matrix& f) { return (normalized - f * f.transpose()).squaredNorm(); };
    double loss = objective(state.factor);
    if (!std::isfinite(loss)) throw NumericError("non-finite loss at iteration 0");
    state.loss_trace.push_back({0, loss});

    // Changes below 1e-12 of the target's own scale count as converged near an exact fit.
    const double loss_floor = std::max(1e-12 * normalized.squaredNorm(), std::numeric_limits<double>::min());
    double step = opts.step;
    for (int it = 1; it <= opts.max_iters; ++it) {
        state.iterations = it;
        const Matrix grad = 4.0 * (state.factor * state.factor.transpose() - normalized) * state.factor;
        const double grad_sq = grad.squaredNorm();
        Matrix trial;
        double trial_loss = 0.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 80; ++halvings) {
            trial = state.factor - step * grad;
            trial_loss = objective(trial);
            if (!std::isfinite(trial_loss)) {
                if (halvings == 79) throw NumericError("non-finite loss at iteration " + std::to_string(it));
            } else if (trial_loss <= loss - kArmijo * step * grad_sq) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent direction left at machine precision: stationary.
            state.converged = true;
            break;
        }
        const double rel_change = (loss - trial_loss) / std::max(loss, loss_floor);
        state.factor = std::move(trial);
        loss = trial_loss;
        state.loss_trace.push_back({it, loss});
        step = std::min(2.0 * step, opts.step);
        if (rel_change < opts.tol) {
            state.converged = true;
            break;
        }
    }
    return state;
}

ReconstructionGap reconstruction_gap(const Matrix& factor, const Matrix& normalized,
                                     const SpectralEmbedding& spectral) {
    const int k = static_cast<int>(factor.cols());
    if (k != spectral.rank()) throw ConfigError("reconstruction gap: factor rank differs from spectral rank");
    ReconstructionGap gap;
    gap.loss_gap = matrix_loss(factor, normalized) - eckart_young_residual(spectral.eigenvalues, k);
    gap.subspace_gap = (column_projector(factor) - spectral.basis * spectral.basis.transpose()).norm();
    if (k < spectral.eigenvalues.size()) {
        gap.degenerate = std::abs(spectral.eigenvalues(k - 1) - spectral.eigenvalues(k)) <= 1e-9;
    }
    return gap;
}

ReconstructionGap reconstruction_gap(const FactorizationState& state, const Matrix& normalized,
                                     const SpectralEmbedding& spectral) {
    return reconstruction_gap(state.factor, normalized, spectral);
}

void write_trace_csv(std::ostream& out, const FactorizationState& state) {
    out << "iter,loss\n";
    out << std::scientific << std::setprecision(16);
    for (const auto& p : state.loss_trace) out << p.iteration << ',' << p.loss << '\n';
    out << std::defaultfloat;
}

}  // namespace spectral_ood
