#pragma once

// Independent brute-force references used across the unit tests.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spectral_ood/population.hpp"
#include "spectral_ood/types.hpp"

namespace oracle {

using spectral_ood::Matrix;
using spectral_ood::Vector;

inline Matrix random_nonnegative(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

inline Matrix random_symmetric(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = z(rng);
    return m;
}

inline Matrix random_normal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(rng);
    return m;
}

// Eigenvalues descending, computed in long double by Eigen's own solver.
inline Vector eigenvalues_ld(const Matrix& a) {
    using MatLD = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::SelfAdjointEigenSolver<MatLD> es(a.cast<long double>());
    Vector out(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i) = static_cast<double>(es.eigenvalues()(a.rows() - 1 - i));
    return out;
}

inline Matrix eigenvectors_ld(const Matrix& a) {
    using MatLD = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::SelfAdjointEigenSolver<MatLD> es(a.cast<long double>());
    return es.eigenvectors().rowwise().reverse().cast<double>();
}

// Transform rule per entry.
inline double rule(double rho, double alpha, double beta, double gamma, int c1, int d1, int c2, int d2) {
    if (c1 == c2 && d1 == d2) return rho;
    if (c1 == c2) return alpha;
    if (d1 == d2) return beta;
    return gamma;
}

// A_u by explicit triple loop.
inline Matrix self_supervised(const Matrix& t) {
    const auto nb = t.rows(), n = t.cols();
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y)
            for (Eigen::Index s = 0; s < nb; ++s) a(x, y) += t(s, x) * t(s, y) / static_cast<double>(nb);
    return a;
}

// A_l by explicit loop over labeled pairs of the same known class.
inline Matrix supervised(const Matrix& t, const spectral_ood::Population& pop) {
    const auto n = t.cols();
    Matrix a = Matrix::Zero(n, n);
    for (int c : pop.known_classes) {
        std::vector<int> rows;
        for (const auto& e : pop.examples)
            if (e.membership == spectral_ood::Membership::LabeledId && e.class_label == c) rows.push_back(e.index);
        if (rows.empty()) continue;
        const double w = 1.0 / (static_cast<double>(rows.size()) * static_cast<double>(rows.size()));
        for (int r1 : rows)
            for (int r2 : rows)
                for (Eigen::Index x = 0; x < n; ++x)
                    for (Eigen::Index y = 0; y < n; ++y) a(x, y) += w * t(r1, x) * t(r2, y);
    }
    return a;
}

}  // namespace oracle
