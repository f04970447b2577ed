#include "spectral_ood/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace spectral_ood {

namespace {

double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (i != j) sum += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(sum);
}

void fix_sign(Eigen::Ref<Vector> v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v(i)) > std::abs(v(best))) best = i;
    }
    if (v(best) < 0.0) v = -v;
}

bool lexicographically_greater(const Vector& a, const Vector& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) != b(i)) return a(i) > b(i);
    }
    return false;
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& input, double rel_tol, int max_sweeps) {
    if (input.rows() != input.cols()) throw ConfigError("eigendecomposition requires a square matrix");
    if (!input.allFinite()) throw NumericError("eigendecomposition input has non-finite entries");
    const double asym = (input - input.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) {
        throw ConfigError("eigendecomposition requires a symmetric matrix (asymmetry " + std::to_string(asym) + ")");
    }

    const auto n = input.rows();
    Matrix a = 0.5 * (input + input.transpose());
    Matrix v = Matrix::Identity(n, n);
    const double threshold = rel_tol * a.norm();

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_diagonal_norm(a) <= threshold) break;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == max_sweeps && off_diagonal_norm(a) > threshold) {
        throw NumericError("Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) + " sweeps");
    }

    for (Eigen::Index j = 0; j < n; ++j) fix_sign(v.col(j));

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        if (a(i, i) != a(j, j)) return a(i, i) > a(j, j);
        return lexicographically_greater(v.col(i), v.col(j));
    });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.values(j) = a(order[j], order[j]);
        out.vectors.col(j) = v.col(order[j]);
    }
    out.sweeps = sweep;
    return out;
}

Matrix symmetric_pinv(const Matrix& a, double rel_tol) {
    const auto eig = symmetric_eigen(a);
    const double lmax = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0;
    Matrix out = Matrix::Zero(a.rows(), a.cols());
    if (lmax == 0.0) return out;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        const double l = eig.values(i);
        if (l > rel_tol * lmax) out += (1.0 / l) * eig.vectors.col(i) * eig.vectors.col(i).transpose();
    }
    return out;
}

Matrix column_projector(const Matrix& columns, double rel_tol) {
    const Matrix gram = columns.transpose() * columns;
    return columns * symmetric_pinv(gram, rel_tol) * columns.transpose();
}

}  // namespace spectral_ood
