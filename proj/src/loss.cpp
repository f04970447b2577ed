#include "spectral_ood/loss.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace spectral_ood {

namespace {

// Σ_{x,x'} t(x) t(x') <f(x), f(x')>  =  ||Σ_x t(x) f(x)||^2
double weighted_pair_inner(const Vector& t, const Matrix& f) {
    const Eigen::RowVectorXd pooled = t.transpose() * f;
    return pooled.squaredNorm();
}

// Σ_{x,x'} u(x) v(x') <f(x), f(x')>^2
double weighted_pair_squared(const Vector& u, const Vector& v, const Matrix& gram) {
    double sum = 0.0;
    for (Eigen::Index x = 0; x < gram.rows(); ++x) {
        if (u(x) == 0.0) continue;
        double row = 0.0;
        for (Eigen::Index y = 0; y < gram.cols(); ++y) row += v(y) * gram(x, y) * gram(x, y);
        sum += u(x) * row;
    }
    return sum;
}

}  // namespace

LossBreakdown surrogate_loss(const Matrix& embedding, const Matrix& transform, const Population& population,
                             const GraphWeights& weights) {
    weights.validate();
    if (transform.rows() != static_cast<Eigen::Index>(population.size())) {
        throw ConfigError("surrogate loss: transform rows differ from population size");
    }
    if (embedding.rows() != transform.cols()) {
        throw ConfigError("surrogate loss: embedding has " + std::to_string(embedding.rows()) +
                          " rows but there are " + std::to_string(transform.cols()) + " augmented views");
    }
    const auto n_natural = transform.rows();
    const auto n = transform.cols();
    const Matrix means = labeled_class_means(transform, population);
    const Vector row_sums = transform.rowwise().sum();

    // Positive-pair measures and their view marginals.
    Vector marginal_l = Vector::Zero(n);
    double mass_l = 0.0;
    for (Eigen::Index i = 0; i < means.cols(); ++i) {
        const double s = means.col(i).sum();
        marginal_l += s * means.col(i);
        mass_l += s * s;
    }
    Vector marginal_u = Vector::Zero(n);
    for (Eigen::Index a = 0; a < n_natural; ++a) marginal_u += row_sums(a) * transform.row(a).transpose();
    marginal_u /= static_cast<double>(n_natural);
    const double mass_u = row_sums.squaredNorm() / static_cast<double>(n_natural);

    const double c = weights.eta_u * mass_u + weights.eta_l * mass_l;
    if (!(c > 0.0)) throw ConfigError("surrogate loss: graph has no positive weight");

    LossBreakdown out;
    out.eta = weights;
    if (embedding.cols() == 0) return out;

    for (Eigen::Index i = 0; i < means.cols(); ++i) out.l1 += weighted_pair_inner(means.col(i), embedding);
    out.l1 /= c;
    for (Eigen::Index a = 0; a < n_natural; ++a) {
        out.l2 += weighted_pair_inner(transform.row(a).transpose(), embedding);
    }
    out.l2 /= static_cast<double>(n_natural) * c;

    const Matrix gram = embedding * embedding.transpose();
    const double c2 = c * c;
    out.l3 = weighted_pair_squared(marginal_l, marginal_l, gram) / c2;
    out.l4 = weighted_pair_squared(marginal_l, marginal_u, gram) / c2;
    out.l5 = weighted_pair_squared(marginal_u, marginal_u, gram) / c2;

    const double eu = weights.eta_u, el = weights.eta_l;
    out.total = -2.0 * el * out.l1 - 2.0 * eu * out.l2 + el * el * out.l3 + 2.0 * el * eu * out.l4 +
                eu * eu * out.l5;
    return out;
}

double matrix_loss(const Matrix& factor, const Matrix& normalized) {
    if (normalized.rows() != normalized.cols() || factor.rows() != normalized.rows()) {
        throw ConfigError("matrix loss: shape mismatch");
    }
    double sum = 0.0;
    for (Eigen::Index x = 0; x < normalized.rows(); ++x) {
        for (Eigen::Index y = 0; y < normalized.cols(); ++y) {
            const double r = normalized(x, y) - factor.row(x).dot(factor.row(y));
            sum += r * r;
        }
    }
    return sum;
}

EquivalenceGap equivalence_gap(const GraphModel& model, const std::vector<Matrix>& factors) {
    if (factors.size() < 2) throw ConfigError("equivalence gap needs at least two trials");
    const auto& b = model.bundle;
    const Vector inv_sqrt = b.degrees.array().rsqrt();
    EquivalenceGap out;
    out.constant = b.normalized.squaredNorm();
    for (const auto& f : factors) {
        const Matrix scaled = inv_sqrt.asDiagonal() * f;
        const auto s = surrogate_loss(scaled, model.source.transform, model.source.population, model.weights);
        out.gaps.push_back(matrix_loss(f, b.normalized) - s.total);
    }
    const auto [lo, hi] = std::minmax_element(out.gaps.begin(), out.gaps.end());
    out.max_gap_spread = *hi - *lo;
    return out;
}

EquivalenceGap equivalence_gap(const GraphModel& model, int k, int trials, std::uint64_t seed) {
    if (trials < 2) throw ConfigError("equivalence gap needs at least two trials");
    if (k < 1) throw ConfigError("equivalence gap: k must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = model.bundle.size();
    std::vector<Matrix> factors;
    for (int t = 0; t < trials; ++t) {
        Matrix f(n, k);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) f(i, j) = normal(rng);
        }
        factors.push_back(std::move(f));
    }
    return equivalence_gap(model, factors);
}

}  // namespace spectral_ood
