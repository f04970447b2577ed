#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "spectral_ood/graph.hpp"
#include "spectral_ood/loss.hpp"
#include "spectral_ood/spectral.hpp"

using namespace spectral_ood;

namespace {

AugmentedPopulation random_population(int n, std::uint64_t seed) {
    Population p;
    p.known_classes = {0, 1, 2};
    for (int i = 0; i < n; ++i) {
        const Membership m = i < 6 ? Membership::LabeledId : (i % 4 == 0 ? Membership::WildSemantic : Membership::WildId);
        p.examples.push_back({i, m == Membership::WildSemantic ? 9 : i % 3, 0, m});
    }
    const Matrix t = oracle::random_nonnegative(n, n, seed);
    return {p, ExplicitAugmentation{t}, t};
}

// Sum over view pairs of -2 A[x,x'] <f,f'> + D[x] D[x'] <f,f'>^2 with A summing to one.
double expansion(const GraphBundle& b, const Matrix& f) {
    double s = 0.0;
    for (Eigen::Index x = 0; x < f.rows(); ++x) {
        for (Eigen::Index y = 0; y < f.rows(); ++y) {
            const double ip = f.row(x).dot(f.row(y));
            s += -2.0 * b.combined(x, y) * ip + b.degrees(x) * b.degrees(y) * ip * ip;
        }
    }
    return s;
}

double weighted_inner(const Matrix& w, const Matrix& f) {
    double s = 0.0;
    for (Eigen::Index x = 0; x < f.rows(); ++x)
        for (Eigen::Index y = 0; y < f.rows(); ++y) s += w(x, y) * f.row(x).dot(f.row(y));
    return s;
}

}  // namespace

TEST(SurrogateLoss, ZeroEmbeddingIsZero) {
    const auto src = build_toy_population(ToyVariant::CaseA, {1.0, 0.03, 0.01, 1e-6});
    const auto l = surrogate_loss(Matrix::Zero(5, 3), src.transform, src.population, {5.0, 1.0});
    for (double v : {l.l1, l.l2, l.l3, l.l4, l.l5, l.total}) EXPECT_EQ(v, 0.0);
}

TEST(SurrogateLoss, MatchesBruteForceExpansion) {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        const auto src = random_population(11, seed);
        const GraphWeights w{2.5, 0.7};
        const auto model = build_graph(src, w);
        const Matrix f = oracle::random_normal(11, 4, seed + 100) * 0.3;
        const auto l = surrogate_loss(f, src.transform, src.population, w);
        EXPECT_NEAR(l.total, expansion(model.bundle, f), 1e-10 * (1.0 + std::abs(l.total)));
    }
}

TEST(SurrogateLoss, PositiveTermsMatchAdjacencies) {
    const auto src = random_population(10, 8);
    const GraphWeights w{3.0, 2.0};
    const Matrix au = oracle::self_supervised(src.transform);
    const Matrix al = oracle::supervised(src.transform, src.population);
    const double c = w.eta_u * au.sum() + w.eta_l * al.sum();
    const Matrix f = oracle::random_normal(10, 3, 21);
    const auto l = surrogate_loss(f, src.transform, src.population, w);
    EXPECT_NEAR(l.l1, weighted_inner(al, f) / c, 1e-12);
    EXPECT_NEAR(l.l2, weighted_inner(au, f) / c, 1e-12);
    EXPECT_GE(l.l3, 0.0);
    EXPECT_GE(l.l4, 0.0);
    EXPECT_GE(l.l5, 0.0);
}

TEST(SurrogateLoss, ToyClosedFormEmbeddingOffset) {
    const auto src = build_toy_population(ToyVariant::CaseA, {1.0, 0.03, 0.01, 1e-6});
    const auto model = build_graph(src, {5.0, 1.0});
    const auto s = eigendecompose(model.bundle.normalized, 3);
    const Matrix z = closed_form_embedding(model.bundle, s);
    const auto l = surrogate_loss(z, src.transform, src.population, model.weights);
    const Matrix f = model.bundle.degrees.cwiseSqrt().asDiagonal() * z;
    EXPECT_NEAR(l.total, matrix_loss(f, model.bundle.normalized) - model.bundle.normalized.squaredNorm(), 1e-12);
}

TEST(SurrogateLoss, ShapeErrors) {
    const auto src = build_toy_population(ToyVariant::CaseA, {1.0, 0.03, 0.01, 1e-6});
    EXPECT_THROW(surrogate_loss(Matrix::Zero(4, 2), src.transform, src.population, {1.0, 1.0}), ConfigError);
}

TEST(MatrixLoss, Basics) {
    const Matrix a = oracle::random_symmetric(6, 2);
    EXPECT_NEAR(matrix_loss(Matrix::Zero(6, 2), a), a.squaredNorm(), 1e-12);
    const Matrix f = oracle::random_normal(6, 3, 3);
    EXPECT_NEAR(matrix_loss(f, f * f.transpose()), 0.0, 1e-24);
    EXPECT_NEAR(matrix_loss(f, a), (a - f * f.transpose()).squaredNorm(), 1e-11);
    EXPECT_THROW(matrix_loss(Matrix::Zero(5, 2), a), ConfigError);
}

TEST(EquivalenceGap, ConstantOffsetOnToysAndRandomBundle) {
    const GraphModel models[] = {
        build_graph(build_toy_population(ToyVariant::CaseA, {1.0, 0.03, 0.01, 1e-6}), {5.0, 1.0}),
        build_graph(build_toy_population(ToyVariant::CaseB, {1.0, 0.03, 0.01, 1e-6}), {5.0, 1.0}),
        build_graph(random_population(12, 19), {1.0, 4.0}),
    };
    for (const auto& m : models) {
        const auto eq = equivalence_gap(m, 3, 10, 1234);
        ASSERT_EQ(eq.gaps.size(), 10u);
        EXPECT_LE(eq.max_gap_spread, 1e-9 * (1.0 + std::abs(eq.gaps.front())));
        EXPECT_NEAR(eq.gaps.front(), eq.constant, 1e-9 * (1.0 + eq.constant));
    }
}

TEST(EquivalenceGap, RepeatedFactorHasZeroSpread) {
    const auto m = build_graph(build_toy_population(ToyVariant::CaseA, {1.0, 0.03, 0.01, 1e-6}), {5.0, 1.0});
    const Matrix f = oracle::random_normal(5, 3, 1);
    EXPECT_EQ(equivalence_gap(m, std::vector<Matrix>{f, f}).max_gap_spread, 0.0);
    EXPECT_THROW(equivalence_gap(m, 3, 1, 0), ConfigError);
}

TEST(EquivalenceGap, UnsupervisedWeightsOnly) {
    const auto m = build_graph(build_toy_population(ToyVariant::CaseA, {1.0, 0.05, 0.02, 1e-6}), {5.0, 0.0});
    const auto eq = equivalence_gap(m, 2, 10, 3);
    EXPECT_LE(eq.max_gap_spread, 1e-9 * (1.0 + std::abs(eq.gaps.front())));
}
