#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "spectral_ood/eval.hpp"
#include "spectral_ood/theory.hpp"

using namespace spectral_ood;

namespace {

const std::vector<int> kTwo{0, 1};

Matrix rows_of(const Matrix& z, std::initializer_list<int> idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), z.cols());
    Eigen::Index r = 0;
    for (int i : idx) out.row(r++) = z.row(i);
    return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST(LinearProbe, OneHotRowsReproduceLabels) {
    Matrix z = Matrix::Zero(6, 3);
    const std::vector<int> labels{0, 1, 2, 2, 1, 0};
    for (int i = 0; i < 6; ++i) z(i, labels[i]) = 1.0;
    const std::vector<int> classes{0, 1, 2};
    const auto probe = fit_linear_probe(z, labels, classes);
    for (int i = 0; i < 6; ++i) {
        const auto p = predict(probe, z.row(i));
        EXPECT_EQ(p.class_label, labels[i]);
        EXPECT_FALSE(p.ambiguous);
    }
    EXPECT_EQ(classification_accuracy(z, labels, probe), 1.0);
}

TEST(LinearProbe, ClosedFormCovariatePredictions) {
    const ReducedParams p{0.04, 0.02, 0.0};
    const auto cf = closed_form_case_a(p);
    const auto probe = fit_linear_probe(rows_of(cf.embedding, {0, 1}), kTwo, kTwo);
    const Matrix yhat = rows_of(cf.embedding, {2, 3}) * probe.weights;
    const double ratio = (1 - p.beta_prime - 1.5 * p.alpha_prime) / (1 - p.beta_prime - 0.75 * p.alpha_prime);
    EXPECT_LE((yhat - ratio * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LinearProbe, NumericCovariatePredictionsNearClosedForm) {
    const ReducedParams p{0.04, 0.02, 1e-6};
    const auto run = run_toy_pipeline(TheoryVariant::CaseA, p);
    const Matrix yhat = rows_of(run.embedding, {2, 3}) * run.probe.weights;
    const double ratio = (1 - p.beta_prime - 1.5 * p.alpha_prime) / (1 - p.beta_prime - 0.75 * p.alpha_prime);
    EXPECT_LE((yhat - ratio * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.05);
    EXPECT_EQ(classification_accuracy(rows_of(run.embedding, {0, 1}), kTwo, run.probe), 1.0);
}

TEST(LinearProbe, RidgeLimitOracle) {
    const Matrix base = oracle::random_normal(3, 5, 14);
    Matrix z(9, 5);
    std::vector<int> labels;
    for (int i = 0; i < 9; ++i) {
        z.row(i) = base.row(i % 3);
        labels.push_back(i % 3 == 2 ? 1 : 0);
    }
    const auto probe = fit_linear_probe(z, labels, kTwo);
    using MatLD = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    Matrix y = Matrix::Zero(9, 2);
    for (int i = 0; i < 9; ++i) y(i, labels[i]) = 1.0;
    const MatLD zl = z.cast<long double>();
    const MatLD ridge = (zl.transpose() * zl + 1e-12L * MatLD::Identity(5, 5)).ldlt().solve(zl.transpose() * y.cast<long double>());
    // Null-space components of M are round-off in the ridge solve; compare on the row space.
    const Matrix mix = oracle::random_normal(4, 3, 15) * base;
    EXPECT_LE((z * probe.weights - z * ridge.cast<double>()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((mix * probe.weights - mix * ridge.cast<double>()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LinearProbe, Errors) {
    const Matrix z = Matrix::Identity(2, 2);
    const std::vector<int> only_zero{0, 0};
    EXPECT_THROW(fit_linear_probe(z, only_zero, kTwo), ConfigError);
    const std::vector<int> unknown{0, 3};
    EXPECT_THROW(fit_linear_probe(z, unknown, kTwo), ConfigError);
    const std::vector<int> short_labels{0};
    EXPECT_THROW(fit_linear_probe(z, short_labels, kTwo), ConfigError);
}

TEST(ProbingError, ToyBranches) {
    EXPECT_EQ(run_toy_pipeline(TheoryVariant::CaseA, {0.04, 0.02, 1e-6}).probing.count, 0);
    const auto bad = run_toy_pipeline(TheoryVariant::CaseA, {0.01, 0.04, 1e-6});
    EXPECT_EQ(bad.probing.count, 2);
    EXPECT_EQ(bad.probing.rate, 1.0);
}

TEST(ProbingError, IdenticalEmbeddingsTieByEnumeration) {
    Matrix z = Matrix::Ones(4, 2);
    const std::vector<int> labels{0, 1, 0, 1};
    const auto probe = fit_linear_probe(z, labels, kTwo);
    int ambiguous = 0;
    for (int i = 0; i < 4; ++i) {
        const auto p = predict(probe, z.row(i));
        EXPECT_EQ(p.class_label, 0);
        ambiguous += p.ambiguous;
    }
    EXPECT_EQ(ambiguous, 4);
    const auto err = probing_error(z, labels, probe);
    EXPECT_EQ(err.count, 4);
    EXPECT_EQ(classification_accuracy(z, labels, probe), 0.0);
}

TEST(ClassificationAccuracy, RandomLabelsNearChance) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n01(0.0, 1.0);
    Matrix z(1000, 4);
    for (int i = 0; i < 1000; ++i)
        for (int j = 0; j < 4; ++j) z(i, j) = n01(rng);
    std::vector<int> labels(1000);
    for (int i = 0; i < 1000; ++i) labels[i] = i % 2;
    std::shuffle(labels.begin(), labels.end(), rng);
    const auto probe = fit_linear_probe(z.topRows(500), std::span(labels).first(500), kTwo);
    const double acc = classification_accuracy(z.bottomRows(500), std::span(labels).last(500), probe);
    EXPECT_NEAR(acc, 0.5, 0.05);
}

TEST(Separability, Basics) {
    Eigen::RowVectorXd r(3);
    r << 0.3, -1.0, 2.0;
    EXPECT_EQ(separability(r, r), 0.0);
    const Matrix a = oracle::random_normal(4, 3, 1);
    const Matrix b = oracle::random_normal(2, 3, 2);
    EXPECT_NEAR(separability(2.5 * a, 2.5 * b), 6.25 * separability(a, b), 1e-12);
    double brute = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) brute += (a.row(i) - b.row(j)).squaredNorm();
    EXPECT_NEAR(separability(a, b), brute / 8.0, 1e-14);
    EXPECT_THROW(separability(Matrix(0, 3), b), ConfigError);
}

TEST(Separability, ToyMatchesTheoremFormula) {
    const ReducedParams p{0.04, 0.02, 1e-6};
    const auto run = run_toy_pipeline(TheoryVariant::CaseA, p);
    const double formula = (7 + 0.24 + 0.48) * ((1 - 0.04) / 3 * std::pow(1 - 0.02 - 0.03, 2) + 1);
    EXPECT_NEAR(run.separability / formula, 1.0, 0.05);
}

TEST(Percentile, LinearInterpolation) {
    EXPECT_DOUBLE_EQ(percentile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.95), 4.8);
    EXPECT_DOUBLE_EQ(percentile({7.0}, 0.3), 7.0);
    EXPECT_THROW(percentile({}, 0.5), ConfigError);
}

TEST(KnnDetector, TightClusterFlagsAboutFivePercent) {
    const int n = 400;
    const Matrix ref = 0.01 * oracle::random_normal(n, 3, 6);
    const auto det = fit_knn_detector(ref, 5, 0.95);
    const auto flagged = std::count_if(det.reference_scores.begin(), det.reference_scores.end(),
                                       [&](double s) { return det.is_out(s); });
    EXPECT_NEAR(static_cast<double>(flagged) / n, 0.05, 1.0 / n + 1e-12);
}

TEST(KnnDetector, SeparatedBlobs) {
    const Matrix blob1 = oracle::random_normal(200, 2, 7);
    Matrix blob2 = oracle::random_normal(200, 2, 8);
    blob2.col(0).array() += 100.0;
    const auto det = fit_knn_detector(blob1, 3, 0.95);
    for (double s : det.score_all(blob2)) EXPECT_GT(s, det.threshold);
}

TEST(KnnDetector, SelfExclusionAndErrors) {
    Matrix ref(3, 1);
    ref << 0.0, 1.0, 3.0;
    const auto det = fit_knn_detector(ref, 1, 0.5);
    EXPECT_EQ(det.reference_scores, (std::vector<double>{1.0, 1.0, 2.0}));
    EXPECT_EQ(det.score(Eigen::RowVectorXd::Constant(1, 0.0)), 0.0);
    EXPECT_THROW(fit_knn_detector(ref, 3, 0.95), ConfigError);
    EXPECT_THROW(fit_knn_detector(ref, 0, 0.95), ConfigError);
    EXPECT_THROW(fit_knn_detector(ref, 1, 1.0), ConfigError);
}

TEST(DetectionMetrics, IdenticalAndSeparatedScores) {
    Matrix ref(4, 1);
    ref << 0.0, 1.0, 2.0, 3.0;
    const auto det = fit_knn_detector(ref, 1, 0.95);
    const std::vector<double> same{0.1, 0.5, 0.9, 0.3};
    EXPECT_DOUBLE_EQ(detection_metrics(same, same, det).auroc, 0.5);
    const std::vector<double> id{0.1, 0.2, 0.3};
    const std::vector<double> ood{5.0, 6.0};
    const auto m = detection_metrics(id, ood, det);
    EXPECT_DOUBLE_EQ(m.auroc, 1.0);
    EXPECT_DOUBLE_EQ(m.fpr95, 0.0);
    EXPECT_DOUBLE_EQ(m.fpr_at_threshold, 0.0);
}

TEST(DetectionMetrics, GaussianAurocOracle) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> id(1000), ood(1000);
    for (auto& v : id) v = n01(rng);
    for (auto& v : ood) v = n01(rng) + 2.0;
    EXPECT_NEAR(auroc(id, ood), normal_cdf(2.0 / std::sqrt(2.0)), 0.02);
}

TEST(DetectionMetrics, TiesCountHalf) {
    const std::vector<double> id{1.0, 2.0};
    const std::vector<double> ood{2.0, 3.0};
    // pairs: (1,2) win, (1,3) win, (2,2) tie, (2,3) win
    EXPECT_DOUBLE_EQ(auroc(id, ood), 3.5 / 4.0);
}
