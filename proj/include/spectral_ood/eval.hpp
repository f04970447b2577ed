#pragma once

#include <span>
#include <vector>

#include "spectral_ood/types.hpp"

namespace spectral_ood {

/// Least-squares linear head M = (Z^T Z)^+ Z^T Y over one-hot targets.
struct LinearProbe {
    Matrix weights;            // k x |classes|
    std::vector<int> classes;  // column order of `weights`
    double pinv_tolerance = 1e-10;
    double tie_tolerance = 1e-9;  // relative; scores this close to the max are tied
};

struct Prediction {
    int class_label = 0;     // argmax, lowest class position on ties
    bool ambiguous = false;  // more than one class attains the max
};

/// Throws ConfigError when a class in `classes` has no row, or a label is
/// outside `classes`.
LinearProbe fit_linear_probe(const Matrix& embeddings, std::span<const int> labels, std::span<const int> classes,
                             double pinv_tolerance = 1e-10);

Prediction predict(const LinearProbe& probe, const Eigen::RowVectorXd& embedding);

struct ErrorCount {
    double rate = 0.0;
    int count = 0;
};

/// Misclassification of the probe on the given rows. An ambiguous argmax
/// counts as an error: no decision separates the tied classes.
ErrorCount probing_error(const Matrix& embeddings, std::span<const int> labels, const LinearProbe& probe);

/// Fraction of rows predicted unambiguously and correctly.
double classification_accuracy(const Matrix& embeddings, std::span<const int> labels, const LinearProbe& probe);

/// Mean squared Euclidean distance over all (ID, semantic) row pairs.
double separability(const Matrix& id_embeddings, const Matrix& semantic_embeddings);

/// Linear interpolation between order statistics at h = (n - 1) p.
double percentile(std::vector<double> values, double p);

/// Distance to the k-th nearest clean-ID embedding; larger means more OOD.
struct KnnDetector {
    Matrix reference;
    int k_neighbors = 1;
    double percentile = 0.95;
    double threshold = 0.0;
    std::vector<double> reference_scores;  // self-excluded

    double score(const Eigen::RowVectorXd& query) const;
    std::vector<double> score_all(const Matrix& queries) const;
    bool is_out(double score) const { return score > threshold; }
};

KnnDetector fit_knn_detector(const Matrix& reference, int k_neighbors, double percentile = 0.95);

struct DetectionMetrics {
    double fpr_at_threshold = 0.0;
    double fpr95 = 0.0;
    double auroc = 0.0;
};

/// ID is the positive class. FPR counts semantic-OOD scores accepted as ID
/// (score <= threshold). AUROC is the Mann-Whitney statistic with midranks.
DetectionMetrics detection_metrics(std::span<const double> scores_id, std::span<const double> scores_ood,
                                   const KnnDetector& detector);

/// P(ood score > id score) + P(tie) / 2.
double auroc(std::span<const double> scores_id, std::span<const double> scores_ood);

struct MetricsReport {
    double id_acc = 0.0;
    double ood_acc = 0.0;
    double probing_error_rate = 0.0;
    int probing_error_count = 0;
    double separability = 0.0;
    double fpr_at_threshold = 0.0;
    double fpr95 = 0.0;
    double auroc = 0.0;
};

}  // namespace spectral_ood
