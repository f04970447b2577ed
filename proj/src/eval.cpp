#include "spectral_ood/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectral_ood/jacobi.hpp"

namespace spectral_ood {

LinearProbe fit_linear_probe(const Matrix& embeddings, std::span<const int> labels, std::span<const int> classes,
                             double pinv_tolerance) {
    if (embeddings.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw ConfigError("linear probe: one label per embedding row required");
    }
    if (classes.empty()) throw ConfigError("linear probe: empty class list");
    Matrix targets = Matrix::Zero(embeddings.rows(), static_cast<Eigen::Index>(classes.size()));
    std::vector<int> counts(classes.size(), 0);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const auto it = std::find(classes.begin(), classes.end(), labels[r]);
        if (it == classes.end()) throw ConfigError("linear probe: label " + std::to_string(labels[r]) + " is not a known class");
        const auto col = it - classes.begin();
        targets(static_cast<Eigen::Index>(r), col) = 1.0;
        ++counts[static_cast<std::size_t>(col)];
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (counts[c] == 0) throw ConfigError("linear probe: class " + std::to_string(classes[c]) + " has no examples");
    }
    LinearProbe probe;
    probe.classes.assign(classes.begin(), classes.end());
    probe.pinv_tolerance = pinv_tolerance;
    const Matrix gram = embeddings.transpose() * embeddings;
    probe.weights = symmetric_pinv(gram, pinv_tolerance) * embeddings.transpose() * targets;
    return probe;
}

Prediction predict(const LinearProbe& probe, const Eigen::RowVectorXd& embedding) {
    const Eigen::RowVectorXd scores = embedding * probe.weights;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i) {
        if (scores(i) > scores(best)) best = i;
    }
    const double slack = probe.tie_tolerance * std::max(1.0, std::abs(scores(best)));
    int tied = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (scores(i) >= scores(best) - slack) ++tied;
    }
    // Lowest position among the tied maxima.
    Eigen::Index first = best;
    for (Eigen::Index i = 0; i < best; ++i) {
        if (scores(i) >= scores(best) - slack) {
            first = i;
            break;
        }
    }
    return {probe.classes[static_cast<std::size_t>(first)], tied > 1};
}

ErrorCount probing_error(const Matrix& embeddings, std::span<const int> labels, const LinearProbe& probe) {
    if (embeddings.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw ConfigError("probing error: one label per embedding row required");
    }
    ErrorCount out;
    for (Eigen::Index r = 0; r < embeddings.rows(); ++r) {
        const auto p = predict(probe, embeddings.row(r));
        if (p.ambiguous || p.class_label != labels[static_cast<std::size_t>(r)]) ++out.count;
    }
    out.rate = embeddings.rows() ? static_cast<double>(out.count) / static_cast<double>(embeddings.rows()) : 0.0;
    return out;
}

double classification_accuracy(const Matrix& embeddings, std::span<const int> labels, const LinearProbe& probe) {
    if (embeddings.rows() == 0) return 0.0;
    return 1.0 - probing_error(embeddings, labels, probe).rate;
}

double separability(const Matrix& id_embeddings, const Matrix& semantic_embeddings) {
    if (id_embeddings.rows() == 0 || semantic_embeddings.rows() == 0) {
        throw ConfigError("separability: both ID and semantic sets must be nonempty");
    }
    if (id_embeddings.cols() != semantic_embeddings.cols()) throw ConfigError("separability: dimension mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < id_embeddings.rows(); ++i) {
        for (Eigen::Index j = 0; j < semantic_embeddings.rows(); ++j) {
            sum += (id_embeddings.row(i) - semantic_embeddings.row(j)).squaredNorm();
        }
    }
    return sum / static_cast<double>(id_embeddings.rows() * semantic_embeddings.rows());
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw ConfigError("percentile of an empty list");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("percentile must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

double kth_distance(const Matrix& reference, const Eigen::RowVectorXd& query, int k, Eigen::Index skip) {
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(reference.rows()));
    for (Eigen::Index r = 0; r < reference.rows(); ++r) {
        if (r == skip) continue;
        d.push_back((reference.row(r) - query).norm());
    }
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    return d[static_cast<std::size_t>(k - 1)];
}

}  // namespace

double KnnDetector::score(const Eigen::RowVectorXd& query) const {
    return kth_distance(reference, query, k_neighbors, -1);
}

std::vector<double> KnnDetector::score_all(const Matrix& queries) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index r = 0; r < queries.rows(); ++r) out.push_back(score(queries.row(r)));
    return out;
}

KnnDetector fit_knn_detector(const Matrix& reference, int k_neighbors, double pct) {
    if (k_neighbors < 1) throw ConfigError("knn detector: k_neighbors must be positive");
    if (k_neighbors >= reference.rows()) {
        throw ConfigError("knn detector: k_neighbors=" + std::to_string(k_neighbors) +
                          " must be smaller than the reference count " + std::to_string(reference.rows()));
    }
    if (!(pct > 0.0 && pct < 1.0)) throw ConfigError("knn detector: percentile must lie in (0, 1)");
    KnnDetector det;
    det.reference = reference;
    det.k_neighbors = k_neighbors;
    det.percentile = pct;
    for (Eigen::Index r = 0; r < reference.rows(); ++r) {
        det.reference_scores.push_back(kth_distance(reference, reference.row(r), k_neighbors, r));
    }
    det.threshold = percentile(det.reference_scores, pct);
    return det;
}

double auroc(std::span<const double> scores_id, std::span<const double> scores_ood) {
    if (scores_id.empty() || scores_ood.empty()) throw ConfigError("auroc: both score lists must be nonempty");
    struct Entry {
        double score;
        bool ood;
    };
    std::vector<Entry> all;
    for (double s : scores_id) all.push_back({s, false});
    for (double s : scores_ood) all.push_back({s, true});
    std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });
    double rank_sum_ood = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
        for (std::size_t t = i; t < j; ++t) {
            if (all[t].ood) rank_sum_ood += midrank;
        }
        i = j;
    }
    const double n_id = static_cast<double>(scores_id.size());
    const double n_ood = static_cast<double>(scores_ood.size());
    return (rank_sum_ood - n_ood * (n_ood + 1.0) / 2.0) / (n_id * n_ood);
}

DetectionMetrics detection_metrics(std::span<const double> scores_id, std::span<const double> scores_ood,
                                   const KnnDetector& detector) {
    if (scores_id.empty() || scores_ood.empty()) {
        throw ConfigError("detection metrics: both score lists must be nonempty");
    }
    auto accepted_fraction = [&](double threshold) {
        const auto n = std::count_if(scores_ood.begin(), scores_ood.end(), [&](double s) { return s <= threshold; });
        return static_cast<double>(n) / static_cast<double>(scores_ood.size());
    };
    DetectionMetrics m;
    m.fpr_at_threshold = accepted_fraction(detector.threshold);
    m.fpr95 = accepted_fraction(percentile({scores_id.begin(), scores_id.end()}, 0.95));
    m.auroc = auroc(scores_id, scores_ood);
    return m;
}

}  // namespace spectral_ood
