#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spectral_ood/eval.hpp"
#include "spectral_ood/graph.hpp"
#include "spectral_ood/population.hpp"
#include "spectral_ood/spectral.hpp"
#include "spectral_ood/types.hpp"

namespace spectral_ood {

/// Augmentation probabilities relative to rho: alpha' = alpha/rho,
/// beta' = beta/rho, gamma_ratio = gamma/rho.
struct ReducedParams {
    double alpha_prime = 0.0;
    double beta_prime = 0.0;
    double gamma_ratio = 0.0;

    /// 0 < alpha', beta' < 1 and gamma_ratio >= 0.
    void validate() const;

    /// (9/8) alpha' - beta'; positive in the regime where labels carry over
    /// to the covariate domain.
    double supervised_margin() const { return 9.0 / 8.0 * alpha_prime - beta_prime; }
    /// alpha' - beta'; the same boundary without labels.
    double unsupervised_margin() const { return alpha_prime - beta_prime; }

    ParametricAugmentation augmentation(double rho) const;
};

/// The three toy analyses: panda in its own domain (A), panda in the
/// covariate domain (B), and A without labeled connectivity.
enum class TheoryVariant { CaseA, CaseB, Unsupervised };

std::string_view to_string(TheoryVariant v);
TheoryVariant theory_variant_from_string(std::string_view s);

inline constexpr double kTheoryEtaU = 5.0;
inline constexpr double kTheoryEtaL = 1.0;
inline constexpr int kTheoryRank = 3;

/// Throws DegenerateRegimeError when the relevant margin is within `band`
/// of zero. Case B has no boundary.
void check_regime(TheoryVariant variant, const ReducedParams& p, double band);

/// Case-B auxiliaries evaluated at the 2nd and 3rd eigenvalues; `norms`
/// holds the diagonal of R.
struct CaseBAuxiliary {
    double a2 = 0.0;
    double b2 = 0.0;
    double c3 = 0.0;
    Eigen::Vector3d norms = Eigen::Vector3d::Zero();
};

/// Closed-form toy analysis at first order in alpha', beta' with gamma = 0.
struct ClosedFormPrediction {
    TheoryVariant variant = TheoryVariant::CaseA;
    Vector eigenvalues;          // all five, descending
    Matrix eigenbasis;           // 5 x 3, one valid basis
    int degenerate_block = 0;    // leading columns sharing eigenvalue 1 (0 when none)
    Matrix top_projector;        // onto span(eigenbasis)
    Matrix embedding;            // 5 x 3 closed-form features D^{-1/2} V sqrt(Lambda)
    int probing_error_count = 0;
    double separability = 0.0;
    double normalizer = 0.0;     // C-hat in units of rho^2
    std::optional<CaseBAuxiliary> case_b;
};

/// Case-B eigenvector auxiliaries.
double case_b_a(double lambda, const ReducedParams& p);
double case_b_b(double lambda, const ReducedParams& p);
double case_b_c(double lambda, const ReducedParams& p);

/// Case-B eigenvalues (descending) from the closed-form quadratics.
Vector case_b_eigenvalues(const ReducedParams& p);

/// First-order normalized adjacency the closed forms diagonalize.
Matrix approximate_normalized_adjacency(TheoryVariant variant, const ReducedParams& p);

/// Separability formulas; case A and unsupervised pick the branch by the
/// sign of their margin (the first branch on a zero margin).
double case_a_separability(const ReducedParams& p);
double case_b_separability(const ReducedParams& p);
double unsupervised_separability(const ReducedParams& p);

ClosedFormPrediction closed_form_case_a(const ReducedParams& p);
ClosedFormPrediction closed_form_case_b(const ReducedParams& p);
ClosedFormPrediction closed_form_unsupervised(const ReducedParams& p);
ClosedFormPrediction closed_form(TheoryVariant variant, const ReducedParams& p);

struct SeparabilityGap {
    double s_case_a = 0.0;
    double s_case_b = 0.0;
    double s_unsup = 0.0;
    double gap_ab = 0.0;     // S(f) - S(f1)
    double gap_label = 0.0;  // S(f) - S(f^(u))
};

SeparabilityGap separability_gap(const ReducedParams& p);

/// The exact numeric chain on a toy population: graph, spectrum, embedding,
/// probe fitted on the labeled rows, metrics.
struct ToyPipeline {
    AugmentedPopulation source;
    GraphWeights weights;
    GraphBundle bundle;
    SpectralEmbedding spectral;
    Matrix embedding;
    LinearProbe probe;
    ErrorCount probing;
    double separability = 0.0;
};

ToyPipeline run_toy_pipeline(TheoryVariant variant, const ReducedParams& p, double rho = 1.0,
                             int k = kTheoryRank);

struct QuantityComparison {
    std::string name;
    double closed = 0.0;
    double numeric = 0.0;
    double abs_dev = 0.0;
    double rel_dev = 0.0;
};

struct VerificationReport {
    TheoryVariant variant = TheoryVariant::CaseA;
    ReducedParams params;
    double rho = 1.0;
    std::vector<QuantityComparison> quantities;
    Vector eigenvalues_closed;
    Vector eigenvalues_numeric;
    double eig_dev_max = 0.0;          // over all five eigenvalues
    int probing_error_count_closed = 0;
    int probing_error_count_numeric = 0;
    double separability_closed = 0.0;
    double separability_numeric = 0.0;
    double projector_dev_pair = 0.0;   // leading 2-dimensional block
    double projector_dev_third = 0.0;  // third eigenvector
    double projector_dev = 0.0;        // max of the two
};

/// Runs the numeric pipeline at finite (rho, alpha, beta, gamma) and
/// compares it quantity by quantity with the closed forms. Throws
/// ConfigError when the toy graph is disconnected.
VerificationReport verify_against_pipeline(TheoryVariant variant, const ReducedParams& p, double rho = 1.0);

}  // namespace spectral_ood
