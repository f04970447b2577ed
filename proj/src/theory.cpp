#include "spectral_ood/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spectral_ood/jacobi.hpp"

namespace spectral_ood {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);
const double kSqrt6 = std::sqrt(6.0);
const double kSqrt7 = std::sqrt(7.0);

Matrix basis_from_columns(std::initializer_list<Vector> cols) {
    Matrix m(5, static_cast<Eigen::Index>(cols.size()));
    Eigen::Index j = 0;
    for (const auto& c : cols) m.col(j++) = c;
    return m;
}

Vector vec5(double a, double b, double c, double d, double e) {
    Vector v(5);
    v << a, b, c, d, e;
    return v;
}

Vector sorted_descending(Vector v) {
    std::sort(v.data(), v.data() + v.size(), std::greater<>());
    return v;
}

// Z = D^{-1/2} V sqrt(Lambda) with the first-order D^{-1/2}.
Matrix features(const Vector& inv_sqrt_degree, const Matrix& basis, const Eigen::Vector3d& lambdas) {
    return inv_sqrt_degree.asDiagonal() * basis * lambdas.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

double toy_separability(const Matrix& z) {
    return separability(z.topRows(2), z.bottomRows(1));
}

void finish(ClosedFormPrediction& out) {
    out.top_projector = out.eigenbasis * out.eigenbasis.transpose();
}

}  // namespace

void ReducedParams::validate() const {
    if (!(alpha_prime > 0.0 && alpha_prime < 1.0 && beta_prime > 0.0 && beta_prime < 1.0)) {
        throw ConfigError("reduced parameters require 0 < alpha', beta' < 1");
    }
    if (!(gamma_ratio >= 0.0) || !std::isfinite(gamma_ratio)) throw ConfigError("gamma ratio must be >= 0");
}

ParametricAugmentation ReducedParams::augmentation(double rho) const {
    return {rho, alpha_prime * rho, beta_prime * rho, gamma_ratio * rho};
}

std::string_view to_string(TheoryVariant v) {
    switch (v) {
        case TheoryVariant::CaseA: return "a";
        case TheoryVariant::CaseB: return "b";
        case TheoryVariant::Unsupervised: return "unsup";
    }
    return "unknown";
}

TheoryVariant theory_variant_from_string(std::string_view s) {
    if (s == "a") return TheoryVariant::CaseA;
    if (s == "b") return TheoryVariant::CaseB;
    if (s == "unsup") return TheoryVariant::Unsupervised;
    throw ConfigError("unknown variant '" + std::string(s) + "' (expected a, b or unsup)");
}

void check_regime(TheoryVariant variant, const ReducedParams& p, double band) {
    double margin = 0.0;
    const char* what = "";
    switch (variant) {
        case TheoryVariant::CaseA:
            margin = p.supervised_margin();
            what = "(9/8)alpha' - beta'";
            break;
        case TheoryVariant::Unsupervised:
            margin = p.unsupervised_margin();
            what = "alpha' - beta'";
            break;
        case TheoryVariant::CaseB: return;
    }
    if (std::abs(margin) <= band) {
        std::ostringstream msg;
        msg << "degenerate regime: |" << what << "| = " << std::abs(margin) << " <= " << band;
        throw DegenerateRegimeError(msg.str());
    }
}

double case_b_a(double lambda, const ReducedParams& p) {
    return kSqrt2 * (1.0 - 6.0 * p.beta_prime - lambda) / (8.0 * p.beta_prime);
}

double case_b_b(double lambda, const ReducedParams& p) {
    return (4.0 * p.beta_prime - 1.0 + lambda) / (4.0 * p.beta_prime);
}

double case_b_c(double lambda, const ReducedParams& p) {
    return kSqrt2 * (1.0 - 3.0 * p.alpha_prime - 6.0 * p.beta_prime - lambda) / (3.0 * p.alpha_prime);
}

namespace {

// Symmetric (a, b) family and antisymmetric (c) family, each as (+root, -root).
struct CaseBRoots {
    double sym_hi, anti_hi, sym_lo, anti_lo;
};

CaseBRoots case_b_roots(const ReducedParams& p) {
    const double a = p.alpha_prime, b = p.beta_prime;
    const double sym = kSqrt3 * std::sqrt(27.0 * a * a - 40.0 * a * b + 48.0 * b * b);
    const double anti = std::sqrt(81.0 * a * a + 24.0 * a * b + 16.0 * b * b);
    return {1.0 - 3.0 * b + (sym - 9.0 * a) / 4.0, 1.0 - 5.0 * b + (anti - 9.0 * a) / 4.0,
            1.0 - 3.0 * b - (sym + 9.0 * a) / 4.0, 1.0 - 5.0 * b - (anti + 9.0 * a) / 4.0};
}

}  // namespace

Vector case_b_eigenvalues(const ReducedParams& p) {
    const auto r = case_b_roots(p);
    return sorted_descending(vec5(1.0, r.sym_hi, r.anti_hi, r.sym_lo, r.anti_lo));
}

Matrix approximate_normalized_adjacency(TheoryVariant variant, const ReducedParams& p) {
    const double a = p.alpha_prime, b = p.beta_prime;
    Matrix m = Matrix::Zero(5, 5);
    if (variant == TheoryVariant::Unsupervised) {
        const double d = 1.0 - 2.0 * b - 2.0 * a;
        m << d, 2 * b, 2 * a, 0, 0,
             2 * b, d, 0, 2 * a, 0,
             2 * a, 0, d, 2 * b, 0,
             0, 2 * a, 2 * b, d, 0,
             0, 0, 0, 0, 1;
        return m;
    }
    const double cross = 3.0 / kSqrt2 * a;
    const double id_diag = 1.0 - 2.0 * b - 1.5 * a;
    if (variant == TheoryVariant::CaseA) {
        const double cov_diag = 1.0 - 2.0 * b - 3.0 * a;
        m << id_diag, 2 * b, cross, 0, 0,
             2 * b, id_diag, 0, cross, 0,
             cross, 0, cov_diag, 2 * b, 0,
             0, cross, 2 * b, cov_diag, 0,
             0, 0, 0, 0, 1;
        return m;
    }
    const double cov_diag = 1.0 - 4.0 * b - 3.0 * a;
    m << id_diag, 2 * b, cross, 0, 0,
         2 * b, id_diag, 0, cross, 0,
         cross, 0, cov_diag, 2 * b, 2 * b,
         0, cross, 2 * b, cov_diag, 2 * b,
         0, 0, 2 * b, 2 * b, 1.0 - 4.0 * b;
    return m;
}

double case_a_separability(const ReducedParams& p) {
    const double a = p.alpha_prime, b = p.beta_prime;
    const double c = 7.0 + 12.0 * b + 12.0 * a;
    const double q = std::pow(1.0 - b - 0.75 * a, 2);
    if (p.supervised_margin() >= 0.0) return c * ((1.0 - 2.0 * b) / 3.0 * q + 1.0);
    return c * ((2.0 - 3.0 * a) / 8.0 * q + 1.0);
}

double unsupervised_separability(const ReducedParams& p) {
    const double a = p.alpha_prime, b = p.beta_prime;
    const double c = 5.0 + 8.0 * b + 8.0 * a;
    const double q = std::pow(1.0 - a - b, 2);
    // Third feature carries sqrt(1 - 4 beta') (alpha' > beta') or sqrt(1 - 4 alpha').
    const double third = p.unsupervised_margin() >= 0.0 ? b : a;
    return c * (q * (1.0 - 2.0 * third) / 2.0 + 1.0);
}

double case_b_separability(const ReducedParams& p) {
    return closed_form_case_b(p).separability;
}

ClosedFormPrediction closed_form_case_a(const ReducedParams& p) {
    p.validate();
    check_regime(TheoryVariant::CaseA, p, 1e-9);
    const double a = p.alpha_prime, b = p.beta_prime;
    ClosedFormPrediction out;
    out.variant = TheoryVariant::CaseA;
    out.eigenvalues = sorted_descending(vec5(1.0, 1.0, 1.0 - 4.0 * b, 1.0 - 4.5 * a, 1.0 - 4.0 * b - 4.5 * a));
    out.degenerate_block = 2;
    out.normalizer = 7.0 + 12.0 * b + 12.0 * a;

    const Vector v1 = vec5(kSqrt2, kSqrt2, 1, 1, 0) / kSqrt6;
    const Vector v2 = vec5(0, 0, 0, 0, 1);
    const bool transfers = p.supervised_margin() > 0.0;
    const Vector v3 = transfers ? Vector(vec5(-kSqrt2, kSqrt2, -1, 1, 0) / kSqrt6)
                                : Vector(vec5(-1, -1, kSqrt2, kSqrt2, 0) / kSqrt6);
    const double lambda3 = transfers ? 1.0 - 4.0 * b : 1.0 - 4.5 * a;
    out.eigenbasis = basis_from_columns({v1, v2, v3});
    out.probing_error_count = transfers ? 0 : 2;

    const double id = (1.0 - b - 0.75 * a) / kSqrt2;
    const double cov = 1.0 - b - 1.5 * a;
    const Vector inv_sqrt_degree = std::sqrt(out.normalizer) * vec5(id, id, cov, cov, 1.0);
    out.embedding = features(inv_sqrt_degree, out.eigenbasis, {1.0, 1.0, lambda3});
    out.separability = case_a_separability(p);
    finish(out);
    return out;
}

ClosedFormPrediction closed_form_case_b(const ReducedParams& p) {
    p.validate();
    const double a = p.alpha_prime, b = p.beta_prime;
    ClosedFormPrediction out;
    out.variant = TheoryVariant::CaseB;
    out.eigenvalues = case_b_eigenvalues(p);
    out.normalizer = 7.0 + 20.0 * b + 12.0 * a;

    const auto roots = case_b_roots(p);
    CaseBAuxiliary aux;
    aux.a2 = case_b_a(roots.sym_hi, p);
    aux.b2 = case_b_b(roots.sym_hi, p);
    aux.c3 = case_b_c(roots.anti_hi, p);
    aux.norms << 1.0 / kSqrt7, 1.0 / std::sqrt(2.0 * aux.a2 * aux.a2 + 2.0 * aux.b2 * aux.b2 + 1.0),
        1.0 / std::sqrt(2.0 * aux.c3 * aux.c3 + 2.0);
    out.case_b = aux;

    Matrix basis = basis_from_columns({vec5(kSqrt2, kSqrt2, 1, 1, 1), vec5(aux.a2, aux.a2, aux.b2, aux.b2, 1),
                                       vec5(aux.c3, -aux.c3, -1, 1, 0)}) *
                   aux.norms.asDiagonal();
    Eigen::Vector3d lambdas(1.0, roots.sym_hi, roots.anti_hi);
    if (roots.anti_hi > roots.sym_hi) {
        basis.col(1).swap(basis.col(2));
        std::swap(lambdas(1), lambdas(2));
    }
    out.eigenbasis = basis;
    out.probing_error_count = 0;

    const double id = (1.0 - b - 0.75 * a) / kSqrt2;
    const double cov = 1.0 - 2.0 * b - 1.5 * a;
    const Vector inv_sqrt_degree = std::sqrt(out.normalizer) * vec5(id, id, cov, cov, 1.0 - 2.0 * b);
    out.embedding = features(inv_sqrt_degree, out.eigenbasis, lambdas);
    out.separability = toy_separability(out.embedding);
    finish(out);
    return out;
}

ClosedFormPrediction closed_form_unsupervised(const ReducedParams& p) {
    p.validate();
    check_regime(TheoryVariant::Unsupervised, p, 1e-9);
    const double a = p.alpha_prime, b = p.beta_prime;
    ClosedFormPrediction out;
    out.variant = TheoryVariant::Unsupervised;
    out.eigenvalues = sorted_descending(vec5(1.0, 1.0, 1.0 - 4.0 * b, 1.0 - 4.0 * a, 1.0 - 4.0 * a - 4.0 * b));
    out.degenerate_block = 2;
    out.normalizer = 5.0 + 8.0 * b + 8.0 * a;

    const Vector v1 = vec5(1, 1, 1, 1, 0) / 2.0;
    const Vector v2 = vec5(0, 0, 0, 0, 1);
    const bool transfers = p.unsupervised_margin() > 0.0;
    const Vector v3 = transfers ? Vector(vec5(-1, 1, -1, 1, 0) / 2.0) : Vector(vec5(-1, -1, 1, 1, 0) / 2.0);
    const double lambda3 = transfers ? 1.0 - 4.0 * b : 1.0 - 4.0 * a;
    out.eigenbasis = basis_from_columns({v1, v2, v3});
    out.probing_error_count = transfers ? 0 : 2;

    const double d = 1.0 - a - b;
    const Vector inv_sqrt_degree = std::sqrt(out.normalizer) * vec5(d, d, d, d, 1.0);
    out.embedding = features(inv_sqrt_degree, out.eigenbasis, {1.0, 1.0, lambda3});
    out.separability = unsupervised_separability(p);
    finish(out);
    return out;
}

ClosedFormPrediction closed_form(TheoryVariant variant, const ReducedParams& p) {
    switch (variant) {
        case TheoryVariant::CaseA: return closed_form_case_a(p);
        case TheoryVariant::CaseB: return closed_form_case_b(p);
        case TheoryVariant::Unsupervised: return closed_form_unsupervised(p);
    }
    throw ConfigError("unknown variant");
}

SeparabilityGap separability_gap(const ReducedParams& p) {
    p.validate();
    SeparabilityGap g;
    g.s_case_a = case_a_separability(p);
    g.s_case_b = case_b_separability(p);
    g.s_unsup = unsupervised_separability(p);
    g.gap_ab = g.s_case_a - g.s_case_b;
    g.gap_label = g.s_case_a - g.s_unsup;
    return g;
}

ToyPipeline run_toy_pipeline(TheoryVariant variant, const ReducedParams& p, double rho, int k) {
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    ToyPipeline out;
    const auto toy = variant == TheoryVariant::CaseB ? ToyVariant::CaseB : ToyVariant::CaseA;
    out.source = build_toy_population(toy, p.augmentation(rho));
    out.weights = {kTheoryEtaU, variant == TheoryVariant::Unsupervised ? 0.0 : kTheoryEtaL};
    const auto model = build_graph(out.source, out.weights);
    out.bundle = model.bundle;
    if (!is_connected(out.bundle.combined)) {
        throw ConfigError("toy graph is disconnected (alpha, beta and gamma all zero?)");
    }
    out.spectral = eigendecompose(out.bundle.normalized, k);
    out.embedding = closed_form_embedding(out.bundle, out.spectral);

    const auto& pop = out.source.population;
    auto rows = [&](const std::vector<int>& idx) {
        Matrix m(static_cast<Eigen::Index>(idx.size()), out.embedding.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = out.embedding.row(idx[i]);
        return m;
    };
    auto labels = [&](const std::vector<int>& idx) {
        std::vector<int> l;
        for (int i : idx) l.push_back(pop.examples[static_cast<std::size_t>(i)].class_label);
        return l;
    };
    const auto labeled = pop.indices_of(Membership::LabeledId);
    const auto covariate = pop.indices_of(Membership::WildCovariate);
    const auto semantic = pop.indices_of(Membership::WildSemantic);
    out.probe = fit_linear_probe(rows(labeled), labels(labeled), pop.known_classes);
    out.probing = probing_error(rows(covariate), labels(covariate), out.probe);
    out.separability = separability(rows(labeled), rows(semantic));
    return out;
}

VerificationReport verify_against_pipeline(TheoryVariant variant, const ReducedParams& p, double rho) {
    const auto numeric = run_toy_pipeline(variant, p, rho, kTheoryRank);
    const auto closed = closed_form(variant, p);

    VerificationReport r;
    r.variant = variant;
    r.params = p;
    r.rho = rho;
    r.eigenvalues_closed = closed.eigenvalues;
    r.eigenvalues_numeric = numeric.spectral.eigenvalues;
    r.probing_error_count_closed = closed.probing_error_count;
    r.probing_error_count_numeric = numeric.probing.count;
    r.separability_closed = closed.separability;
    r.separability_numeric = numeric.separability;

    auto add = [&](std::string name, double c, double n) {
        const double abs_dev = std::abs(n - c);
        const double rel_dev = c != 0.0 ? abs_dev / std::abs(c) : abs_dev;
        r.quantities.push_back({std::move(name), c, n, abs_dev, rel_dev});
    };
    for (Eigen::Index i = 0; i < 5; ++i) {
        add("eigenvalue_" + std::to_string(i + 1), r.eigenvalues_closed(i), r.eigenvalues_numeric(i));
        r.eig_dev_max = std::max(r.eig_dev_max, std::abs(r.eigenvalues_closed(i) - r.eigenvalues_numeric(i)));
    }
    add("probing_error_count", closed.probing_error_count, numeric.probing.count);
    add("separability", closed.separability, numeric.separability);

    const Matrix& vn = numeric.spectral.basis;
    const Matrix& vc = closed.eigenbasis;
    r.projector_dev_pair = (column_projector(vn.leftCols(2)) - column_projector(vc.leftCols(2))).norm();
    r.projector_dev_third = (column_projector(vn.col(2)) - column_projector(vc.col(2))).norm();
    r.projector_dev = std::max(r.projector_dev_pair, r.projector_dev_third);
    add("projector_dev_pair", 0.0, r.projector_dev_pair);
    add("projector_dev_third", 0.0, r.projector_dev_third);
    return r;
}

}  // namespace spectral_ood
