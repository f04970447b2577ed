#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "spectral_ood/eval.hpp"
#include "spectral_ood/graph.hpp"
#include "spectral_ood/io.hpp"
#include "spectral_ood/loss.hpp"
#include "spectral_ood/spectral.hpp"
#include "spectral_ood/theory.hpp"

namespace spectral_ood::cli {

namespace fs = std::filesystem;

namespace {

// Measured constant of the second-order eigenvalue error of the first-order
// closed forms (worst case ~56 for case b on [0.01, 0.1]^2).
constexpr double kEigenSecondOrder = 60.0;
constexpr double kSeparabilityTolerance = 0.05;
constexpr double kBoundaryBand = 0.005;

struct Global {
    std::string config;
    std::uint64_t seed = 0;
    std::string out = ".";
    double tolerance_scale = 1.0;
};

struct ToyArgs {
    std::string variant = "a";
    double alpha_prime = 0.03;
    double beta_prime = 0.01;
    double gamma_ratio = 1e-6;
    double rho = 1.0;

    ReducedParams reduced() const { return {alpha_prime, beta_prime, gamma_ratio}; }
};

struct GraphArgs {
    double eta_u = kTheoryEtaU;
    double eta_l = kTheoryEtaL;
    int k = kTheoryRank;
};

Json resolved_base(const char* command, const Global& g) {
    Json j;
    j["command"] = command;
    j["seed"] = g.seed;
    j["tolerance_scale"] = g.tolerance_scale;
    return j;
}

Json toy_json(const ToyArgs& t) {
    return {{"variant", t.variant},
            {"alpha_prime", t.alpha_prime},
            {"beta_prime", t.beta_prime},
            {"gamma_ratio", t.gamma_ratio},
            {"rho", t.rho}};
}

Json vector_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

void add_toy_options(CLI::App* cmd, ToyArgs& t, bool with_unsup) {
    cmd->add_option("--variant", t.variant, "toy variant")
        ->check(with_unsup ? CLI::IsMember({"a", "b", "unsup"}) : CLI::IsMember({"a", "b"}));
    cmd->add_option("--alpha-prime", t.alpha_prime, "alpha / rho");
    cmd->add_option("--beta-prime", t.beta_prime, "beta / rho");
    cmd->add_option("--gamma-ratio", t.gamma_ratio, "gamma / rho");
    cmd->add_option("--rho", t.rho, "same-class same-domain probability");
}

void add_graph_options(CLI::App* cmd, GraphArgs& g) {
    cmd->add_option("--eta-u", g.eta_u, "self-supervised weight");
    cmd->add_option("--eta-l", g.eta_l, "supervised weight");
    cmd->add_option("-k,--rank", g.k, "embedding dimension");
}

// Population graph from --config, or the toy population otherwise.
struct Source {
    GraphModel model;
    Json description;
};

Source load_source(const Global& g, const ToyArgs& toy, const GraphArgs& ga) {
    Source s;
    GraphWeights weights{ga.eta_u, ga.eta_l};
    weights.validate();
    AugmentedPopulation pop;
    if (!g.config.empty()) {
        const auto config = load_population_config(g.config);
        pop = materialize(config, g.seed);
        s.description["population"] = config.raw;
    } else {
        const auto variant = theory_variant_from_string(toy.variant);
        const ReducedParams p = toy.reduced();
        p.validate();
        if (!(toy.rho > 0.0)) throw ConfigError("--rho must be positive");
        pop = build_toy_population(variant == TheoryVariant::CaseB ? ToyVariant::CaseB : ToyVariant::CaseA,
                                   p.augmentation(toy.rho));
        if (variant == TheoryVariant::Unsupervised) weights.eta_l = 0.0;
        s.description["toy"] = toy_json(toy);
    }
    s.description["eta_u"] = weights.eta_u;
    s.description["eta_l"] = weights.eta_l;
    s.description["k"] = ga.k;
    s.model = build_graph(pop, weights);
    return s;
}

fs::path out_path(const Global& g, const std::string& name) {
    return fs::path(g.out) / name;
}

// ---------------------------------------------------------------- toy-verify

int cmd_toy_verify(const Global& g, const ToyArgs& t) {
    const auto variant = theory_variant_from_string(t.variant);
    const ReducedParams p = t.reduced();
    p.validate();
    check_regime(variant, p, kBoundaryBand);
    const auto report = verify_against_pipeline(variant, p, t.rho);

    const double m = std::max(p.alpha_prime, p.beta_prime);
    const double eig_tol = kEigenSecondOrder * (m * m + p.gamma_ratio) * g.tolerance_scale;
    const double sep_tol = kSeparabilityTolerance * g.tolerance_scale;
    const double sep_rel = std::abs(report.separability_numeric - report.separability_closed) /
                           std::abs(report.separability_closed);
    const bool count_ok = report.probing_error_count_closed == report.probing_error_count_numeric;
    const bool sep_ok = sep_rel <= sep_tol;
    const bool eig_ok = report.eig_dev_max <= eig_tol;
    const bool pass = count_ok && sep_ok && eig_ok;

    std::cout << "toy-verify variant=" << t.variant << " alpha'=" << p.alpha_prime << " beta'=" << p.beta_prime
              << " gamma/rho=" << p.gamma_ratio << "\n";
    std::cout << std::left << std::setw(22) << "quantity" << std::setw(16) << "closed" << std::setw(16)
              << "numeric" << std::setw(14) << "abs_dev" << "status\n";
    for (const auto& q : report.quantities) {
        std::string status = "-";
        if (q.name.rfind("eigenvalue_", 0) == 0) status = q.abs_dev <= eig_tol ? "ok" : "FAIL";
        if (q.name == "probing_error_count") status = count_ok ? "ok" : "FAIL";
        if (q.name == "separability") status = sep_ok ? "ok" : "FAIL";
        std::cout << std::setw(22) << q.name << std::setw(16) << q.closed << std::setw(16) << q.numeric
                  << std::setw(14) << q.abs_dev << status << "\n";
    }
    std::cout << "tolerances: eigenvalue " << eig_tol << ", separability rel " << sep_tol << "\n";
    std::cout << (pass ? "PASS" : "FAIL") << "\n";

    Json resolved = resolved_base("toy-verify", g);
    resolved.update(toy_json(t));
    Json body;
    body["variant"] = t.variant;
    body["alpha_prime"] = p.alpha_prime;
    body["beta_prime"] = p.beta_prime;
    body["gamma_ratio"] = p.gamma_ratio;
    body["rho"] = t.rho;
    body["probing_error_count"] = {{"closed", report.probing_error_count_closed},
                                   {"numeric", report.probing_error_count_numeric}};
    body["separability"] = {{"closed", report.separability_closed},
                            {"numeric", report.separability_numeric},
                            {"rel_dev", sep_rel},
                            {"tolerance", sep_tol}};
    body["eigenvalues"] = {{"closed", vector_json(report.eigenvalues_closed)},
                           {"numeric", vector_json(report.eigenvalues_numeric)},
                           {"max_dev", report.eig_dev_max},
                           {"tolerance", eig_tol}};
    body["projector_dev_pair"] = report.projector_dev_pair;
    body["projector_dev_third"] = report.projector_dev_third;
    Json qs = Json::array();
    for (const auto& q : report.quantities) {
        qs.push_back({{"name", q.name},
                      {"closed", q.closed},
                      {"numeric", q.numeric},
                      {"abs_dev", q.abs_dev},
                      {"rel_dev", q.rel_dev}});
    }
    body["quantities"] = qs;
    body["pass"] = pass;
    write_json_file(out_path(g, "toy_verify_" + t.variant + ".json"), resolved, body);
    return pass ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::string variant = "a";
    double lo = 0.01;
    double hi = 0.2;
    int resolution = 50;
    double gamma_ratio = 1e-6;
    double rho = 1.0;
};

int cmd_sweep(const Global& g, const SweepArgs& s) {
    const auto variant = theory_variant_from_string(s.variant);
    if (!(s.lo > 0.0 && s.lo <= s.hi && s.hi <= 0.25)) {
        throw ConfigError("sweep bounds must satisfy 0 < min <= max <= 0.25");
    }
    if (s.resolution < 1 || s.resolution > 200) throw ConfigError("--resolution must lie in [1, 200]");
    if (!(s.gamma_ratio >= 0.0)) throw ConfigError("--gamma-ratio must be >= 0");

    auto axis = [&](int i) { return s.resolution == 1 ? s.lo : s.lo + (s.hi - s.lo) * i / (s.resolution - 1); };
    std::ostringstream csv;
    csv << "alpha_prime,beta_prime,case,probing_error_count_numeric,probing_error_count_closed,"
           "separability_numeric,separability_closed,gap_ab,gap_label,eig_dev_max,projector_dev\n";
    for (int i = 0; i < s.resolution; ++i) {
        for (int j = 0; j < s.resolution; ++j) {
            const ReducedParams p{axis(i), axis(j), s.gamma_ratio};
            const auto a = run_toy_pipeline(TheoryVariant::CaseA, p, s.rho);
            const auto b = run_toy_pipeline(TheoryVariant::CaseB, p, s.rho);
            const auto u = run_toy_pipeline(TheoryVariant::Unsupervised, p, s.rho);
            const ToyPipeline& own = variant == TheoryVariant::CaseA ? a : variant == TheoryVariant::CaseB ? b : u;
            csv << format_number(p.alpha_prime) << ',' << format_number(p.beta_prime) << ',' << s.variant << ','
                << own.probing.count << ',';
            std::optional<VerificationReport> report;
            try {
                report = verify_against_pipeline(variant, p, s.rho);
            } catch (const DegenerateRegimeError&) {
            }
            if (report) csv << report->probing_error_count_closed;
            csv << ',' << format_number(own.separability) << ',';
            if (report) csv << format_number(report->separability_closed);
            csv << ',' << format_number(a.separability - b.separability) << ','
                << format_number(a.separability - u.separability) << ',';
            if (report) csv << format_number(report->eig_dev_max);
            csv << ',';
            if (report) csv << format_number(report->projector_dev);
            csv << '\n';
        }
    }
    Json resolved = resolved_base("sweep", g);
    resolved["case"] = s.variant;
    resolved["min"] = s.lo;
    resolved["max"] = s.hi;
    resolved["resolution"] = s.resolution;
    resolved["gamma_ratio"] = s.gamma_ratio;
    resolved["rho"] = s.rho;
    const auto path = out_path(g, "sweep_" + s.variant + ".csv");
    write_csv_file(path, resolved, csv.str());
    std::cout << "wrote " << s.resolution * s.resolution << " rows to " << path.string() << "\n";
    return kExitPass;
}

// ---------------------------------------------------------------- factorize

struct FactorizeArgs {
    FactorizeOptions opts;
    int trials = 10;
    bool dump_adjacency = false;
};

void dump_adjacency(const Global& g, const Json& resolved, const GraphBundle& b) {
    const std::pair<AdjacencyKind, const Matrix*> kinds[] = {{AdjacencyKind::SelfSupervised, &b.self_supervised},
                                                             {AdjacencyKind::Supervised, &b.supervised},
                                                             {AdjacencyKind::Combined, &b.combined},
                                                             {AdjacencyKind::Normalized, &b.normalized}};
    for (const auto& [kind, m] : kinds) {
        std::ostringstream body;
        write_adjacency_csv(body, *m, kind);
        write_csv_file(out_path(g, "adjacency_" + std::string(to_string(kind)) + ".csv"), resolved, body.str());
    }
}

bool spread_ok(const EquivalenceGap& eq, double scale) {
    return eq.max_gap_spread <= 1e-9 * (1.0 + std::abs(eq.gaps.front())) * scale;
}

int cmd_factorize(const Global& g, const ToyArgs& toy, const GraphArgs& ga, FactorizeArgs f) {
    const auto source = load_source(g, toy, ga);
    const auto& bundle = source.model.bundle;
    f.opts.seed = g.seed;
    const auto spectral = eigendecompose(bundle.normalized, ga.k);
    const auto state = lowrank_factorize(bundle.normalized, ga.k, f.opts);
    const auto gap = reconstruction_gap(state, bundle.normalized, spectral);
    const auto eq = equivalence_gap(source.model, ga.k, f.trials, g.seed);

    const bool loss_ok = std::abs(gap.loss_gap) <= 1e-4 * g.tolerance_scale;
    const bool eq_ok = spread_ok(eq, g.tolerance_scale);
    const bool pass = state.converged && loss_ok && eq_ok;

    Json resolved = resolved_base("factorize", g);
    resolved.update(source.description);
    resolved["step"] = f.opts.step;
    resolved["max_iters"] = f.opts.max_iters;
    resolved["tol"] = f.opts.tol;
    resolved["trials"] = f.trials;

    std::ostringstream trace;
    write_trace_csv(trace, state);
    write_csv_file(out_path(g, "factorize_trace.csv"), resolved, trace.str());
    if (f.dump_adjacency) dump_adjacency(g, resolved, bundle);

    Json body;
    body["converged"] = state.converged;
    body["iterations"] = state.iterations;
    body["final_loss"] = state.final_loss();
    body["optimum"] = eckart_young_residual(spectral.eigenvalues, ga.k);
    body["loss_gap"] = gap.loss_gap;
    body["subspace_gap"] = gap.subspace_gap;
    body["degenerate"] = gap.degenerate;
    body["gap_spread"] = eq.max_gap_spread;
    body["constant"] = eq.constant;
    body["pass"] = pass;
    write_json_file(out_path(g, "factorize.json"), resolved, body);

    std::cout << "converged=" << (state.converged ? "true" : "false") << " iterations=" << state.iterations
              << " final_loss=" << state.final_loss() << " loss_gap=" << gap.loss_gap
              << " subspace_gap=" << gap.subspace_gap << (gap.degenerate ? " (degenerate)" : "")
              << " gap_spread=" << eq.max_gap_spread << "\n"
              << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
    int k_neighbors = 1;
    double percentile = 0.95;
};

Matrix select_rows(const Matrix& z, const std::vector<int>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), z.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = z.row(idx[i]);
    return out;
}

std::vector<int> labels_of(const Population& pop, const std::vector<int>& idx) {
    std::vector<int> out;
    for (int i : idx) out.push_back(pop.examples[static_cast<std::size_t>(i)].class_label);
    return out;
}

int cmd_detect(const Global& g, const GraphArgs& ga, const DetectArgs& d) {
    if (g.config.empty()) throw ConfigError("detect requires --config");
    const ToyArgs unused;
    const auto source = load_source(g, unused, ga);
    const auto& pop = source.model.source.population;
    for (auto m : {Membership::LabeledId, Membership::WildCovariate, Membership::WildSemantic}) {
        if (pop.count(m) == 0) {
            throw ConfigError("detect requires " + std::string(to_string(m)) + " examples; none present");
        }
    }
    const auto spectral = eigendecompose(source.model.bundle.normalized, ga.k);
    const Matrix z = closed_form_embedding(source.model.bundle, spectral);

    const auto labeled = pop.indices_of(Membership::LabeledId);
    const auto wild_id = pop.indices_of(Membership::WildId);
    const auto covariate = pop.indices_of(Membership::WildCovariate);
    const auto semantic = pop.indices_of(Membership::WildSemantic);
    std::vector<int> id_rows = labeled;
    id_rows.insert(id_rows.end(), wild_id.begin(), wild_id.end());

    const Matrix z_labeled = select_rows(z, labeled);
    const auto probe = fit_linear_probe(z_labeled, labels_of(pop, labeled), pop.known_classes);
    const auto& id_eval = wild_id.empty() ? labeled : wild_id;
    MetricsReport r;
    r.id_acc = classification_accuracy(select_rows(z, id_eval), labels_of(pop, id_eval), probe);
    r.ood_acc = classification_accuracy(select_rows(z, covariate), labels_of(pop, covariate), probe);
    const auto err = probing_error(select_rows(z, covariate), labels_of(pop, covariate), probe);
    r.probing_error_rate = err.rate;
    r.probing_error_count = err.count;
    r.separability = separability(select_rows(z, id_rows), select_rows(z, semantic));

    const auto detector = fit_knn_detector(z_labeled, d.k_neighbors, d.percentile);
    const std::vector<double> scores_id =
        wild_id.empty() ? detector.reference_scores : detector.score_all(select_rows(z, wild_id));
    const auto scores_ood = detector.score_all(select_rows(z, semantic));
    const auto dm = detection_metrics(scores_id, scores_ood, detector);
    r.fpr_at_threshold = dm.fpr_at_threshold;
    r.fpr95 = dm.fpr95;
    r.auroc = dm.auroc;

    Json resolved = resolved_base("detect", g);
    resolved.update(source.description);
    resolved["k_neighbors"] = d.k_neighbors;
    resolved["percentile"] = d.percentile;
    Json body;
    body["id_acc"] = r.id_acc;
    body["ood_acc"] = r.ood_acc;
    body["probing_error_rate"] = r.probing_error_rate;
    body["probing_error_count"] = r.probing_error_count;
    body["separability"] = r.separability;
    body["fpr95"] = r.fpr95;
    body["auroc"] = r.auroc;
    body["fpr_at_threshold"] = r.fpr_at_threshold;
    body["threshold"] = detector.threshold;
    body["counts"] = {{"labeled_id", labeled.size()},
                      {"wild_id", wild_id.size()},
                      {"wild_covariate", covariate.size()},
                      {"wild_semantic", semantic.size()}};
    write_json_file(out_path(g, "detect.json"), resolved, body);

    std::cout << "id_acc=" << r.id_acc << " ood_acc=" << r.ood_acc << " probing_error_count=" << r.probing_error_count
              << " separability=" << r.separability << " fpr95=" << r.fpr95 << " auroc=" << r.auroc << "\n";
    return kExitPass;
}

// ---------------------------------------------------------------- loss-check

int cmd_loss_check(const Global& g, const ToyArgs& toy, const GraphArgs& ga, int trials) {
    const auto source = load_source(g, toy, ga);
    const auto& model = source.model;
    const auto spectral = eigendecompose(model.bundle.normalized, ga.k);
    const Matrix z = closed_form_embedding(model.bundle, spectral);
    const auto loss = surrogate_loss(z, model.source.transform, model.source.population, model.weights);
    const Matrix f = model.bundle.degrees.cwiseSqrt().asDiagonal() * z;
    const double offset = matrix_loss(f, model.bundle.normalized) - loss.total;
    const auto eq = equivalence_gap(model, ga.k, trials, g.seed);

    const double tol = 1e-9 * g.tolerance_scale;
    const bool pass = spread_ok(eq, g.tolerance_scale) &&
                      std::abs(eq.gaps.front() - eq.constant) <= tol * (1.0 + eq.constant) &&
                      std::abs(offset - eq.constant) <= tol * (1.0 + eq.constant);

    Json resolved = resolved_base("loss-check", g);
    resolved.update(source.description);
    resolved["trials"] = trials;
    Json body;
    body["L1"] = loss.l1;
    body["L2"] = loss.l2;
    body["L3"] = loss.l3;
    body["L4"] = loss.l4;
    body["L5"] = loss.l5;
    body["total"] = loss.total;
    body["gap_spread"] = eq.max_gap_spread;
    body["constant"] = eq.constant;
    body["embedding_offset"] = offset;
    body["pass"] = pass;
    write_json_file(out_path(g, "loss_check.json"), resolved, body);

    std::cout << "total=" << loss.total << " constant=" << eq.constant << " gap_spread=" << eq.max_gap_spread
              << "\n"
              << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kExitPass : kExitFail;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Spectral OOD toolkit: augmentation graphs, spectral embeddings, theory checks"};
    app.name("spectral-ood");
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    app.add_option("--config", g.config, "population config (JSON)");
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--tolerance-scale", g.tolerance_scale, "multiplies every pass/fail tolerance")
        ->check(CLI::PositiveNumber);

    ToyArgs toy_verify;
    auto* tv = app.add_subcommand("toy-verify", "closed forms vs the numeric pipeline on the 5-node toy");
    add_toy_options(tv, toy_verify, true);

    SweepArgs sweep;
    auto* sw = app.add_subcommand("sweep", "grid of theory quantities over (alpha', beta')");
    sw->add_option("--case", sweep.variant, "toy variant")->check(CLI::IsMember({"a", "b", "unsup"}));
    sw->add_option("--min", sweep.lo, "lower grid bound for both axes");
    sw->add_option("--max", sweep.hi, "upper grid bound for both axes");
    sw->add_option("--resolution", sweep.resolution, "points per axis");
    sw->add_option("--gamma-ratio", sweep.gamma_ratio, "gamma / rho");
    sw->add_option("--rho", sweep.rho, "same-class same-domain probability");

    ToyArgs fz_toy;
    GraphArgs fz_graph;
    FactorizeArgs fz;
    auto* fc = app.add_subcommand("factorize", "gradient low-rank factorization vs the spectral optimum");
    add_toy_options(fc, fz_toy, true);
    add_graph_options(fc, fz_graph);
    fc->add_option("--step", fz.opts.step, "initial and maximum step");
    fc->add_option("--max-iters", fz.opts.max_iters, "iteration cap");
    fc->add_option("--tol", fz.opts.tol, "relative loss change for convergence");
    fc->add_option("--trials", fz.trials, "random factors for the equivalence gap");
    fc->add_flag("--dump-adjacency", fz.dump_adjacency, "also write the four adjacency matrices");

    GraphArgs dt_graph;
    DetectArgs dt;
    auto* de = app.add_subcommand("detect", "probe and KNN detector metrics on a population config");
    add_graph_options(de, dt_graph);
    de->add_option("--k-neighbors", dt.k_neighbors, "k of the KNN score");
    de->add_option("--percentile", dt.percentile, "ID acceptance percentile");

    ToyArgs lc_toy;
    GraphArgs lc_graph;
    int lc_trials = 10;
    auto* lc = app.add_subcommand("loss-check", "surrogate loss terms and the constant offset");
    add_toy_options(lc, lc_toy, true);
    add_graph_options(lc, lc_graph);
    lc->add_option("--trials", lc_trials, "random factors for the equivalence gap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*tv) return cmd_toy_verify(g, toy_verify);
        if (*sw) return cmd_sweep(g, sweep);
        if (*fc) return cmd_factorize(g, fz_toy, fz_graph, fz);
        if (*de) return cmd_detect(g, dt_graph, dt);
        if (*lc) return cmd_loss_check(g, lc_toy, lc_graph, lc_trials);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitFail;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace spectral_ood::cli
