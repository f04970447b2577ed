#include "spectral_ood/population.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace spectral_ood {

std::string_view to_string(Membership m) {
    switch (m) {
        case Membership::LabeledId: return "labeled_id";
        case Membership::WildId: return "wild_id";
        case Membership::WildCovariate: return "wild_covariate";
        case Membership::WildSemantic: return "wild_semantic";
    }
    return "unknown";
}

Membership membership_from_string(std::string_view s) {
    if (s == "labeled_id") return Membership::LabeledId;
    if (s == "wild_id") return Membership::WildId;
    if (s == "wild_covariate") return Membership::WildCovariate;
    if (s == "wild_semantic") return Membership::WildSemantic;
    throw ConfigError("unknown membership '" + std::string(s) + "'");
}

bool Population::is_known(int class_label) const {
    return class_position(class_label) >= 0;
}

int Population::class_position(int class_label) const {
    const auto it = std::find(known_classes.begin(), known_classes.end(), class_label);
    return it == known_classes.end() ? -1 : static_cast<int>(it - known_classes.begin());
}

std::vector<int> Population::indices_of(Membership m) const {
    std::vector<int> out;
    for (const auto& ex : examples) {
        if (ex.membership == m) out.push_back(ex.index);
    }
    return out;
}

void Population::validate() const {
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = examples[i];
        std::ostringstream where;
        where << "example " << i;
        if (ex.index != static_cast<int>(i)) {
            throw ConfigError(where.str() + ": index out of order");
        }
        const bool semantic = ex.membership == Membership::WildSemantic;
        if (semantic == is_known(ex.class_label)) {
            throw ConfigError(where.str() + ": semantic membership requires a class outside the known label space");
        }
        if ((ex.membership == Membership::LabeledId || ex.membership == Membership::WildId) &&
            ex.domain_label != id_domain) {
            throw ConfigError(where.str() + ": ID example outside the ID domain");
        }
    }
}

void PopulationSpec::validate() const {
    if (classes.empty()) throw ConfigError("population spec: classes must be nonempty");
    if (domains.empty()) throw ConfigError("population spec: domains must be nonempty");
    if (!(pi_c >= 0.0 && pi_c <= 1.0 && pi_s >= 0.0 && pi_s <= 1.0)) {
        throw ConfigError("population spec: pi_c and pi_s must lie in [0, 1]");
    }
    if (pi_c + pi_s > 1.0 + 1e-12) throw ConfigError("population spec: pi_c + pi_s must be <= 1");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        const std::string where = "cell " + std::to_string(i);
        if (c.count <= 0) throw ConfigError(where + ": count must be positive");
        if (std::find(domains.begin(), domains.end(), c.domain) == domains.end()) {
            throw ConfigError(where + ": unknown domain " + std::to_string(c.domain));
        }
        const bool known = std::find(classes.begin(), classes.end(), c.class_label) != classes.end();
        if ((c.membership == Membership::WildSemantic) == known) {
            throw ConfigError(where + ": semantic cells must use a class outside 'classes', other cells a known class");
        }
        if ((c.membership == Membership::LabeledId || c.membership == Membership::WildId) &&
            c.domain != domains.front()) {
            throw ConfigError(where + ": ID cells must use the ID domain (first entry of 'domains')");
        }
    }
}

void ParametricAugmentation::validate(bool strict) const {
    for (double v : {rho, alpha, beta, gamma}) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError("augmentation parameters must be finite and nonnegative");
        }
    }
    if (strict) {
        const double hi = std::max(alpha, beta);
        const double lo = std::min(alpha, beta);
        if (!(rho > hi && lo > gamma)) {
            throw ConfigError("augmentation parameters violate rho > max(alpha, beta) >= min(alpha, beta) > gamma");
        }
    }
}

void ExplicitAugmentation::validate() const {
    if (transform.size() == 0) throw ConfigError("augmentation matrix is empty");
    if (!transform.allFinite() || (transform.array() < 0.0).any()) {
        throw ConfigError("augmentation matrix entries must be finite and nonnegative");
    }
}

namespace {

double rule_value(const ParametricAugmentation& p, const NaturalExample& from, const NaturalExample& to) {
    const bool same_class = from.class_label == to.class_label;
    const bool same_domain = from.domain_label == to.domain_label;
    if (same_class) return same_domain ? p.rho : p.alpha;
    return same_domain ? p.beta : p.gamma;
}

}  // namespace

Matrix expand_transform(const AugmentationModel& model, const Population& population) {
    const auto n = static_cast<Eigen::Index>(population.size());
    if (const auto* p = std::get_if<ParametricAugmentation>(&model)) {
        p->validate();
        Matrix t(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                t(i, j) = rule_value(*p, population.examples[i], population.examples[j]);
            }
        }
        return t;
    }
    const auto& e = std::get<ExplicitAugmentation>(model);
    e.validate();
    if (e.transform.rows() != n) {
        throw ConfigError("augmentation matrix has " + std::to_string(e.transform.rows()) +
                          " rows but the population has " + std::to_string(n) + " examples");
    }
    return e.transform;
}

AugmentedPopulation build_toy_population(ToyVariant variant, const ParametricAugmentation& params) {
    constexpr int kAngel = 0, kTiger = 1;
    constexpr int kSketch = 0, kPainting = 1, kPandaDomain = 2;
    Population pop;
    pop.known_classes = {kAngel, kTiger};
    pop.id_domain = kSketch;
    const int panda_domain = variant == ToyVariant::CaseA ? kPandaDomain : kPainting;
    pop.examples = {
        {0, kAngel, kSketch, Membership::LabeledId},
        {1, kTiger, kSketch, Membership::LabeledId},
        {2, kAngel, kPainting, Membership::WildCovariate},
        {3, kTiger, kPainting, Membership::WildCovariate},
        {4, kNovelClass, panda_domain, Membership::WildSemantic},
    };
    AugmentedPopulation out{pop, params, Matrix{}};
    out.transform = expand_transform(out.model, out.population);
    return out;
}

AugmentedPopulation build_parametric_population(const PopulationSpec& spec,
                                                const ParametricAugmentation& params) {
    spec.validate();
    Population pop;
    pop.known_classes = spec.classes;
    pop.id_domain = spec.domains.front();
    for (const auto& cell : spec.cells) {
        for (int i = 0; i < cell.count; ++i) {
            pop.examples.push_back({static_cast<int>(pop.examples.size()), cell.class_label, cell.domain,
                                    cell.membership});
        }
    }
    if (pop.examples.empty()) throw ConfigError("population spec: no cells");
    pop.validate();
    AugmentedPopulation out{pop, params, Matrix{}};
    out.transform = expand_transform(out.model, out.population);
    return out;
}

MixtureCounts mixture_counts(int wild_total, double pi_c, double pi_s) {
    if (pi_c < 0.0 || pi_s < 0.0 || pi_c + pi_s > 1.0 + 1e-12) {
        throw ConfigError("mixture ratios must satisfy pi_c, pi_s >= 0 and pi_c + pi_s <= 1");
    }
    MixtureCounts c;
    c.covariate = static_cast<int>(std::floor(pi_c * wild_total + 0.5));
    c.semantic = static_cast<int>(std::floor(pi_s * wild_total + 0.5));
    c.covariate = std::min(c.covariate, wild_total);
    if (c.covariate + c.semantic > wild_total) c.semantic = wild_total - c.covariate;
    c.wild_id = wild_total - c.covariate - c.semantic;
    return c;
}

Population sample_wild_mixture(const PopulationSpec& spec, std::uint64_t seed) {
    spec.validate();
    const int id_domain = spec.domains.front();

    std::vector<Cell> id_pool, cov_pool, sem_pool;
    int wild_total = 0;
    Population pop;
    pop.known_classes = spec.classes;
    pop.id_domain = id_domain;
    for (const auto& cell : spec.cells) {
        switch (cell.membership) {
            case Membership::LabeledId:
                for (int i = 0; i < cell.count; ++i) {
                    pop.examples.push_back({static_cast<int>(pop.examples.size()), cell.class_label, cell.domain,
                                            Membership::LabeledId});
                }
                continue;
            case Membership::WildId: id_pool.push_back(cell); break;
            case Membership::WildCovariate: cov_pool.push_back(cell); break;
            case Membership::WildSemantic: sem_pool.push_back(cell); break;
        }
        wild_total += cell.count;
    }

    // Default templates when the spec lists no cell of a kind.
    if (id_pool.empty()) {
        for (int c : spec.classes) id_pool.push_back({c, id_domain, Membership::WildId, 1});
    }
    if (cov_pool.empty()) {
        for (int c : spec.classes) {
            for (std::size_t d = 1; d < spec.domains.size(); ++d) {
                cov_pool.push_back({c, spec.domains[d], Membership::WildCovariate, 1});
            }
        }
    }

    const MixtureCounts counts = mixture_counts(wild_total, spec.pi_c, spec.pi_s);
    if (counts.covariate > 0 && cov_pool.empty()) {
        throw ConfigError("pi_c > 0 requires a covariate cell or a non-ID domain");
    }
    if (counts.semantic > 0 && sem_pool.empty()) {
        throw ConfigError("pi_s > 0 requires at least one wild_semantic cell");
    }

    std::mt19937_64 rng(seed);
    auto draw = [&](const std::vector<Cell>& pool, int n, Membership m) {
        std::vector<double> weights;
        for (const auto& c : pool) weights.push_back(static_cast<double>(c.count));
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        for (int i = 0; i < n; ++i) {
            const Cell& c = pool[pick(rng)];
            pop.examples.push_back({static_cast<int>(pop.examples.size()), c.class_label, c.domain, m});
        }
    };
    draw(id_pool, counts.wild_id, Membership::WildId);
    draw(cov_pool, counts.covariate, Membership::WildCovariate);
    draw(sem_pool, counts.semantic, Membership::WildSemantic);

    pop.validate();
    return pop;
}

}  // namespace spectral_ood
