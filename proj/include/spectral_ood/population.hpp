#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spectral_ood/types.hpp"

namespace spectral_ood {

enum class Membership { LabeledId, WildId, WildCovariate, WildSemantic };

std::string_view to_string(Membership m);
Membership membership_from_string(std::string_view s);

/// Class id used for the novel (semantic OOD) class of the toy populations.
inline constexpr int kNovelClass = -1;

struct NaturalExample {
    int index = 0;
    int class_label = 0;
    int domain_label = 0;
    Membership membership = Membership::LabeledId;
};

/// Finite set of natural examples. Known classes form the label space; any
/// other class id is novel. The ID domain is the domain of labeled and wild
/// ID examples.
struct Population {
    std::vector<NaturalExample> examples;
    std::vector<int> known_classes;
    int id_domain = 0;

    std::size_t size() const { return examples.size(); }
    bool is_known(int class_label) const;
    /// Position of a known class in `known_classes`, or -1.
    int class_position(int class_label) const;
    std::vector<int> indices_of(Membership m) const;
    std::size_t count(Membership m) const { return indices_of(m).size(); }

    /// Throws ConfigError when the membership/class/domain invariants fail.
    void validate() const;
};

struct Cell {
    int class_label = 0;
    int domain = 0;
    Membership membership = Membership::LabeledId;
    int count = 1;
};

struct PopulationSpec {
    std::vector<int> classes;
    std::vector<int> domains;  // domains.front() is the ID domain
    std::vector<Cell> cells;
    double pi_c = 0.0;
    double pi_s = 0.0;

    void validate() const;
};

/// T(x | x̄) selected by class/domain agreement.
struct ParametricAugmentation {
    double rho = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    /// Nonnegativity always; with `strict`, rho > max(alpha,beta) >= min(alpha,beta) > gamma >= 0.
    void validate(bool strict = false) const;
};

/// Explicit N̄ x N transformation matrix; rows are natural examples, columns
/// augmented views.
struct ExplicitAugmentation {
    Matrix transform;

    void validate() const;
};

using AugmentationModel = std::variant<ParametricAugmentation, ExplicitAugmentation>;

/// A population together with its augmentation model and the expanded T.
struct AugmentedPopulation {
    Population population;
    AugmentationModel model;
    Matrix transform;
};

/// Expands a model to the explicit T for `population`. Explicit models must
/// have one row per natural example.
Matrix expand_transform(const AugmentationModel& model, const Population& population);

enum class ToyVariant { CaseA, CaseB };

/// Five-example toy population ordered (angel-sketch, tiger-sketch,
/// angel-painting, tiger-painting, panda). CaseA puts the panda in its own
/// domain, CaseB in the painting domain.
AugmentedPopulation build_toy_population(ToyVariant variant, const ParametricAugmentation& params);

/// Enumerates the cells of `spec` in order and applies the class/domain rule
/// to every (natural, augmented) pair.
AugmentedPopulation build_parametric_population(const PopulationSpec& spec,
                                                const ParametricAugmentation& params);

/// Keeps labeled cells verbatim and redistributes the wild examples into
/// ID / covariate / semantic memberships according to pi_c and pi_s.
/// Counts are round(pi * m) with half-up rounding; if the rounded counts
/// overshoot m the semantic count absorbs the excess.
Population sample_wild_mixture(const PopulationSpec& spec, std::uint64_t seed);

struct MixtureCounts {
    int wild_id = 0;
    int covariate = 0;
    int semantic = 0;
};
MixtureCounts mixture_counts(int wild_total, double pi_c, double pi_s);

}  // namespace spectral_ood
