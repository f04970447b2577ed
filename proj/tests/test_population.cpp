#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spectral_ood/population.hpp"

using namespace spectral_ood;

namespace {

const ParametricAugmentation kGeneric{0.9, 0.07, 0.05, 0.003};

PopulationSpec grid_spec(int per_cell) {
    PopulationSpec s;
    s.classes = {0, 1};
    s.domains = {0, 1};
    s.cells = {{0, 0, Membership::LabeledId, per_cell},
               {1, 0, Membership::LabeledId, per_cell},
               {0, 1, Membership::WildCovariate, per_cell},
               {1, 1, Membership::WildCovariate, per_cell},
               {5, 1, Membership::WildSemantic, 1}};
    return s;
}

}  // namespace

TEST(ToyPopulation, CaseAFirstRow) {
    const auto toy = build_toy_population(ToyVariant::CaseA, kGeneric);
    Vector expected(5);
    expected << kGeneric.rho, kGeneric.beta, kGeneric.alpha, kGeneric.gamma, kGeneric.gamma;
    EXPECT_TRUE(toy.transform.row(0).transpose().isApprox(expected, 0.0));
}

TEST(ToyPopulation, CaseBThirdRow) {
    const auto toy = build_toy_population(ToyVariant::CaseB, kGeneric);
    Vector expected(5);
    expected << kGeneric.alpha, kGeneric.gamma, kGeneric.rho, kGeneric.beta, kGeneric.beta;
    EXPECT_EQ(toy.transform.row(2).transpose(), expected);
}

TEST(ToyPopulation, OnlyRhoGivesScaledIdentity) {
    const auto toy = build_toy_population(ToyVariant::CaseA, {0.8, 0.0, 0.0, 0.0});
    EXPECT_EQ(toy.transform, Matrix(0.8 * Matrix::Identity(5, 5)));
}

TEST(ToyPopulation, MembershipsAndOrder) {
    const auto toy = build_toy_population(ToyVariant::CaseA, kGeneric);
    const auto& ex = toy.population.examples;
    ASSERT_EQ(ex.size(), 5u);
    EXPECT_EQ(ex[0].membership, Membership::LabeledId);
    EXPECT_EQ(ex[3].membership, Membership::WildCovariate);
    EXPECT_EQ(ex[4].membership, Membership::WildSemantic);
    EXPECT_FALSE(toy.population.is_known(ex[4].class_label));
}

TEST(ToyPopulation, TransformIsSymmetricForParametricRule) {
    for (auto v : {ToyVariant::CaseA, ToyVariant::CaseB}) {
        const auto toy = build_toy_population(v, kGeneric);
        EXPECT_EQ(toy.transform, Matrix(toy.transform.transpose()));
        EXPECT_GE(toy.transform.minCoeff(), 0.0);
    }
}

TEST(ParametricPopulation, SingletonCellsReduceToCaseAToy) {
    PopulationSpec s;
    s.classes = {0, 1};
    s.domains = {0, 1, 2};
    s.cells = {{0, 0, Membership::LabeledId, 1},
               {1, 0, Membership::LabeledId, 1},
               {0, 1, Membership::WildCovariate, 1},
               {1, 1, Membership::WildCovariate, 1},
               {7, 2, Membership::WildSemantic, 1}};
    const auto built = build_parametric_population(s, kGeneric);
    const auto toy = build_toy_population(ToyVariant::CaseA, kGeneric);
    EXPECT_EQ(built.transform, toy.transform);
}

TEST(ParametricPopulation, BlockStructureMatchesRuleLoop) {
    const auto built = build_parametric_population(grid_spec(3), kGeneric);
    ASSERT_EQ(built.transform.rows(), 13);
    const auto& ex = built.population.examples;
    for (int i = 0; i < 13; ++i) {
        for (int j = 0; j < 13; ++j) {
            const double want = oracle::rule(kGeneric.rho, kGeneric.alpha, kGeneric.beta, kGeneric.gamma,
                                             ex[i].class_label, ex[i].domain_label, ex[j].class_label,
                                             ex[j].domain_label);
            EXPECT_EQ(built.transform(i, j), want) << i << "," << j;
        }
    }
}

TEST(ParametricPopulation, RejectsBadSpecs) {
    PopulationSpec empty = grid_spec(1);
    empty.classes.clear();
    EXPECT_THROW(build_parametric_population(empty, kGeneric), ConfigError);

    PopulationSpec semantic_known = grid_spec(1);
    semantic_known.cells.back().class_label = 0;
    EXPECT_THROW(build_parametric_population(semantic_known, kGeneric), ConfigError);

    PopulationSpec id_off_domain = grid_spec(1);
    id_off_domain.cells[0].domain = 1;
    EXPECT_THROW(build_parametric_population(id_off_domain, kGeneric), ConfigError);

    EXPECT_THROW(build_parametric_population(grid_spec(1), {1.0, -0.1, 0.0, 0.0}), ConfigError);
}

TEST(ParametricAugmentation, StrictOrdering) {
    EXPECT_NO_THROW(kGeneric.validate(true));
    EXPECT_THROW((ParametricAugmentation{0.05, 0.07, 0.05, 0.0}.validate(true)), ConfigError);
    EXPECT_THROW((ParametricAugmentation{1.0, 0.07, 0.05, 0.05}.validate(true)), ConfigError);
}

TEST(ExplicitAugmentation, ShapeAndSign) {
    const auto toy = build_toy_population(ToyVariant::CaseA, kGeneric);
    EXPECT_THROW(expand_transform(ExplicitAugmentation{Matrix::Ones(4, 5)}, toy.population), ConfigError);
    Matrix neg = Matrix::Ones(5, 5);
    neg(1, 1) = -1.0;
    EXPECT_THROW(expand_transform(ExplicitAugmentation{neg}, toy.population), ConfigError);
    const Matrix wide = oracle::random_nonnegative(5, 8, 3);
    EXPECT_EQ(expand_transform(ExplicitAugmentation{wide}, toy.population), wide);
}

TEST(WildMixture, CountsFromRatios) {
    const auto c = mixture_counts(100, 0.5, 0.1);
    EXPECT_EQ(c.covariate, 50);
    EXPECT_EQ(c.semantic, 10);
    EXPECT_EQ(c.wild_id, 40);
    const auto z = mixture_counts(100, 0.0, 0.0);
    EXPECT_EQ(z.wild_id, 100);
    const auto r = mixture_counts(3, 0.5, 0.5);
    EXPECT_EQ(r.covariate + r.semantic + r.wild_id, 3);
    EXPECT_THROW(mixture_counts(10, 0.7, 0.4), ConfigError);
}

TEST(WildMixture, SampledPopulation) {
    PopulationSpec s;
    s.classes = {0, 1};
    s.domains = {0, 1, 2};
    s.cells = {{0, 0, Membership::LabeledId, 4},
               {1, 0, Membership::LabeledId, 4},
               {0, 0, Membership::WildId, 50},
               {9, 2, Membership::WildSemantic, 50}};
    s.pi_c = 0.5;
    s.pi_s = 0.1;
    const auto pop = sample_wild_mixture(s, 11);
    EXPECT_EQ(pop.count(Membership::LabeledId), 8u);
    EXPECT_EQ(pop.count(Membership::WildCovariate), 50u);
    EXPECT_EQ(pop.count(Membership::WildSemantic), 10u);
    EXPECT_EQ(pop.count(Membership::WildId), 40u);
    for (const auto& e : pop.examples) {
        if (e.membership == Membership::WildCovariate) EXPECT_NE(e.domain_label, 0);
    }

    const auto again = sample_wild_mixture(s, 11);
    ASSERT_EQ(again.size(), pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        EXPECT_EQ(again.examples[i].class_label, pop.examples[i].class_label);
        EXPECT_EQ(again.examples[i].domain_label, pop.examples[i].domain_label);
        EXPECT_EQ(again.examples[i].membership, pop.examples[i].membership);
    }

    s.pi_c = 0.0;
    s.pi_s = 0.0;
    const auto all_id = sample_wild_mixture(s, 11);
    EXPECT_EQ(all_id.count(Membership::WildId), 100u);
    EXPECT_EQ(all_id.count(Membership::WildSemantic), 0u);
}

TEST(WildMixture, SemanticRatioNeedsSemanticCell) {
    PopulationSpec s = grid_spec(2);
    s.cells.pop_back();
    s.pi_s = 0.2;
    EXPECT_THROW(sample_wild_mixture(s, 1), ConfigError);
}

TEST(Membership, StringRoundTrip) {
    for (auto m : {Membership::LabeledId, Membership::WildId, Membership::WildCovariate, Membership::WildSemantic}) {
        EXPECT_EQ(membership_from_string(to_string(m)), m);
    }
    EXPECT_THROW(membership_from_string("labelled"), ConfigError);
}
