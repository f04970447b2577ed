#pragma once

#include <cstdint>
#include <vector>

#include "spectral_ood/graph.hpp"
#include "spectral_ood/types.hpp"

namespace spectral_ood {

/// Five expectation terms of the surrogate contrastive loss, each an exact
/// finite sum under the same 1/C normalization as the combined adjacency.
///
///   total = -2 eta_l L1 - 2 eta_u L2 + eta_l^2 L3 + 2 eta_l eta_u L4 + eta_u^2 L5
///
/// L1 and L3 range over labeled pairs (per-class empirical means), L2 and L5
/// over the uniform marginal of natural examples, L4 mixes the two. Negative
/// pairs are weighted by the marginal of the corresponding positive-pair
/// measure, i.e. the labeled / unlabeled parts of the vertex degree.
struct LossBreakdown {
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;
    double l4 = 0.0;
    double l5 = 0.0;
    double total = 0.0;
    GraphWeights eta;
};

/// `embedding` holds f(x) for every augmented view x (one row each).
LossBreakdown surrogate_loss(const Matrix& embedding, const Matrix& transform, const Population& population,
                             const GraphWeights& weights);

/// ||A_tilde - F F^T||_F^2 by explicit double loop.
double matrix_loss(const Matrix& factor, const Matrix& normalized);

struct EquivalenceGap {
    double max_gap_spread = 0.0;
    double constant = 0.0;  // sum of squared normalized-adjacency entries
    std::vector<double> gaps;
};

/// For `trials` seeded Gaussian factors F, gap_t = L_mf(F) - L(f) with
/// f(x) = F[x,:] / sqrt(D[x]). The gap is independent of F.
EquivalenceGap equivalence_gap(const GraphModel& model, int k, int trials, std::uint64_t seed);

/// Same, on caller-supplied factors.
EquivalenceGap equivalence_gap(const GraphModel& model, const std::vector<Matrix>& factors);

}  // namespace spectral_ood
