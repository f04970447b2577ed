#pragma once

#include <iosfwd>
#include <string_view>

#include "spectral_ood/population.hpp"
#include "spectral_ood/types.hpp"

namespace spectral_ood {

/// Relative weight of the self-supervised and supervised connectivity.
struct GraphWeights {
    double eta_u = 1.0;
    double eta_l = 1.0;

    void validate() const;
};

/// Adjacency matrices of the augmentation graph. `combined` sums to one;
/// `degrees` are its row sums; `normalized` is D^{-1/2} A D^{-1/2}.
struct GraphBundle {
    Matrix self_supervised;
    Matrix supervised;
    Matrix combined;
    double normalizer = 1.0;
    Vector degrees;
    Matrix normalized;

    Eigen::Index size() const { return combined.rows(); }
};

/// A_u[x,x'] = (1/N̄) Σ_x̄ T[x̄,x] T[x̄,x'] under the uniform marginal.
Matrix self_supervised_adjacency(const Matrix& transform, const Population& population);

/// A_l[x,x'] = Σ_i s_i(x) s_i(x') with s_i the mean T row over the labeled
/// examples of known class i. Zero when nothing is labeled.
Matrix supervised_adjacency(const Matrix& transform, const Population& population);

/// Per-class mean transform rows s_i, one column per known class that has
/// labeled examples.
Matrix labeled_class_means(const Matrix& transform, const Population& population);

/// Throws ConfigError naming the first isolated vertex when a degree is zero.
GraphBundle combine_and_normalize(const Matrix& self_supervised, const Matrix& supervised,
                                  const GraphWeights& weights);

struct GraphModel {
    AugmentedPopulation source;
    GraphWeights weights;
    GraphBundle bundle;
};

GraphModel build_graph(const AugmentedPopulation& source, const GraphWeights& weights);

/// Connectivity of the graph whose edges are the strictly positive entries.
bool is_connected(const Matrix& adjacency);

enum class AdjacencyKind { SelfSupervised, Supervised, Combined, Normalized };
std::string_view to_string(AdjacencyKind kind);

/// Row-major CSV with a `# adjacency N=<n> kind=<kind>` header, 17 significant digits.
void write_adjacency_csv(std::ostream& out, const Matrix& m, AdjacencyKind kind);

}  // namespace spectral_ood
