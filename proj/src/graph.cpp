#include "spectral_ood/graph.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

namespace spectral_ood {

void GraphWeights::validate() const {
    if (!std::isfinite(eta_u) || !std::isfinite(eta_l) || eta_u < 0.0 || eta_l < 0.0) {
        throw ConfigError("graph weights must be finite and nonnegative");
    }
    if (eta_u + eta_l <= 0.0) throw ConfigError("graph weights: eta_u + eta_l must be positive");
}

namespace {

void check_transform(const Matrix& transform, const Population& population) {
    if (transform.rows() != static_cast<Eigen::Index>(population.size())) {
        throw ConfigError("transform has " + std::to_string(transform.rows()) + " rows but the population has " +
                          std::to_string(population.size()) + " examples");
    }
}

}  // namespace

Matrix self_supervised_adjacency(const Matrix& transform, const Population& population) {
    check_transform(transform, population);
    const auto n_natural = transform.rows();
    const auto n = transform.cols();
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index src = 0; src < n_natural; ++src) {
        const auto row = transform.row(src);
        for (Eigen::Index x = 0; x < n; ++x) {
            const double tx = row(x);
            if (tx == 0.0) continue;
            for (Eigen::Index y = 0; y < n; ++y) a(x, y) += tx * row(y);
        }
    }
    return a / static_cast<double>(n_natural);
}

Matrix labeled_class_means(const Matrix& transform, const Population& population) {
    check_transform(transform, population);
    std::vector<Vector> means;
    for (int cls : population.known_classes) {
        Vector sum = Vector::Zero(transform.cols());
        int count = 0;
        for (const auto& ex : population.examples) {
            if (ex.membership == Membership::LabeledId && ex.class_label == cls) {
                sum += transform.row(ex.index).transpose();
                ++count;
            }
        }
        if (count > 0) means.push_back(sum / static_cast<double>(count));
    }
    Matrix out(transform.cols(), static_cast<Eigen::Index>(means.size()));
    for (std::size_t i = 0; i < means.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = means[i];
    return out;
}

Matrix supervised_adjacency(const Matrix& transform, const Population& population) {
    const Matrix s = labeled_class_means(transform, population);
    Matrix a = Matrix::Zero(transform.cols(), transform.cols());
    for (Eigen::Index i = 0; i < s.cols(); ++i) a += s.col(i) * s.col(i).transpose();
    return a;
}

GraphBundle combine_and_normalize(const Matrix& self_supervised, const Matrix& supervised,
                                  const GraphWeights& weights) {
    weights.validate();
    if (self_supervised.rows() != self_supervised.cols() || supervised.rows() != supervised.cols() ||
        self_supervised.rows() != supervised.rows()) {
        throw ConfigError("adjacency matrices must be square and of equal size");
    }
    GraphBundle b;
    b.self_supervised = self_supervised;
    b.supervised = supervised;
    const Matrix raw = weights.eta_u * self_supervised + weights.eta_l * supervised;
    b.normalizer = raw.sum();
    if (!(b.normalizer > 0.0) || !std::isfinite(b.normalizer)) {
        throw ConfigError("combined adjacency has no positive weight");
    }
    b.combined = raw / b.normalizer;
    b.degrees = b.combined.rowwise().sum();
    const auto n = b.combined.rows();
    for (Eigen::Index x = 0; x < n; ++x) {
        if (!(b.degrees(x) > 0.0)) {
            throw ConfigError("vertex " + std::to_string(x) + " is isolated (zero degree)");
        }
    }
    const Vector inv_sqrt = b.degrees.array().rsqrt();
    b.normalized.resize(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) b.normalized(x, y) = b.combined(x, y) * inv_sqrt(x) * inv_sqrt(y);
    }
    return b;
}

GraphModel build_graph(const AugmentedPopulation& source, const GraphWeights& weights) {
    const Matrix au = self_supervised_adjacency(source.transform, source.population);
    const Matrix al = supervised_adjacency(source.transform, source.population);
    return {source, weights, combine_and_normalize(au, al, weights)};
}

bool is_connected(const Matrix& adjacency) {
    const auto n = adjacency.rows();
    if (n == 0) return true;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index reached = 1;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (Eigen::Index u = 0; u < n; ++u) {
            if (!seen[u] && (adjacency(v, u) > 0.0 || adjacency(u, v) > 0.0)) {
                seen[u] = 1;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    return reached == n;
}

std::string_view to_string(AdjacencyKind kind) {
    switch (kind) {
        case AdjacencyKind::SelfSupervised: return "a_u";
        case AdjacencyKind::Supervised: return "a_l";
        case AdjacencyKind::Combined: return "a";
        case AdjacencyKind::Normalized: return "a_tilde";
    }
    return "unknown";
}

void write_adjacency_csv(std::ostream& out, const Matrix& m, AdjacencyKind kind) {
    out << "# adjacency N=" << m.rows() << " kind=" << to_string(kind) << '\n';
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

}  // namespace spectral_ood
