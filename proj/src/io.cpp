#include "spectral_ood/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace spectral_ood {

namespace {

template <typename T>
T field(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + ": field '" + std::string(key) + "' has the wrong type");
    }
}

double number(const Json& j, const char* key, const std::string& where) {
    const auto& v = j.contains(key) ? j.at(key) : Json();
    if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

PopulationConfig parse_population_config(const Json& j) {
    if (!j.is_object()) throw ConfigError("population config must be a JSON object");
    PopulationConfig c;
    c.raw = j;
    c.spec.classes = field<std::vector<int>>(j, "classes", "config");
    c.spec.domains = field<std::vector<int>>(j, "domains", "config");
    if (!j.contains("cells") || !j.at("cells").is_array()) throw ConfigError("config: 'cells' must be an array");
    for (std::size_t i = 0; i < j.at("cells").size(); ++i) {
        const auto& cj = j.at("cells")[i];
        const std::string where = "config.cells[" + std::to_string(i) + "]";
        if (!cj.is_object()) throw ConfigError(where + ": must be an object");
        Cell cell;
        cell.class_label = field<int>(cj, "class", where);
        cell.domain = field<int>(cj, "domain", where);
        cell.membership = membership_from_string(field<std::string>(cj, "membership", where));
        cell.count = field<int>(cj, "count", where);
        c.spec.cells.push_back(cell);
    }
    c.mixture = j.contains("pi_c") || j.contains("pi_s");
    if (j.contains("pi_c")) c.spec.pi_c = number(j, "pi_c", "config");
    if (j.contains("pi_s")) c.spec.pi_s = number(j, "pi_s", "config");

    const bool has_param = j.contains("augmentation");
    const bool has_matrix = j.contains("augmentation_matrix");
    if (has_param == has_matrix) {
        throw ConfigError("config: give exactly one of 'augmentation' and 'augmentation_matrix'");
    }
    if (has_param) {
        const auto& a = j.at("augmentation");
        if (!a.is_object()) throw ConfigError("config.augmentation must be an object");
        ParametricAugmentation p;
        p.rho = number(a, "rho", "config.augmentation");
        p.alpha = number(a, "alpha", "config.augmentation");
        p.beta = number(a, "beta", "config.augmentation");
        p.gamma = number(a, "gamma", "config.augmentation");
        p.validate();
        c.parametric = p;
    } else {
        const auto& m = j.at("augmentation_matrix");
        if (!m.is_array() || m.empty() || !m[0].is_array()) {
            throw ConfigError("config.augmentation_matrix must be a nonempty array of rows");
        }
        const auto cols = m[0].size();
        Matrix t(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (!m[r].is_array() || m[r].size() != cols) {
                throw ConfigError("config.augmentation_matrix row " + std::to_string(r) + " has the wrong length");
            }
            for (std::size_t q = 0; q < cols; ++q) {
                if (!m[r][q].is_number()) throw ConfigError("config.augmentation_matrix entries must be numbers");
                t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) = m[r][q].get<double>();
            }
        }
        ExplicitAugmentation{t}.validate();
        c.explicit_transform = std::move(t);
    }
    c.spec.validate();
    return c;
}

PopulationConfig load_population_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_population_config(j);
}

AugmentedPopulation materialize(const PopulationConfig& config, std::uint64_t seed) {
    AugmentationModel model = config.parametric ? AugmentationModel(*config.parametric)
                                                : AugmentationModel(ExplicitAugmentation{*config.explicit_transform});
    if (!config.mixture) {
        if (config.parametric) return build_parametric_population(config.spec, *config.parametric);
    }
    Population pop;
    if (config.mixture) {
        pop = sample_wild_mixture(config.spec, seed);
    } else {
        // Explicit transform: cells enumerated in order, as for the parametric case.
        pop.known_classes = config.spec.classes;
        pop.id_domain = config.spec.domains.front();
        for (const auto& cell : config.spec.cells) {
            for (int i = 0; i < cell.count; ++i) {
                pop.examples.push_back({static_cast<int>(pop.examples.size()), cell.class_label, cell.domain,
                                        cell.membership});
            }
        }
        pop.validate();
    }
    AugmentedPopulation out{pop, model, Matrix{}};
    out.transform = expand_transform(out.model, out.population);
    return out;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

}  // namespace

void write_csv_file(const std::filesystem::path& path, const Json& resolved, const std::string& body) {
    auto out = open_output(path);
    out << "# " << resolved.dump() << '\n' << body;
}

void write_json_file(const std::filesystem::path& path, const Json& resolved, const Json& body) {
    auto out = open_output(path);
    out << "// " << resolved.dump() << '\n' << body.dump(2) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    return Json::parse(in, nullptr, true, true);
}

}  // namespace spectral_ood
