#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "spectral_ood/population.hpp"
#include "spectral_ood/types.hpp"

namespace spectral_ood {

using Json = nlohmann::ordered_json;

/// Parsed population config file. Exactly one of `parametric` /
/// `explicit_transform` is set. `mixture` is true when the file gives pi_c
/// or pi_s, in which case wild examples are resampled from the cells.
struct PopulationConfig {
    PopulationSpec spec;
    std::optional<ParametricAugmentation> parametric;
    std::optional<Matrix> explicit_transform;
    bool mixture = false;
    Json raw;
};

PopulationConfig parse_population_config(const Json& j);
PopulationConfig load_population_config(const std::filesystem::path& path);

/// Population (sampled when `mixture`) with its expanded transform.
AugmentedPopulation materialize(const PopulationConfig& config, std::uint64_t seed);

/// 17 significant digits, `nan` / `inf` spelled out.
std::string format_number(double v);

/// Files are written whole; the first line records the resolved config.
/// CSV files use `# <json>`; JSON files use `// <json>` so that a
/// comment-tolerant JSON reader still accepts them.
void write_csv_file(const std::filesystem::path& path, const Json& resolved, const std::string& body);
void write_json_file(const std::filesystem::path& path, const Json& resolved, const Json& body);

/// Reads a file written by write_json_file.
Json read_json_file(const std::filesystem::path& path);

}  // namespace spectral_ood
