#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gini_ellipse/elliptical.hpp"
#include "gini_ellipse/gini.hpp"
#include "gini_ellipse/matrix.hpp"

namespace gini_ellipse {

// Distribution spec as it appears in experiment configs. Matrices are JSON
// arrays-of-arrays, row-major.
struct ModelSpec {
    std::string family;  // "elliptical" or "scale_mixture"
    Vec mu;
    SymMatrix sigma;
    RadialLaw radial;                 // base radial for scale mixtures
    std::optional<MixingLaw> mixing;  // scale mixtures only

    bool operator==(const ModelSpec&) const = default;
};

struct ExperimentConfig {
    int schema_version = 1;
    ModelSpec model_x;
    std::optional<ModelSpec> model_y;
    std::size_t sample_count = 1'000'000;
    std::uint64_t seed = 20250401;
    GiniConvention convention = GiniConvention::kUnnormalized;
    std::set<std::string> tests;  // subset of {conditions, st, icx, tail_rate, tail_identity}
    std::size_t grid_size = 200;
    double z_threshold = 4.0;
    bool couple = true;
    std::vector<double> thresholds = {1.0, 2.0, 3.0};  // tail_identity thresholds
    std::optional<std::string> output_path;

    bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json emit_radial(const RadialLaw& law);
RadialLaw parse_radial(const nlohmann::json& j);
nlohmann::json emit_mixing(const MixingLaw& law);
MixingLaw parse_mixing(const nlohmann::json& j);
nlohmann::json emit_sym_matrix(const SymMatrix& m);
SymMatrix parse_sym_matrix(const nlohmann::json& j);

nlohmann::json emit_model_spec(const ModelSpec& spec);
ModelSpec parse_model_spec(const nlohmann::json& j);

nlohmann::json emit_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

std::string convention_name(GiniConvention conv);
GiniConvention parse_convention(const std::string& name);

// Instantiate the distribution object (validates PSD dispersion etc.).
Model build_model(const ModelSpec& spec);

}  // namespace gini_ellipse
