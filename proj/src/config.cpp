#include "gini_ellipse/config.hpp"

#include <fstream>

#include "gini_ellipse/errors.hpp"

namespace gini_ellipse {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownTests = {"conditions", "st", "icx", "tail_rate", "tail_identity"};

double require_number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw InputError(std::string("config: missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

}  // namespace

json emit_radial(const RadialLaw& law) {
    json j;
    j["kind"] = radial_kind_name(law);
    if (const auto* t = std::get_if<StudentTRadial>(&law)) {
        j["nu"] = t->nu;
    } else if (const auto* k = std::get_if<KotzRadial>(&law)) {
        j["N"] = k->N;
        j["r"] = k->r;
        j["beta"] = k->beta;
    } else if (const auto* e = std::get_if<ExpPowerRadial>(&law)) {
        j["beta"] = e->beta;
    } else if (const auto* tab = std::get_if<TablePdfRadial>(&law)) {
        j["grid"] = tab->grid;
        j["density"] = tab->density;
    }
    return j;
}

RadialLaw parse_radial(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw InputError("config: radial law must be an object with a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "normal") return normal_radial();
    if (kind == "student_t") return student_t_radial(require_number(j, "nu"));
    if (kind == "kotz")
        return kotz_radial(require_number(j, "N"), require_number(j, "r"),
                           require_number(j, "beta"));
    if (kind == "exp_power") return exp_power_radial(require_number(j, "beta"));
    if (kind == "table_pdf") {
        if (!j.contains("grid") || !j.contains("density"))
            throw InputError("config: table_pdf radial needs 'grid' and 'density'");
        return table_pdf_radial(j.at("grid").get<std::vector<double>>(),
                                j.at("density").get<std::vector<double>>());
    }
    throw InputError("config: unknown radial kind '" + kind + "'");
}

json emit_mixing(const MixingLaw& law) {
    json j;
    j["kind"] = mixing_kind_name(law);
    if (const auto* p = std::get_if<PointMassMixing>(&law)) {
        j["v"] = p->v;
    } else if (const auto* g = std::get_if<GammaMixing>(&law)) {
        j["shape"] = g->shape;
        j["rate"] = g->rate;
    } else if (const auto* ig = std::get_if<InverseGammaMixing>(&law)) {
        j["shape"] = ig->shape;
        j["rate"] = ig->rate;
    } else if (const auto* ln = std::get_if<LogNormalMixing>(&law)) {
        j["mu_log"] = ln->mu_log;
        j["sigma_log"] = ln->sigma_log;
    } else if (const auto* d = std::get_if<DiscreteMixing>(&law)) {
        j["atoms"] = d->atoms;
        j["weights"] = d->weights;
    }
    return j;
}

MixingLaw parse_mixing(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw InputError("config: mixing law must be an object with a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    MixingLaw law;
    if (kind == "point_mass") {
        law = PointMassMixing{require_number(j, "v")};
    } else if (kind == "gamma") {
        law = GammaMixing{require_number(j, "shape"), require_number(j, "rate")};
    } else if (kind == "inverse_gamma") {
        law = InverseGammaMixing{require_number(j, "shape"), require_number(j, "rate")};
    } else if (kind == "log_normal") {
        law = LogNormalMixing{require_number(j, "mu_log"), require_number(j, "sigma_log")};
    } else if (kind == "discrete") {
        if (!j.contains("atoms") || !j.contains("weights"))
            throw InputError("config: discrete mixing needs 'atoms' and 'weights'");
        law = DiscreteMixing{j.at("atoms").get<std::vector<double>>(),
                             j.at("weights").get<std::vector<double>>()};
    } else {
        throw InputError("config: unknown mixing kind '" + kind + "'");
    }
    validate(law);
    return law;
}

json emit_sym_matrix(const SymMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.dim; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.dim; ++j) row.push_back(m.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

SymMatrix parse_sym_matrix(const json& j) {
    if (!j.is_array() || j.empty()) throw InputError("config: matrix must be a nonempty array");
    std::vector<std::vector<double>> rows;
    for (const auto& row : j) {
        if (!row.is_array()) throw InputError("config: matrix rows must be arrays");
        rows.push_back(row.get<std::vector<double>>());
    }
    return SymMatrix::from_rows(rows);
}

json emit_model_spec(const ModelSpec& spec) {
    json j;
    j["family"] = spec.family;
    j["mu"] = spec.mu;
    j["sigma"] = emit_sym_matrix(spec.sigma);
    if (spec.family == "scale_mixture") {
        j["base_radial"] = emit_radial(spec.radial);
        j["mixing"] = emit_mixing(*spec.mixing);
    } else {
        j["radial"] = emit_radial(spec.radial);
    }
    return j;
}

ModelSpec parse_model_spec(const json& j) {
    if (!j.is_object()) throw InputError("config: model spec must be an object");
    ModelSpec spec;
    spec.family = j.value("family", std::string("elliptical"));
    if (spec.family != "elliptical" && spec.family != "scale_mixture")
        throw InputError("config: model family must be 'elliptical' or 'scale_mixture'");
    if (!j.contains("mu") || !j.contains("sigma"))
        throw InputError("config: model spec needs 'mu' and 'sigma'");
    spec.mu = j.at("mu").get<std::vector<double>>();
    spec.sigma = parse_sym_matrix(j.at("sigma"));
    if (spec.family == "scale_mixture") {
        if (!j.contains("base_radial") || !j.contains("mixing"))
            throw InputError("config: scale_mixture model needs 'base_radial' and 'mixing'");
        spec.radial = parse_radial(j.at("base_radial"));
        spec.mixing = parse_mixing(j.at("mixing"));
    } else {
        spec.radial = j.contains("radial") ? parse_radial(j.at("radial")) : normal_radial();
    }
    return spec;
}

std::string convention_name(GiniConvention conv) {
    return conv == GiniConvention::kNormalized ? "normalized" : "unnormalized";
}

GiniConvention parse_convention(const std::string& name) {
    if (name == "normalized") return GiniConvention::kNormalized;
    if (name == "unnormalized") return GiniConvention::kUnnormalized;
    throw InputError("config: convention must be 'normalized' or 'unnormalized'");
}

json emit_config(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["model_x"] = emit_model_spec(cfg.model_x);
    if (cfg.model_y) j["model_y"] = emit_model_spec(*cfg.model_y);
    j["sample_count"] = cfg.sample_count;
    j["seed"] = cfg.seed;
    j["convention"] = convention_name(cfg.convention);
    j["tests"] = cfg.tests;
    j["grid_size"] = cfg.grid_size;
    j["z_threshold"] = cfg.z_threshold;
    j["couple"] = cfg.couple;
    j["thresholds"] = cfg.thresholds;
    if (cfg.output_path) j["output_path"] = *cfg.output_path;
    return j;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw InputError("config: top level must be an object");
    ExperimentConfig cfg;
    cfg.schema_version = j.value("schema_version", 1);
    if (cfg.schema_version != 1) throw InputError("config: unsupported schema_version");
    if (!j.contains("model_x")) throw InputError("config: 'model_x' is required");
    cfg.model_x = parse_model_spec(j.at("model_x"));
    if (j.contains("model_y")) cfg.model_y = parse_model_spec(j.at("model_y"));
    cfg.sample_count = j.value("sample_count", std::size_t{1'000'000});
    cfg.seed = j.value("seed", std::uint64_t{20250401});
    cfg.convention = parse_convention(j.value("convention", std::string("unnormalized")));
    if (j.contains("tests")) {
        cfg.tests.clear();
        for (const auto& t : j.at("tests")) {
            const std::string name = t.get<std::string>();
            if (!kKnownTests.contains(name))
                throw InputError("config: unknown test '" + name + "'");
            cfg.tests.insert(name);
        }
    }
    cfg.grid_size = j.value("grid_size", std::size_t{200});
    cfg.z_threshold = j.value("z_threshold", 4.0);
    cfg.couple = j.value("couple", true);
    if (j.contains("thresholds")) cfg.thresholds = j.at("thresholds").get<std::vector<double>>();
    if (j.contains("output_path")) cfg.output_path = j.at("output_path").get<std::string>();

    if (cfg.grid_size < 2) throw InputError("config: grid_size must be >= 2");
    if (!(cfg.z_threshold > 0.0)) throw InputError("config: z_threshold must be > 0");
    if ((cfg.tests.contains("st") || cfg.tests.contains("icx")) && cfg.sample_count < 1000)
        throw InputError("config: statistical tests need sample_count >= 1000");
    if ((cfg.tests.contains("st") || cfg.tests.contains("icx") || cfg.tests.contains("conditions")) &&
        !cfg.model_y)
        throw InputError("config: two models are required for ordering tests");
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

Model build_model(const ModelSpec& spec) {
    if (spec.family == "scale_mixture") {
        if (!spec.mixing) throw InputError("build_model: scale mixture without mixing law");
        return make_scale_mixture(spec.mu, spec.sigma, spec.radial, *spec.mixing);
    }
    return make_elliptical(spec.mu, spec.sigma, spec.radial);
}

}  // namespace gini_ellipse
