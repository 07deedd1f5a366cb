#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gini_ellipse/commands.hpp"
#include "gini_ellipse/config.hpp"
#include "gini_ellipse/errors.hpp"

namespace ge = gini_ellipse;

namespace {

int guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ge::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return ge::kExitInput;
    } catch (const ge::HypothesisError& e) {
        std::cerr << "hypothesis violation: " << e.what() << '\n';
        return ge::kExitHypothesis;
    } catch (const ge::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return ge::kExitInput;
    } catch (const ge::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return ge::kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ge::kExitInput;
    }
}

ge::ExperimentConfig load_with_overrides(const std::string& path,
                                         const std::optional<std::uint64_t>& seed,
                                         const std::optional<std::size_t>& samples) {
    ge::ExperimentConfig cfg = ge::load_config_file(path);
    if (seed) cfg.seed = *seed;
    if (samples) cfg.sample_count = *samples;
    return cfg;
}

// Sigma file: either a bare array-of-arrays or {"sigma": [[...]], "mu": [...]}.
std::pair<ge::SymMatrix, ge::Vec> load_sigma_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ge::InputError("cannot open sigma file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ge::InputError(std::string("sigma parse error: ") + e.what());
    }
    if (j.is_array()) return {ge::parse_sym_matrix(j), {}};
    if (j.is_object() && j.contains("sigma")) {
        ge::SymMatrix sigma = ge::parse_sym_matrix(j.at("sigma"));
        ge::Vec mu;
        if (j.contains("mu")) mu = j.at("mu").get<std::vector<double>>();
        return {std::move(sigma), std::move(mu)};
    }
    throw ge::InputError("sigma file must be an array-of-arrays or {\"sigma\": ..., \"mu\": ...}");
}

// Writes to the file when a path is given, stdout otherwise.
int with_output(const std::optional<std::string>& path, const std::function<int(std::ostream&)>& fn) {
    if (!path) return fn(std::cout);
    std::ofstream out(*path);
    if (!out) throw ge::InputError("cannot open output file: " + *path);
    return fn(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic ordering and tail asymptotics of Gini indexes for elliptical risks"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path, sigma_path, convention = "unnormalized";
    std::string format = "csv";
    std::size_t restarts = 0;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<std::string> out_opt, curves_prefix;

    auto* sample = app.add_subcommand("sample", "Draw from model_x and write a CSV of rows");
    sample->add_option("--config", config_path, "experiment config JSON")->required();
    sample->add_option("--out", out_path, "output CSV path")->required();
    sample->add_option("--seed", seed, "override the config seed");
    sample->add_option("--samples", samples, "override the config sample count");

    auto* gini = app.add_subcommand("gini", "Per-row Gini index of a CSV of sample rows");
    gini->add_option("--in", in_path, "input CSV")->required();
    gini->add_option("--out", out_path, "output CSV")->required();
    gini->add_option("--convention", convention, "unnormalized|normalized");

    auto* check = app.add_subcommand("check", "Dispersion conditions and ordering predictions");
    check->add_option("--config", config_path, "experiment config JSON")->required();
    check->add_option("--out", out_opt, "output path (default stdout)");

    auto* run = app.add_subcommand("run", "Run the configured experiment and write a record");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--out", out_opt, "record path (default: config output_path, else stdout)");
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--samples", samples, "override the config sample count");
    run->add_option("--curves", curves_prefix, "prefix for per-test survival curve CSVs");

    auto* tail_rate = app.add_subcommand("tail-rate", "Large-deviation rate for a normal model");
    tail_rate->add_option("--sigma", sigma_path, "JSON dispersion matrix")->required();
    tail_rate->add_option("--out", out_opt, "output path (default stdout)");
    tail_rate->add_option("--restarts", restarts,
                          "above the n! cap: hill-climb restarts for a rate bound");
    tail_rate->add_option("--seed", seed, "seed for the stochastic rate bound");

    auto* tail_identity = app.add_subcommand("tail-identity", "Permutation tail identity check");
    tail_identity->add_option("--config", config_path, "experiment config JSON")->required();
    tail_identity->add_option("--out", out_opt, "output path (default stdout)");
    tail_identity->add_option("--seed", seed, "override the config seed");
    tail_identity->add_option("--samples", samples, "override the config sample count");
    tail_identity->add_option("--format", format, "csv (default) or json");

    auto* reproduce = app.add_subcommand("reproduce", "Built-in reproduction suite");
    (void)reproduce;

    CLI11_PARSE(app, argc, argv);

    return guarded([&]() -> int {
        if (sample->parsed()) {
            return ge::cmd_sample(load_with_overrides(config_path, seed, samples), out_path);
        }
        if (gini->parsed()) {
            return ge::cmd_gini(in_path, out_path, ge::parse_convention(convention));
        }
        if (check->parsed()) {
            const ge::ExperimentConfig cfg = ge::load_config_file(config_path);
            return with_output(out_opt, [&](std::ostream& os) { return ge::cmd_check(cfg, os); });
        }
        if (run->parsed()) {
            ge::ExperimentConfig cfg = load_with_overrides(config_path, seed, samples);
            std::optional<std::string> target = out_opt ? out_opt : cfg.output_path;
            return with_output(target, [&](std::ostream& os) {
                return ge::cmd_run(cfg, os, std::cerr, curves_prefix);
            });
        }
        if (tail_rate->parsed()) {
            const auto [sigma, mu] = load_sigma_file(sigma_path);
            return with_output(out_opt, [&](std::ostream& os) {
                return ge::cmd_tail_rate(sigma, mu, os, restarts, seed.value_or(1));
            });
        }
        if (tail_identity->parsed()) {
            const ge::ExperimentConfig cfg = load_with_overrides(config_path, seed, samples);
            return with_output(out_opt, [&](std::ostream& os) {
                return ge::cmd_tail_identity(cfg, os, format);
            });
        }
        return ge::cmd_reproduce(std::cout);
    });
}
