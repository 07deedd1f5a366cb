#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "gini_ellipse/config.hpp"
#include "gini_ellipse/ordering.hpp"
#include "gini_ellipse/tail.hpp"

namespace gini_ellipse {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared by the CLI:
//   0 consistent / pass, 2 input error, 3 hypothesis violation,
//   4 a prediction was violated.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitHypothesis = 3;
inline constexpr int kExitViolated = 4;

// JSON views of the result types (used by cmd_check / cmd_run output).
nlohmann::json to_json(const PsdVerdict& v);
nlohmann::json to_json(const EpsilonFeasibility& f);
nlohmann::json to_json(const DispersionConditionSet& c);
nlohmann::json to_json(const OrderPrediction& p);
nlohmann::json to_json(const OrderTestReport& r);
nlohmann::json to_json(const MeanTestReport& r);
nlohmann::json to_json(const ExperimentRecord& rec);
nlohmann::json to_json(const TailRateResult& r);
nlohmann::json to_json(const TailIdentityReport& r);

// Writes count x n draws of model_x as CSV (header x1..xn) plus a sidecar
// <out>.meta.json echoing the model, seed and count.
int cmd_sample(const ExperimentConfig& cfg, const std::string& out_csv);

// Reads a CSV of sample rows, emits one Gini value per row.
int cmd_gini(const std::string& in_csv, const std::string& out_csv, GiniConvention conv);

// Condition set plus predictions for the config's two dispersion matrices.
int cmd_check(const ExperimentConfig& cfg, std::ostream& out);

// Full experiment per the config's `tests` set; record written to `out`.
// Wall-clock timing goes to `log` (stderr in the CLI) so that rerunning an
// identical config reproduces the output byte for byte.
int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log,
            const std::optional<std::string>& curves_prefix = std::nullopt);

// Exact enumeration up to the n! cap; above it, `restarts` > 0 switches to
// the stochastic permutation search, whose result is a lower bound on the
// maximal diagonal (an upper bound on |rate|) and is flagged exact=false.
int cmd_tail_rate(const SymMatrix& sigma, const Vec& mu, std::ostream& out,
                  std::size_t restarts = 0, std::uint64_t seed = 1);

// CSV (t,p_direct,p_union,sigma) or, with format == "json", the full report.
int cmd_tail_identity(const ExperimentConfig& cfg, std::ostream& out,
                      const std::string& format = "csv");

// Built-in reproduction suite: the n = 2 identity-rate example (-1/16 vs the
// prior -2/5 claim), the closed-form tail comparison, the analytic rate
// convergence and the pathwise permutation identity. Prints one line per
// check; nonzero on any failure.
int cmd_reproduce(std::ostream& out);

// Formats a double as round-trippable CSV text (%.17g).
std::string csv_double(double v);

}  // namespace gini_ellipse
