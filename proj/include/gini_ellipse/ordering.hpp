#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gini_ellipse/elliptical.hpp"
#include "gini_ellipse/gini.hpp"
#include "gini_ellipse/matrix.hpp"

namespace gini_ellipse {

// Structural pattern of one dispersion pair against a second one: the first
// row/column raised by a common eps (first_row) or all off-diagonals raised
// (all_offdiag). Exact hypotheses, matched within 1e-9 entrywise; near misses
// report the max deviation.
struct PatternMatch {
    bool matches = false;
    double epsilon = 0.0;
    double max_deviation = 0.0;
};

// Conditions evaluated for the ordered pair (first, second); "leq"-type
// conditions ask whether the first dispersion is dominated by the second.
struct DirectionalConditions {
    PsdVerdict loewner;                    // S1 <= S2 (Loewner)
    PsdVerdict centered;                   // A S1 A' <= A S2 A'
    EpsilonFeasibility eps_feasible;       // exists eps: S2 - S1 + eps*ones PSD
    PatternMatch raised_first_row;         // S2 = S1 with first row/col off-diag + eps
    PatternMatch raised_all_offdiag;       // S2 = S1 with all off-diag + eps, equal diagonals
    bool componentwise_offdiag_leq = false;  // s1_ij <= s2_ij for all i < j
};

struct DispersionConditionSet {
    DirectionalConditions xy;  // conditions with (first, second) = (X, Y)
    DirectionalConditions yx;
    bool same_marginals = false;      // equal sigma diagonals and equal locations
    bool locations_equal = false;
    bool location_x_constant = false;  // mu_x == c * ones (or 0)
    bool location_y_constant = false;
};

DispersionConditionSet classify_dispersion(const SymMatrix& sigma_x, const SymMatrix& sigma_y,
                                           const Vec& mu_x, const Vec& mu_y,
                                           double tol = kDefaultTol);

enum class Relation { kSt, kIcxOfNegation, kMeanLeq };
enum class ModelSide { kX, kY };
enum class AppliesTo { kGiniOfCentered, kGiniRaw };

// `dominant` names the stochastically larger side: for st, G(dominated) <=_st
// G(dominant); for icx-of-negation, -G(dominated') ... <=_icx with the
// dominant side on the right; for mean_leq the dominant side has the larger
// mean Gini.
struct OrderPrediction {
    Relation relation = Relation::kSt;
    ModelSide dominant = ModelSide::kY;
    AppliesTo applies_to = AppliesTo::kGiniOfCentered;
    std::string source;
    bool location_caveat = false;

    bool operator==(const OrderPrediction&) const = default;
};

std::string relation_name(Relation r);
std::string side_name(ModelSide s);
std::string applies_to_name(AppliesTo a);

// Every prediction licensed by the true conditions, both directions. Raw-Gini
// conclusions carry location_caveat=true unless both locations are constant
// vectors.
std::vector<OrderPrediction> predict_orderings(const DispersionConditionSet& conds,
                                               const Vec& mu_x, const Vec& mu_y);

enum class TestVerdict { kConsistent, kViolated, kInconclusive };
std::string verdict_name(TestVerdict v);

// Survival curves (st) or stop-loss transforms (icx) of the two sample sets
// on a shared threshold grid spanning the pooled [0.5%, 99.5%] quantiles.
// The test checks a <=_st b (resp. a <=_icx b): a violation at threshold t
// means curve_a(t) - curve_b(t) > z * sigma(t).
struct OrderTestReport {
    std::string statistic;  // "survival" or "stop_loss"
    std::vector<double> grid;
    std::vector<double> curve_a;
    std::vector<double> curve_b;
    std::vector<double> mc_sigma;
    double max_violation = 0.0;  // max over grid of curve_a - curve_b
    TestVerdict verdict = TestVerdict::kInconclusive;
    std::size_t count_a = 0;
    std::size_t count_b = 0;
};

OrderTestReport empirical_st_test(std::span<const double> samples_a,
                                  std::span<const double> samples_b, std::size_t grid_size = 200,
                                  double z = 4.0);

OrderTestReport empirical_icx_test(std::span<const double> samples_a,
                                   std::span<const double> samples_b, std::size_t grid_size = 200,
                                   double z = 4.0);

// Mean comparison for the expected Gini: predicted mean(dominant)
// >= mean(other); violated when the deficit exceeds z standard errors.
// `paired` uses the per-path difference variance (valid under coupling).
struct MeanTestReport {
    double mean_dominant = 0.0;
    double mean_other = 0.0;
    double sigma_diff = 0.0;
    double margin_sigmas = 0.0;  // (mean_dominant - mean_other) / sigma_diff
    TestVerdict verdict = TestVerdict::kInconclusive;
};

MeanTestReport mean_dominance_test(std::span<const double> dominant,
                                   std::span<const double> other, bool paired, double z = 4.0);

enum class TestStatus { kConsistent, kViolated, kInconclusive, kInapplicable };
std::string status_name(TestStatus s);

struct PredictionTest {
    OrderPrediction prediction;
    TestStatus status = TestStatus::kInapplicable;
    std::string note;
    std::optional<OrderTestReport> report;
    std::optional<MeanTestReport> mean_report;
};

struct ExperimentOptions {
    std::size_t sample_count = 1'000'000;
    std::uint64_t seed = 1;
    GiniConvention convention = GiniConvention::kUnnormalized;
    std::size_t grid_size = 200;
    double z_threshold = 4.0;
    bool couple = true;
    bool run_st = true;
    bool run_icx = true;
};

struct ExperimentRecord {
    DispersionConditionSet conditions;
    std::vector<OrderPrediction> predictions;
    std::vector<PredictionTest> tests;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
    bool coupled = false;
    // True iff some prediction without a location caveat came out violated.
    bool any_violation = false;
};

// Classifies, predicts, samples both models (coupled by default), computes
// raw and centered Gini per path and runs the st/icx/mean tests for each
// prediction. Models must share the generator (and mixing law), otherwise
// HypothesisError.
ExperimentRecord run_ordering_experiment(const Model& model_x, const Model& model_y,
                                         const ExperimentOptions& opts);

}  // namespace gini_ellipse
