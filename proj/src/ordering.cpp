#include "gini_ellipse/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "gini_ellipse/errors.hpp"

namespace gini_ellipse {

namespace {

constexpr double kPatternTol = 1e-9;

PatternMatch detect_raised_first_row(const SymMatrix& s1, const SymMatrix& s2) {
    PatternMatch out;
    const std::size_t n = s1.dim;
    if (n < 2) return out;
    const double eps = s2.at(0, 1) - s1.at(0, 1);
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = s2.at(i, j) - s1.at(i, j);
            const bool first_row_off = (i == 0) != (j == 0);  // first row or column, not (0,0)
            dev = std::max(dev, std::abs(first_row_off ? d - eps : d));
        }
    }
    out.epsilon = eps;
    out.max_deviation = dev;
    out.matches = eps > kPatternTol && dev <= kPatternTol;
    return out;
}

PatternMatch detect_raised_all_offdiag(const SymMatrix& s1, const SymMatrix& s2) {
    PatternMatch out;
    const std::size_t n = s1.dim;
    if (n < 2) return out;
    const double eps = s2.at(0, 1) - s1.at(0, 1);
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = s2.at(i, j) - s1.at(i, j);
            dev = std::max(dev, std::abs(i == j ? d : d - eps));
        }
    }
    out.epsilon = eps;
    out.max_deviation = dev;
    out.matches = eps > kPatternTol && dev <= kPatternTol;
    return out;
}

DirectionalConditions classify_direction(const SymMatrix& s1, const SymMatrix& s2, double tol) {
    DirectionalConditions c;
    c.loewner = loewner_leq(s1, s2, tol);
    c.centered = centered_loewner_leq(s1, s2, tol);
    c.eps_feasible = epsilon_feasible(s1, s2, tol);
    c.raised_first_row = detect_raised_first_row(s1, s2);
    c.raised_all_offdiag = detect_raised_all_offdiag(s1, s2);
    c.componentwise_offdiag_leq = true;
    for (std::size_t i = 0; i < s1.dim && c.componentwise_offdiag_leq; ++i)
        for (std::size_t j = i + 1; j < s1.dim; ++j)
            if (s1.at(i, j) > s2.at(i, j) + 1e-12 * std::max(1.0, std::abs(s2.at(i, j)))) {
                c.componentwise_offdiag_leq = false;
                break;
            }
    return c;
}

bool vector_constant(const Vec& v) {
    for (double x : v)
        if (x != v.front()) return false;
    return true;
}

}  // namespace

DispersionConditionSet classify_dispersion(const SymMatrix& sigma_x, const SymMatrix& sigma_y,
                                           const Vec& mu_x, const Vec& mu_y, double tol) {
    if (sigma_x.dim != sigma_y.dim) throw InputError("classify_dispersion: dimension mismatch");
    if (mu_x.size() != sigma_x.dim || mu_y.size() != sigma_y.dim)
        throw InputError("classify_dispersion: location length mismatch");
    DispersionConditionSet set;
    set.xy = classify_direction(sigma_x, sigma_y, tol);
    set.yx = classify_direction(sigma_y, sigma_x, tol);
    set.locations_equal = true;
    for (std::size_t i = 0; i < mu_x.size(); ++i)
        if (std::abs(mu_x[i] - mu_y[i]) > kPatternTol) {
            set.locations_equal = false;
            break;
        }
    set.location_x_constant = vector_constant(mu_x);
    set.location_y_constant = vector_constant(mu_y);
    set.same_marginals = set.locations_equal;
    for (std::size_t i = 0; i < sigma_x.dim && set.same_marginals; ++i)
        if (std::abs(sigma_x.at(i, i) - sigma_y.at(i, i)) > kPatternTol)
            set.same_marginals = false;
    return set;
}

std::string relation_name(Relation r) {
    switch (r) {
        case Relation::kSt: return "st";
        case Relation::kIcxOfNegation: return "icx_of_negation";
        case Relation::kMeanLeq: return "mean_leq";
    }
    return "?";
}

std::string side_name(ModelSide s) { return s == ModelSide::kX ? "X" : "Y"; }

std::string applies_to_name(AppliesTo a) {
    return a == AppliesTo::kGiniOfCentered ? "gini_of_centered" : "gini_raw";
}

std::string verdict_name(TestVerdict v) {
    switch (v) {
        case TestVerdict::kConsistent: return "consistent";
        case TestVerdict::kViolated: return "violated";
        case TestVerdict::kInconclusive: return "inconclusive";
    }
    return "?";
}

std::string status_name(TestStatus s) {
    switch (s) {
        case TestStatus::kConsistent: return "consistent";
        case TestStatus::kViolated: return "violated";
        case TestStatus::kInconclusive: return "inconclusive";
        case TestStatus::kInapplicable: return "inapplicable";
    }
    return "?";
}

std::vector<OrderPrediction> predict_orderings(const DispersionConditionSet& conds,
                                               const Vec& mu_x, const Vec& mu_y) {
    (void)mu_x;
    (void)mu_y;
    std::vector<OrderPrediction> out;
    const bool raw_ok = conds.location_x_constant && conds.location_y_constant;

    auto emit_st = [&](ModelSide dominant, const std::string& source) {
        out.push_back({Relation::kSt, dominant, AppliesTo::kGiniOfCentered, source, false});
        out.push_back({Relation::kSt, dominant, AppliesTo::kGiniRaw, source, !raw_ok});
    };

    // Direction (first, second): "leq"-type conditions make the second model's
    // Gini stochastically larger; the raised patterns reverse that.
    auto emit_direction = [&](const DirectionalConditions& c, ModelSide second, ModelSide first) {
        if (c.loewner.is_psd) emit_st(second, "loewner_order");
        if (c.eps_feasible.feasible) emit_st(second, "epsilon_ones_shift");
        if (c.centered.is_psd) emit_st(second, "centered_loewner");
        if (c.raised_first_row.matches) emit_st(first, "first_row_raised");
        if (c.raised_all_offdiag.matches) emit_st(first, "all_offdiag_raised");
    };
    emit_direction(conds.xy, ModelSide::kY, ModelSide::kX);
    emit_direction(conds.yx, ModelSide::kX, ModelSide::kY);

    if (conds.same_marginals && conds.xy.componentwise_offdiag_leq) {
        out.push_back({Relation::kIcxOfNegation, ModelSide::kY, AppliesTo::kGiniRaw, "same_marginals_icx", false});
        out.push_back({Relation::kMeanLeq, ModelSide::kX, AppliesTo::kGiniRaw, "mean_gini_comparison", false});
    }
    if (conds.same_marginals && conds.yx.componentwise_offdiag_leq) {
        out.push_back({Relation::kIcxOfNegation, ModelSide::kX, AppliesTo::kGiniRaw, "same_marginals_icx", false});
        out.push_back({Relation::kMeanLeq, ModelSide::kY, AppliesTo::kGiniRaw, "mean_gini_comparison", false});
    }
    return out;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double p) {
    const std::size_t n = v.size();
    double idx = std::ceil(p * static_cast<double>(n)) - 1.0;
    idx = std::clamp(idx, 0.0, static_cast<double>(n - 1));
    return v[static_cast<std::size_t>(idx)];
}

std::vector<double> make_grid(const std::vector<double>& pooled_sorted, std::size_t grid_size) {
    const double lo = quantile_sorted(pooled_sorted, 0.005);
    const double hi = quantile_sorted(pooled_sorted, 0.995);
    if (!(hi > lo)) return {};
    std::vector<double> grid(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k)
        grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_size - 1);
    return grid;
}

double survival_sorted(const std::vector<double>& v, double t) {
    const auto it = std::upper_bound(v.begin(), v.end(), t);
    return static_cast<double>(v.end() - it) / static_cast<double>(v.size());
}

}  // namespace

OrderTestReport empirical_st_test(std::span<const double> samples_a,
                                  std::span<const double> samples_b, std::size_t grid_size,
                                  double z) {
    if (samples_a.empty() || samples_b.empty())
        throw InputError("empirical_st_test: samples must be nonempty");
    if (grid_size < 2) throw InputError("empirical_st_test: grid_size must be >= 2");

    std::vector<double> a(samples_a.begin(), samples_a.end());
    std::vector<double> b(samples_b.begin(), samples_b.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> pooled;
    pooled.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(pooled));

    OrderTestReport report;
    report.statistic = "survival";
    report.count_a = a.size();
    report.count_b = b.size();
    report.grid = make_grid(pooled, grid_size);
    if (report.grid.empty()) {
        report.verdict = TestVerdict::kInconclusive;
        return report;
    }

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    report.max_violation = -std::numeric_limits<double>::infinity();
    bool violated = false;
    for (double t : report.grid) {
        const double pa = survival_sorted(a, t);
        const double pb = survival_sorted(b, t);
        const double sigma = std::sqrt(pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb);
        report.curve_a.push_back(pa);
        report.curve_b.push_back(pb);
        report.mc_sigma.push_back(sigma);
        const double diff = pa - pb;
        report.max_violation = std::max(report.max_violation, diff);
        if (diff > 0.0 && diff > z * sigma) violated = true;
    }
    report.verdict = violated ? TestVerdict::kViolated : TestVerdict::kConsistent;
    return report;
}

OrderTestReport empirical_icx_test(std::span<const double> samples_a,
                                   std::span<const double> samples_b, std::size_t grid_size,
                                   double z) {
    if (samples_a.empty() || samples_b.empty())
        throw InputError("empirical_icx_test: samples must be nonempty");
    if (grid_size < 2) throw InputError("empirical_icx_test: grid_size must be >= 2");

    std::vector<double> a(samples_a.begin(), samples_a.end());
    std::vector<double> b(samples_b.begin(), samples_b.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> pooled;
    pooled.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(pooled));

    OrderTestReport report;
    report.statistic = "stop_loss";
    report.count_a = a.size();
    report.count_b = b.size();
    report.grid = make_grid(pooled, grid_size);
    if (report.grid.empty()) {
        report.verdict = TestVerdict::kInconclusive;
        return report;
    }

    // Suffix sums for O(log n) stop-loss evaluation per threshold.
    auto suffix_sums = [](const std::vector<double>& v) {
        std::vector<double> s1(v.size() + 1, 0.0), s2(v.size() + 1, 0.0);
        for (std::size_t i = v.size(); i-- > 0;) {
            s1[i] = s1[i + 1] + v[i];
            s2[i] = s2[i + 1] + v[i] * v[i];
        }
        return std::pair(std::move(s1), std::move(s2));
    };
    const auto [sa1, sa2] = suffix_sums(a);
    const auto [sb1, sb2] = suffix_sums(b);

    auto stop_loss = [](const std::vector<double>& v, const std::vector<double>& s1,
                        const std::vector<double>& s2, double t, double& var_out) {
        const double n = static_cast<double>(v.size());
        const std::size_t idx =
            static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), t) - v.begin());
        const double cnt = static_cast<double>(v.size() - idx);
        const double mean = (s1[idx] - t * cnt) / n;
        const double mom2 = (s2[idx] - 2.0 * t * s1[idx] + t * t * cnt) / n;
        var_out = std::max(0.0, mom2 - mean * mean);
        return mean;
    };

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    report.max_violation = -std::numeric_limits<double>::infinity();
    bool violated = false;
    for (double t : report.grid) {
        double va = 0.0, vb = 0.0;
        const double sla = stop_loss(a, sa1, sa2, t, va);
        const double slb = stop_loss(b, sb1, sb2, t, vb);
        const double sigma = std::sqrt(va / na + vb / nb);
        report.curve_a.push_back(sla);
        report.curve_b.push_back(slb);
        report.mc_sigma.push_back(sigma);
        const double diff = sla - slb;
        report.max_violation = std::max(report.max_violation, diff);
        if (diff > 0.0 && diff > z * sigma) violated = true;
    }
    report.verdict = violated ? TestVerdict::kViolated : TestVerdict::kConsistent;
    return report;
}

MeanTestReport mean_dominance_test(std::span<const double> dominant,
                                   std::span<const double> other, bool paired, double z) {
    if (dominant.empty() || other.empty())
        throw InputError("mean_dominance_test: samples must be nonempty");
    if (paired && dominant.size() != other.size())
        throw InputError("mean_dominance_test: paired samples must have equal size");

    auto mean_of = [](std::span<const double> v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    MeanTestReport rep;
    rep.mean_dominant = mean_of(dominant);
    rep.mean_other = mean_of(other);

    if (paired) {
        const double n = static_cast<double>(dominant.size());
        double m = 0.0;
        for (std::size_t i = 0; i < dominant.size(); ++i) m += dominant[i] - other[i];
        m /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < dominant.size(); ++i) {
            const double d = dominant[i] - other[i] - m;
            var += d * d;
        }
        var /= std::max(1.0, n - 1.0);
        rep.sigma_diff = std::sqrt(var / n);
    } else {
        auto var_of = [&](std::span<const double> v, double m) {
            double var = 0.0;
            for (double x : v) var += (x - m) * (x - m);
            return var / std::max<double>(1.0, static_cast<double>(v.size()) - 1.0);
        };
        rep.sigma_diff = std::sqrt(var_of(dominant, rep.mean_dominant) / dominant.size() +
                                   var_of(other, rep.mean_other) / other.size());
    }

    const double diff = rep.mean_dominant - rep.mean_other;
    rep.margin_sigmas = rep.sigma_diff > 0.0
                            ? diff / rep.sigma_diff
                            : (diff >= 0.0 ? std::numeric_limits<double>::infinity()
                                           : -std::numeric_limits<double>::infinity());
    rep.verdict = (-diff > z * rep.sigma_diff) ? TestVerdict::kViolated : TestVerdict::kConsistent;
    return rep;
}

ExperimentRecord run_ordering_experiment(const Model& model_x, const Model& model_y,
                                         const ExperimentOptions& opts) {
    if (model_dim(model_x) != model_dim(model_y))
        throw InputError("run_ordering_experiment: dimension mismatch");
    if (!same_family(model_x, model_y))
        throw HypothesisError(
            "run_ordering_experiment: the ordering results require a common generator "
            "(same radial law and, for scale mixtures, same mixing law)");
    if (opts.sample_count == 0) throw InputError("run_ordering_experiment: empty sample");

    ExperimentRecord rec;
    rec.sample_count = opts.sample_count;
    rec.seed = opts.seed;
    rec.coupled = opts.couple;
    rec.conditions = classify_dispersion(model_sigma(model_x), model_sigma(model_y),
                                         model_mu(model_x), model_mu(model_y));
    rec.predictions = predict_orderings(rec.conditions, model_mu(model_x), model_mu(model_y));

    SampleMatrix sx, sy;
    if (opts.couple) {
        CoupledSamples cs = sample_coupled(model_x, model_y, opts.sample_count, opts.seed);
        sx = std::move(cs.x);
        sy = std::move(cs.y);
    } else {
        sx = sample_model(model_x, opts.sample_count, opts.seed, stream_purpose::kSampleX);
        sy = sample_model(model_y, opts.sample_count, opts.seed, stream_purpose::kSampleY);
    }

    const std::size_t dim = model_dim(model_x);
    const std::vector<double> gx_raw = gini_rows(sx.data, sx.count, dim, opts.convention);
    const std::vector<double> gy_raw = gini_rows(sy.data, sy.count, dim, opts.convention);
    const std::vector<double> gx_cen =
        gini_rows(sx.data, sx.count, dim, opts.convention, model_mu(model_x));
    const std::vector<double> gy_cen =
        gini_rows(sy.data, sy.count, dim, opts.convention, model_mu(model_y));

    const bool icx_family_ok = model_is_normal_mixture(model_x) && model_is_normal_mixture(model_y);
    const bool means_exist = model_has_mean(model_x) && model_has_mean(model_y);

    std::map<std::tuple<Relation, ModelSide, AppliesTo>, PredictionTest> cache;

    for (const OrderPrediction& pred : rec.predictions) {
        const auto key = std::make_tuple(pred.relation, pred.dominant, pred.applies_to);
        auto found = cache.find(key);
        if (found == cache.end()) {
            PredictionTest pt;
            pt.prediction = pred;
            const bool want_st = pred.relation == Relation::kSt;
            if (want_st && !opts.run_st) {
                pt.status = TestStatus::kInapplicable;
                pt.note = "st tests not requested";
            } else if (!want_st && !opts.run_icx) {
                pt.status = TestStatus::kInapplicable;
                pt.note = "icx tests not requested";
            } else if (!want_st && !icx_family_ok) {
                pt.status = TestStatus::kInapplicable;
                pt.note = "family is not a normal mixture; the icx comparison does not apply";
            } else if (!want_st && !means_exist) {
                pt.status = TestStatus::kInapplicable;
                pt.note = "mean does not exist for this family (nu <= 1)";
            } else {
                const bool centered = pred.applies_to == AppliesTo::kGiniOfCentered;
                const std::vector<double>& gx = centered ? gx_cen : gx_raw;
                const std::vector<double>& gy = centered ? gy_cen : gy_raw;
                const std::vector<double>& g_dom = pred.dominant == ModelSide::kY ? gy : gx;
                const std::vector<double>& g_oth = pred.dominant == ModelSide::kY ? gx : gy;
                switch (pred.relation) {
                    case Relation::kSt: {
                        pt.report =
                            empirical_st_test(g_oth, g_dom, opts.grid_size, opts.z_threshold);
                        break;
                    }
                    case Relation::kIcxOfNegation: {
                        std::vector<double> neg_oth(g_oth.size()), neg_dom(g_dom.size());
                        std::transform(g_oth.begin(), g_oth.end(), neg_oth.begin(),
                                       [](double v) { return -v; });
                        std::transform(g_dom.begin(), g_dom.end(), neg_dom.begin(),
                                       [](double v) { return -v; });
                        pt.report =
                            empirical_icx_test(neg_oth, neg_dom, opts.grid_size, opts.z_threshold);
                        break;
                    }
                    case Relation::kMeanLeq: {
                        pt.mean_report =
                            mean_dominance_test(g_dom, g_oth, opts.couple, opts.z_threshold);
                        break;
                    }
                }
                const TestVerdict v = pt.report ? pt.report->verdict : pt.mean_report->verdict;
                pt.status = v == TestVerdict::kConsistent     ? TestStatus::kConsistent
                            : v == TestVerdict::kViolated     ? TestStatus::kViolated
                                                              : TestStatus::kInconclusive;
            }
            found = cache.emplace(key, std::move(pt)).first;
        }
        PredictionTest pt = found->second;
        pt.prediction = pred;
        if (pt.status == TestStatus::kViolated && !pred.location_caveat) rec.any_violation = true;
        rec.tests.push_back(std::move(pt));
    }
    return rec;
}

}  // namespace gini_ellipse
