#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gini_ellipse/errors.hpp"
#include "gini_ellipse/ordering.hpp"
#include "gini_ellipse/rng.hpp"
#include "support.hpp"

using namespace gini_ellipse;

namespace {

SymMatrix raised_first_row(double eps, std::size_t n = 3) {
    SymMatrix s = SymMatrix::identity(n);
    for (std::size_t j = 1; j < n; ++j) s.set(0, j, eps);
    return s;
}

SymMatrix raised_all_offdiag(double eps, std::size_t n = 3) {
    SymMatrix s = SymMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) s.set(i, j, eps);
    return s;
}

bool has_prediction(const std::vector<OrderPrediction>& preds, Relation rel, ModelSide dom,
                    AppliesTo app) {
    return std::any_of(preds.begin(), preds.end(), [&](const OrderPrediction& p) {
        return p.relation == rel && p.dominant == dom && p.applies_to == app;
    });
}

}  // namespace

TEST_CASE("classifier on the Loewner-comparable pair") {
    const Vec zero2{0.0, 0.0};
    const auto conds = classify_dispersion(SymMatrix::identity(2),
                                           SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}}), zero2,
                                           zero2);
    CHECK(conds.xy.loewner.is_psd);
    CHECK(conds.xy.eps_feasible.feasible);
    CHECK(conds.xy.eps_feasible.epsilon_star == 0.0);
    CHECK(conds.xy.centered.is_psd);
    CHECK_FALSE(conds.yx.loewner.is_psd);
    CHECK(conds.locations_equal);
    CHECK_FALSE(conds.same_marginals);  // diagonals differ
    CHECK(conds.xy.componentwise_offdiag_leq);
}

TEST_CASE("classifier detects the structural patterns") {
    const Vec zero3{0.0, 0.0, 0.0};
    SUBCASE("first row/column raised") {
        const auto conds =
            classify_dispersion(SymMatrix::identity(3), raised_first_row(0.3), zero3, zero3);
        CHECK(conds.xy.raised_first_row.matches);
        CHECK(conds.xy.raised_first_row.epsilon == doctest::Approx(0.3));
        CHECK_FALSE(conds.xy.raised_all_offdiag.matches);
        CHECK_FALSE(conds.yx.raised_first_row.matches);
        // The raised direction is eps-feasible the other way round.
        CHECK(conds.yx.eps_feasible.feasible);
        CHECK_FALSE(conds.xy.centered.is_psd);
        CHECK(conds.yx.centered.is_psd);
        CHECK(conds.same_marginals);
    }
    SUBCASE("all off-diagonals raised") {
        const auto conds =
            classify_dispersion(SymMatrix::identity(3), raised_all_offdiag(0.5), zero3, zero3);
        CHECK(conds.xy.raised_all_offdiag.matches);
        CHECK(conds.xy.raised_all_offdiag.epsilon == doctest::Approx(0.5));
        CHECK(conds.yx.eps_feasible.feasible);
        CHECK(conds.same_marginals);
    }
    SUBCASE("near misses report the deviation") {
        SymMatrix almost = raised_all_offdiag(0.5);
        almost.set(1, 2, 0.5 + 1e-6);
        const auto conds = classify_dispersion(SymMatrix::identity(3), almost, zero3, zero3);
        CHECK_FALSE(conds.xy.raised_all_offdiag.matches);
        CHECK(conds.xy.raised_all_offdiag.max_deviation == doctest::Approx(1e-6).epsilon(1e-3));
    }
    SUBCASE("equal matrices satisfy every comparison with eps zero") {
        const auto conds =
            classify_dispersion(SymMatrix::identity(3), SymMatrix::identity(3), zero3, zero3);
        CHECK(conds.xy.loewner.is_psd);
        CHECK(conds.yx.loewner.is_psd);
        CHECK(conds.xy.eps_feasible.feasible);
        CHECK(conds.yx.eps_feasible.feasible);
        CHECK(conds.xy.eps_feasible.epsilon_star == 0.0);
        CHECK(conds.same_marginals);
    }
}

TEST_CASE("prediction emission") {
    const Vec zero2{0.0, 0.0};
    SUBCASE("Loewner order with zero locations upgrades to raw Gini") {
        const auto conds = classify_dispersion(
            SymMatrix::identity(2), SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}}), zero2, zero2);
        const auto preds = predict_orderings(conds, zero2, zero2);
        CHECK(has_prediction(preds, Relation::kSt, ModelSide::kY, AppliesTo::kGiniOfCentered));
        CHECK(has_prediction(preds, Relation::kSt, ModelSide::kY, AppliesTo::kGiniRaw));
        for (const auto& p : preds)
            if (p.applies_to == AppliesTo::kGiniRaw) CHECK_FALSE(p.location_caveat);
    }
    SUBCASE("raised pattern with constant location predicts the base model dominates") {
        const Vec mu{2.0, 2.0, 2.0};
        const auto conds =
            classify_dispersion(SymMatrix::identity(3), raised_all_offdiag(0.4), mu, mu);
        const auto preds = predict_orderings(conds, mu, mu);
        CHECK(has_prediction(preds, Relation::kSt, ModelSide::kX, AppliesTo::kGiniRaw));
        CHECK(has_prediction(preds, Relation::kIcxOfNegation, ModelSide::kY, AppliesTo::kGiniRaw));
        CHECK(has_prediction(preds, Relation::kMeanLeq, ModelSide::kX, AppliesTo::kGiniRaw));
    }
    SUBCASE("nonconstant locations leave a caveat on raw predictions") {
        const Vec mu{0.0, 1.0, 2.0};
        const auto conds =
            classify_dispersion(SymMatrix::identity(3), raised_all_offdiag(0.4), mu, mu);
        const auto preds = predict_orderings(conds, mu, mu);
        bool saw_raw = false;
        for (const auto& p : preds) {
            if (p.relation == Relation::kSt && p.applies_to == AppliesTo::kGiniRaw) {
                saw_raw = true;
                CHECK(p.location_caveat);
            }
            if (p.relation == Relation::kSt && p.applies_to == AppliesTo::kGiniOfCentered)
                CHECK_FALSE(p.location_caveat);
        }
        CHECK(saw_raw);
    }
    SUBCASE("equal dispersions predict both directions") {
        const auto conds =
            classify_dispersion(SymMatrix::identity(2), SymMatrix::identity(2), zero2, zero2);
        const auto preds = predict_orderings(conds, zero2, zero2);
        CHECK(has_prediction(preds, Relation::kSt, ModelSide::kY, AppliesTo::kGiniOfCentered));
        CHECK(has_prediction(preds, Relation::kSt, ModelSide::kX, AppliesTo::kGiniOfCentered));
    }
}

TEST_CASE("empirical st test") {
    RandomStream rng(1123);
    std::vector<double> a(50000);
    for (auto& v : a) v = std::abs(rng.normal());

    SUBCASE("identical samples are consistent") {
        const auto rep = empirical_st_test(a, a);
        CHECK(rep.verdict == TestVerdict::kConsistent);
        CHECK(rep.max_violation <= 0.0);
    }
    SUBCASE("pathwise dominance is consistent") {
        std::vector<double> b(a);
        for (auto& v : b) v *= 2.0;
        CHECK(empirical_st_test(a, b).verdict == TestVerdict::kConsistent);
    }
    SUBCASE("a genuine violation is detected") {
        std::vector<double> b(a.size());
        for (auto& v : b) v = std::abs(rng.normal()) - 0.25;
        // Claim a <= b is false: a is stochastically larger.
        CHECK(empirical_st_test(a, b).verdict == TestVerdict::kViolated);
    }
    SUBCASE("common rescaling leaves the verdict and curves unchanged") {
        std::vector<double> b(a.size());
        for (auto& v : b) v = 1.5 * std::abs(rng.normal());
        const auto rep = empirical_st_test(a, b);
        std::vector<double> a2(a), b2(b);
        for (auto& v : a2) v *= 2.0;
        for (auto& v : b2) v *= 2.0;
        const auto rep2 = empirical_st_test(a2, b2);
        CHECK(rep.verdict == rep2.verdict);
        REQUIRE(rep.grid.size() == rep2.grid.size());
        for (std::size_t k = 0; k < rep.grid.size(); ++k) {
            CHECK(rep2.grid[k] == 2.0 * rep.grid[k]);
            CHECK(rep2.curve_a[k] == rep.curve_a[k]);
            CHECK(rep2.curve_b[k] == rep.curve_b[k]);
        }
    }
    SUBCASE("degenerate samples are inconclusive") {
        const std::vector<double> c(100, 1.0);
        CHECK(empirical_st_test(c, c).verdict == TestVerdict::kInconclusive);
    }
}

TEST_CASE("empirical st test against the closed-form half-normal pair") {
    // G_2 under N(0, I) is half-normal with scale 2 sqrt 2; under N(0, 2I)
    // the scale is 4; the coupled pair dominates pathwise.
    const EllipticalDist mx =
        make_elliptical({0.0, 0.0}, SymMatrix::identity(2), normal_radial());
    const EllipticalDist my =
        make_elliptical({0.0, 0.0}, sym_scale(SymMatrix::identity(2), 2.0), normal_radial());
    const CoupledSamples cs = sample_coupled(mx, my, 200000, 2024);
    const auto gx = gini_rows(cs.x.data, cs.x.count, 2, GiniConvention::kUnnormalized);
    const auto gy = gini_rows(cs.y.data, cs.y.count, 2, GiniConvention::kUnnormalized);
    const auto rep = empirical_st_test(gx, gy);
    CHECK(rep.verdict == TestVerdict::kConsistent);
    CHECK(rep.max_violation <= 0.0);

    for (std::size_t k = 0; k < rep.grid.size(); ++k) {
        const double t = rep.grid[k];
        const double exact_x = std::erfc(t / (2.0 * std::sqrt(2.0)) / std::sqrt(2.0));
        const double exact_y = std::erfc(t / 4.0 / std::sqrt(2.0));
        CHECK(std::abs(rep.curve_a[k] - exact_x) <= 4.0 * rep.mc_sigma[k] + 1e-4);
        CHECK(std::abs(rep.curve_b[k] - exact_y) <= 4.0 * rep.mc_sigma[k] + 1e-4);
    }
}

TEST_CASE("empirical icx test") {
    RandomStream rng(9944);
    std::vector<double> a(50000);
    for (auto& v : a) v = rng.normal();

    SUBCASE("identical samples are consistent") {
        CHECK(empirical_icx_test(a, a).verdict == TestVerdict::kConsistent);
    }
    SUBCASE("a monotone shift dominates in stop-loss") {
        std::vector<double> b(a);
        for (auto& v : b) v += 1.0;
        CHECK(empirical_icx_test(a, b).verdict == TestVerdict::kConsistent);
        CHECK(empirical_icx_test(b, a).verdict == TestVerdict::kViolated);
    }
}

TEST_CASE("mean dominance test") {
    std::vector<double> hi(10000), lo(10000);
    RandomStream rng(777);
    for (std::size_t i = 0; i < hi.size(); ++i) {
        const double base = rng.normal();
        hi[i] = base + 0.5;
        lo[i] = base;
    }
    const auto rep = mean_dominance_test(hi, lo, true);
    CHECK(rep.verdict == TestVerdict::kConsistent);
    CHECK(rep.margin_sigmas > 3.0);
    const auto bad = mean_dominance_test(lo, hi, true);
    CHECK(bad.verdict == TestVerdict::kViolated);
}

TEST_CASE("experiment runner") {
    const Vec zero3{0.0, 0.0, 0.0};

    SUBCASE("mismatched generators are refused") {
        const Model mx = make_elliptical(zero3, SymMatrix::identity(3), student_t_radial(5.0));
        const Model my = make_elliptical(zero3, SymMatrix::identity(3), normal_radial());
        ExperimentOptions opts;
        opts.sample_count = 2000;
        CHECK_THROWS_AS(run_ordering_experiment(mx, my, opts), HypothesisError);
    }

    SUBCASE("equal models come out consistent in both directions") {
        const Model mx = make_elliptical(zero3, SymMatrix::identity(3), student_t_radial(5.0));
        ExperimentOptions opts;
        opts.sample_count = 20000;
        opts.seed = 5;
        const ExperimentRecord rec = run_ordering_experiment(mx, mx, opts);
        CHECK_FALSE(rec.any_violation);
        bool saw_x = false, saw_y = false;
        for (const auto& t : rec.tests) {
            if (t.prediction.relation != Relation::kSt) continue;
            CHECK(t.status == TestStatus::kConsistent);
            (t.prediction.dominant == ModelSide::kX ? saw_x : saw_y) = true;
        }
        CHECK(saw_x);
        CHECK(saw_y);
    }

    SUBCASE("first-row-raised instance under Student t") {
        const Model mx = make_elliptical(zero3, SymMatrix::identity(3), student_t_radial(5.0));
        const Model my = make_elliptical(zero3, raised_first_row(0.3), student_t_radial(5.0));
        ExperimentOptions opts;
        opts.sample_count = 200000;
        opts.seed = 11;
        const ExperimentRecord rec = run_ordering_experiment(mx, my, opts);
        CHECK_FALSE(rec.any_violation);
        CHECK(std::any_of(rec.tests.begin(), rec.tests.end(), [](const PredictionTest& t) {
            return t.prediction.relation == Relation::kSt &&
                   t.prediction.dominant == ModelSide::kX &&
                   t.status == TestStatus::kConsistent;
        }));
    }

    SUBCASE("icx predictions are refused for non-mixture families") {
        const Model mx = make_elliptical(zero3, SymMatrix::identity(3), kotz_radial(2.0, 1.0, 1.5));
        const Model my =
            make_elliptical(zero3, raised_all_offdiag(0.3), kotz_radial(2.0, 1.0, 1.5));
        ExperimentOptions opts;
        opts.sample_count = 5000;
        const ExperimentRecord rec = run_ordering_experiment(mx, my, opts);
        for (const auto& t : rec.tests)
            if (t.prediction.relation != Relation::kSt)
                CHECK(t.status == TestStatus::kInapplicable);
    }

    SUBCASE("icx predictions are refused when the mean does not exist") {
        const Model mx = make_elliptical(zero3, SymMatrix::identity(3), student_t_radial(1.0));
        const Model my =
            make_elliptical(zero3, raised_all_offdiag(0.3), student_t_radial(1.0));
        ExperimentOptions opts;
        opts.sample_count = 5000;
        const ExperimentRecord rec = run_ordering_experiment(mx, my, opts);
        bool saw_icx = false;
        for (const auto& t : rec.tests)
            if (t.prediction.relation != Relation::kSt) {
                saw_icx = true;
                CHECK(t.status == TestStatus::kInapplicable);
            }
        CHECK(saw_icx);
        CHECK_FALSE(rec.any_violation);
    }

    SUBCASE("centered and raw coincide at zero location") {
        const Model mx = make_elliptical(zero3, SymMatrix::identity(3), normal_radial());
        const Model my = make_elliptical(zero3, raised_all_offdiag(0.25), normal_radial());
        ExperimentOptions opts;
        opts.sample_count = 50000;
        opts.seed = 77;
        const ExperimentRecord rec = run_ordering_experiment(mx, my, opts);
        const OrderTestReport* centered = nullptr;
        const OrderTestReport* raw = nullptr;
        for (const auto& t : rec.tests) {
            if (t.prediction.relation != Relation::kSt || !t.report) continue;
            if (t.prediction.dominant != ModelSide::kX) continue;
            if (t.prediction.applies_to == AppliesTo::kGiniOfCentered) centered = &*t.report;
            if (t.prediction.applies_to == AppliesTo::kGiniRaw) raw = &*t.report;
        }
        REQUIRE(centered != nullptr);
        REQUIRE(raw != nullptr);
        CHECK(centered->grid == raw->grid);
        CHECK(centered->curve_a == raw->curve_a);
        CHECK(centered->curve_b == raw->curve_b);
    }
}

TEST_CASE("implication chain over random pairs") {
    RandomStream rng(314159);
    for (int rep = 0; rep < 120; ++rep) {
        const std::size_t n = 3 + rep % 2;
        Matrix m1(n, n), m2(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                m1.at(i, j) = rng.uniform(-1.0, 1.0);
                m2.at(i, j) = rng.uniform(-1.0, 1.0);
            }
        const SymMatrix sx = SymMatrix::from_matrix(m1);
        const SymMatrix sy = SymMatrix::from_matrix(m2);
        const auto conds = classify_dispersion(sx, sy, Vec(n, 0.0), Vec(n, 0.0));
        for (const DirectionalConditions* dir : {&conds.xy, &conds.yx}) {
            if (dir->loewner.is_psd) CHECK(dir->eps_feasible.feasible);
            if (dir->eps_feasible.feasible) CHECK(dir->centered.is_psd);
        }
    }
}
