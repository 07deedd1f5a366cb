#include "gini_ellipse/tail.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "gini_ellipse/errors.hpp"
#include "gini_ellipse/gini.hpp"
#include "gini_ellipse/parallel.hpp"
#include "gini_ellipse/rng.hpp"

namespace gini_ellipse {

PermMatrix permutation_matrix(std::size_t n) {
    if (n == 0) throw InputError("permutation_matrix: n must be >= 1");
    if (n == 1)
        throw NumericError("permutation_matrix: n = 1 is degenerate (coefficient vector is (0))");
    if (n > kPermRowCap) throw CapacityError("permutation_matrix: n exceeds the enumeration cap");

    const std::vector<int> coeffs = gini_coefficients(n);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});

    PermMatrix pm;
    pm.n = n;
    do {
        std::vector<int> row(n);
        for (std::size_t k = 0; k < n; ++k) row[k] = coeffs[idx[k]];
        pm.rows.push_back(std::move(row));
    } while (std::next_permutation(idx.begin(), idx.end()));
    pm.m = pm.rows.size();
    return pm;
}

namespace {

double row_quadratic_form(const SymMatrix& sigma, const std::vector<int>& r) {
    const std::size_t n = sigma.dim;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) inner += sigma.at(i, j) * r[j];
        acc += r[i] * inner;
    }
    return acc;
}

double row_dot(const std::vector<int>& r, std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) acc += r[i] * x[i];
    return acc;
}

}  // namespace

TransformedCovariance transformed_covariance(const SymMatrix& sigma, const PermMatrix& perm,
                                             std::size_t max_full_bytes) {
    if (sigma.dim != perm.n) throw InputError("transformed_covariance: dimension mismatch");
    TransformedCovariance out;
    out.diag.resize(perm.m);
    for (std::size_t r = 0; r < perm.m; ++r) out.diag[r] = row_quadratic_form(sigma, perm.rows[r]);

    if (perm.m * perm.m * sizeof(double) <= max_full_bytes) {
        out.full = true;
        out.matrix = SymMatrix(perm.m);
        // (C Sigma C')_rs = C_r Sigma C_s'
        const std::size_t n = perm.n;
        std::vector<double> tmp(n);
        for (std::size_t r = 0; r < perm.m; ++r) {
            for (std::size_t i = 0; i < n; ++i) {
                double inner = 0.0;
                for (std::size_t j = 0; j < n; ++j) inner += sigma.at(i, j) * perm.rows[r][j];
                tmp[i] = inner;
            }
            for (std::size_t s = 0; s <= r; ++s) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += perm.rows[s][i] * tmp[i];
                out.matrix.set(r, s, acc);
            }
        }
    }
    return out;
}

namespace {

TailRateResult rate_from_diag(std::size_t n, std::size_t m, std::vector<double> diag, Vec mu,
                              bool exact) {
    TailRateResult res;
    res.n = n;
    res.m = m;
    res.max_diag = *std::max_element(diag.begin(), diag.end());
    if (!(res.max_diag > 0.0))
        throw NumericError("ld_rate: all a_ii^2 vanish (Sigma degenerate); G_n is a.s. constant");
    for (std::size_t r = 0; r < diag.size(); ++r)
        if (diag[r] >= res.max_diag * (1.0 - 1e-12)) res.argmax_rows.push_back(r);
    res.diag = std::move(diag);
    res.rate = -1.0 / (2.0 * res.max_diag);
    res.mu = std::move(mu);
    res.exact = exact;
    return res;
}

}  // namespace

TailRateResult ld_rate(const SymMatrix& sigma, const Vec& mu) {
    if (!mu.empty() && mu.size() != sigma.dim) throw InputError("ld_rate: location length mismatch");
    if (!is_psd(sigma).is_psd) throw NumericError("ld_rate: Sigma must be positive semidefinite");
    const PermMatrix pm = permutation_matrix(sigma.dim);

    std::vector<double> diag(pm.m);
    for_each_block(pm.m, 4096, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) diag[r] = row_quadratic_form(sigma, pm.rows[r]);
    });
    return rate_from_diag(pm.n, pm.m, std::move(diag), mu, true);
}

TailRateResult ld_rate_lower_bound(const SymMatrix& sigma, const Vec& mu, std::size_t restarts,
                                   std::uint64_t seed) {
    const std::size_t n = sigma.dim;
    if (n < 2) throw InputError("ld_rate_lower_bound: need n >= 2");
    if (n > 20) throw CapacityError("ld_rate_lower_bound: n! does not fit in 64 bits past n = 20");
    if (!is_psd(sigma).is_psd)
        throw NumericError("ld_rate_lower_bound: Sigma must be positive semidefinite");
    const std::vector<int> coeffs = gini_coefficients(n);

    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(restarts, 1); ++attempt) {
        RandomStream rng = derive_stream(seed, stream_purpose::kPermSearch, attempt);
        std::vector<int> row(coeffs);
        for (std::size_t i = n; i > 1; --i)
            std::swap(row[i - 1], row[rng.next_u64() % i]);
        double value = row_quadratic_form(sigma, row);
        // Pairwise-swap hill climbing.
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t i = 0; i < n && !improved; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    std::swap(row[i], row[j]);
                    const double cand = row_quadratic_form(sigma, row);
                    if (cand > value + 1e-15 * std::abs(value)) {
                        value = cand;
                        improved = true;
                        break;
                    }
                    std::swap(row[i], row[j]);
                }
            }
        }
        best = std::max(best, value);
    }

    std::uint64_t m = 1;
    for (std::size_t k = 2; k <= n; ++k) m *= k;
    TailRateResult res = rate_from_diag(n, m, {best}, mu, false);
    res.diag.clear();  // only the bound is meaningful
    res.argmax_rows.clear();
    return res;
}

TailIdentityReport tail_identity_check(const EllipticalDist& dist,
                                       const std::vector<double>& thresholds,
                                       std::size_t sample_count, std::uint64_t seed) {
    if (sample_count == 0) throw InputError("tail_identity_check: empty sample");
    const PermMatrix pm = permutation_matrix(dist.dim);

    TailIdentityReport rep;
    rep.thresholds = thresholds;
    rep.sample_count = sample_count;
    rep.seed = seed;
    rep.p_direct.assign(thresholds.size(), 0.0);
    rep.p_union.assign(thresholds.size(), 0.0);
    rep.mc_sigma.assign(thresholds.size(), 0.0);

    const std::size_t n_blocks = (sample_count + kSampleBlock - 1) / kSampleBlock;
    std::vector<std::vector<std::size_t>> direct_counts(n_blocks),
        union_counts(n_blocks);
    std::vector<double> block_gap(n_blocks, 0.0);

    for_each_block(sample_count, kSampleBlock, [&](std::size_t bi, std::size_t begin, std::size_t end) {
        RandomStream rs = derive_stream(seed, stream_purpose::kTailIdentity, bi);
        std::vector<std::size_t> dc(thresholds.size(), 0), uc(thresholds.size(), 0);
        std::vector<double> row(dist.dim);
        double worst = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            draw_elliptical_row(dist, rs, row);
            const double g = gini_order_stat(row, GiniConvention::kUnnormalized);
            double u = -std::numeric_limits<double>::infinity();
            for (const auto& r : pm.rows) u = std::max(u, row_dot(r, row));
            const double gap = std::abs(g - u) / std::max(1.0, std::abs(g));
            worst = std::max(worst, gap);
            for (std::size_t k = 0; k < thresholds.size(); ++k) {
                if (g > thresholds[k]) ++dc[k];
                if (u > thresholds[k]) ++uc[k];
            }
        }
        direct_counts[bi] = std::move(dc);
        union_counts[bi] = std::move(uc);
        block_gap[bi] = worst;
    });

    const double nn = static_cast<double>(sample_count);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        std::size_t d = 0, u = 0;
        for (std::size_t bi = 0; bi < n_blocks; ++bi) {
            d += direct_counts[bi][k];
            u += union_counts[bi][k];
        }
        rep.p_direct[k] = static_cast<double>(d) / nn;
        rep.p_union[k] = static_cast<double>(u) / nn;
        rep.mc_sigma[k] = std::sqrt(rep.p_direct[k] * (1.0 - rep.p_direct[k]) / nn);
    }
    rep.max_rel_gap = *std::max_element(block_gap.begin(), block_gap.end());
    return rep;
}

InclusionExclusionReport inclusion_exclusion_tail(const EllipticalDist& dist, double x,
                                                  std::size_t depth, std::size_t sample_count,
                                                  std::uint64_t seed) {
    const std::size_t n = dist.dim;
    if (n != 2 && n != 3)
        throw CapacityError("inclusion_exclusion_tail: only n in {2, 3} is tractable");
    if (sample_count == 0) throw InputError("inclusion_exclusion_tail: empty sample");
    const PermMatrix pm = permutation_matrix(n);
    const std::size_t m = pm.m;
    if (depth == 0 || depth > m)
        throw InputError("inclusion_exclusion_tail: depth must lie in [1, m]");

    // Per-sample bitmask of {Y_r > x}; subset probabilities from mask counts.
    const std::size_t n_masks = std::size_t{1} << m;
    std::vector<std::uint64_t> mask_count(n_masks, 0);
    {
        RandomStream rs = derive_stream(seed, stream_purpose::kIncExcTerms, 0);
        std::vector<double> row(n);
        for (std::size_t i = 0; i < sample_count; ++i) {
            draw_elliptical_row(dist, rs, row);
            std::size_t mask = 0;
            for (std::size_t r = 0; r < m; ++r)
                if (row_dot(pm.rows[r], row) > x) mask |= std::size_t{1} << r;
            ++mask_count[mask];
        }
    }

    InclusionExclusionReport rep;
    rep.n = n;
    rep.m = m;
    rep.threshold = x;
    rep.sample_count = sample_count;
    rep.seed = seed;
    rep.term_sums.assign(depth, 0.0);

    const double nn = static_cast<double>(sample_count);
    for (std::size_t subset = 1; subset < n_masks; ++subset) {
        const std::size_t d = static_cast<std::size_t>(std::popcount(subset));
        if (d > depth) continue;
        std::uint64_t hits = 0;
        for (std::size_t mask = subset; mask < n_masks; ++mask)
            if ((mask & subset) == subset) hits += mask_count[mask];
        rep.term_sums[d - 1] += static_cast<double>(hits) / nn;
    }
    rep.partial_sums.assign(depth, 0.0);
    double acc = 0.0;
    for (std::size_t d = 1; d <= depth; ++d) {
        acc += (d % 2 ? 1.0 : -1.0) * rep.term_sums[d - 1];
        rep.partial_sums[d - 1] = acc;
    }
    const double p_union = std::clamp(rep.partial_sums.back(), 0.0, 1.0);
    rep.union_sigma = std::sqrt(p_union * (1.0 - p_union) / nn);

    // Direct estimate from an independent stream so the agreement check is
    // informative rather than an identity on shared paths.
    {
        RandomStream rs = derive_stream(seed, stream_purpose::kIncExcDirect, 0);
        std::vector<double> row(n);
        std::uint64_t hits = 0;
        for (std::size_t i = 0; i < sample_count; ++i) {
            draw_elliptical_row(dist, rs, row);
            if (gini_order_stat(row, GiniConvention::kUnnormalized) > x) ++hits;
        }
        rep.direct_estimate = static_cast<double>(hits) / nn;
        rep.direct_sigma =
            std::sqrt(rep.direct_estimate * (1.0 - rep.direct_estimate) / nn);
    }
    return rep;
}

double log_normal_sf(double z) {
    if (z < 12.0) {
        return std::log(0.5 * std::erfc(z / std::sqrt(2.0)));
    }
    // log Phi-bar(z) = -z^2/2 - log z - log sqrt(2 pi) + log S(z),
    // S(z) = 1 - 1/z^2 + 3/z^4 - 15/z^6 + ... truncated while terms shrink.
    const double z2 = z * z;
    double term = 1.0;
    double s = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 20; ++k) {
        term *= -static_cast<double>(2 * k - 1) / z2;
        if (std::abs(term) >= prev) break;
        prev = std::abs(term);
        s += term;
    }
    return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * std::acos(-1.0)) + std::log(s);
}

double gaussian_tail_log_ratio(double variance, double x) {
    if (!(variance > 0.0)) throw InputError("gaussian_tail_log_ratio: variance must be > 0");
    if (!(x > 0.0)) throw InputError("gaussian_tail_log_ratio: x must be > 0");
    const double z = x / std::sqrt(variance);
    return log_normal_sf(z) / (x * x);
}

}  // namespace gini_ellipse
