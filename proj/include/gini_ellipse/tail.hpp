#pragma once

#include <cstdint>
#include <vector>

#include "gini_ellipse/elliptical.hpp"
#include "gini_ellipse/matrix.hpp"

namespace gini_ellipse {

inline constexpr std::size_t kPermRowCap = 8;  // 8! = 40320 rows

// All n! permutations of the coefficient vector (4i - 2n - 2), enumerated in
// lexicographic order of the index permutation. Every row sums to zero.
struct PermMatrix {
    std::size_t n = 0;
    std::size_t m = 0;                   // n!
    std::vector<std::vector<int>> rows;  // m rows of length n
};

// n == 1 is degenerate (the coefficient vector is (0)); n > kPermRowCap is a
// capacity error.
PermMatrix permutation_matrix(std::size_t n);

// C Sigma C' or, above the memory cap, its diagonal only. The diagonal
// entries are the a_ii^2 of the rate formula.
struct TransformedCovariance {
    bool full = false;
    SymMatrix matrix;          // populated iff full
    std::vector<double> diag;  // always populated, length m
};

TransformedCovariance transformed_covariance(const SymMatrix& sigma, const PermMatrix& perm,
                                             std::size_t max_full_bytes = std::size_t{64} << 20);

// Rate of Theorem 5.1: lim log P(G_n(X) > x) / x^2 = -1 / (2 max_i a_ii^2)
// for normal risks. The location affects only the drifts, never the rate; it
// is recorded for reference. Ties in the maximum are reported, not rejected.
struct TailRateResult {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> diag;  // a_ii^2 per permutation row
    double max_diag = 0.0;
    double rate = 0.0;  // -1 / (2 max_diag)
    std::vector<std::size_t> argmax_rows;
    Vec mu;
    bool exact = true;  // false for the stochastic lower-bound search
};

TailRateResult ld_rate(const SymMatrix& sigma, const Vec& mu);

// For n beyond the enumeration cap: hill-climbing over permutations reports a
// LOWER bound on max_diag, hence an upper bound on |rate|. exact = false.
TailRateResult ld_rate_lower_bound(const SymMatrix& sigma, const Vec& mu, std::size_t restarts,
                                   std::uint64_t seed);

// Permutation-representation checks: (a) pathwise, the unnormalized order-statistic Gini
// equals the max over permutation rows of C_r' x; (b) on the same paths the
// empirical survival of G_n and of max_r Y_r coincide per threshold.
struct TailIdentityReport {
    std::vector<double> thresholds;
    std::vector<double> p_direct;  // empirical P(G_n > t)
    std::vector<double> p_union;   // empirical P(max_r C_r' X > t)
    std::vector<double> mc_sigma;  // binomial SE of p_direct
    double max_rel_gap = 0.0;      // worst pathwise relative gap
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
};

TailIdentityReport tail_identity_check(const EllipticalDist& dist,
                                       const std::vector<double>& thresholds,
                                       std::size_t sample_count, std::uint64_t seed);

// Inclusion-exclusion partial sums for P(G_n > x), eq-by-eq against a direct
// Monte Carlo estimate from an independent stream. n in {2, 3} only.
struct InclusionExclusionReport {
    std::size_t n = 0;
    std::size_t m = 0;
    double threshold = 0.0;
    std::vector<double> term_sums;     // term_sums[d-1] = sum over |S| = d of P(min_S Y > x)
    std::vector<double> partial_sums;  // alternating partial sums, depth 1..depth
    double union_sigma = 0.0;          // binomial SE of the deepest partial sum
    double direct_estimate = 0.0;
    double direct_sigma = 0.0;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
};

InclusionExclusionReport inclusion_exclusion_tail(const EllipticalDist& dist, double x,
                                                  std::size_t depth, std::size_t sample_count,
                                                  std::uint64_t seed);

// log P(N(0, variance) > x) / x^2, computed through a numerically stable log
// survival; tends to -1/(2 variance) as x grows.
double gaussian_tail_log_ratio(double variance, double x);

// log of the standard normal survival function, stable for large z (erfc up
// to z = 12, asymptotic expansion beyond).
double log_normal_sf(double z);

}  // namespace gini_ellipse
