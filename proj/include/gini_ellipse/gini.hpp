#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gini_ellipse {

// Unnormalized is the default: the tail identity and the permutation
// representation operate on sum_i (4i - 2n - 2) X_(i) without the 1/n^2
// factor. The normalized pairwise form divides by n^2.
enum class GiniConvention { kUnnormalized, kNormalized };

// coeffs[i-1] = 4i - 2n - 2 for i = 1..n. Sums to zero, nondecreasing,
// antisymmetric.
std::vector<int> gini_coefficients(std::size_t n);

inline constexpr std::size_t kPermutationCap = 8;  // 8! = 40320 rows

// (1/n^2 if normalized) * sum over all ordered pairs |x_i - x_j|.
double gini_pairwise(std::span<const double> x, GiniConvention conv = GiniConvention::kUnnormalized);

// Order-statistic form; equals gini_pairwise under the same convention. The
// production path (O(n log n)); pairwise is the oracle.
double gini_order_stat(std::span<const double> x,
                       GiniConvention conv = GiniConvention::kUnnormalized);

// max over all n! coefficient permutations of sum_i coeffs[perm(i)] x_i;
// equals the unnormalized order-statistic form by the rearrangement
// inequality. Throws CapacityError for n > kPermutationCap.
double gini_as_max_permutation(std::span<const double> x);

// f(x ^ y) + f(x v y) - f(x) - f(y) under coordinatewise min/max;
// nonnegative iff f is supermodular at this pair.
double supermodular_defect(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> x, std::span<const double> y);

// Per-row Gini of a sample matrix laid out row-major (count x dim). When
// `center` is given it is subtracted from every row first.
std::vector<double> gini_rows(std::span<const double> data, std::size_t count, std::size_t dim,
                              GiniConvention conv, std::span<const double> center = {});

}  // namespace gini_ellipse
