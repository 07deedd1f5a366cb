#include "gini_ellipse/gini.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gini_ellipse/errors.hpp"

namespace gini_ellipse {

std::vector<int> gini_coefficients(std::size_t n) {
    if (n == 0) throw InputError("gini_coefficients: n must be >= 1");
    std::vector<int> c(n);
    for (std::size_t i = 1; i <= n; ++i)
        c[i - 1] = static_cast<int>(4 * i) - static_cast<int>(2 * n) - 2;
    return c;
}

double gini_pairwise(std::span<const double> x, GiniConvention conv) {
    const std::size_t n = x.size();
    if (n == 0) throw InputError("gini_pairwise: empty vector");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc += std::abs(x[i] - x[j]);
    if (conv == GiniConvention::kNormalized) acc /= static_cast<double>(n) * static_cast<double>(n);
    return acc;
}

namespace {

double order_stat_sum(std::span<const double> x, std::vector<double>& scratch) {
    const std::size_t n = x.size();
    scratch.assign(x.begin(), x.end());
    std::sort(scratch.begin(), scratch.end());
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double coeff = 4.0 * static_cast<double>(i) - 2.0 * static_cast<double>(n) - 2.0;
        acc += coeff * scratch[i - 1];
    }
    return acc;
}

}  // namespace

double gini_order_stat(std::span<const double> x, GiniConvention conv) {
    const std::size_t n = x.size();
    if (n == 0) throw InputError("gini_order_stat: empty vector");
    std::vector<double> scratch;
    double acc = order_stat_sum(x, scratch);
    if (conv == GiniConvention::kNormalized) acc /= static_cast<double>(n) * static_cast<double>(n);
    return acc;
}

double gini_as_max_permutation(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) throw InputError("gini_as_max_permutation: empty vector");
    if (n > kPermutationCap)
        throw CapacityError("gini_as_max_permutation: n exceeds the enumeration cap");
    const std::vector<int> coeffs = gini_coefficients(n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = -std::numeric_limits<double>::infinity();
    do {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += coeffs[perm[k]] * x[k];
        best = std::max(best, acc);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double supermodular_defect(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("supermodular_defect: length mismatch");
    const std::size_t n = x.size();
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = std::min(x[i], y[i]);
        hi[i] = std::max(x[i], y[i]);
    }
    return f(lo) + f(hi) - f(x) - f(y);
}

std::vector<double> gini_rows(std::span<const double> data, std::size_t count, std::size_t dim,
                              GiniConvention conv, std::span<const double> center) {
    if (dim == 0) throw InputError("gini_rows: dim must be >= 1");
    if (data.size() != count * dim) throw InputError("gini_rows: data size mismatch");
    if (!center.empty() && center.size() != dim)
        throw InputError("gini_rows: center has wrong length");
    const double norm =
        conv == GiniConvention::kNormalized ? static_cast<double>(dim) * static_cast<double>(dim) : 1.0;
    std::vector<double> out(count);
    std::vector<double> scratch(dim);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < count; ++i) {
        const double* src = data.data() + i * dim;
        if (center.empty()) {
            std::copy(src, src + dim, row.begin());
        } else {
            for (std::size_t j = 0; j < dim; ++j) row[j] = src[j] - center[j];
        }
        out[i] = order_stat_sum(row, scratch) / norm;
    }
    return out;
}

}  // namespace gini_ellipse
