#pragma once

// Test-side oracles, independent of the library's computational paths:
// adaptive quadrature, Kolmogorov-Smirnov statistics, incomplete beta/gamma
// CDFs, a trigonometric 3x3 eigenvalue solution and a continued-fraction
// Mills ratio.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gini_ellipse/matrix.hpp"
#include "gini_ellipse/rng.hpp"

namespace test_support {

// Random orthogonal matrix: Gram-Schmidt on a Gaussian matrix.
inline gini_ellipse::Matrix random_orthogonal(std::size_t n, gini_ellipse::RandomStream& rng) {
    gini_ellipse::Matrix q(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> v(n);
        for (auto& x : v) x = rng.normal();
        for (std::size_t prev = 0; prev < col; ++prev) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += v[i] * q.at(i, prev);
            for (std::size_t i = 0; i < n; ++i) v[i] -= dot * q.at(i, prev);
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) q.at(i, col) = v[i] / norm;
    }
    return q;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(f, a, b, fa, fm, fb), tol, 40);
}

// One-sample KS statistic against a CDF; samples need not be sorted.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
    }
    return d;
}

// Two-sample KS statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

// Asymptotic critical value at level alpha = 0.01: c / sqrt(n).
inline double ks_critical_1pct(std::size_t n) { return 1.62762 / std::sqrt(static_cast<double>(n)); }

inline double ks_two_sample_critical_1pct(std::size_t n, std::size_t m) {
    return 1.62762 * std::sqrt((static_cast<double>(n) + m) / (static_cast<double>(n) * m));
}

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
inline double betacf(double a, double b, double x) {
    const int kMaxIt = 400;
    const double kEps = 3e-16, kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIt; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double betai(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                               a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// Regularized lower incomplete gamma P(a, x).
inline double gammap(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammap: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 3e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 3e-16) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Radius CDFs used as goodness-of-fit oracles: Normal radial in dim n has
// R^2 ~ chi2(n); StudentT radial has R^2/(R^2 + nu) ~ Beta(n/2, nu/2).
inline double normal_radius_cdf(std::size_t n, double r) {
    if (r <= 0.0) return 0.0;
    return gammap(0.5 * static_cast<double>(n), 0.5 * r * r);
}

inline double student_radius_cdf(std::size_t n, double nu, double r) {
    if (r <= 0.0) return 0.0;
    return betai(0.5 * static_cast<double>(n), 0.5 * nu, r * r / (r * r + nu));
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double student_t_cdf(double x, double nu) {
    const double tail = 0.5 * betai(0.5 * nu, 0.5, nu / (nu + x * x));
    return x >= 0.0 ? 1.0 - tail : tail;
}

// Continued-fraction Mills ratio: Phi-bar(z) = phi(z) / (z + 1/(z + 2/(z + ...))).
inline double log_normal_sf_cf(double z) {
    double cf = 0.0;
    for (int k = 200; k >= 1; --k) cf = static_cast<double>(k) / (z + cf);
    const double mills = 1.0 / (z + cf);
    const double log_phi = -0.5 * z * z - 0.5 * std::log(2.0 * std::acos(-1.0));
    return log_phi + std::log(mills);
}

// Trigonometric eigenvalues of a symmetric 3x3 matrix (ascending);
// independent of the library's Jacobi path.
inline std::array<double, 3> eig3_analytic(const gini_ellipse::SymMatrix& m) {
    if (m.dim != 3) throw std::invalid_argument("eig3_analytic: need a 3x3 matrix");
    const double a11 = m.at(0, 0), a22 = m.at(1, 1), a33 = m.at(2, 2);
    const double a12 = m.at(0, 1), a13 = m.at(0, 2), a23 = m.at(1, 2);
    const double p1 = a12 * a12 + a13 * a13 + a23 * a23;
    std::array<double, 3> eig;
    if (p1 == 0.0) {
        eig = {a11, a22, a33};
        std::sort(eig.begin(), eig.end());
        return eig;
    }
    const double q = (a11 + a22 + a33) / 3.0;
    const double p2 = (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) + (a33 - q) * (a33 - q) +
                      2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const double b11 = (a11 - q) / p, b22 = (a22 - q) / p, b33 = (a33 - q) / p;
    const double b12 = a12 / p, b13 = a13 / p, b23 = a23 / p;
    const double detb = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) +
                        b13 * (b12 * b23 - b22 * b13);
    double r = std::clamp(0.5 * detb, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double pi = std::acos(-1.0);
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * pi / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    eig = {e3, e2, e1};
    std::sort(eig.begin(), eig.end());
    return eig;
}

inline bool psd_by_eig3(const gini_ellipse::SymMatrix& m, double tol = 1e-9) {
    const auto eig = eig3_analytic(m);
    const double scale = std::max(1.0, std::max(std::abs(eig[0]), std::abs(eig[2])));
    return eig[0] >= -tol * scale;
}

// Sample moments.
inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace test_support
