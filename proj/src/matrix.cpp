#include "gini_ellipse/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gini_ellipse/errors.hpp"

namespace gini_ellipse {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw InputError(std::string(what) + ": non-finite entry");
    }
}

}  // namespace

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw InputError("mat_mul: inner dimensions differ");
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) out.at(i, j) += aik * b.at(k, j);
        }
    }
    return out;
}

Vec mat_vec(const Matrix& a, std::span<const double> x) {
    if (a.cols != x.size()) throw InputError("mat_vec: dimension mismatch");
    Vec out(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) s += a.at(i, j) * x[j];
        out[i] = s;
    }
    return out;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    if (n == 0) throw InputError("SymMatrix: dimension must be >= 1");
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw InputError("SymMatrix: ragged rows");
        for (std::size_t j = 0; j < n; ++j) m.at(i, j) = rows[i][j];
    }
    return from_matrix(m);
}

SymMatrix SymMatrix::from_matrix(const Matrix& m) {
    if (m.rows != m.cols || m.rows == 0) throw InputError("SymMatrix: matrix must be square, dim >= 1");
    require_finite(m.data, "SymMatrix");
    SymMatrix s(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = 0.5 * (m.at(i, j) + m.at(j, i));
            s.set(i, j, v);
        }
    }
    return s;
}

SymMatrix SymMatrix::identity(std::size_t n) {
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) s.set(i, i, 1.0);
    return s;
}

SymMatrix SymMatrix::ones(std::size_t n) {
    SymMatrix s(n);
    std::fill(s.entries.begin(), s.entries.end(), 1.0);
    return s;
}

Matrix SymMatrix::as_matrix() const {
    Matrix m(dim, dim);
    m.data = entries;
    return m;
}

SymMatrix sym_add(const SymMatrix& a, const SymMatrix& b, double b_scale) {
    if (a.dim != b.dim) throw InputError("sym_add: dimension mismatch");
    SymMatrix out(a.dim);
    for (std::size_t k = 0; k < a.entries.size(); ++k)
        out.entries[k] = a.entries[k] + b_scale * b.entries[k];
    return out;
}

SymMatrix sym_scale(const SymMatrix& a, double c) {
    SymMatrix out(a.dim);
    for (std::size_t k = 0; k < a.entries.size(); ++k) out.entries[k] = c * a.entries[k];
    return out;
}

SymMatrix sandwich(const Matrix& b, const SymMatrix& s) {
    if (b.cols != s.dim) throw InputError("sandwich: dimension mismatch");
    // T = B S  (m x n), then B S B' symmetrized.
    Matrix t = mat_mul(b, s.as_matrix());
    Matrix out(b.rows, b.rows);
    for (std::size_t i = 0; i < b.rows; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < b.cols; ++k) acc += t.at(i, k) * b.at(j, k);
            out.at(i, j) = acc;
            out.at(j, i) = acc;
        }
    }
    return SymMatrix::from_matrix(out);
}

double frobenius_norm(const SymMatrix& m) {
    double s = 0.0;
    for (double x : m.entries) s += x * x;
    return std::sqrt(s);
}

double quadratic_form(const SymMatrix& s, std::span<const double> x) {
    if (x.size() != s.dim) throw InputError("quadratic_form: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < s.dim; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < s.dim; ++j) row += s.at(i, j) * x[j];
        acc += x[i] * row;
    }
    return acc;
}

EigenSystem eigen_sym(const SymMatrix& m) {
    const std::size_t n = m.dim;
    if (n == 0) throw InputError("eigen_sym: empty matrix");
    require_finite(m.entries, "eigen_sym");

    std::vector<double> a(m.entries);
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    double frob2 = 0.0;
    for (double x : a) frob2 += x * x;

    const int kMaxSweeps = 64;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off2 = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off2 += a[p * n + q] * a[p * n + q];
        if (off2 <= 1e-30 * std::max(1.0, frob2)) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (!std::isfinite(t)) t = 0.0;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // A <- J' A J with the (p,q) rotation J.
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p);
                    const double vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });

    EigenSystem sys;
    sys.values.resize(n);
    sys.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        sys.values[k] = a[order[k] * n + order[k]];
        for (std::size_t i = 0; i < n; ++i) sys.vectors.at(i, k) = v.at(i, order[k]);
    }
    return sys;
}

PsdVerdict is_psd(const SymMatrix& m, double tol) {
    if (tol < 0.0) throw InputError("is_psd: tol must be >= 0");
    EigenSystem sys = eigen_sym(m);
    const double lam_min = sys.values.front();
    const double lam_max = sys.values.back();
    const double spectral = std::max(std::abs(lam_min), std::abs(lam_max));
    const double scale = std::max(1.0, spectral);

    PsdVerdict verdict;
    verdict.min_eigenvalue = lam_min;
    verdict.is_psd = lam_min >= -tol * scale;
    verdict.witness_vector.resize(m.dim);
    double norm = 0.0;
    for (std::size_t i = 0; i < m.dim; ++i) {
        verdict.witness_vector[i] = sys.vectors.at(i, 0);
        norm += verdict.witness_vector[i] * verdict.witness_vector[i];
    }
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& x : verdict.witness_vector) x /= norm;
    return verdict;
}

PsdVerdict loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
    if (a.dim != b.dim) throw InputError("loewner_leq: dimension mismatch");
    return is_psd(sym_add(b, a, -1.0), tol);
}

SymMatrix centering_matrix(std::size_t n) {
    if (n == 0) throw InputError("centering_matrix: n must be >= 1");
    SymMatrix a(n);
    const double off = -1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a.entries[i * n + j] = (i == j) ? 1.0 + off : off;
    return a;
}

PsdVerdict centered_loewner_leq(const SymMatrix& sx, const SymMatrix& sy, double tol) {
    if (sx.dim != sy.dim) throw InputError("centered_loewner_leq: dimension mismatch");
    const Matrix a = centering_matrix(sx.dim).as_matrix();
    return loewner_leq(sandwich(a, sx), sandwich(a, sy), tol);
}

EpsilonFeasibility epsilon_feasible(const SymMatrix& sx, const SymMatrix& sy, double tol) {
    if (sx.dim != sy.dim) throw InputError("epsilon_feasible: dimension mismatch");
    const SymMatrix d0 = sym_add(sy, sx, -1.0);
    const SymMatrix ones = SymMatrix::ones(sx.dim);

    auto lambda_min = [&](double eps) {
        return eigen_sym(sym_add(d0, ones, eps)).values.front();
    };
    auto psd_at = [&](double eps) { return is_psd(sym_add(d0, ones, eps), tol).is_psd; };

    EpsilonFeasibility out;
    out.max_min_eigenvalue = lambda_min(0.0);

    if (psd_at(0.0)) {
        out.feasible = true;
        out.epsilon_star = 0.0;
        return out;
    }

    // lambda_min(D(eps)) is nondecreasing in eps, so scan upward for the first
    // feasible doubling step, then bisect the boundary.
    const double kCap = 1e6;
    double lo = 0.0;
    double hi = 1.0;
    bool found = false;
    while (hi <= kCap) {
        out.max_min_eigenvalue = std::max(out.max_min_eigenvalue, lambda_min(hi));
        if (psd_at(hi)) {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if (!found) {
        out.feasible = false;
        out.max_min_eigenvalue = std::max(out.max_min_eigenvalue, lambda_min(kCap));
        out.epsilon_star = 0.0;
        return out;
    }
    for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (psd_at(mid))
            hi = mid;
        else
            lo = mid;
    }
    out.feasible = true;
    out.epsilon_star = hi;  // certified-feasible end of the bracket
    out.max_min_eigenvalue = std::max(out.max_min_eigenvalue, lambda_min(hi));
    return out;
}

SymMatrix matrix_sqrt_psd(const SymMatrix& s, double tol) {
    EigenSystem sys = eigen_sym(s);
    const double spectral = std::max(std::abs(sys.values.front()), std::abs(sys.values.back()));
    const double scale = std::max(1.0, spectral);
    std::vector<double> roots(s.dim);
    for (std::size_t k = 0; k < s.dim; ++k) {
        double lam = sys.values[k];
        if (lam < -tol * scale)
            throw NumericError("matrix_sqrt_psd: matrix is not positive semidefinite");
        if (lam < 0.0) lam = 0.0;
        roots[k] = std::sqrt(lam);
    }
    // S = V diag(sqrt(lam)) V'
    Matrix out(s.dim, s.dim);
    for (std::size_t i = 0; i < s.dim; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < s.dim; ++k)
                acc += sys.vectors.at(i, k) * roots[k] * sys.vectors.at(j, k);
            out.at(i, j) = acc;
            out.at(j, i) = acc;
        }
    }
    return SymMatrix::from_matrix(out);
}

}  // namespace gini_ellipse
