#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gini_ellipse {

using Vec = std::vector<double>;

// Dense row-major rectangular matrix. Used for transforms and eigenvector
// tables; the symmetric domain type below is what the ordering conditions
// operate on.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

Matrix mat_mul(const Matrix& a, const Matrix& b);
Vec mat_vec(const Matrix& a, std::span<const double> x);

// Symmetric real matrix. Entries are symmetrized as (M + M')/2 on
// construction and required finite, so downstream eigensolvers can assume
// exact symmetry.
struct SymMatrix {
    std::size_t dim = 0;
    std::vector<double> entries;  // row-major dim x dim, exactly symmetric

    SymMatrix() = default;
    explicit SymMatrix(std::size_t n) : dim(n), entries(n * n, 0.0) {}

    static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);
    static SymMatrix from_matrix(const Matrix& m);
    static SymMatrix identity(std::size_t n);
    static SymMatrix ones(std::size_t n);

    double at(std::size_t i, std::size_t j) const { return entries[i * dim + j]; }
    // Sets both (i,j) and (j,i).
    void set(std::size_t i, std::size_t j, double v) {
        entries[i * dim + j] = v;
        entries[j * dim + i] = v;
    }
    Matrix as_matrix() const;

    bool operator==(const SymMatrix& other) const = default;
};

SymMatrix sym_add(const SymMatrix& a, const SymMatrix& b, double b_scale = 1.0);
SymMatrix sym_scale(const SymMatrix& a, double c);
// B S B' for rectangular B (m x n) and S (n x n); the result is symmetric.
SymMatrix sandwich(const Matrix& b, const SymMatrix& s);

double frobenius_norm(const SymMatrix& m);
double quadratic_form(const SymMatrix& s, std::span<const double> x);

// Eigenvalues in ascending order; eigenvector k is column k of `vectors`
// (orthonormal). Cyclic Jacobi; intended for the small dense matrices this
// library works with.
struct EigenSystem {
    std::vector<double> values;
    Matrix vectors;
};
EigenSystem eigen_sym(const SymMatrix& m);

// Positive-semidefiniteness is decided relative to the spectral scale:
// lambda_min >= -tol * max(1, ||M||_2). Genuinely singular matrices such as
// the centered A 1 A' land a few ulps negative, hence the relative slack.
inline constexpr double kDefaultTol = 1e-9;

struct PsdVerdict {
    bool is_psd = false;
    double min_eigenvalue = 0.0;
    Vec witness_vector;  // unit eigenvector attaining min_eigenvalue
};

PsdVerdict is_psd(const SymMatrix& m, double tol = kDefaultTol);

// Loewner comparison A <= B, i.e. B - A PSD.
PsdVerdict loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol = kDefaultTol);

// A = I - (1/n) * ones. Annihilates constant shifts; idempotent.
SymMatrix centering_matrix(std::size_t n);

// A Sx A' <= A Sy A' with A the centering matrix.
PsdVerdict centered_loewner_leq(const SymMatrix& sx, const SymMatrix& sy,
                                double tol = kDefaultTol);

struct EpsilonFeasibility {
    bool feasible = false;
    double epsilon_star = 0.0;        // an eps achieving PSD; meaningful only if feasible
    double max_min_eigenvalue = 0.0;  // largest lambda_min(D(eps)) seen in the search
};

// Decides whether any real eps makes D(eps) = Sy - Sx + eps * ones PSD.
// lambda_min(D(eps)) is concave and nondecreasing in eps (the all-ones matrix
// is PSD), so the feasible set is a right-unbounded interval; the boundary is
// located by bisection on the PSD predicate. Search capped at eps = 1e6;
// beyond the cap the result is infeasible with diagnostics.
EpsilonFeasibility epsilon_feasible(const SymMatrix& sx, const SymMatrix& sy,
                                    double tol = kDefaultTol);

// Symmetric PSD square root via eigendecomposition, with eigenvalues in
// [-tol*scale, 0) clamped to zero. Singular inputs succeed; an eigenvalue
// below -tol*scale raises NumericError.
SymMatrix matrix_sqrt_psd(const SymMatrix& s, double tol = kDefaultTol);

}  // namespace gini_ellipse
