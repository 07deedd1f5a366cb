#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gini_ellipse/rng.hpp"

namespace gini_ellipse {

// Law of the generating variate R in X = mu + R A' U. The density-generator
// conventions, with u = v^2:
//   Normal      g(u) = exp(-u/2)
//   StudentT    g(u) = (1 + u/nu)^(-(n+nu)/2)
//   Kotz        g(u) = u^(N-1) exp(-r u^beta),  N >= 1, r > 0, beta > 0
//   ExpPower    g(u) = exp(-u^beta / 2),        beta in (0,1]  (beta = 1 is Normal)
// TablePdf carries the radius density itself on a grid and bypasses g.
struct NormalRadial {
    bool operator==(const NormalRadial&) const = default;
};
struct StudentTRadial {
    double nu = 1.0;
    bool operator==(const StudentTRadial&) const = default;
};
struct KotzRadial {
    double N = 1.0;
    double r = 0.5;
    double beta = 1.0;
    bool operator==(const KotzRadial&) const = default;
};
struct ExpPowerRadial {
    double beta = 1.0;
    bool operator==(const ExpPowerRadial&) const = default;
};
struct TablePdfRadial {
    std::vector<double> grid;     // sorted, positive
    std::vector<double> density;  // nonnegative, trapezoid-integral 1 within 1e-6
    bool operator==(const TablePdfRadial&) const = default;
};

using RadialLaw =
    std::variant<NormalRadial, StudentTRadial, KotzRadial, ExpPowerRadial, TablePdfRadial>;

RadialLaw normal_radial();
RadialLaw student_t_radial(double nu);
RadialLaw kotz_radial(double N, double r, double beta);
RadialLaw exp_power_radial(double beta);
RadialLaw table_pdf_radial(std::vector<double> grid, std::vector<double> density);

// Throws InputError on invalid parameters.
void validate(const RadialLaw& law);

std::string radial_kind_name(const RadialLaw& law);

// True when the characteristic generator of the family is a normal variance
// mixture for every dimension (the increasing-convex-order results require
// this). Kotz and tabulated laws are excluded.
bool radial_is_normal_mixture(const RadialLaw& law);

// True when the radius has a finite mean (needed for stop-loss transforms).
bool radial_has_mean(const RadialLaw& law);

// Density of R in dimension n: h(v) = c_n (2 pi^{n/2} / Gamma(n/2)) v^{n-1} g(v^2).
// TablePdf returns the interpolated table value (n is ignored).
double radial_pdf(const RadialLaw& law, std::size_t n, double v);

// One draw of R matched to dimension n. Normal: R^2 ~ chi2(n). StudentT:
// R^2/n ~ F(n, nu). Kotz/ExpPower/TablePdf: inverse CDF on a cached grid.
double sample_radius(const RadialLaw& law, std::size_t n, RandomStream& rng);

// Per-(law, n) sampler with the inverse-CDF table (if any) prebuilt, for hot
// loops; immutable and safe to share across workers.
class RadialSampler {
public:
    RadialSampler(RadialLaw law, std::size_t n);
    double draw(RandomStream& rng) const;
    const RadialLaw& law() const { return law_; }
    std::size_t dim() const { return n_; }

private:
    RadialLaw law_;
    std::size_t n_;
    std::shared_ptr<const class InverseCdfTable> table_;
};

}  // namespace gini_ellipse
