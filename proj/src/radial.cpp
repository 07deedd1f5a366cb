#include "gini_ellipse/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>

#include "gini_ellipse/errors.hpp"

namespace gini_ellipse {

RadialLaw normal_radial() { return NormalRadial{}; }

RadialLaw student_t_radial(double nu) {
    RadialLaw law = StudentTRadial{nu};
    validate(law);
    return law;
}

RadialLaw kotz_radial(double N, double r, double beta) {
    RadialLaw law = KotzRadial{N, r, beta};
    validate(law);
    return law;
}

RadialLaw exp_power_radial(double beta) {
    RadialLaw law = ExpPowerRadial{beta};
    validate(law);
    return law;
}

RadialLaw table_pdf_radial(std::vector<double> grid, std::vector<double> density) {
    RadialLaw law = TablePdfRadial{std::move(grid), std::move(density)};
    validate(law);
    return law;
}

void validate(const RadialLaw& law) {
    std::visit(
        [](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, StudentTRadial>) {
                if (!(l.nu > 0.0) || !std::isfinite(l.nu))
                    throw InputError("StudentT radial: nu must be > 0");
            } else if constexpr (std::is_same_v<T, KotzRadial>) {
                if (!(l.N >= 1.0) || !(l.r > 0.0) || !(l.beta > 0.0) || !std::isfinite(l.N) ||
                    !std::isfinite(l.r) || !std::isfinite(l.beta))
                    throw InputError("Kotz radial: need N >= 1, r > 0, beta > 0");
            } else if constexpr (std::is_same_v<T, ExpPowerRadial>) {
                if (!(l.beta > 0.0) || !(l.beta <= 1.0))
                    throw InputError("ExpPower radial: beta must lie in (0, 1]");
            } else if constexpr (std::is_same_v<T, TablePdfRadial>) {
                if (l.grid.size() < 2 || l.grid.size() != l.density.size())
                    throw InputError("TablePdf radial: need matching grid/density, length >= 2");
                double integral = 0.0;
                for (std::size_t i = 0; i < l.grid.size(); ++i) {
                    if (!(l.grid[i] > 0.0) || !std::isfinite(l.grid[i]))
                        throw InputError("TablePdf radial: grid must be positive and finite");
                    if (i > 0 && !(l.grid[i] > l.grid[i - 1]))
                        throw InputError("TablePdf radial: grid must be strictly increasing");
                    if (!(l.density[i] >= 0.0) || !std::isfinite(l.density[i]))
                        throw InputError("TablePdf radial: densities must be nonnegative");
                    if (i > 0)
                        integral += 0.5 * (l.density[i] + l.density[i - 1]) * (l.grid[i] - l.grid[i - 1]);
                }
                if (std::abs(integral - 1.0) > 1e-6)
                    throw InputError("TablePdf radial: trapezoid integral must be 1 within 1e-6");
            }
        },
        law);
}

std::string radial_kind_name(const RadialLaw& law) {
    return std::visit(
        [](const auto& l) -> std::string {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, NormalRadial>) return "normal";
            if constexpr (std::is_same_v<T, StudentTRadial>) return "student_t";
            if constexpr (std::is_same_v<T, KotzRadial>) return "kotz";
            if constexpr (std::is_same_v<T, ExpPowerRadial>) return "exp_power";
            return "table_pdf";
        },
        law);
}

bool radial_is_normal_mixture(const RadialLaw& law) {
    return std::visit(
        [](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, NormalRadial>) return true;
            if constexpr (std::is_same_v<T, StudentTRadial>) return true;
            if constexpr (std::is_same_v<T, ExpPowerRadial>) return l.beta <= 1.0;
            return false;
        },
        law);
}

bool radial_has_mean(const RadialLaw& law) {
    if (const auto* t = std::get_if<StudentTRadial>(&law)) return t->nu > 1.0;
    return true;
}

namespace {

double log_interp_table(const TablePdfRadial& t, double v) {
    if (v < t.grid.front() || v > t.grid.back()) return 0.0;
    auto it = std::upper_bound(t.grid.begin(), t.grid.end(), v);
    if (it == t.grid.begin()) return t.density.front();
    if (it == t.grid.end()) return t.density.back();
    const std::size_t hi = static_cast<std::size_t>(it - t.grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (v - t.grid[lo]) / (t.grid[hi] - t.grid[lo]);
    return (1.0 - w) * t.density[lo] + w * t.density[hi];
}

// log pdf pieces; v > 0 assumed where needed.
double pdf_power_exp(double log_norm, double power, double decay, double v) {
    // norm * v^power * exp(-decay_term), with decay already evaluated.
    if (v == 0.0) {
        if (power > 0.0) return 0.0;
        if (power == 0.0) return std::exp(log_norm);
        return std::numeric_limits<double>::infinity();
    }
    return std::exp(log_norm + power * std::log(v) - decay);
}

}  // namespace

double radial_pdf(const RadialLaw& law, std::size_t n, double v) {
    if (n == 0) throw InputError("radial_pdf: n must be >= 1");
    if (!(v >= 0.0)) throw InputError("radial_pdf: v must be >= 0");
    const double nn = static_cast<double>(n);
    return std::visit(
        [&](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, NormalRadial>) {
                // chi distribution with n degrees of freedom
                const double log_norm = (1.0 - 0.5 * nn) * std::log(2.0) - std::lgamma(0.5 * nn);
                return pdf_power_exp(log_norm, nn - 1.0, 0.5 * v * v, v);
            } else if constexpr (std::is_same_v<T, StudentTRadial>) {
                const double log_norm = std::log(2.0) + std::lgamma(0.5 * (nn + l.nu)) -
                                        std::lgamma(0.5 * l.nu) - std::lgamma(0.5 * nn) -
                                        0.5 * nn * std::log(l.nu);
                const double decay = 0.5 * (nn + l.nu) * std::log1p(v * v / l.nu);
                return pdf_power_exp(log_norm, nn - 1.0, decay, v);
            } else if constexpr (std::is_same_v<T, KotzRadial>) {
                const double s = (0.5 * nn + l.N - 1.0) / l.beta;
                if (!(s > 0.0)) throw NumericError("Kotz radial: non-normalizable parameters");
                const double log_norm =
                    std::log(2.0 * l.beta) + s * std::log(l.r) - std::lgamma(s);
                return pdf_power_exp(log_norm, 2.0 * l.N + nn - 3.0,
                                     l.r * std::pow(v, 2.0 * l.beta), v);
            } else if constexpr (std::is_same_v<T, ExpPowerRadial>) {
                const double s = 0.5 * nn / l.beta;
                const double log_norm =
                    std::log(2.0 * l.beta) + s * std::log(0.5) - std::lgamma(s);
                return pdf_power_exp(log_norm, nn - 1.0, 0.5 * std::pow(v, 2.0 * l.beta), v);
            } else {
                return log_interp_table(l, v);
            }
        },
        law);
}

// ---------------------------------------------------------------------------
// Inverse-CDF table for the kinds without closed-form samplers.

class InverseCdfTable {
public:
    // pdf must be supported on [0, v_max] (or decay fast beyond the located
    // cutoff); the grid is uniform in t = log1p(v).
    InverseCdfTable(const RadialLaw& law, std::size_t n) {
        double v_max;
        if (const auto* tab = std::get_if<TablePdfRadial>(&law)) {
            v_max = tab->grid.back();
        } else {
            v_max = find_cutoff(law, n);
        }
        build(law, n, v_max);
    }

    double sample(double u) const {
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        std::size_t hi = static_cast<std::size_t>(it - cum_.begin());
        if (hi == 0) hi = 1;
        if (hi >= cum_.size()) hi = cum_.size() - 1;
        const std::size_t lo = hi - 1;
        const double span = cum_[hi] - cum_[lo];
        const double w = span > 0.0 ? (u - cum_[lo]) / span : 0.0;
        const double t = t_nodes_[lo] + w * (t_nodes_[hi] - t_nodes_[lo]);
        return std::expm1(t);
    }

private:
    static double segment_mass(const RadialLaw& law, std::size_t n, double a, double b) {
        // Composite Simpson, 16 panels per segment.
        const int panels = 16;
        const double h = (b - a) / panels;
        double acc = radial_pdf(law, n, a) + radial_pdf(law, n, b);
        for (int k = 1; k < panels; ++k)
            acc += (k % 2 ? 4.0 : 2.0) * radial_pdf(law, n, a + k * h);
        return acc * h / 3.0;
    }

    static double find_cutoff(const RadialLaw& law, std::size_t n) {
        double total = 0.0;
        double lo = 0.0, hi = 1.0;
        for (int step = 0; step < 1200; ++step) {
            const double mass = segment_mass(law, n, lo, hi);
            total += mass;
            if (total > 1e-8 && mass < 1e-13 * total) return hi;
            lo = hi;
            hi *= 2.0;
        }
        throw NumericError("radial sampler: density tail does not decay (non-normalizable?)");
    }

    void build(const RadialLaw& law, std::size_t n, double v_max) {
        const std::size_t segments = 4096;
        const double t_max = std::log1p(v_max);
        t_nodes_.resize(segments + 1);
        cum_.resize(segments + 1);
        for (std::size_t k = 0; k <= segments; ++k)
            t_nodes_[k] = t_max * static_cast<double>(k) / static_cast<double>(segments);
        cum_[0] = 0.0;
        for (std::size_t k = 0; k < segments; ++k) {
            const double a = std::expm1(t_nodes_[k]);
            const double b = std::expm1(t_nodes_[k + 1]);
            const double m = 0.5 * (a + b);
            const double mass =
                (b - a) / 6.0 *
                (radial_pdf(law, n, a) + 4.0 * radial_pdf(law, n, m) + radial_pdf(law, n, b));
            cum_[k + 1] = cum_[k] + std::max(mass, 0.0);
        }
        const double total = cum_.back();
        if (!(total > 0.0) || std::abs(total - 1.0) > 1e-3)
            throw NumericError("radial sampler: density does not normalize on the table grid");
        for (double& c : cum_) c /= total;
    }

    std::vector<double> t_nodes_;
    std::vector<double> cum_;
};

namespace {

bool needs_table(const RadialLaw& law) {
    return std::holds_alternative<KotzRadial>(law) || std::holds_alternative<ExpPowerRadial>(law) ||
           std::holds_alternative<TablePdfRadial>(law);
}

std::string table_cache_key(const RadialLaw& law, std::size_t n) {
    char buf[128];
    std::string key = radial_kind_name(law) + ":" + std::to_string(n);
    auto push = [&](double x) {
        std::snprintf(buf, sizeof buf, ":%.17g", x);
        key += buf;
    };
    if (const auto* k = std::get_if<KotzRadial>(&law)) {
        push(k->N);
        push(k->r);
        push(k->beta);
    } else if (const auto* e = std::get_if<ExpPowerRadial>(&law)) {
        push(e->beta);
    } else if (const auto* t = std::get_if<TablePdfRadial>(&law)) {
        for (double g : t->grid) push(g);
        for (double d : t->density) push(d);
    }
    return key;
}

std::shared_ptr<const InverseCdfTable> cached_table(const RadialLaw& law, std::size_t n) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const InverseCdfTable>> cache;
    const std::string key = table_cache_key(law, n);
    {
        std::scoped_lock lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto table = std::make_shared<const InverseCdfTable>(law, n);
    std::scoped_lock lock(mu);
    return cache.emplace(key, std::move(table)).first->second;
}

double draw_radius(const RadialLaw& law, std::size_t n, const InverseCdfTable* table,
                   RandomStream& rng) {
    const double nn = static_cast<double>(n);
    if (std::holds_alternative<NormalRadial>(law)) {
        return std::sqrt(rng.chi_square(nn));
    }
    if (const auto* t = std::get_if<StudentTRadial>(&law)) {
        double denom;
        do {
            denom = rng.chi_square(t->nu);
        } while (!(denom > 0.0));
        return std::sqrt(rng.chi_square(nn) * t->nu / denom);
    }
    return table->sample(rng.uniform01());
}

}  // namespace

double sample_radius(const RadialLaw& law, std::size_t n, RandomStream& rng) {
    if (n == 0) throw InputError("sample_radius: n must be >= 1");
    validate(law);
    std::shared_ptr<const InverseCdfTable> table;
    if (needs_table(law)) table = cached_table(law, n);
    return draw_radius(law, n, table.get(), rng);
}

RadialSampler::RadialSampler(RadialLaw law, std::size_t n) : law_(std::move(law)), n_(n) {
    if (n == 0) throw InputError("RadialSampler: n must be >= 1");
    validate(law_);
    if (needs_table(law_)) table_ = cached_table(law_, n_);
}

double RadialSampler::draw(RandomStream& rng) const {
    return draw_radius(law_, n_, table_.get(), rng);
}

}  // namespace gini_ellipse
