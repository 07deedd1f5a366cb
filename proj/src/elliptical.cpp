#include "gini_ellipse/elliptical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gini_ellipse/errors.hpp"
#include "gini_ellipse/parallel.hpp"

namespace gini_ellipse {

void validate(const MixingLaw& law) {
    std::visit(
        [](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, PointMassMixing>) {
                if (!(l.v > 0.0) || !std::isfinite(l.v))
                    throw InputError("PointMass mixing: v must be > 0");
            } else if constexpr (std::is_same_v<T, GammaMixing>) {
                if (!(l.shape > 0.0) || !(l.rate > 0.0))
                    throw InputError("Gamma mixing: shape and rate must be > 0");
            } else if constexpr (std::is_same_v<T, InverseGammaMixing>) {
                if (!(l.shape > 0.0) || !(l.rate > 0.0))
                    throw InputError("InverseGamma mixing: shape and rate must be > 0");
            } else if constexpr (std::is_same_v<T, LogNormalMixing>) {
                if (!(l.sigma_log > 0.0) || !std::isfinite(l.mu_log))
                    throw InputError("LogNormal mixing: sigma_log must be > 0");
            } else if constexpr (std::is_same_v<T, DiscreteMixing>) {
                if (l.atoms.empty() || l.atoms.size() != l.weights.size())
                    throw InputError("Discrete mixing: atoms/weights must match and be nonempty");
                double total = 0.0;
                for (std::size_t i = 0; i < l.atoms.size(); ++i) {
                    if (!(l.atoms[i] > 0.0)) throw InputError("Discrete mixing: atoms must be > 0");
                    if (!(l.weights[i] >= 0.0))
                        throw InputError("Discrete mixing: weights must be >= 0");
                    total += l.weights[i];
                }
                if (std::abs(total - 1.0) > 1e-12)
                    throw InputError("Discrete mixing: weights must sum to 1 within 1e-12");
            }
        },
        law);
}

std::string mixing_kind_name(const MixingLaw& law) {
    return std::visit(
        [](const auto& l) -> std::string {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, PointMassMixing>) return "point_mass";
            if constexpr (std::is_same_v<T, GammaMixing>) return "gamma";
            if constexpr (std::is_same_v<T, InverseGammaMixing>) return "inverse_gamma";
            if constexpr (std::is_same_v<T, LogNormalMixing>) return "log_normal";
            return "discrete";
        },
        law);
}

double sample_mixing(const MixingLaw& law, RandomStream& rng) {
    const double v = std::visit(
        [&](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, PointMassMixing>) {
                return l.v;
            } else if constexpr (std::is_same_v<T, GammaMixing>) {
                return rng.gamma(l.shape) / l.rate;
            } else if constexpr (std::is_same_v<T, InverseGammaMixing>) {
                double g;
                do {
                    g = rng.gamma(l.shape);
                } while (!(g > 0.0));
                return l.rate / g;
            } else if constexpr (std::is_same_v<T, LogNormalMixing>) {
                return std::exp(l.mu_log + l.sigma_log * rng.normal());
            } else {
                const double u = rng.uniform01();
                double cum = 0.0;
                for (std::size_t i = 0; i < l.atoms.size(); ++i) {
                    cum += l.weights[i];
                    if (u < cum) return l.atoms[i];
                }
                return l.atoms.back();
            }
        },
        law);
    if (!(v > 0.0)) throw NumericError("sample_mixing: nonpositive mixing draw");
    return v;
}

EllipticalDist make_elliptical(Vec mu, SymMatrix sigma, RadialLaw radial) {
    if (mu.size() != sigma.dim)
        throw InputError("make_elliptical: location and dispersion dimensions differ");
    for (double m : mu)
        if (!std::isfinite(m)) throw InputError("make_elliptical: non-finite location");
    validate(radial);
    EllipticalDist d;
    d.dim = mu.size();
    d.mu = std::move(mu);
    d.sqrt_sigma = matrix_sqrt_psd(sigma);  // also certifies PSD
    d.sigma = std::move(sigma);
    d.radial = std::move(radial);
    d.sampler = std::make_shared<const RadialSampler>(d.radial, d.dim);
    return d;
}

ScaleMixture make_scale_mixture(Vec mu, SymMatrix sigma, RadialLaw base_radial, MixingLaw mixing) {
    validate(mixing);
    ScaleMixture sm;
    sm.dim = mu.size();
    sm.base = make_elliptical(Vec(sm.dim, 0.0), SymMatrix::identity(sm.dim), std::move(base_radial));
    if (mu.size() != sigma.dim)
        throw InputError("make_scale_mixture: location and dispersion dimensions differ");
    sm.mu = std::move(mu);
    sm.sqrt_sigma = matrix_sqrt_psd(sigma);
    sm.sigma = std::move(sigma);
    sm.mixing = std::move(mixing);
    return sm;
}

std::size_t model_dim(const Model& m) {
    return std::visit([](const auto& d) { return d.dim; }, m);
}
const Vec& model_mu(const Model& m) {
    return std::visit([](const auto& d) -> const Vec& { return d.mu; }, m);
}
const SymMatrix& model_sigma(const Model& m) {
    return std::visit([](const auto& d) -> const SymMatrix& { return d.sigma; }, m);
}
const RadialLaw& model_radial(const Model& m) {
    if (const auto* e = std::get_if<EllipticalDist>(&m)) return e->radial;
    return std::get<ScaleMixture>(m).base.radial;
}

bool same_family(const Model& a, const Model& b) {
    if (a.index() != b.index()) return false;
    if (model_dim(a) != model_dim(b)) return false;
    if (!(model_radial(a) == model_radial(b))) return false;
    if (const auto* sa = std::get_if<ScaleMixture>(&a))
        return sa->mixing == std::get<ScaleMixture>(b).mixing;
    return true;
}

bool model_is_normal_mixture(const Model& m) {
    // A scale mixture of a normal-mixture family is itself a normal mixture.
    return radial_is_normal_mixture(model_radial(m));
}

bool model_has_mean(const Model& m) {
    if (!radial_has_mean(model_radial(m))) return false;
    if (const auto* sm = std::get_if<ScaleMixture>(&m)) {
        // sqrt(V) needs a finite mean; true for all supported mixing kinds.
        (void)sm;
    }
    return true;
}

Vec sample_sphere(std::size_t n, RandomStream& rng) {
    if (n == 0) throw InputError("sample_sphere: n must be >= 1");
    Vec u(n);
    if (n == 1) {
        double x;
        do {
            x = rng.normal();
        } while (x == 0.0);
        u[0] = std::copysign(1.0, x);
        return u;
    }
    double norm2;
    do {
        norm2 = 0.0;
        for (double& x : u) {
            x = rng.normal();
            norm2 += x * x;
        }
    } while (!(norm2 > 0.0));
    const double norm = std::sqrt(norm2);
    for (double& x : u) x /= norm;
    return u;
}

namespace {

// out = mu + scale * S * u
void affine_row(std::span<const double> mu, const SymMatrix& s, double scale,
                std::span<const double> u, std::span<double> out) {
    const std::size_t n = mu.size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += s.at(i, j) * u[j];
        out[i] = mu[i] + scale * acc;
    }
}

}  // namespace

void draw_elliptical_row(const EllipticalDist& dist, RandomStream& rng, std::span<double> out) {
    const double r = dist.sampler->draw(rng);
    const Vec u = sample_sphere(dist.dim, rng);
    affine_row(dist.mu, dist.sqrt_sigma, r, u, out);
}

void draw_scale_mixture_row(const ScaleMixture& sm, RandomStream& rng, std::span<double> out) {
    const double v = sample_mixing(sm.mixing, rng);
    const double r = sm.base.sampler->draw(rng);
    const Vec u = sample_sphere(sm.dim, rng);
    affine_row(sm.mu, sm.sqrt_sigma, std::sqrt(v) * r, u, out);
}

SampleMatrix sample_elliptical(const EllipticalDist& dist, std::size_t count, RandomStream& rng) {
    if (count == 0) throw InputError("sample_elliptical: count must be >= 1");
    SampleMatrix out(count, dist.dim);
    for (std::size_t i = 0; i < count; ++i) draw_elliptical_row(dist, rng, out.row(i));
    return out;
}

SampleMatrix sample_scale_mixture(const ScaleMixture& sm, std::size_t count, RandomStream& rng) {
    if (count == 0) throw InputError("sample_scale_mixture: count must be >= 1");
    SampleMatrix out(count, sm.dim);
    for (std::size_t i = 0; i < count; ++i) draw_scale_mixture_row(sm, rng, out.row(i));
    return out;
}

SampleMatrix sample_model(const Model& m, std::size_t count, std::uint64_t seed,
                          std::uint64_t purpose) {
    if (count == 0) throw InputError("sample_model: count must be >= 1");
    SampleMatrix out(count, model_dim(m));
    for_each_block(count, kSampleBlock, [&](std::size_t bi, std::size_t begin, std::size_t end) {
        RandomStream rs = derive_stream(seed, purpose, bi);
        for (std::size_t i = begin; i < end; ++i) {
            if (const auto* e = std::get_if<EllipticalDist>(&m))
                draw_elliptical_row(*e, rs, out.row(i));
            else
                draw_scale_mixture_row(std::get<ScaleMixture>(m), rs, out.row(i));
        }
    });
    return out;
}

CoupledSamples sample_coupled(const Model& mx, const Model& my, std::size_t count,
                              std::uint64_t seed) {
    if (count == 0) throw InputError("sample_coupled: count must be >= 1");
    if (!same_family(mx, my))
        throw HypothesisError("sample_coupled: models must share generator and mixing law");
    const std::size_t n = model_dim(mx);
    CoupledSamples out{SampleMatrix(count, n), SampleMatrix(count, n)};

    for_each_block(count, kSampleBlock, [&](std::size_t bi, std::size_t begin, std::size_t end) {
        RandomStream rs = derive_stream(seed, stream_purpose::kCoupled, bi);
        if (const auto* ex = std::get_if<EllipticalDist>(&mx)) {
            const auto& ey = std::get<EllipticalDist>(my);
            for (std::size_t i = begin; i < end; ++i) {
                const double r = ex->sampler->draw(rs);
                const Vec u = sample_sphere(n, rs);
                affine_row(ex->mu, ex->sqrt_sigma, r, u, out.x.row(i));
                affine_row(ey.mu, ey.sqrt_sigma, r, u, out.y.row(i));
            }
        } else {
            const auto& sx = std::get<ScaleMixture>(mx);
            const auto& sy = std::get<ScaleMixture>(my);
            for (std::size_t i = begin; i < end; ++i) {
                const double v = sample_mixing(sx.mixing, rs);
                const double r = sx.base.sampler->draw(rs);
                const Vec u = sample_sphere(n, rs);
                const double scale = std::sqrt(v) * r;
                affine_row(sx.mu, sx.sqrt_sigma, scale, u, out.x.row(i));
                affine_row(sy.mu, sy.sqrt_sigma, scale, u, out.y.row(i));
            }
        }
    });
    return out;
}

EllipticalDist linear_transform_dist(const EllipticalDist& dist, const Matrix& b_mat,
                                     const Vec& b_vec) {
    const std::size_t m = b_mat.rows;
    const std::size_t n = b_mat.cols;
    if (n != dist.dim) throw InputError("linear_transform_dist: B has wrong column count");
    if (b_vec.size() != m) throw InputError("linear_transform_dist: offset has wrong length");
    if (m == 0 || m > n) throw InputError("linear_transform_dist: need 1 <= m <= n");

    // Rank via singular values: sigma_i = sqrt(eig_i(B B')).
    const SymMatrix bbt = sandwich(b_mat, SymMatrix::identity(n));
    EigenSystem sys = eigen_sym(bbt);
    const double smax = std::sqrt(std::max(0.0, sys.values.back()));
    std::size_t rank = 0;
    for (double lam : sys.values)
        if (std::sqrt(std::max(0.0, lam)) > 1e-10 * smax) ++rank;
    if (smax == 0.0 || rank < m)
        throw NumericError("linear_transform_dist: B is rank deficient; use transform_samples");

    RadialLaw image_radial = dist.radial;
    if (m < n) {
        const bool margin_closed = std::holds_alternative<NormalRadial>(dist.radial) ||
                                   std::holds_alternative<StudentTRadial>(dist.radial);
        if (!margin_closed)
            throw NumericError(
                "linear_transform_dist: no closed-form marginal radial law for this family; "
                "use transform_samples");
    }

    Vec new_mu = mat_vec(b_mat, dist.mu);
    for (std::size_t i = 0; i < m; ++i) new_mu[i] += b_vec[i];
    return make_elliptical(std::move(new_mu), sandwich(b_mat, dist.sigma), std::move(image_radial));
}

SampleMatrix transform_samples(const SampleMatrix& samples, const Matrix& b_mat, const Vec& b_vec) {
    if (b_mat.cols != samples.dim) throw InputError("transform_samples: B has wrong column count");
    if (b_vec.size() != b_mat.rows) throw InputError("transform_samples: offset has wrong length");
    SampleMatrix out(samples.count, b_mat.rows);
    for (std::size_t i = 0; i < samples.count; ++i) {
        const auto in = samples.row(i);
        auto dst = out.row(i);
        for (std::size_t r = 0; r < b_mat.rows; ++r) {
            double acc = b_vec[r];
            for (std::size_t c = 0; c < b_mat.cols; ++c) acc += b_mat.at(r, c) * in[c];
            dst[r] = acc;
        }
    }
    return out;
}

}  // namespace gini_ellipse
