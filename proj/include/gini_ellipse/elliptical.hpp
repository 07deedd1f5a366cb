#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "gini_ellipse/matrix.hpp"
#include "gini_ellipse/radial.hpp"
#include "gini_ellipse/rng.hpp"

namespace gini_ellipse {

// Nonnegative mixing variable V of a scale mixture. Support must lie in
// (0, inf); Discrete weights must sum to 1 within 1e-12.
struct PointMassMixing {
    double v = 1.0;
    bool operator==(const PointMassMixing&) const = default;
};
struct GammaMixing {
    double shape = 1.0;
    double rate = 1.0;
    bool operator==(const GammaMixing&) const = default;
};
struct InverseGammaMixing {
    double shape = 1.0;
    double rate = 1.0;
    bool operator==(const InverseGammaMixing&) const = default;
};
struct LogNormalMixing {
    double mu_log = 0.0;
    double sigma_log = 1.0;
    bool operator==(const LogNormalMixing&) const = default;
};
struct DiscreteMixing {
    std::vector<double> atoms;    // positive
    std::vector<double> weights;  // nonnegative, sum 1 within 1e-12
    bool operator==(const DiscreteMixing&) const = default;
};

using MixingLaw =
    std::variant<PointMassMixing, GammaMixing, InverseGammaMixing, LogNormalMixing, DiscreteMixing>;

void validate(const MixingLaw& law);
std::string mixing_kind_name(const MixingLaw& law);
double sample_mixing(const MixingLaw& law, RandomStream& rng);

// count x dim row-major sample matrix; each row one draw.
struct SampleMatrix {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    SampleMatrix() = default;
    SampleMatrix(std::size_t c, std::size_t d) : count(c), dim(d), data(c * d, 0.0) {}
    std::span<double> row(std::size_t i) { return {data.data() + i * dim, dim}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

// ELL_n(mu, Sigma, radial) realized through X = mu + R S u with S the
// symmetric PSD square root of Sigma and u uniform on the sphere. The square
// root and radial sampler are prepared once at construction; instances are
// immutable and safe to share across workers.
struct EllipticalDist {
    Vec mu;
    SymMatrix sigma;
    RadialLaw radial;
    std::size_t dim = 0;

    SymMatrix sqrt_sigma;  // cached PSD square root
    std::shared_ptr<const RadialSampler> sampler;
};

EllipticalDist make_elliptical(Vec mu, SymMatrix sigma, RadialLaw radial);

// SMELL_n(mu, Sigma, phi; F): X = mu + sqrt(V) Sigma^{1/2} Z with Z spherical
// (zero location, identity dispersion) and V ~ mixing, independent.
struct ScaleMixture {
    Vec mu;
    SymMatrix sigma;
    EllipticalDist base;  // zero location, identity dispersion
    MixingLaw mixing;
    std::size_t dim = 0;

    SymMatrix sqrt_sigma;
};

ScaleMixture make_scale_mixture(Vec mu, SymMatrix sigma, RadialLaw base_radial, MixingLaw mixing);

using Model = std::variant<EllipticalDist, ScaleMixture>;

std::size_t model_dim(const Model& m);
const Vec& model_mu(const Model& m);
const SymMatrix& model_sigma(const Model& m);
const RadialLaw& model_radial(const Model& m);
// Same family in the sense of the ordering hypotheses: same radial law (and
// same mixing law for scale mixtures), exact parameter equality.
bool same_family(const Model& a, const Model& b);
bool model_is_normal_mixture(const Model& m);
bool model_has_mean(const Model& m);

// Uniform draw on the unit sphere S^{n-1}; the result is renormalized so its
// Euclidean norm is exactly 1 (zero-norm draws are rejected and redrawn).
Vec sample_sphere(std::size_t n, RandomStream& rng);

// One draw / sequential sampling from an explicit stream.
void draw_elliptical_row(const EllipticalDist& dist, RandomStream& rng, std::span<double> out);
void draw_scale_mixture_row(const ScaleMixture& sm, RandomStream& rng, std::span<double> out);
SampleMatrix sample_elliptical(const EllipticalDist& dist, std::size_t count, RandomStream& rng);
SampleMatrix sample_scale_mixture(const ScaleMixture& sm, std::size_t count, RandomStream& rng);

// Deterministic block-parallel sampling: sample i is produced by the stream
// derived from (seed, purpose, i / kSampleBlock), so the output is identical
// for every worker count.
SampleMatrix sample_model(const Model& m, std::size_t count, std::uint64_t seed,
                          std::uint64_t purpose);

// Common-random-numbers sampling of two same-family models: each draw shares
// the underlying (R, U, V) across the pair.
struct CoupledSamples {
    SampleMatrix x;
    SampleMatrix y;
};
CoupledSamples sample_coupled(const Model& mx, const Model& my, std::size_t count,
                              std::uint64_t seed);

// BX + b ~ ELL_m(B mu + b, B Sigma B', same generator). Requires full row
// rank m <= n. The radial kind carries over exactly when m == n; for m < n
// only families closed under margins (Normal, StudentT) are accepted.
EllipticalDist linear_transform_dist(const EllipticalDist& dist, const Matrix& b_mat,
                                     const Vec& b_vec);

// Sampling-level pushforward: rows become B row + b. Works for any B,
// including the rank-deficient transforms the distribution-level operation
// rejects.
SampleMatrix transform_samples(const SampleMatrix& samples, const Matrix& b_mat, const Vec& b_vec);

}  // namespace gini_ellipse
