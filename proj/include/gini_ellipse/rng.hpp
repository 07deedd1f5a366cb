#pragma once

#include <cstdint>

namespace gini_ellipse {

// SplitMix64 finalizer. Seeding and stream derivation go through this so a
// 64-bit master seed fully determines every draw in a run.
std::uint64_t mix64(std::uint64_t z);

// xoshiro256++ with all distribution transforms implemented locally
// (polar normal, Marsaglia-Tsang gamma): draws depend only on the seed and
// the call sequence, never on platform library internals.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    std::uint64_t next_u64();
    double uniform01();       // [0, 1)
    double uniform01_open();  // (0, 1]
    double uniform(double a, double b);
    double normal();
    double gamma(double shape);  // rate 1
    double chi_square(double dof);
    double exponential();

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// Stream for logical block `index` of a purpose-tagged consumer. Streams are
// assigned per sample block, not per worker, so output is identical for any
// thread count.
RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t purpose,
                           std::uint64_t index);

// Purpose tags for derive_stream. Distinct tags keep the sampling of the two
// models, identity checks and inclusion-exclusion estimates on disjoint
// streams of one master seed.
namespace stream_purpose {
inline constexpr std::uint64_t kSampleX = 1;
inline constexpr std::uint64_t kSampleY = 2;
inline constexpr std::uint64_t kCoupled = 3;
inline constexpr std::uint64_t kTailIdentity = 4;
inline constexpr std::uint64_t kIncExcTerms = 5;
inline constexpr std::uint64_t kIncExcDirect = 6;
inline constexpr std::uint64_t kReproduce = 7;
inline constexpr std::uint64_t kPermSearch = 8;
}  // namespace stream_purpose

}  // namespace gini_ellipse
