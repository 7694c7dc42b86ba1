#pragma once

#include <cstdint>
#include <random>

namespace qse {

/// Deterministic random stream with a documented seed -> sample mapping
/// that is stable within a release.
///
/// Stream `k` of master seed `s` drives a std::mt19937_64 seeded with
/// `mix(s ^ (k + 1) * 0x9E3779B97F4A7C15)` where `mix` is the SplitMix64
/// finalizer.  Uniform doubles take the top 53 bits of one generator
/// output; normal deviates come from the Box-Muller transform on two
/// uniforms with the second value cached.  Multi-chain runs assign
/// stream `k` to chain `k`, so per-chain output is independent of
/// scheduling and chain count.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    /// Uniform on (0, 1]; never returns 0, safe under log().
    double uniform_open_closed();

    /// Uniform on [0, 1).
    double uniform_half_open();

    /// Standard normal deviate.
    double normal();

private:
    std::mt19937_64 gen_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

} // namespace qse
