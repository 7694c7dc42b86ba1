#include "qse/rng.hpp"

#include <cmath>
#include <numbers>

namespace qse {

namespace {

std::uint64_t splitmix64_mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : gen_(splitmix64_mix(seed ^ ((stream + 1) * 0x9E3779B97F4A7C15ull))) {}

std::uint64_t RandomStream::next_u64() {
    return gen_();
}

double RandomStream::uniform_open_closed() {
    return 1.0 - uniform_half_open();
}

double RandomStream::uniform_half_open() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open_closed()));
    const double theta = 2.0 * std::numbers::pi * uniform_half_open();
    cached_normal_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

} // namespace qse
