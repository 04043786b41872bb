#include "embedlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace embedlab {

double SplitMix64::next_normal() {
    if (have_cached_) {
        have_cached_ = false;
        return cached_;
    }
    const double u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 rng(seed ^ (0xA5A5A5A5A5A5A5A5ull * (stream + 1)));
    return rng.next();
}

}  // namespace embedlab
