#pragma once

#include <cstdint>

namespace embedlab {

// SplitMix64. This exact recurrence is the reproducibility contract for
// batch sampling, parameter init and synthetic corpora: any reimplementation
// in another language must produce the same 64-bit stream for the same seed.
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1]: 53 mantissa bits, never exactly zero.
    double next_double() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n = 0 is rejected by the caller's logic;
    // modulo bias is below 2^-52 for every n used in this project.
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }

    // Standard normal via Box-Muller; the second sample of each pair is cached
    // so the draw order is pinned.
    double next_normal();

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) {
        state_ = s;
        have_cached_ = false;
    }

  private:
    std::uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

// Seed derivation for independent sub-streams of one run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace embedlab
