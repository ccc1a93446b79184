#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>

namespace repcost {

// Counter-based RNG helpers. All draws are fully specified by the integer
// arithmetic below, so results are bit-identical across platforms and runs,
// which the determinism tests rely on.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Small stateful generator built on splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_ + counter_++);
        return state_;
    }

    /// Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0x1.0p-60) u1 = 0x1.0p-60;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  private:
    std::uint64_t state_;
    std::uint64_t counter_ = 0;
};

/// Mix the bit pattern of a double into a hash (used for content-derived seeds).
inline std::uint64_t hash_mix(std::uint64_t h, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return splitmix64(h ^ bits);
}

} // namespace repcost
