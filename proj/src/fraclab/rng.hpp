#pragma once

#include <cmath>
#include <cstdint>

namespace fraclab {

/// splitmix64: tiny, seedable, and identical on every platform.  Used for all
/// randomized inputs so reports are byte-identical under a fixed seed
/// regardless of compiler, thread count, or trial scheduling.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1]: never returns 0, safe inside log().
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double next_range(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
    }

    /// Integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller (pairs; second value cached).
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

  private:
    bool have_cached_ = false;
    double cached_ = 0.0;
};

/// Derives an independent stream for (seed, a, b) — e.g. one per noise trial —
/// so concurrent trials stay deterministic independent of scheduling order.
inline SplitMix64 split_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    SplitMix64 mixer(seed);
    mixer.state ^= 0x9E3779B97F4A7C15ull * (a + 1);
    mixer.next_u64();
    mixer.state ^= 0xC2B2AE3D27D4EB4Full * (b + 1);
    mixer.next_u64();
    return SplitMix64(mixer.next_u64());
}

}  // namespace fraclab
