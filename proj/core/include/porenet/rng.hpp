#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace porenet {

/// SplitMix64 generator. Standard-library distributions are not bit-stable
/// across implementations, and every artifact output must reproduce
/// byte-identically from its seed, so all randomness is drawn from this
/// fixed-algorithm generator.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// One Box-Muller draw; consumes two uniforms per call.
    double next_normal(double mean = 0.0, double sigma = 1.0) {
        double u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Stateless mix of the same permutation, used where a value must depend
/// only on an index (e.g. plot jitter) rather than on draw order.
inline std::uint64_t mix_u64(std::uint64_t v) {
    v += 0x9e3779b97f4a7c15ULL;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

inline double mix_unit_double(std::uint64_t v) {
    return static_cast<double>(mix_u64(v) >> 11) * 0x1.0p-53;
}

}  // namespace porenet
