#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fhvar {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Combines a user seed with stream identifiers into an independent
/// sub-seed, so concurrent chains and replications never share a stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return detail::splitmix64(detail::splitmix64(detail::splitmix64(seed) ^ a) ^ b);
}

/// Seeded pseudo-random source. Every draw in the library goes through
/// one of these, so a fixed seed fixes the entire draw sequence.
///
/// Not thread-safe; use one instance per thread.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on (lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal deviate (Box-Muller; the spare value is cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = kTwoPi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    static constexpr double kTwoPi = 6.283185307179586476925286766559005768;

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fhvar
