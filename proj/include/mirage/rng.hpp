#ifndef MIRAGE_RNG_HPP
#define MIRAGE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace mirage {

// Counter-based generator: every draw is a pure hash of (seed, counter),
// so substreams can be evaluated in any order with identical results and
// outputs are bit-identical across platforms (std distributions are not).

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Hash of a (seed, counter) pair; the basis for all randomness in the toolkit.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
    return splitmix64(splitmix64(seed) ^ splitmix64(counter * 0xD1342543DE82EF95ULL + 1));
}

/// Uniform integer in [0, n) via the multiply-shift bound (n > 0).
inline std::uint64_t bounded(std::uint64_t hash, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(hash) * n) >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double to_unit_double(std::uint64_t hash) {
    return static_cast<double>(hash >> 11) * 0x1.0p-53;
}

/// Stateful convenience wrapper around counter_hash.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(splitmix64(seed) ^ splitmix64(~stream)), counter_(0) {}

    std::uint64_t next_u64() { return counter_hash(seed_, counter_++); }
    double next_double() { return to_unit_double(next_u64()); }
    std::uint64_t next_below(std::uint64_t n) { return bounded(next_u64(), n); }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// Uniform real in [lo, hi).
    double next_real(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller (two hashes per call, no caching).
    double next_normal() {
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = next_double();
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

} // namespace mirage

#endif
