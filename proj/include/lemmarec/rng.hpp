#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace lemmarec {

namespace detail {

// SplitMix64 finalizer. Used both as the stream generator and to mix keys.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

// Small deterministic PRNG (SplitMix64 stream). We roll our own instead of
// <random> because std:: distributions are implementation-defined; every draw
// here is bit-stable across platforms and compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi). Degenerate ranges (lo == hi) still consume one draw.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    // Standard normal via Box-Muller; consumes exactly two draws.
    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

// Deterministic per-sample randomness for on-the-fly augmentation. The key is
// a pure function of (global_seed, sample_index, epoch); `stream(tag)` derives
// an independent substream per technique so that no technique's draw count can
// shift another technique's draws.
class SampleRng {
public:
    SampleRng(std::uint64_t global_seed, std::uint64_t sample_index, std::uint64_t epoch)
        : key_(detail::mix64(detail::mix64(detail::mix64(global_seed) ^ sample_index) ^ epoch)) {}

    Rng stream(std::string_view tag) const { return Rng(detail::mix64(key_ ^ detail::fnv1a(tag))); }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

}  // namespace lemmarec
