#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace rwtn {

// Counter-based SplitMix64 stream. Every consumer derives its own stream from
// (seed, name) or (seed, key words), so adding one consumer never perturbs the
// draws seen by another. Output i depends only on (key, i); draws are
// reproducible regardless of evaluation order or thread count.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t key) : key_(key) {}

    /// Stream addressed by a seed and a human-readable purpose label.
    static RngStream named(std::uint64_t seed, std::string_view name) {
        return RngStream(mix(seed ^ 0x9e3779b97f4a7c15ULL) ^ fnv1a(name));
    }

    /// Stream addressed by a seed and structured key words (ids, epochs, ...).
    static RngStream keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
        std::uint64_t k = mix(seed ^ 0x2545f4914f6cdd1dULL);
        for (std::uint64_t w : words) k = mix(k ^ (w + 0x9e3779b97f4a7c15ULL));
        return RngStream(k);
    }

    RngStream derive(std::string_view name) const { return named(key_, name); }
    RngStream derive(std::uint64_t word) const { return keyed(key_, {word}); }

    std::uint64_t next_u64() {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return mix(key_ ^ counter_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (no cached spare; two u64 per draw).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        // Shift u1 away from 0 so log() stays finite.
        u1 = (u1 + 0x1.0p-53) / (1.0 + 0x1.0p-52);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift; bias is < 2^-64 * n, negligible at desk scale.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace rwtn
