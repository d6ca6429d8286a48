#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

// Deterministic PRNG stack shared by every module: splitmix64 expands a
// 64-bit seed into the xoshiro256** state, and all randomness (shuffles,
// donor picks, normal draws) goes through Xoshiro256ss so that a seed
// reproduces datasets, checkpoints and reports bit-exactly.

namespace msd::rng {

constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += kSplitMixGamma;
        return splitmix64_mix(state);
    }
};

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : s_) word = sm.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl64(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl64(s_[3], 45);
        return result;
    }

    // [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // [0,1) with 24 random bits.
    float uniformf() { return static_cast<float>(next() >> 40) * 0x1.0p-24f; }

    // Bounded draw; plain modulo by contract (documented in the README).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // Box-Muller; the paired draw is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

private:
    std::array<std::uint64_t, 4> s_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Child streams per pipeline stage: splitmix64(parent ^ hash(stage-tag)).
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view stage) {
    return splitmix64_mix(parent ^ fnv1a64(stage));
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view stage, std::uint64_t index) {
    return splitmix64_mix(derive_seed(parent, stage) ^ splitmix64_mix(index ^ kSplitMixGamma));
}

} // namespace msd::rng
