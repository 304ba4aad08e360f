#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trajkit {

/// splitmix64 step; used only to expand one user seed into independent
/// per-stage streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a sub-seed for a named stage stream. FNV-1a over the label,
/// mixed with the base seed through splitmix64.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t state = base_seed ^ h;
    return splitmix64(state);
}

inline std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view label, std::uint64_t index) {
    std::uint64_t state = derive_seed(base_seed, label) ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(state);
}

/// Seeded generator with the few draw kinds the toolkit needs. The
/// uniform and normal transforms are spelled out here (rather than the
/// <random> distributions) so that a given seed produces the same
/// stream on every standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Unbiased index in [0, n) by rejection.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t draw = engine_();
        while (draw >= limit) draw = engine_();
        return static_cast<std::size_t>(draw % span);
    }

    /// Index drawn with probability proportional to the given non-negative
    /// weights. Zero-weight entries are never selected. total must be > 0.
    std::size_t weighted_index(const std::vector<double>& weights, double total) {
        const double u = uniform() * total;
        double cum = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > 0.0) last_positive = i;
            cum += weights[i];
            if (u < cum && weights[i] > 0.0) return i;
        }
        return last_positive;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace trajkit
