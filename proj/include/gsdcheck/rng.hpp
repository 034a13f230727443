#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace gsdcheck {

// SplitMix64 finalizer. Used for every seed derivation in the library so that
// independent implementations can reproduce the same streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// FNV-1a, 64-bit.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xCBF29CE484222325ULL) noexcept {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Seed for one stimulus: splitmix64(master ^ fnv1a64(stimulus_id)).
constexpr std::uint64_t stimulus_seed(std::uint64_t master, std::string_view stimulus_id) noexcept {
    return splitmix64(master ^ fnv1a64(stimulus_id));
}

/// Seed for the index-th sub-stream of a parent seed (bootstrap chunks,
/// simulated stimuli): splitmix64(parent + (index + 1) * golden).
constexpr std::uint64_t substream_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return splitmix64(parent + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// mt19937_64 is fully specified by the standard, so the streams are
/// portable. The std distributions are not; everything below maps raw
/// 64-bit outputs to values by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

/// Inverse-CDF sampler over the five score categories. Categories with zero
/// probability are never produced.
class CategoricalSampler {
public:
    explicit CategoricalSampler(std::span<const double, 5> probabilities);

    // Returns a category index in 0..4.
    int draw(Rng& rng) const {
        const double u = rng.uniform();
        for (int j = 0; j < 4; ++j) {
            if (u < cdf_[j]) return j;
        }
        return 4;
    }

    // Adds n draws to counts.
    void draw_counts(Rng& rng, int n, std::array<int, 5>& counts) const {
        for (int i = 0; i < n; ++i) ++counts[draw(rng)];
    }

private:
    std::array<double, 5> cdf_{};
};

}  // namespace gsdcheck
