#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Seedable, splittable randomness. One master seed flows into every
// stochastic stage through derive_seed(master, stage, index): stage names
// are FNV-1a hashed, mixed with the index by splitmix64, and the result
// seeds an independent xoshiro256** stream. Toggling one stage therefore
// never perturbs the draws of another.

namespace antibunch {

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                                           std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(master ^ fnv1a64(stage));
    return splitmix64(h ^ (index * 0x9e3779b97f4a7c15ull));
}

// xoshiro256** (Blackman/Vigna), seeded through splitmix64.
class Xoshiro256 {
  public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed = 0) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x += 0x9e3779b97f4a7c15ull);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ull; }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

// Distribution helpers with a fixed, platform-independent draw discipline
// (std::*_distribution would not reproduce across standard libraries).
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    RandomStream(std::uint64_t master, std::string_view stage, std::uint64_t index = 0)
        : engine_(derive_seed(master, stage, index)) {}

    // uniform in (0, 1]; never returns 0 so logs are safe
    double uniform() {
        return (double(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() <= p; }

    double exponential(double mean) { return -mean * std::log(uniform()); }

    // Box-Muller; consumes two uniforms per pair, caches the second value
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double phi = 2.0 * M_PI * uniform();
        cached_ = r * std::sin(phi);
        have_cached_ = true;
        return r * std::cos(phi);
    }

    std::uint64_t bits() { return engine_(); }

  private:
    Xoshiro256 engine_;
    double cached_ = 0;
    bool have_cached_ = false;
};

}  // namespace antibunch
