#pragma once

#include <cstdint>

#include "bimr/quantiles.hpp"

namespace bimr {

// Deterministic, platform-independent generator for the simulation harness:
// xoshiro256** streams seeded through splitmix64 (Blackman/Vigna, public
// domain algorithms). Per-replication streams come from mixing (seed, rep),
// so any replication can be regenerated in isolation and replications can be
// scheduled in any order.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Mixes a base seed and a stream index into one 64-bit stream key.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s = h ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    return splitmix64(s);
}

class Rng {
  public:
    explicit Rng(std::uint64_t key) {
        std::uint64_t s = key;
        for (auto& w : state_) w = splitmix64(s);
    }

    /// Stream for replication rep of a run seeded with seed.
    static Rng stream(std::uint64_t seed, std::uint64_t rep) {
        return Rng(derive_stream(seed, rep));
    }

    std::uint64_t next_u64() {
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

    /// Uniform draw strictly inside (0,1); 53-bit resolution.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the inverse CDF (keeps draws portable).
    double normal() { return normal_quantile(uniform01()); }

    /// Three-level instrument draw: 1, 2, 3 with probabilities .6/.2/.2.
    double three_level() {
        const double u = uniform01();
        if (u < 0.6) return 1.0;
        if (u < 0.8) return 2.0;
        return 3.0;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

}  // namespace bimr
