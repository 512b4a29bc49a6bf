#pragma once

#include <cstdint>
#include <cmath>

namespace relus {

/// Counter-based 64-bit generator (SplitMix64 finalizer over an additive
/// counter).  Output i is a bijective hash of seed + i*GAMMA, so independent
/// substreams can be derived from (seed, key) without sharing state.  The
/// construction is fixed here so runs can be reproduced bit-exactly by ports
/// in other languages.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1), 53-bit mantissa.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller; the second member of each pair is cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u;
        do {
            u = next_double();
        } while (u <= 0.0);
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 2.0 * 3.14159265358979323846 * next_double();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    /// Independent substream keyed by (original seed, key).  Derivation uses
    /// the seed, not the advanced state, so it is order-independent.
    Rng derive(std::uint64_t key) const {
        std::uint64_t z = seed_ ^ ((key + 1) * 0x94d049bb133111ebull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return Rng(z);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace relus
