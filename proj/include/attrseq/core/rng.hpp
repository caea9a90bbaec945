#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "attrseq/core/errors.hpp"

namespace attrseq {

/// Deterministic counter-based generator (splitmix64). The stream depends
/// only on the 64-bit seed, so identical seeds give identical streams on
/// every platform. Substreams are derived by hashing (seed, tag) and are
/// stable regardless of how much the parent stream has been consumed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Independent substream; split(tag) yields the same stream every time.
    Rng split(std::uint64_t tag) const {
        std::uint64_t z = seed_ ^ (tag + 0x9e3779b97f4a7c15ull + (seed_ << 6) + (seed_ >> 2));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return Rng(z ^ (z >> 31));
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection keeps the draw exactly uniform.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw ConfigError("Rng::below(0)");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    /// Standard normal via Box-Muller; the paired draw is discarded so the
    /// generator stays stateless beyond the counter.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& xs) {
        if (xs.size() < 2) return;
        for (std::size_t i = xs.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(xs[i], xs[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace attrseq
