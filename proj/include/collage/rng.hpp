/**
 * Seeded PRNG for reproducible data generation, search, and simulation.
 *
 * All randomness in the toolkit flows through SeededRng so that a run is
 * fully determined by its seed on every platform (std:: distributions are
 * not bit-stable across standard libraries). The core generator is
 * splitmix64; child streams are derived by hashing labels into the seed,
 * which lets parallel work consume independent streams regardless of
 * scheduling order.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

namespace collage {

namespace detail {

inline uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// FNV-1a, used to fold string labels into derived seeds.
inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace detail

class SeededRng {
public:
    explicit SeededRng(uint64_t seed = 0) : state_(seed) {
        // One warm-up step decorrelates small consecutive seeds.
        detail::splitmix64_next(state_);
    }

    uint64_t next_u64() { return detail::splitmix64_next(state_); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    /// Uniform integer in [0, bound). bound must be > 0.
    uint64_t uniform_index(uint64_t bound) {
        // Rejection sampling keeps the draw exactly uniform.
        uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    int uniform_int(int lo, int hi_inclusive) {
        return lo + static_cast<int>(uniform_index(static_cast<uint64_t>(hi_inclusive - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller.
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = uniform_index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Random permutation of {0..k-1}.
    std::vector<int> permutation(int k) {
        std::vector<int> p(static_cast<size_t>(k));
        std::iota(p.begin(), p.end(), 0);
        shuffle(p);
        return p;
    }

    /// Child stream addressed by integer coordinates, e.g. (generation, slot).
    SeededRng derive(uint64_t a, uint64_t b = 0) const {
        uint64_t s = state_;
        s ^= 0xD6E8FEB86659FD93ull + a;
        detail::splitmix64_next(s);
        s ^= 0xA5A5A5A55A5A5A5Aull + b;
        detail::splitmix64_next(s);
        return SeededRng(s);
    }

    /// Child stream addressed by a string label, e.g. a collage name.
    SeededRng derive(std::string_view label) const {
        uint64_t s = state_ ^ detail::fnv1a(label);
        detail::splitmix64_next(s);
        return SeededRng(s);
    }

    SeededRng derive(std::string_view label, uint64_t index) const {
        return derive(label).derive(index);
    }

private:
    uint64_t state_;
};

}  // namespace collage
