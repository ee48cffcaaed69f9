#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace ceplan {

// splitmix64 finalizer. Bijective on 64-bit words, used both to scramble
// seeds and to expand a seed into generator state.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Counter-based stream derivation: stream k of a base seed is
// mix64(mix64(base) + k). Every module that fans out work derives one
// stream per unit of work from (seed, index), so results do not depend
// on thread count or execution order.
constexpr std::uint64_t derive_stream(std::uint64_t base, std::uint64_t index) {
    return mix64(mix64(base) + index);
}

constexpr std::uint64_t derive_stream(std::uint64_t base, std::uint64_t domain,
                                      std::uint64_t index) {
    return derive_stream(derive_stream(base, domain), index);
}

// Deterministic pseudo-random stream (xoshiro256**), seeded via splitmix64
// as recommended by its authors. The standard <random> engines are avoided
// for outputs that must be byte-stable across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9e3779b97f4a7c15ull;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            w = z ^ (z >> 31);
        }
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9e3779b97f4a7c15ull;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased integer in [0, n) (Lemire's multiply-shift with rejection).
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        std::uint64_t x = next_u64();
        unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
        std::uint64_t low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<unsigned __int128>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<int>(m >> 64);
    }

    // Draw an index from nonnegative weights summing to total (> 0).
    int sample_weights(std::span<const double> w, double total) {
        const double u = uniform_double() * total;
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            cum += w[i];
            if (u < cum) return static_cast<int>(i);
        }
        return static_cast<int>(w.size()) - 1;
    }

    // Draw from a normalized probability row.
    int sample_row(std::span<const double> row) { return sample_weights(row, 1.0); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace ceplan
