#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace detect {

/// SplitMix64 finalizer. Used for seeding and for deriving sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for stream `index` of a master seed: mix64(master ^ mix64(index)).
/// Stream i does not depend on how many other streams exist.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(master ^ mix64(index));
}

/// xoshiro256** (Blackman & Vigna), state filled from a SplitMix64 sequence.
///
/// All draws (integers, doubles, shuffles) are defined here rather than via
/// <random> distributions, whose outputs differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            word = mix64(s);
            s += 0x9E3779B97F4A7C15ULL;
        }
    }

    std::uint64_t next() noexcept {
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

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in the open interval (lo, hi). Requires lo < hi.
    double uniform_open(double lo, double hi) noexcept {
        for (;;) {
            const double t = lo + uniform() * (hi - lo);
            if (t > lo && t < hi) return t;
        }
    }

    /// Uniform integer in [0, n). Requires n > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next();
            if (r >= limit) return r % n;
        }
    }

    /// Fisher-Yates, walking from the back.
    template <class T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Moves a uniform random k-subset to the front of `items` (partial Fisher-Yates).
    template <class T>
    void select_prefix(std::span<T> items, std::size_t k) noexcept {
        const std::size_t n = items.size();
        for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
            const auto j = i + static_cast<std::size_t>(below(n - i));
            std::swap(items[i], items[j]);
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace detect
