// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace zebra {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace detail

/// xoshiro256** seeded via splitmix64. All draws are implemented on top of
/// the raw 64-bit stream, so sequences are identical across platforms and
/// standard library versions (std::uniform_int_distribution is not
/// specified and would break byte-for-byte dataset reproducibility).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    /// Pure function of (master, a, b); used to derive independent
    /// per-puzzle streams from a master seed.
    static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
        std::uint64_t s = master;
        (void)detail::splitmix64(s);
        s ^= 0x9e3779b97f4a7c15ull * (a + 1);
        (void)detail::splitmix64(s);
        s ^= 0xc2b2ae3d27d4eb4full * (b + 1);
        return detail::splitmix64(s);
    }

    std::uint64_t next() {
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

    /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t threshold = (0ull - n) % n; // 2^64 mod n
        std::uint64_t x = next();
        while (x < threshold) x = next();
        return x % n;
    }

    /// Uniform integer in [lo, hi] inclusive.
    int range(int lo, int hi) {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

    /// Index drawn with probability proportional to the (nonnegative)
    /// weights. At least one weight must be positive.
    std::size_t weighted(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = unit() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc && weights[i] > 0.0) return i;
        }
        // Fall back to the last positive weight (u landed on the total
        // due to rounding).
        for (std::size_t i = weights.size(); i > 0; --i) {
            if (weights[i - 1] > 0.0) return i - 1;
        }
        return 0;
    }

    /// k distinct indices drawn uniformly from [0, n), in random order.
    std::vector<int> sample_indices(int n, int k) {
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < k; ++i) {
            int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(k));
        return pool;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace zebra
