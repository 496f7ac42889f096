// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace databoost {

// Deterministic generator with portable derived distributions. The standard
// <random> distributions are implementation-defined, so seeded results would
// differ between standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // splitmix64
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n) {
        if (n <= 1) return 0;
        // Lemire-style rejection to avoid modulo bias.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return static_cast<std::size_t>(x % n);
    }

    /// Standard normal via Box-Muller.
    double normal();

    /// Index drawn from an (unnormalized, non-negative) weight vector.
    std::size_t categorical(std::span<const double> weights);

    /// Independent child stream; the parent advances by one draw.
    Rng split() { return Rng(next_u64() ^ 0xD1B54A32D192ED03ULL); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

  private:
    std::uint64_t state_;
};

/// Mixes a base seed with a stream index into a new seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace databoost
