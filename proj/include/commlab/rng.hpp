// Copyright 2026 The CommLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace commlab {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministically derives a child seed from a master seed and a path of
/// counters, e.g. derive_seed(master, {trial}) or derive_seed(key, {row, col}).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master);
    for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

/// Maps a 64-bit word to a double in [0, 1) using its top 53 bits.
constexpr double to_unit(std::uint64_t word) noexcept {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

/// Counter-based uniform: the value at (key, row, col) needs no state, so two
/// parties holding the same key read the same array without communicating.
constexpr double counter_uniform(std::uint64_t key, std::uint64_t row, std::uint64_t col) noexcept {
    return to_unit(derive_seed(key, {row, col}));
}

/// Seeded generator used for private randomness and Monte Carlo sampling.
class Rng {
  public:
    using result_type = std::mt19937_64::result_type;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    double uniform() { return to_unit(engine_()); }
    double normal() { return std::normal_distribution<double>{}(engine_); }
    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>{0, n - 1}(engine_); }

    /// Index of the first success in a sequence of Bernoulli(p) trials (1-based).
    std::uint64_t geometric(double p) {
        if (p >= 1.0) return 1;
        return std::geometric_distribution<std::uint64_t>{p}(engine_) + 1;
    }

    std::uint64_t binomial(std::uint64_t n, double p) {
        return std::binomial_distribution<std::uint64_t>{n, p}(engine_);
    }

    /// Samples an index with probability proportional to weights[i].
    std::size_t categorical(std::span<const double> weights) { return sample_cdf(weights, uniform()); }

    /// Inverse-CDF lookup of u in [0,1) against (possibly unnormalized) weights.
    static std::size_t sample_cdf(std::span<const double> weights, double u) {
        double total = 0.0;
        for (double w : weights) total += w;
        double target = u * total;
        double acc = 0.0;
        std::size_t last = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            acc += weights[i];
            last = i;
            if (target < acc) return i;
        }
        return last;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace commlab
