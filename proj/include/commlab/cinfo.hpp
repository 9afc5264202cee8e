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

// Finite classical probability: distributions, entropies, Good sets and a
// prefix-free integer code.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace commlab {

/// Probability vector over a labeled alphabet.
class Distribution {
  public:
    Distribution() = default;

    /// Validates: equal lengths, distinct labels, probs >= 0, sum = 1 +- 1e-12.
    Distribution(std::vector<std::string> labels, std::vector<double> probs);

    /// Labels "0", "1", ... .
    explicit Distribution(std::vector<double> probs);

    static Distribution uniform(std::size_t n);
    static Distribution point(std::size_t n, std::size_t at);
    /// Normalizes non-negative weights; throws if they sum to zero.
    static Distribution from_weights(std::vector<double> weights);

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const { return probs_; }
    const std::vector<std::string>& labels() const { return labels_; }
    /// Index of a label; throws DimensionMismatch if absent.
    std::size_t index_of(std::string_view label) const;
    /// Indices with positive probability.
    std::vector<std::size_t> support() const;

  private:
    std::vector<std::string> labels_;
    std::vector<double> probs_;
};

/// Joint law of (X, Y) as a row-major |X| x |Y| table.
class JointDistribution {
  public:
    JointDistribution() = default;
    JointDistribution(std::size_t nx, std::size_t ny, std::vector<double> table);

    static JointDistribution product(const Distribution& px, const Distribution& py);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    double operator()(std::size_t x, std::size_t y) const { return table_[x * ny_ + y]; }
    const std::vector<double>& table() const { return table_; }

    Distribution marginal_x() const;
    Distribution marginal_y() const;
    /// Law of Y given X = x; throws if Pr[X = x] = 0.
    Distribution conditional_y(std::size_t x) const;
    /// Max |mu(x,y) - mu_X(x) mu_Y(y)|.
    double product_deviation() const;
    JointDistribution transposed() const;

  private:
    std::size_t nx_ = 0, ny_ = 0;
    std::vector<double> table_;
};

double shannon_entropy(const Distribution& p);

/// S(P||Q) in bits, +infinity when supp(P) is not inside supp(Q).
double kl_divergence(const Distribution& p, const Distribution& q);

/// Same on raw probability vectors (no normalization check).
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// I(X:Y) = E_x S(P_{Y|x} || P_Y).
double mutual_information_classical(const JointDistribution& j);

/// log2 of the ratio threshold used by good_set: (c + 1) / delta.
double good_set_log2_threshold(double c, double delta);

/// {x : P(x) > 0 and P(x)/Q(x) <= 2^((c+1)/delta)}. Requires S(P||Q) <= c
/// and delta in (0,1); the returned set carries P-mass >= 1 - delta.
std::vector<std::size_t> good_set(const Distribution& p, const Distribution& q, double c, double delta);

/// Raw-vector variant; the mass guarantee is still asserted.
std::vector<std::size_t> good_set(std::span<const double> p, std::span<const double> q, double c, double delta);

/// Elias-delta code. encode(1) = "1"; len(n) = N + 2 floor(log2(N + 1)) + 1
/// with N = floor(log2 n). Bitstrings are '0'/'1' characters.
std::string prefix_encode(std::uint64_t n);

/// Decodes one codeword starting at `pos`; advances pos past it.
std::uint64_t prefix_decode(std::string_view bits, std::size_t& pos);

/// Decodes a string holding exactly one codeword.
std::uint64_t prefix_decode(std::string_view bits);

std::size_t prefix_length(std::uint64_t n);

/// The code's worst-case length bound floor(log2 n) + 2 floor(log2(floor(log2 n) + 1)) + 4.
std::size_t prefix_length_bound(std::uint64_t n);

/// floor(log2 n) for n >= 1.
int floor_log2(std::uint64_t n);

}  // namespace commlab
