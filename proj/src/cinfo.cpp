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

#include "commlab/cinfo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "commlab/errors.hpp"

namespace commlab {

namespace {

constexpr double kSumTol = 1e-12;

std::vector<std::string> index_labels(std::size_t n) {
    std::vector<std::string> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::to_string(i);
    return out;
}

}  // namespace

Distribution::Distribution(std::vector<std::string> labels, std::vector<double> probs)
    : labels_(std::move(labels)), probs_(std::move(probs)) {
    if (labels_.size() != probs_.size()) throw DimensionMismatch("distribution has different label and probability counts");
    if (probs_.empty()) throw InvalidState("distribution over an empty alphabet");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size()) throw InvalidState("distribution has duplicate labels");
    double sum = 0;
    for (double p : probs_) {
        if (!(p >= 0) || !std::isfinite(p)) throw InvalidState("distribution has a negative or non-finite probability");
        sum += p;
    }
    if (std::abs(sum - 1) > kSumTol)
        throw InvalidState("distribution sums to " + std::to_string(sum) + ", not 1");
}

Distribution::Distribution(std::vector<double> probs) : Distribution(index_labels(probs.size()), probs) {}

Distribution Distribution::uniform(std::size_t n) { return Distribution(std::vector<double>(n, 1.0 / double(n))); }

Distribution Distribution::point(std::size_t n, std::size_t at) {
    std::vector<double> p(n, 0.0);
    p.at(at) = 1.0;
    return Distribution(std::move(p));
}

Distribution Distribution::from_weights(std::vector<double> weights) {
    double sum = 0;
    for (double w : weights) {
        if (!(w >= 0)) throw InvalidState("negative weight");
        sum += w;
    }
    if (!(sum > 0)) throw InvalidState("weights sum to zero");
    for (double& w : weights) w /= sum;
    // Renormalize once more so the sum is as close to 1 as doubles allow.
    double again = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= again;
    return Distribution(std::move(weights));
}

std::size_t Distribution::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return i;
    throw DimensionMismatch("unknown label '" + std::string(label) + "'");
}

std::vector<std::size_t> Distribution::support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < probs_.size(); ++i)
        if (probs_[i] > 0) out.push_back(i);
    return out;
}

JointDistribution::JointDistribution(std::size_t nx, std::size_t ny, std::vector<double> table)
    : nx_(nx), ny_(ny), table_(std::move(table)) {
    if (nx == 0 || ny == 0 || table_.size() != nx * ny) throw DimensionMismatch("joint table size differs from |X|*|Y|");
    double sum = 0;
    for (double p : table_) {
        if (!(p >= 0)) throw InvalidState("joint distribution has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1) > kSumTol) throw InvalidState("joint distribution does not sum to 1");
}

JointDistribution JointDistribution::product(const Distribution& px, const Distribution& py) {
    std::vector<double> t(px.size() * py.size());
    for (std::size_t x = 0; x < px.size(); ++x)
        for (std::size_t y = 0; y < py.size(); ++y) t[x * py.size() + y] = px[x] * py[y];
    return JointDistribution(px.size(), py.size(), std::move(t));
}

Distribution JointDistribution::marginal_x() const {
    std::vector<double> p(nx_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
        for (std::size_t y = 0; y < ny_; ++y) p[x] += (*this)(x, y);
    return Distribution::from_weights(std::move(p));
}

Distribution JointDistribution::marginal_y() const {
    std::vector<double> p(ny_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
        for (std::size_t y = 0; y < ny_; ++y) p[y] += (*this)(x, y);
    return Distribution::from_weights(std::move(p));
}

Distribution JointDistribution::conditional_y(std::size_t x) const {
    std::vector<double> p(table_.begin() + std::ptrdiff_t(x * ny_), table_.begin() + std::ptrdiff_t((x + 1) * ny_));
    return Distribution::from_weights(std::move(p));
}

double JointDistribution::product_deviation() const {
    Distribution px = marginal_x(), py = marginal_y();
    double dev = 0;
    for (std::size_t x = 0; x < nx_; ++x)
        for (std::size_t y = 0; y < ny_; ++y) dev = std::max(dev, std::abs((*this)(x, y) - px[x] * py[y]));
    return dev;
}

JointDistribution JointDistribution::transposed() const {
    std::vector<double> t(table_.size());
    for (std::size_t x = 0; x < nx_; ++x)
        for (std::size_t y = 0; y < ny_; ++y) t[y * nx_ + x] = (*this)(x, y);
    return JointDistribution(ny_, nx_, std::move(t));
}

double shannon_entropy(const Distribution& p) {
    double h = 0;
    for (double v : p.probs())
        if (v > 0) h -= v * std::log2(v);
    return std::max(h, 0.0);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw DimensionMismatch("KL divergence of distributions on different alphabets");
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0) return std::numeric_limits<double>::infinity();
        s += p[i] * std::log2(p[i] / q[i]);
    }
    return s;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
    if (p.labels() != q.labels()) throw DimensionMismatch("KL divergence of distributions on different alphabets");
    return kl_divergence(std::span<const double>(p.probs()), std::span<const double>(q.probs()));
}

double mutual_information_classical(const JointDistribution& j) {
    Distribution px = j.marginal_x(), py = j.marginal_y();
    double s = 0;
    for (std::size_t x = 0; x < j.nx(); ++x)
        for (std::size_t y = 0; y < j.ny(); ++y) {
            double p = j(x, y);
            if (p > 0) s += p * std::log2(p / (px[x] * py[y]));
        }
    return std::max(s, 0.0);
}

double good_set_log2_threshold(double c, double delta) { return (c + 1) / delta; }

std::vector<std::size_t> good_set(std::span<const double> p, std::span<const double> q, double c, double delta) {
    if (!(delta > 0 && delta < 1)) throw PreconditionError("good_set needs delta in (0, 1)");
    if (p.size() != q.size()) throw DimensionMismatch("good_set on distributions of different sizes");
    double kl = kl_divergence(p, q);
    if (!(kl <= c + 1e-12)) throw PreconditionError("good_set needs S(P||Q) <= c");
    const double t = good_set_log2_threshold(c, delta);
    std::vector<std::size_t> out;
    double mass = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0 || q[i] <= 0) continue;
        if (std::log2(p[i]) - std::log2(q[i]) <= t) {
            out.push_back(i);
            mass += p[i];
        }
    }
    if (mass < 1 - delta - 1e-12) throw std::logic_error("good_set mass bound violated");
    return out;
}

std::vector<std::size_t> good_set(const Distribution& p, const Distribution& q, double c, double delta) {
    if (p.labels() != q.labels()) throw DimensionMismatch("good_set on distributions over different alphabets");
    return good_set(std::span<const double>(p.probs()), std::span<const double>(q.probs()), c, delta);
}

int floor_log2(std::uint64_t n) { return 63 - std::countl_zero(n); }

std::string prefix_encode(std::uint64_t n) {
    if (n == 0) throw PreconditionError("prefix code is defined for n >= 1");
    const int big_n = floor_log2(n);
    const std::uint64_t m = std::uint64_t(big_n) + 1;
    const int l = floor_log2(m);
    std::string out(std::size_t(l), '0');
    for (int b = l; b >= 0; --b) out.push_back(((m >> b) & 1) ? '1' : '0');
    for (int b = big_n - 1; b >= 0; --b) out.push_back(((n >> b) & 1) ? '1' : '0');
    return out;
}

std::uint64_t prefix_decode(std::string_view bits, std::size_t& pos) {
    std::size_t l = 0;
    while (pos + l < bits.size() && bits[pos + l] == '0') ++l;
    if (l > 6) throw InvalidState("prefix codeword too long");
    std::size_t p = pos + l;
    if (p + l + 1 > bits.size()) throw InvalidState("truncated prefix codeword");
    std::uint64_t m = 0;
    for (std::size_t i = 0; i <= l; ++i) {
        char c = bits[p + i];
        if (c != '0' && c != '1') throw InvalidState("prefix codeword has a non-binary character");
        m = (m << 1) | std::uint64_t(c == '1');
    }
    p += l + 1;
    if (m == 0 || m > 64) throw InvalidState("malformed prefix codeword");
    const std::uint64_t big_n = m - 1;
    if (p + big_n > bits.size()) throw InvalidState("truncated prefix codeword");
    std::uint64_t n = 1;
    for (std::uint64_t i = 0; i < big_n; ++i) {
        char c = bits[p + i];
        if (c != '0' && c != '1') throw InvalidState("prefix codeword has a non-binary character");
        n = (n << 1) | std::uint64_t(c == '1');
    }
    pos = p + big_n;
    return n;
}

std::uint64_t prefix_decode(std::string_view bits) {
    std::size_t pos = 0;
    std::uint64_t n = prefix_decode(bits, pos);
    if (pos != bits.size()) throw InvalidState("trailing bits after prefix codeword");
    return n;
}

std::size_t prefix_length(std::uint64_t n) {
    if (n == 0) throw PreconditionError("prefix code is defined for n >= 1");
    const int big_n = floor_log2(n);
    return std::size_t(big_n + 2 * floor_log2(std::uint64_t(big_n) + 1) + 1);
}

std::size_t prefix_length_bound(std::uint64_t n) {
    const int big_n = floor_log2(n);
    return std::size_t(big_n + 2 * floor_log2(std::uint64_t(big_n) + 1) + 4);
}

}  // namespace commlab
