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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "commlab/cinfo.hpp"
#include "commlab/errors.hpp"
#include "commlab/rng.hpp"
#include "oracles.hpp"

using namespace commlab;
using doctest::Approx;

namespace {

Distribution random_distribution(std::size_t n, Rng& rng, double zero_prob = 0.0) {
    std::vector<double> w(n);
    for (auto& v : w) v = rng.bernoulli(zero_prob) ? 0.0 : -std::log(1 - rng.uniform());
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0; })) w[0] = 1;
    return Distribution::from_weights(w);
}

}  // namespace

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(Distribution(std::vector<double>{0.5, 0.4}), InvalidState);
    CHECK_THROWS_AS(Distribution(std::vector<double>{1.5, -0.5}), InvalidState);
    CHECK_THROWS_AS(Distribution({"a", "a"}, {0.5, 0.5}), InvalidState);
    CHECK_THROWS_AS(Distribution({"a"}, {0.5, 0.5}), DimensionMismatch);
    Distribution d({"h", "t"}, {0.25, 0.75});
    CHECK(d.index_of("t") == 1);
    CHECK_THROWS_AS(d.index_of("x"), DimensionMismatch);
}

TEST_CASE("KL divergence") {
    Distribution p({0.2, 0.3, 0.5});
    CHECK(kl_divergence(p, p) == Approx(0.0));
    CHECK(kl_divergence(Distribution({1.0, 0.0}), Distribution::uniform(2)) == Approx(1.0));
    CHECK(kl_divergence(Distribution({0.75, 0.25}), Distribution::uniform(2)) == Approx(1 - oracle::h2(0.25)).epsilon(1e-12));
    CHECK(kl_divergence(Distribution({0.75, 0.25}), Distribution::uniform(2)) == Approx(0.1887).epsilon(1e-4));
    CHECK(std::isinf(kl_divergence(Distribution::uniform(2), Distribution({1.0, 0.0}))));
    CHECK_THROWS_AS(kl_divergence(Distribution::uniform(2), Distribution::uniform(3)), DimensionMismatch);

    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        Distribution a = random_distribution(6, rng, 0.2), b = random_distribution(6, rng);
        CHECK(kl_divergence(a, b) >= -1e-12);
        CHECK(kl_divergence(a, b) == Approx(oracle::kl(a.probs(), b.probs())).epsilon(1e-12));
    }
}

TEST_CASE("classical mutual information") {
    CHECK(mutual_information_classical(JointDistribution::product(Distribution({0.3, 0.7}), Distribution({0.1, 0.5, 0.4}))) ==
          Approx(0.0).epsilon(1e-12));

    std::vector<double> diag(16, 0.0);
    for (int i = 0; i < 4; ++i) diag[std::size_t(i * 4 + i)] = 0.25;
    CHECK(mutual_information_classical(JointDistribution(4, 4, diag)) == Approx(2.0));

    JointDistribution bsc(2, 2, {0.375, 0.125, 0.125, 0.375});
    CHECK(mutual_information_classical(bsc) == Approx(1 - oracle::h2(0.25)).epsilon(1e-12));

    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> w(12);
        for (auto& v : w) v = rng.uniform();
        double s = 0;
        for (double v : w) s += v;
        for (auto& v : w) v /= s;
        JointDistribution j(3, 4, w);
        double ixy = mutual_information_classical(j);
        CHECK(ixy >= -1e-12);
        CHECK(ixy == Approx(mutual_information_classical(j.transposed())).epsilon(1e-10));
        // E_x S(P_{Y|x} || P_Y)
        double alt = 0;
        Distribution px = j.marginal_x(), py = j.marginal_y();
        for (std::size_t x = 0; x < 3; ++x) alt += px[x] * oracle::kl(j.conditional_y(x).probs(), py.probs());
        CHECK(ixy == Approx(alt).epsilon(1e-10));
    }
}

TEST_CASE("good set examples") {
    Distribution p({0.2, 0.3, 0.5});
    CHECK(good_set(p, p, 0.0, 0.5).size() == 3);

    auto g = good_set(Distribution({1.0, 0.0}), Distribution::uniform(2), 1.0, 0.5);
    REQUIRE(g.size() == 1);
    CHECK(g[0] == 0);

    // spike with ratio 2^20 that the threshold excludes
    std::vector<double> pp(16, 15.0 / 16 / 15), qq(16, 0.0);
    pp[0] = 1.0 / 16;
    qq[0] = std::ldexp(1.0 / 16, -20);
    for (int i = 1; i < 16; ++i) qq[std::size_t(i)] = (1 - qq[0]) / 15;
    Distribution P(pp), Q(qq);
    double c = kl_divergence(P, Q);
    double delta = 0.25;
    REQUIRE(good_set_log2_threshold(c, delta) < 20);
    auto spike = good_set(P, Q, c, delta);
    CHECK(std::find(spike.begin(), spike.end(), 0u) == spike.end());
    double mass = 0;
    for (auto x : spike) mass += P[x];
    CHECK(mass >= 1 - delta);

    CHECK_THROWS_AS(good_set(P, Q, c - 0.1, delta), PreconditionError);
    CHECK_THROWS_AS(good_set(P, Q, c, 1.0), PreconditionError);
}

TEST_CASE("good set mass bound on random pairs") {
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        Distribution a = random_distribution(8, rng, 0.3), b = random_distribution(8, rng);
        double c = kl_divergence(a, b);
        for (double delta : {0.5, 0.25, 0.1}) {
            auto g = good_set(a, b, c, delta);
            double mass = 0;
            for (auto x : g) {
                mass += a[x];
                CHECK(std::log2(a[x] / b[x]) <= (c + 1) / delta + 1e-12);
            }
            CHECK(mass >= 1 - delta);
        }
    }
}

TEST_CASE("log-sum bound on arbitrary subsets") {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        Distribution a = random_distribution(8, rng), b = random_distribution(8, rng);
        double s = 0;
        for (std::size_t x = 0; x < 8; ++x)
            if (rng.bernoulli(0.5) && a[x] > 0) s += a[x] * std::log2(a[x] / b[x]);
        CHECK(s > -1);
    }
}

TEST_CASE("prefix code examples") {
    CHECK(prefix_encode(1) == "1");
    CHECK(prefix_decode("1") == 1);
    CHECK(prefix_encode(2) != prefix_encode(3));
    CHECK(prefix_decode(prefix_encode(2)) == 2);
    CHECK(prefix_decode(prefix_encode(3)) == 3);
    CHECK(prefix_encode(2).rfind(prefix_encode(3), 0) != 0);
    CHECK(prefix_length(1024) == 17);
    CHECK(prefix_length(1024) <= 22);
    CHECK(prefix_length_bound(1024) == 20);
    CHECK_THROWS_AS(prefix_encode(0), PreconditionError);
    CHECK_THROWS_AS(prefix_decode("0"), InvalidState);
    CHECK_THROWS_AS(prefix_decode("11"), InvalidState);
}

TEST_CASE("prefix code is prefix-free on the first 10^4 integers") {
    std::vector<std::string> words;
    for (std::uint64_t n = 1; n <= 10000; ++n) words.push_back(prefix_encode(n));
    std::sort(words.begin(), words.end());
    // in sorted order a prefix sits directly before some extension of itself
    for (std::size_t i = 0; i + 1 < words.size(); ++i) CHECK_FALSE(words[i + 1].rfind(words[i], 0) == 0);
}

TEST_CASE("prefix code round trip, length bound and Kraft sum") {
    double kraft = 0;
    for (std::uint64_t n = 1; n <= (1u << 20); ++n) {
        std::size_t len = prefix_length(n);
        kraft += std::ldexp(1.0, -int(len));
        if (n % 97 == 1 || n < 4096) {
            std::string w = prefix_encode(n);
            CHECK(w.size() == len);
            CHECK(prefix_decode(w) == n);
            CHECK(len <= prefix_length_bound(n));
        }
    }
    CHECK(kraft <= 1.0);

    // concatenated stream decodes back
    std::string stream;
    std::vector<std::uint64_t> values{5, 1, 77, 1u << 30, 2};
    for (auto v : values) stream += prefix_encode(v);
    std::size_t pos = 0;
    for (auto v : values) CHECK(prefix_decode(stream, pos) == v);
    CHECK(pos == stream.size());
    CHECK(prefix_decode(prefix_encode(~0ULL)) == ~0ULL);
}
