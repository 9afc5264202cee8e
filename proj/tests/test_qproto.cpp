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
#include <cstdlib>

#include "commlab/errors.hpp"
#include "commlab/qproto.hpp"
#include "commlab/random.hpp"
#include "oracles.hpp"

using namespace commlab;
using doctest::Approx;

namespace {

InputDistribution uniform_product(std::size_t nx, std::size_t ny) {
    return JointDistribution::product(Distribution::uniform(nx), Distribution::uniform(ny));
}

Distribution random_law(std::size_t n, Rng& rng) {
    std::vector<double> w(n);
    for (auto& v : w) v = 0.1 + rng.uniform();
    return Distribution::from_weights(w);
}

oracle::Mat outer(const VectorXc& v) { return v * v.adjoint(); }

// I(X:B) from the classical-quantum state sum_x mu(x) |x><x| (x) rho_x.
double cq_information(const std::vector<double>& mu, const std::vector<oracle::Mat>& rho) {
    const long d = long(rho.front().rows()), n = long(mu.size());
    oracle::Mat joint = oracle::Mat::Zero(n * d, n * d), avg = oracle::Mat::Zero(d, d);
    std::vector<double> px;
    for (long x = 0; x < n; ++x) {
        joint.block(x * d, x * d, d, d) = mu[std::size_t(x)] * rho[std::size_t(x)];
        avg += mu[std::size_t(x)] * rho[std::size_t(x)];
    }
    double hx = 0;
    for (double p : mu)
        if (p > 0) hx -= p * std::log2(p);
    return hx + oracle::entropy(avg) - oracle::entropy(joint);
}

}  // namespace

TEST_CASE("one-way protocol validation and average state") {
    std::vector<VectorXc> psi{VectorXc::Ones(2)};
    std::vector<std::vector<MatrixXc>> povm{{MatrixXc::Identity(2, 2)}};
    CHECK_THROWS_AS(QuantumOneWayProtocol(1, 2, psi, povm), InvalidState);
    psi[0] /= std::sqrt(2.0);
    CHECK_NOTHROW(QuantumOneWayProtocol(1, 2, psi, povm));
    povm[0][0] *= 0.9;
    CHECK_THROWS_AS(QuantumOneWayProtocol(1, 2, psi, povm), InvalidState);

    // single x gives |phi_x>
    auto one = index_one_way_protocol(1, 1);
    auto avg = average_state(one, Distribution({1.0, 0.0}));
    CHECK(fidelity<double>(avg.amplitudes(), one.phi(0).amplitudes()) == Approx(1.0));

    // orthogonal messages, uniform prior: message marginal is the uniform mixture
    auto idx = index_one_way_protocol(2, 2);
    auto m = partial_trace(average_state(idx, Distribution::uniform(4)), Side::B).matrix();
    CHECK(max_entry<double>(MatrixXc(m - MatrixXc::Identity(4, 4) / 4.0)) < 1e-12);

    Rng rng(21);
    for (int i = 0; i < 20; ++i) {
        auto p = random_one_way_protocol(3, 2, 2, 2, 3, rng);
        Distribution mu = random_law(3, rng);
        MatrixXc expected = MatrixXc::Zero(3, 3);
        for (std::size_t x = 0; x < 3; ++x)
            expected += mu[x] * oracle::trace_out_a(outer(p.psi(x)), 2, 3);
        MatrixXc got = partial_trace(average_state(p, mu), Side::B).matrix();
        CHECK(max_entry<double>(MatrixXc(got - expected)) < 1e-10);
    }
}

TEST_CASE("steering weight and mixture trace norm helpers") {
    Rng rng(22);
    for (int i = 0; i < 30; ++i) {
        auto phi = random_bipartite_state(4, 3, rng);
        auto target = random_density_matrix(3, rng);
        auto sigma = partial_trace(phi, Side::B);
        CHECK(steering_weight(phi, target) == Approx(max_substate_weight(target, sigma)).epsilon(1e-9));

        std::vector<VectorXc> vs{random_unit_vector(6, rng), random_unit_vector(6, rng), random_unit_vector(6, rng)};
        std::vector<double> w{0.7, -0.4, 0.2};
        oracle::Mat dense = oracle::Mat::Zero(6, 6);
        for (int k = 0; k < 3; ++k) dense += w[std::size_t(k)] * outer(vs[std::size_t(k)]);
        CHECK(mixture_trace_norm<double>(vs, w) == Approx(oracle::trace_norm(dense)).epsilon(1e-10));
    }
    // a target outside the support has weight 0
    VectorXc e0 = VectorXc::Zero(2);
    e0(0) = 1;
    auto prod = BipartitePureState::product(e0, e0);
    CHECK(steering_weight(prod, DensityMatrix::basis(2, 1)) == 0.0);
}

TEST_CASE("corrector examples") {
    // identical message states: nothing to correct
    std::vector<VectorXc> same(3, VectorXc::Zero(2));
    for (auto& v : same) v(1) = 1;
    QuantumOneWayProtocol flat(1, 2, same, {{MatrixXc::Identity(2, 2)}});
    std::vector<BipartitePureState> ens;
    for (std::size_t x = 0; x < 3; ++x) ens.push_back(flat.phi(x));
    auto c = build_corrector(ens, Distribution::uniform(3), 0.2);
    CHECK(c.alpha == Approx(1.0));
    for (double k : c.weight) CHECK(k == Approx(1.0));
    CHECK(c.audit.average_distance < 1e-9);
    CHECK(c.audit.passes(0.2));

    // orthogonal messages over d values: alpha = 1/d
    for (int bits : {1, 2, 3}) {
        auto p = index_one_way_protocol(bits, bits);
        ens.clear();
        for (std::size_t x = 0; x < p.nx(); ++x) ens.push_back(p.phi(x));
        auto co = build_corrector(ens, Distribution::uniform(p.nx()), 0.2);
        CHECK(co.alpha == Approx(1.0 / double(p.nx())).epsilon(1e-10));
        CHECK(co.information == Approx(double(bits)).epsilon(1e-10));
        CHECK(co.audit.passes(0.2));
    }
    CHECK_THROWS_AS(build_corrector(ens, Distribution::uniform(ens.size()), 1.0), PreconditionError);
}

TEST_CASE("corrector audit on random ensembles") {
    Rng rng(23);
    for (int i = 0; i < 25; ++i) {
        const std::size_t nx = 2 + rng.below(6);
        const Index keep = 1 + Index(rng.below(3)), msg = 2 + Index(rng.below(3));
        auto p = random_one_way_protocol(nx, 2, 2, keep, msg, rng);
        Distribution mu = random_law(nx, rng);
        std::vector<BipartitePureState> ens;
        for (std::size_t x = 0; x < nx; ++x) ens.push_back(p.phi(x));
        auto c = build_corrector(ens, mu, 0.2);
        CHECK(c.audit.passes(0.2));
        CHECK(c.alpha <= 1.0);
        double good_mass = 0;
        for (std::size_t x = 0; x < nx; ++x) {
            if (c.good[x]) good_mass += mu[x];
            // post-success state of a good x is |phi_x> itself
            if (c.good[x]) {
                auto branch = c.apply(x, average_state(p, mu).matrix());
                REQUIRE(branch.size() == 1);
                auto post = BipartitePureState::from_matrix(MatrixXc(branch[0] / branch[0].norm()));
                CHECK(fidelity<double>(post.amplitudes(), ens[x].amplitudes()) >= 1 - 1e-9);
            }
        }
        CHECK(good_mass >= 1 - 0.2 / 4 - 1e-12);
        // information matches the direct cq-state computation
        std::vector<oracle::Mat> rho;
        for (std::size_t x = 0; x < nx; ++x) rho.push_back(oracle::trace_out_a(outer(p.psi(x)), keep, msg));
        CHECK(c.information == Approx(cq_information(mu.probs(), rho)).epsilon(1e-8));
    }
}

TEST_CASE("corrector fallback for inputs outside the good set") {
    // x = 0 is almost certain and sends |0>; the rare x = 1 sends |1>
    std::vector<VectorXc> psi(2, VectorXc::Zero(2));
    psi[0](0) = 1;
    psi[1](1) = 1;
    QuantumOneWayProtocol p(1, 2, psi, {{MatrixXc::Identity(2, 2)}});
    Distribution mu({1 - 1e-4, 1e-4});
    auto c = build_corrector({p.phi(0), p.phi(1)}, mu, 0.2);
    CHECK(c.good[0]);
    CHECK_FALSE(c.good[1]);
    CHECK(c.kraus[1].size() == 2);
    CHECK(c.audit.success_deviation <= 1e-9);
    CHECK(c.audit.leakage == 0.0);
    // the fallback leaves |1> (x) (mixture of messages); compare with a dense oracle
    MatrixXc psi_avg = average_state(p, mu).matrix();
    oracle::Mat post = oracle::Mat::Zero(4, 4);
    for (const auto& b : c.apply(1, psi_avg)) {
        VectorXc v(4);
        for (int a = 0; a < 2; ++a)
            for (int k = 0; k < 2; ++k) v(a * 2 + k) = b(a, k);
        post += outer(v) / c.alpha;
    }
    double dist = oracle::trace_norm(outer(p.phi(1).amplitudes()) - post);
    CHECK(c.audit.distance[1] == Approx(dist).epsilon(1e-10));
    CHECK(c.audit.passes(0.2));
}

TEST_CASE("one-way compression of the index protocol") {
    auto p = index_one_way_protocol(4, 2);
    auto f = index_relation(4);
    auto mu = uniform_product(16, 4);
    CHECK(exact_error(p, f, mu) == Approx(0.25));
    CHECK(message_information(p, mu.marginal_x()) == Approx(2.0));
    auto c = compress_one_way(p, f, mu, 0.2);
    CHECK(c.corrector.alpha == Approx(0.25));
    CHECK(c.copies == 14);
    CHECK(c.beta == 4);
    CHECK(c.block_success >= 1 - 0.2 / 2);
    CHECK(c.predicted_error <= c.exact_error + 0.2);
    auto ev = evaluate_compressed(c, p, f, mu, 20000, 3);
    CHECK(ev.error <= c.exact_error + 0.2 + 3 * ev.error_sigma);
    CHECK(std::abs(ev.error - c.predicted_error) <= 4 * ev.error_sigma);
    CHECK(ev.mean_bits == Approx(4.0));

    // no information: a constant number of bits and the same error
    std::vector<VectorXc> same(4, VectorXc::Zero(2));
    for (auto& v : same) v(0) = 1;
    QuantumOneWayProtocol flat(1, 2, same, {{MatrixXc::Identity(2, 2) / 2.0, MatrixXc::Identity(2, 2) / 2.0}});
    auto g = Relation::from_function(4, 1, 2, [](std::size_t x, std::size_t) { return x & 1; });
    auto fc = compress_one_way(flat, g, uniform_product(4, 1), 0.2);
    CHECK(fc.corrector.alpha == Approx(1.0));
    CHECK(fc.beta <= 2);
    CHECK(fc.predicted_error == Approx(fc.exact_error));
}

TEST_CASE("inner product privacy") {
    for (int n : {1, 2}) {
        auto p = inner_product_protocol(n);
        const std::size_t size = std::size_t(1) << n;
        auto mu = uniform_product(size, size);
        CHECK(exact_error(p, inner_product_relation(n), mu) == Approx(0.0));
        CHECK(quantum_privacy_loss(p, mu, 0).k_a == Approx(0.0));
        // Bob holds x verbatim after the first message
        CHECK(quantum_privacy_loss(p, mu, 1).k_a == Approx(double(n)).epsilon(1e-10));
        auto end = quantum_privacy_loss(p, mu, 3);
        CHECK(end.k_a >= n / 2.0 - 1e-9);
        // receiving a message never lowers what Bob knows
        CHECK(quantum_privacy_loss(p, mu, 3).k_a >= quantum_privacy_loss(p, mu, 2).k_a - 1e-9);
        CHECK(quantum_privacy_loss(p, mu, 1).k_a >= quantum_privacy_loss(p, mu, 0).k_a - 1e-9);
    }
    // n = 1: two Bob states with overlap 1/2, so I = h2(1/4)
    auto p1 = inner_product_protocol(1);
    CHECK(quantum_privacy_loss(p1, uniform_product(2, 2), 3).k_a == Approx(oracle::h2(0.25)).epsilon(1e-10));
    CHECK_THROWS_AS(quantum_privacy_loss(p1, JointDistribution(2, 2, {0.5, 0, 0, 0.5}), 1), PreconditionError);
}

TEST_CASE("privacy loss against a density-matrix oracle") {
    Rng rng(24);
    for (int i = 0; i < 10; ++i) {
        auto p = random_two_way_protocol(3, 2, 2, 2, 2, 2, 3, rng);
        auto mu = JointDistribution::product(random_law(3, rng), random_law(2, rng));
        Distribution mx = mu.marginal_x(), my = mu.marginal_y();
        for (std::size_t r = 0; r <= 3; ++r) {
            auto k = quantum_privacy_loss(p, mu, r);
            const long w = long(p.work_dim()), ny = 2;
            // Bob keeps C B Y after odd rounds, B Y otherwise: a trailing block of A C B Y
            const long alice_part = r % 2 ? p.da() : p.da() * p.dc();
            std::vector<oracle::Mat> rho;
            for (std::size_t x = 0; x < 3; ++x) {
                VectorXc full = alice_conditioned_state(p, my, x, r).segment(long(x) * w * ny, w * ny);
                rho.push_back(oracle::trace_out_a(outer(full), alice_part, w * ny / alice_part));
            }
            CHECK(k.k_a == Approx(cq_information(mx.probs(), rho)).epsilon(1e-8));
        }
    }
}

TEST_CASE("multi-round compression claims") {
    Rng rng(25);
    for (int i = 0; i < 6; ++i) {
        auto p = random_two_way_protocol(2 + rng.below(2), 2 + rng.below(2), 2, 2, 2, 2, 3, rng);
        auto g = Relation::from_function(p.nx(), p.ny(), 2, [&](std::size_t x, std::size_t y) { return (x * 7 + y * 3 + std::size_t(i)) % 2; });
        auto mu = JointDistribution::product(random_law(p.nx(), rng), random_law(p.ny(), rng));
        for (std::size_t tp : {std::size_t(1), std::size_t(3)}) {
            auto c = compress_multiround_quantum(p, g, mu, tp, 0.2);
            CHECK(c.alice.audit.passes(c.delta_a));
            CHECK(c.bob.audit.passes(c.delta_b));
            CHECK(std::abs(c.claim_ratio - 1) <= c.delta_b / 2 + 1e-9);
            CHECK(c.tail_mass <= std::sqrt(c.delta_b) + 1e-12);
            CHECK(c.set_size >= 1);
            auto ev = evaluate_multiround(c, p, g, mu, 20000, 11);
            CHECK(ev.run.error <= c.exact_error + 0.2 + 3 * ev.run.error_sigma);
            CHECK(ev.tail_fraction <= std::sqrt(c.delta_b) + 3 * ev.tail_sigma + 1e-12);

            // Bob then Alice gives the same joint success probability
            MatrixXc sigma = MatrixXc::Zero(c.alice.dim_a, c.alice.dim_b);
            Distribution mx = mu.marginal_x(), my = mu.marginal_y();
            for (std::size_t x = 0; x < p.nx(); ++x) {
                VectorXc v = alice_conditioned_state(p, my, x, tp);
                for (Index a = 0; a < sigma.rows(); ++a)
                    for (Index b = 0; b < sigma.cols(); ++b) sigma(a, b) += std::sqrt(mx[x]) * v(a * sigma.cols() + b);
            }
            for (std::size_t x = 0; x < p.nx(); ++x)
                for (std::size_t y = 0; y < p.ny(); ++y) {
                    double r = 0;
                    for (const auto& nb : c.bob.kraus[y])
                        for (const auto& ka : c.alice.kraus[x]) r += (ka * (sigma * nb.transpose())).squaredNorm();
                    CHECK(r == Approx(c.r_xy[x * p.ny() + y]).epsilon(1e-10));
                }
        }
    }
    auto p = random_two_way_protocol(2, 2, 2, 2, 2, 2, 3, rng);
    auto g = Relation::from_function(2, 2, 2, [](std::size_t x, std::size_t y) { return x ^ y; });
    CHECK_THROWS_AS(compress_multiround_quantum(p, g, uniform_product(2, 2), 2, 0.2), PreconditionError);
}

TEST_CASE("corrected copy factors from the untouched copies") {
    // two shared copies of sigma; the corrections touch copy 1 only
    Rng rng(26);
    auto p = random_two_way_protocol(2, 2, 2, 1, 2, 1, 1, rng);
    auto mu = uniform_product(2, 2);
    auto g = Relation::from_function(2, 2, 2, [](std::size_t x, std::size_t y) { return x & y; });
    auto c = compress_multiround_quantum(p, g, mu, 1, 0.2);
    const Index da = c.alice.dim_a, db = c.alice.dim_b;
    MatrixXc sigma = MatrixXc::Zero(da, db);
    for (std::size_t x = 0; x < 2; ++x) {
        VectorXc v = alice_conditioned_state(p, mu.marginal_y(), x, 1);
        for (Index a = 0; a < da; ++a)
            for (Index b = 0; b < db; ++b) sigma(a, b) += std::sqrt(0.5) * v(a * db + b);
    }
    VectorXc s = BipartitePureState::from_matrix(sigma).amplitudes();
    // copy order: (A1 B1)(A2 B2) -> registers A1, B1, A2, B2
    VectorXc two = BipartitePureState::kron_vec(s, s);
    const Dims dims{da, db, da, db};
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 2; ++y) {
            VectorXc both = apply_local<double>(two, dims, 0, 1, c.alice.kraus[x][0]);
            both = apply_local<double>(both, dims, 1, 1, c.bob.kraus[y][0]);
            MatrixXc one = c.alice.kraus[x][0] * sigma * c.bob.kraus[y][0].transpose();
            VectorXc want = BipartitePureState::kron_vec(BipartitePureState::from_matrix(MatrixXc(one / one.norm())).amplitudes(), s);
            CHECK(fidelity<double>(VectorXc(both / both.norm()), want) >= 1 - 1e-9);
        }
}

TEST_CASE("index trade-off demo") {
    auto a = index_tradeoff_demo(8, 1);
    CHECK(a.k_a == Approx(4.0).epsilon(1e-12));
    CHECK(a.k_b == Approx(1.0).epsilon(1e-12));
    CHECK(a.error == Approx(0.0));
    auto b = index_tradeoff_demo(4, 0);
    CHECK(b.k_a == Approx(4.0).epsilon(1e-12));
    CHECK(b.alice_bits == 4);
    auto full = index_tradeoff_demo(8, 3);
    CHECK(full.k_b == Approx(3.0).epsilon(1e-12));
    CHECK(full.alice_bits == 1);
}

TEST_CASE("dimension budget") {
    Rng rng(27);
    CHECK(dimension_budget() == 16384);
    setenv("COMMLAB_DIM_BUDGET", "16", 1);
    CHECK(dimension_budget() == 16);
    CHECK_THROWS_AS(random_one_way_protocol(4, 1, 2, 2, 4, rng), BudgetExceeded);
    CHECK_NOTHROW(random_one_way_protocol(2, 1, 2, 2, 4, rng));
    unsetenv("COMMLAB_DIM_BUDGET");
    CHECK(dimension_budget() == 16384);
}
