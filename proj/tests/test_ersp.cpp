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
#include "commlab/ersp.hpp"
#include "commlab/errors.hpp"
#include "commlab/random.hpp"
#include "oracles.hpp"

using namespace commlab;
using doctest::Approx;

namespace {

ErspInstance random_instance(Index d, std::size_t n, Rng& rng) {
    std::vector<VectorXc> targets;
    for (std::size_t x = 0; x < n; ++x) targets.push_back(random_unit_vector(d, rng));
    return ErspInstance(std::move(targets), random_density_matrix(d, rng));
}

VectorXc basis(Index d, Index k) {
    VectorXc v = VectorXc::Zero(d);
    v(k) = 1;
    return v;
}

}  // namespace

TEST_CASE("instance validation") {
    CHECK_THROWS_AS(ErspInstance({basis(2, 0)}, DensityMatrix::basis(2, 0)), InvalidState);
    CHECK_THROWS_AS(ErspInstance({VectorXc(basis(2, 0) * 1.1)}, DensityMatrix::maximally_mixed(2)), InvalidState);
    CHECK_THROWS_AS(ErspInstance({basis(3, 0)}, DensityMatrix::maximally_mixed(2)), DimensionMismatch);
    CHECK_THROWS_AS(ErspInstance::from_density({DensityMatrix::maximally_mixed(2)}, DensityMatrix::maximally_mixed(2)),
                    InvalidState);
    auto inst = ErspInstance::from_density({DensityMatrix::basis(2, 1)}, DensityMatrix::maximally_mixed(2));
    CHECK(std::abs(inst.target(0)(1)) == Approx(1.0));
}

TEST_CASE("psi_rho construction") {
    ErspInstance half({basis(2, 0)}, DensityMatrix::maximally_mixed(2));
    CHECK(half.weight(0) == Approx(0.5));
    auto psi = build_psi_rho(half, 0);
    // flag is the most significant A index
    CHECK(psi.matrix().bottomRows(2).squaredNorm() == Approx(0.5));

    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        const Index d = Index(2) << rng.below(3);
        auto inst = random_instance(d, 2, rng);
        for (std::size_t x = 0; x < 2; ++x) {
            auto s = build_psi_rho(inst, x);
            MatrixXc h = partial_trace(s, Side::B).matrix();
            CHECK(max_entry<double>(MatrixXc(h - inst.sigma().matrix())) < 1e-9);
            // conditioning on flag 1 leaves |phi_x> on H
            MatrixXc flag = s.matrix().bottomRows(d);
            CHECK(flag.squaredNorm() == Approx(inst.weight(x)).epsilon(1e-10));
            MatrixXc bob = flag.transpose() * flag.conjugate() / flag.squaredNorm();
            const VectorXc& phi = inst.target(x);
            CHECK((phi.adjoint() * bob * phi)(0, 0).real() >= 1 - 1e-10);
            // weight agrees with the bisection oracle
            CHECK(inst.weight(x) == Approx(oracle::substate_bisection(phi * phi.adjoint(), inst.sigma().matrix())).epsilon(1e-8));
        }
    }
}

TEST_CASE("shared copies serve every input") {
    Rng rng(32);
    for (int i = 0; i < 20; ++i) {
        const Index d = Index(2) << rng.below(3);
        ErspProtocol p(random_instance(d, 4, rng));
        for (std::size_t x = 0; x < 4; ++x) {
            CHECK(p.success_probability(x) == Approx(p.instance().weight(x)).epsilon(1e-9));
            CHECK(p.fidelity(x) >= 1 - 1e-9);
            CHECK(max_entry<double>(MatrixXc(p.bob_state(x).matrix() - p.instance().target(x) * p.instance().target(x).adjoint())) <
                  1e-9);
        }
    }
}

TEST_CASE("geometric first success and communication") {
    for (Index d : {2, 4, 8}) {
        ErspProtocol p(ErspInstance({basis(d, 0), basis(d, d - 1)}, DensityMatrix::maximally_mixed(d)));
        CHECK(p.instance().cost(0) == Approx(double(d)));
        auto s = evaluate_ersp(p, 0, 10000, 1u << 20, 7);
        CHECK(s.aborts == 0);
        CHECK(std::abs(s.mean_j - double(d)) <= 3 * s.sigma_j);
        CHECK(s.min_fidelity >= 1 - 1e-9);
        CHECK(s.mean_bits <= s.bits_bound);
    }
    Rng rng(33);
    for (int i = 0; i < 20; ++i) {
        const Index d = Index(2) << rng.below(3);
        ErspProtocol p(random_instance(d, 1, rng));
        auto s = evaluate_ersp(p, 0, 10000, 1u << 30, 100 + std::uint64_t(i));
        CHECK(std::abs(s.mean_j * s.weight - 1) <= 3 * s.sigma_j * s.weight);
        CHECK(s.mean_bits <= s.bits_bound);
        for (const auto& r : s.records) CHECK(r.bits == prefix_length(r.j));
    }
}

TEST_CASE("budget and determinism") {
    ErspProtocol p(ErspInstance({basis(8, 0)}, DensityMatrix::maximally_mixed(8)));
    CHECK_THROWS_AS(run_ersp(p, 0, 0, 1), PreconditionError);
    auto s = evaluate_ersp(p, 0, 2000, 1, 9);
    CHECK(s.aborts > 1500);
    CHECK(s.aborts < 2000);
    auto a = evaluate_ersp(p, 0, 3000, 100, 5, 1);
    auto b = evaluate_ersp(p, 0, 3000, 100, 5, 4);
    for (std::size_t t = 0; t < 3000; ++t) CHECK(a.records[t].j == b.records[t].j);
    CHECK(ersp_bits_bound(2.0) == Approx(5.0));
    CHECK(ersp_bits_bound(1.0) == Approx(4.0));
    CHECK(ersp_bits_bound(16.0) == Approx(12.0));
}
