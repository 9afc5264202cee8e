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

#include "commlab/ersp.hpp"

#include <algorithm>
#include <cmath>

#include "commlab/cinfo.hpp"
#include "commlab/errors.hpp"
#include "commlab/parallel.hpp"
#include "commlab/rng.hpp"

namespace commlab {

ErspInstance::ErspInstance(std::vector<VectorXc> targets, DensityMatrix sigma)
    : targets_(std::move(targets)), sigma_(std::move(sigma)) {
    if (targets_.empty()) throw InvalidState("instance needs at least one target state");
    if (sigma_.min_eigenvalue() <= tol::kFullRank) throw InvalidState("reference state is not full rank");
    for (const auto& v : targets_) {
        if (v.size() != sigma_.dim()) throw DimensionMismatch("target dimension differs from the reference");
        if (std::abs(v.squaredNorm() - 1) > 1e-10) throw InvalidState("target state is not normalized");
        weights_.push_back(pure_substate_weight<double>(v, sigma_));
    }
}

ErspInstance ErspInstance::from_density(const std::vector<DensityMatrix>& rho, DensityMatrix sigma) {
    std::vector<VectorXc> targets;
    for (const auto& r : rho) {
        Eigen::SelfAdjointEigenSolver<MatrixXc> es(r.matrix());
        const Index d = r.dim();
        if (d > 1 && es.eigenvalues()(d - 2) > 1e-10) throw InvalidState("target is not a pure state");
        targets.push_back(es.eigenvectors().col(d - 1));
    }
    return ErspInstance(std::move(targets), std::move(sigma));
}

double ErspInstance::max_cost() const {
    return 1.0 / *std::min_element(weights_.begin(), weights_.end());
}

BipartitePureState build_psi_rho(const ErspInstance& inst, std::size_t x) {
    if (x >= inst.size()) throw PreconditionError("input out of range");
    const Index d = inst.dim();
    const double k = inst.weight(x);
    const VectorXc& phi = inst.target(x);
    MatrixXc psi = MatrixXc::Zero(2 * d, d);
    psi.row(d) = std::sqrt(k) * phi.transpose();
    if (1 - k > 1e-12) {
        MatrixXc rest = inst.sigma().matrix() - k * phi * phi.adjoint();
        if (hermitian_eigenvalues<double>(rest).minCoeff() < -tol::kPsd)
            throw InvalidState("sigma - k rho is not positive semidefinite");
        auto theta = purify(DensityMatrix::normalized(MatrixXc((rest + rest.adjoint()) / 2.0)));
        psi.topRows(d) = std::sqrt(1 - k) * theta.matrix();
    }
    return BipartitePureState::normalized(2 * d, d, BipartitePureState::from_matrix(psi).amplitudes());
}

double ersp_bits_bound(double t) {
    const double l = std::log2(t);
    return l + 2 * std::max(l > 0 ? std::log2(l) : 0.0, 0.0) + 4;
}

ErspProtocol::ErspProtocol(ErspInstance inst) : inst_(std::move(inst)) {
    const Index d = inst_.dim();
    MatrixXc canon = MatrixXc::Zero(2 * d, d);
    canon.topRows(d) = purify(inst_.sigma()).matrix();
    shared_ = BipartitePureState::normalized(2 * d, d, BipartitePureState::from_matrix(canon).amplitudes());
    MatrixXc flag_one = MatrixXc::Zero(2 * d, 2 * d);
    flag_one.bottomRightCorner(d, d).setIdentity();
    for (std::size_t x = 0; x < inst_.size(); ++x) {
        MatrixXc op = flag_one * uhlmann_align(shared_, build_psi_rho(inst_, x));
        MatrixXc post = op * shared_.matrix();
        const double p = post.squaredNorm();
        DensityMatrix bob = DensityMatrix::normalized(MatrixXc(post.transpose() * post.conjugate()));
        const VectorXc& phi = inst_.target(x);
        ops_.push_back(std::move(op));
        success_.push_back(p);
        fidelity_.push_back((phi.adjoint() * bob.matrix() * phi)(0, 0).real());
        bob_.push_back(std::move(bob));
    }
}

ErspTrial run_ersp(const ErspProtocol& p, std::size_t x, std::uint64_t budget, std::uint64_t seed) {
    if (budget < 1) throw PreconditionError("copy budget must be at least 1");
    if (x >= p.instance().size()) throw PreconditionError("input out of range");
    Rng rng(seed);
    ErspTrial t;
    t.x = std::uint32_t(x);
    // copies fail independently, so the first success is geometric
    const std::uint64_t j = rng.geometric(std::min(1.0, p.success_probability(x)));
    if (j > budget) {
        t.aborted = true;
        t.bits = prefix_length(budget);
        return t;
    }
    t.j = j;
    t.bits = prefix_length(j);
    t.fidelity = p.fidelity(x);
    return t;
}

ErspStats evaluate_ersp(const ErspProtocol& p, std::size_t x, std::size_t trials, std::uint64_t budget,
                        std::uint64_t seed, unsigned threads) {
    ErspStats s;
    s.x = x;
    s.trials = trials;
    s.weight = p.instance().weight(x);
    s.cost = p.instance().cost(x);
    s.bits_bound = ersp_bits_bound(s.cost);
    s.records.resize(trials);
    parallel_for(trials, threads, [&](std::size_t t) { s.records[t] = run_ersp(p, x, budget, derive_seed(seed, {x, t})); });
    double sum = 0, sq = 0, bits = 0;
    std::size_t ok = 0;
    for (const auto& r : s.records) {
        bits += double(r.bits);
        if (r.aborted) {
            ++s.aborts;
            continue;
        }
        ++ok;
        sum += double(r.j);
        sq += double(r.j) * double(r.j);
        s.min_fidelity = std::min(s.min_fidelity, r.fidelity);
    }
    if (ok > 0) {
        s.mean_j = sum / double(ok);
        const double var = ok > 1 ? (sq - double(ok) * s.mean_j * s.mean_j) / double(ok - 1) : 0.0;
        s.sigma_j = std::sqrt(std::max(var, 0.0) / double(ok));
    }
    if (trials > 0) s.mean_bits = bits / double(trials);
    return s;
}

}  // namespace commlab
