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

#include "commlab/entres.hpp"

#include <algorithm>
#include <cmath>

#include "commlab/errors.hpp"
#include "commlab/qproto.hpp"
#include "commlab/random.hpp"

namespace commlab {

SubspacePartition::SubspacePartition(Index m, std::size_t n, std::uint64_t seed) : m_(m), seed_(seed) {
    if (m < kBlocks || m % kBlocks != 0) throw PreconditionError("M must be a positive multiple of 16");
    if (n < 1) throw PreconditionError("partition needs at least one input");
    check_dimension(std::size_t(m) * std::size_t(m), "maximally entangled prior");
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {i}));
        bases_.push_back(haar_unitary(m, rng));
    }
}

MatrixXc SubspacePartition::isometry(std::size_t i, int j) const {
    return bases_.at(i).middleCols(Index(j) * block_dim(), block_dim());
}

MatrixXc SubspacePartition::projector(std::size_t i, int j) const {
    MatrixXc v = isometry(i, j);
    return v * v.adjoint();
}

MatrixXc SubspacePartition::block_state(std::size_t i, int j) const {
    return projector(i, j) * (double(kBlocks) / double(m_));
}

SubspacePartition build_partition(Index m, std::size_t n, std::uint64_t seed) { return SubspacePartition(m, n, seed); }

PartitionReport check_partition(const SubspacePartition& p) {
    PartitionReport r;
    const std::size_t n = p.inputs();
    const double scale = double(kBlocks) / double(p.dim());
    std::vector<std::vector<MatrixXc>> iso(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < kBlocks; ++j) iso[i].push_back(p.isometry(i, j));
    // Tr(Pi Pi') = ||V^dagger V'||_F^2
    auto overlap = [&](std::size_t i, int j, std::size_t i2, int j2) {
        return scale * (iso[i][std::size_t(j)].adjoint() * iso[i2][std::size_t(j2)]).squaredNorm();
    };
    double cross_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        MatrixXc total = -MatrixXc::Identity(p.dim(), p.dim());
        for (int j = 0; j < kBlocks; ++j) {
            total += p.projector(i, j);
            r.self_deviation = std::max(r.self_deviation, std::abs(overlap(i, j, i, j) - 1));
            for (int j2 = 0; j2 < kBlocks; ++j2)
                if (j2 != j) r.same_input_overlap = std::max(r.same_input_overlap, overlap(i, j, i, j2));
            for (std::size_t i2 = 0; i2 < n; ++i2) {
                if (i2 == i) continue;
                for (int j2 = 0; j2 < kBlocks; ++j2) {
                    const double o = overlap(i, j, i2, j2);
                    r.max_cross_overlap = std::max(r.max_cross_overlap, o);
                    cross_sum += o;
                    ++r.cross_pairs;
                    if (o >= 0.25) ++r.cross_exceeding;
                }
            }
        }
        r.completeness = std::max(r.completeness, max_entry<double>(total));
    }
    if (r.cross_pairs > 0) r.mean_cross_overlap = cross_sum / double(r.cross_pairs);
    return r;
}

BipartitePureState epr_prior(Index dim) {
    return BipartitePureState::from_matrix(MatrixXc(MatrixXc::Identity(dim, dim) / std::sqrt(double(dim))));
}

EqualityOutcome equality_protocol(const SubspacePartition& p, const BipartitePureState& prior, std::size_t x,
                                  std::size_t x2) {
    if (x >= p.inputs() || x2 >= p.inputs()) throw PreconditionError("input out of range");
    if (prior.dim_a() != p.dim() || prior.dim_b() != p.dim()) throw DimensionMismatch("prior must live on C^M (x) C^M");
    EqualityOutcome out;
    const MatrixXc psi = prior.matrix();
    for (int j = 0; j < kBlocks; ++j) {
        MatrixXc branch = p.projector(x, j).conjugate() * psi;
        out.message_law.push_back(branch.squaredNorm());
        // Bob's unnormalized half is branch^T conj(branch)
        MatrixXc bob = branch.transpose() * branch.conjugate();
        out.accept += (p.projector(x2, j) * bob).trace().real();
    }
    return out;
}

EqualityOutcome equality_protocol(const SubspacePartition& p, std::size_t x, std::size_t x2) {
    return equality_protocol(p, epr_prior(p.dim()), x, x2);
}

AcceptanceTable acceptance_table(const SubspacePartition& p, const BipartitePureState& prior) {
    const std::size_t n = p.inputs();
    AcceptanceTable t;
    t.accept.assign(n * n, 0.0);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t x2 = 0; x2 < n; ++x2) {
            const double a = equality_protocol(p, prior, x, x2).accept;
            t.accept[x * n + x2] = a;
            if (x == x2) {
                t.min_equal = std::min(t.min_equal, a);
            } else {
                t.max_unequal = std::max(t.max_unequal, a);
                if (a > 0.25) ++t.unequal_exceeding;
            }
        }
    if (n > 1) t.unequal_fraction = double(t.unequal_exceeding) / double(n * (n - 1));
    return t;
}

namespace {

// || |a><a| - |b><b| ||_1 = 2 sqrt(1 - |<a|b>|^2); the orthogonal part of b
// gives the square root without cancellation.
double projector_distance(const VectorXc& a, const VectorXc& b) {
    return 2 * (b - a.dot(b) * a).norm();
}

}  // namespace

TruncationReport truncation_attack(const SubspacePartition& p, Index rank_bound) {
    if (rank_bound < 1) throw PreconditionError("Schmidt rank bound must be at least 1");
    TruncationReport r;
    r.rank_bound = rank_bound;
    const BipartitePureState prior = epr_prior(p.dim());
    const BipartitePureState cut = schmidt_truncate(prior, rank_bound);
    r.prior_distance = projector_distance(prior.amplitudes(), cut.amplitudes());
    r.entanglement = entanglement_amount(cut);
    r.honest = acceptance_table(p, prior);
    r.attacked = acceptance_table(p, cut);
    for (std::size_t k = 0; k < r.honest.accept.size(); ++k)
        r.max_shift = std::max(r.max_shift, std::abs(r.attacked.accept[k] - r.honest.accept[k]));
    r.below_threshold = r.attacked.min_equal < 13.0 / 20.0;
    return r;
}

SchmidtTruncation low_rank_approximation(const BipartitePureState& phi) {
    SchmidtTruncation t;
    const Schmidt sd = schmidt(phi);
    t.entanglement = spectrum_entropy<double>(sd.coefficients);
    const double exponent = std::min(100 * t.entanglement, 60.0);
    t.rank_bound = std::exp2(exponent);
    const double floor_weight = std::exp2(-exponent);
    for (Index i = 0; i < sd.rank(); ++i)
        if (sd.coefficients(i) >= floor_weight) {
            t.good_mass += sd.coefficients(i);
            ++t.good_count;
        }
    t.kept_rank = std::min<Index>(sd.rank(), Index(std::floor(t.rank_bound)));
    t.kept_mass = sd.coefficients.head(t.kept_rank).sum();
    t.truncated = schmidt_truncate(phi, t.kept_rank);
    t.distance = projector_distance(phi.amplitudes(), t.truncated.amplitudes());
    return t;
}

SubspaceEvidence low_dimension_evidence(const SubspacePartition& p, Index subspace_dim, std::size_t samples,
                                        std::uint64_t seed) {
    if (subspace_dim < 1 || subspace_dim > p.dim()) throw PreconditionError("subspace dimension out of range");
    SubspaceEvidence e;
    e.samples = samples;
    e.subspace_dim = subspace_dim;
    for (std::size_t s = 0; s < samples; ++s) {
        Rng rng(derive_seed(seed, {s}));
        MatrixXc w = haar_unitary(p.dim(), rng).leftCols(subspace_dim);
        std::size_t count = 0;
        for (std::size_t i = 0; i < p.inputs(); ++i) {
            double best = 0;
            for (int j = 0; j < kBlocks; ++j) {
                MatrixXc g = w.adjoint() * p.isometry(i, j);
                best = std::max(best, max_eigenvalue<double>(MatrixXc(g * g.adjoint())));
            }
            if (best > 9.0 / 16.0) ++count;
        }
        e.worst_count = std::max(e.worst_count, count);
        if (4 * count > p.inputs()) ++e.violations;
    }
    return e;
}

}  // namespace commlab
