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

// Random block partitions of C^M, the 4-bit entangled Equality protocol
// built on them, and Schmidt-rank truncation of its prior state.

#pragma once

#include <cstdint>
#include <vector>

#include "commlab/qmath.hpp"

namespace commlab {

inline constexpr int kBlocks = 16;

/// N orthogonal decompositions of C^M into 16 blocks of dimension M / 16.
/// Block j of decomposition i spans columns [j M/16, (j+1) M/16) of a
/// Haar-random unitary seeded by derive_seed(seed, {i}).
class SubspacePartition {
  public:
    SubspacePartition() = default;
    SubspacePartition(Index m, std::size_t n, std::uint64_t seed);

    Index dim() const { return m_; }
    std::size_t inputs() const { return bases_.size(); }
    std::uint64_t seed() const { return seed_; }
    Index block_dim() const { return m_ / kBlocks; }

    const MatrixXc& basis(std::size_t i) const { return bases_[i]; }
    /// Isometry onto V_ij (M x M/16).
    MatrixXc isometry(std::size_t i, int j) const;
    MatrixXc projector(std::size_t i, int j) const;
    /// rho_ij = (16 / M) Pi_ij.
    MatrixXc block_state(std::size_t i, int j) const;

  private:
    Index m_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<MatrixXc> bases_;
};

SubspacePartition build_partition(Index m, std::size_t n, std::uint64_t seed);

struct PartitionReport {
    double self_deviation = 0;   ///< max |Tr(Pi_ij rho_ij) - 1|
    double same_input_overlap = 0;  ///< max Tr(Pi_ij rho_ij') over j != j'
    double completeness = 0;     ///< max entry of sum_j Pi_ij - I
    double max_cross_overlap = 0;   ///< max Tr(Pi_ij rho_i'j') over i != i'
    double mean_cross_overlap = 0;
    std::size_t cross_pairs = 0, cross_exceeding = 0;  ///< against 1/4
    bool exact(double tolerance = 1e-10) const {
        return self_deviation <= tolerance && same_input_overlap <= tolerance && completeness <= tolerance;
    }
    bool separated() const { return cross_exceeding == 0; }
};

PartitionReport check_partition(const SubspacePartition& p);

/// m EPR pairs as a 2^m x 2^m bipartite state.
BipartitePureState epr_prior(Index dim);

struct EqualityOutcome {
    double accept = 0;
    std::vector<double> message_law;  ///< p_j
    int bits = 4;
};

/// Alice measures her half of `prior` in {conj(Pi_xj)}_j and sends j; Bob
/// accepts with {Pi_x'j, I - Pi_x'j}. Exact acceptance probability.
EqualityOutcome equality_protocol(const SubspacePartition& p, const BipartitePureState& prior, std::size_t x,
                                  std::size_t x2);

/// Same on the maximally entangled prior.
EqualityOutcome equality_protocol(const SubspacePartition& p, std::size_t x, std::size_t x2);

struct AcceptanceTable {
    std::vector<double> accept;  ///< [x * N + x']
    double min_equal = 1, max_unequal = 0;
    std::size_t unequal_exceeding = 0;  ///< pairs with acceptance > 1/4
    double unequal_fraction = 0;
};

AcceptanceTable acceptance_table(const SubspacePartition& p, const BipartitePureState& prior);

struct TruncationReport {
    Index rank_bound = 0;
    double prior_distance = 0;  ///< || |e><e| - |e'><e'| ||_1 against the untruncated prior
    double entanglement = 0;    ///< E of the truncated prior
    AcceptanceTable honest, attacked;
    double max_shift = 0;       ///< max |accept' - accept| over all pairs
    bool below_threshold = false;  ///< some equal-input acceptance < 13/20
};

TruncationReport truncation_attack(const SubspacePartition& p, Index rank_bound);

struct SchmidtTruncation {
    double entanglement = 0;
    double rank_bound = 0;       ///< 2^(100 e), capped
    double good_mass = 0;        ///< mass of coefficients >= 2^(-100 e)
    Index good_count = 0;
    Index kept_rank = 0;
    double kept_mass = 0;
    double distance = 0;         ///< trace norm of the difference of projectors
    BipartitePureState truncated;
};

/// Keeps the largest Schmidt terms allowed by the rank bound 2^(100 E).
SchmidtTruncation low_rank_approximation(const BipartitePureState& phi);

struct SubspaceEvidence {
    std::size_t samples = 0;
    Index subspace_dim = 0;
    std::size_t worst_count = 0;   ///< max over samples of #{i : max_j lambda_max(P_W Pi_ij P_W) > 9/16}
    std::size_t violations = 0;    ///< samples with count > N / 4
};

/// Random subspaces W: the best sigma_ij supported in W reaches
/// lambda_max(P_W Pi_ij P_W), so each sample is evaluated exactly.
SubspaceEvidence low_dimension_evidence(const SubspacePartition& p, Index subspace_dim, std::size_t samples,
                                        std::uint64_t seed);

}  // namespace commlab
