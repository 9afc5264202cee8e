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

// Exact remote preparation of pure states from copies of a purification of
// a fixed full-rank reference state.

#pragma once

#include <cstdint>
#include <vector>

#include "commlab/qmath.hpp"

namespace commlab {

/// Encoding x -> |phi_x> (pure, dimension d) and a full-rank reference sigma.
class ErspInstance {
  public:
    ErspInstance() = default;
    ErspInstance(std::vector<VectorXc> targets, DensityMatrix sigma);

    /// Accepts density matrices; each must have rank 1 within 1e-10.
    static ErspInstance from_density(const std::vector<DensityMatrix>& rho, DensityMatrix sigma);

    std::size_t size() const { return targets_.size(); }
    Index dim() const { return sigma_.dim(); }
    const VectorXc& target(std::size_t x) const { return targets_[x]; }
    const DensityMatrix& sigma() const { return sigma_; }

    /// k_x = 1 / <phi_x|sigma^-1|phi_x>.
    double weight(std::size_t x) const { return weights_[x]; }
    /// T_x = Tr sigma^-1 rho_x = 1 / k_x.
    double cost(std::size_t x) const { return 1.0 / weights_[x]; }
    double max_cost() const;

  private:
    std::vector<VectorXc> targets_;
    DensityMatrix sigma_;
    std::vector<double> weights_;
};

/// sqrt(k)|1>|0>|phi_x> + sqrt(1 - k)|0>|theta> on (Flag (x) K) | H, with
/// |theta> the canonical purification of (sigma - k rho_x) / (1 - k) and
/// dim K = d. The H-marginal is sigma.
BipartitePureState build_psi_rho(const ErspInstance& inst, std::size_t x);

/// log2 T + 2 max(log2 log2 T, 0) + 4.
double ersp_bits_bound(double t);

/// The fixed-sigma protocol: every input uses the same shared copies
/// (canonical purification of sigma, A padded to Flag (x) K). Alice rotates
/// a copy onto |psi>_{rho_x} and measures the flag; on 1 Bob's half of that
/// copy is |phi_x>.
class ErspProtocol {
  public:
    explicit ErspProtocol(ErspInstance inst);

    const ErspInstance& instance() const { return inst_; }
    const BipartitePureState& shared() const { return shared_; }

    /// Flag-1 Kraus operator on Alice's side for input x.
    const MatrixXc& alice_operator(std::size_t x) const { return ops_[x]; }
    /// Exact per-copy success probability, computed from the state.
    double success_probability(std::size_t x) const { return success_[x]; }
    /// Bob's state on the successful copy.
    const DensityMatrix& bob_state(std::size_t x) const { return bob_[x]; }
    double fidelity(std::size_t x) const { return fidelity_[x]; }

  private:
    ErspInstance inst_;
    BipartitePureState shared_;
    std::vector<MatrixXc> ops_;
    std::vector<double> success_;
    std::vector<DensityMatrix> bob_;
    std::vector<double> fidelity_;
};

struct ErspTrial {
    std::uint32_t x = 0;
    std::uint64_t j = 0;  ///< first successful copy, 1-based; 0 on abort
    std::size_t bits = 0;
    double fidelity = 0;
    bool aborted = false;
};

/// One run: copies are tried in turn until the flag reads 1 or the budget
/// runs out. Bits are the prefix-code length of J.
ErspTrial run_ersp(const ErspProtocol& p, std::size_t x, std::uint64_t budget, std::uint64_t seed);

struct ErspStats {
    std::size_t x = 0;
    std::size_t trials = 0, aborts = 0;
    double weight = 0, cost = 0;
    double mean_j = 0, sigma_j = 0;  ///< sample mean of J and its standard error
    double mean_bits = 0;
    double bits_bound = 0;
    double min_fidelity = 1;
    std::vector<ErspTrial> records;
};

/// Trials t = 0..n-1 use seed derive_seed(seed, {x, t}).
ErspStats evaluate_ersp(const ErspProtocol& p, std::size_t x, std::size_t trials, std::uint64_t budget,
                        std::uint64_t seed, unsigned threads = 1);

}  // namespace commlab
