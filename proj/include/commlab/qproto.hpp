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

// Small quantum protocols simulated by state vectors: one-way protocols,
// alternating two-party protocols, correctors built from exact steering,
// and the one-message / two-message compressions that use them.

#pragma once

#include <cstdint>
#include <vector>

#include "commlab/cinfo.hpp"
#include "commlab/cproto.hpp"
#include "commlab/qmath.hpp"
#include "commlab/rng.hpp"

namespace commlab {

/// Largest simulated Hilbert-space dimension. 2^14 unless the
/// COMMLAB_DIM_BUDGET environment variable holds a positive integer.
std::size_t dimension_budget();

/// Throws BudgetExceeded when dim exceeds dimension_budget().
void check_dimension(std::size_t dim, const char* what);

// ---------------------------------------------------------------------------
// One-way protocols.

/// Alice holds x and prepares |phi_x> = |x>|psi_x> on X (x) Keep (x) Message,
/// sends Message, and Bob measures it with the POVM {E_{y,z}}_z.
class QuantumOneWayProtocol {
  public:
    QuantumOneWayProtocol() = default;
    /// psi[x] lives on Keep (x) Message (Keep most significant);
    /// povm[y][z] on Message.
    QuantumOneWayProtocol(Index keep_dim, Index message_dim, std::vector<VectorXc> psi,
                          std::vector<std::vector<MatrixXc>> povm);

    std::size_t nx() const { return psi_.size(); }
    std::size_t ny() const { return povm_.size(); }
    std::size_t nz() const { return povm_.front().size(); }
    Index keep_dim() const { return keep_; }
    Index message_dim() const { return msg_; }
    const VectorXc& psi(std::size_t x) const { return psi_[x]; }
    const MatrixXc& povm(std::size_t y, std::size_t z) const { return povm_[y][z]; }

    /// |phi_x> with A = X (x) Keep and B = Message.
    BipartitePureState phi(std::size_t x) const;
    /// Message marginal of |psi_x>.
    DensityMatrix message_state(std::size_t x) const;

    /// Pr[z | y] for Bob's decoding applied to a message state.
    std::vector<double> outcome_law(std::size_t y, const MatrixXc& message) const;
    /// Pr[(x, y, z) not in f] when the message register is in `message`.
    double error_on(const Relation& f, std::size_t x, std::size_t y, const MatrixXc& message) const;

  private:
    Index keep_ = 1, msg_ = 1;
    std::vector<VectorXc> psi_;
    std::vector<std::vector<MatrixXc>> povm_;
};

/// sum_x sqrt(mu(x)) |phi_x>.
BipartitePureState average_state(const QuantumOneWayProtocol& p, const Distribution& mu_x);

/// Exact distributional error of the uncompressed protocol.
double exact_error(const QuantumOneWayProtocol& p, const Relation& f, const InputDistribution& mu);

/// Holevo information I(X : Message) of the ensemble under mu_x.
double message_information(const QuantumOneWayProtocol& p, const Distribution& mu_x);

// ---------------------------------------------------------------------------
// Correctors.

/// Where the input register sits inside the corrected side.
enum class InputSlot { First, Last };

struct CorrectorAudit {
    double success_deviation = 0;  ///< max_x |Tr M_x(sigma) - alpha|
    double leakage = 0;            ///< max_x weight of M_x(sigma) outside |x><x|
    double average_distance = 0;   ///< E_mu || sigma_x - M_x(sigma) / alpha ||_1
    std::vector<double> distance;  ///< per x
    bool passes(double delta) const {
        return success_deviation <= 1e-9 && leakage == 0.0 && average_distance <= delta + 1e-12;
    }
};

/// Family {M_x} of Alice-side operations (side A of the ensemble states)
/// with common success probability alpha. For x in the good set M_x is one
/// Kraus operator sqrt(alpha / k_x) U_x N_x, with N_x the exact steering
/// operator toward the B-marginal of |phi_x> and U_x the Uhlmann unitary;
/// other x get the channel that measures the input register and resets it
/// to |x>, scaled by alpha.
struct Corrector {
    std::size_t nx = 0;
    Index dim_a = 0, dim_b = 0, input_dim = 0;
    InputSlot slot = InputSlot::First;
    double delta = 0;
    double information = 0;   ///< Holevo information of the B-marginals
    double threshold = 0;     ///< 4 * information / delta
    double alpha = 0;
    std::vector<bool> good;
    std::vector<double> weight;      ///< k_x (exact steering weight)
    std::vector<double> divergence;  ///< S(rho_x || rho)
    std::vector<std::vector<MatrixXc>> kraus;  ///< per x, on side A
    CorrectorAudit audit;

    /// Unnormalized post-success branches of M_x applied to the side-A
    /// operand of a bipartite matrix Psi (rows = side A).
    std::vector<MatrixXc> apply(std::size_t x, const MatrixXc& psi) const;
};

/// Builds and audits a corrector for the ensemble {|phi_x>} (all sharing
/// the same cut) against |phi> = sum_x sqrt(mu(x)) |phi_x>. The input
/// register of dimension |X| sits first or last within side A.
Corrector build_corrector(const std::vector<BipartitePureState>& ensemble, const Distribution& mu, double delta,
                          InputSlot slot = InputSlot::First);

// ---------------------------------------------------------------------------
// One-message compression.

struct OneWayCompression {
    double delta = 0;
    Corrector corrector;
    std::uint64_t copies = 0;  ///< ceil(alpha^-1 log2(2/delta))
    int beta = 0;              ///< ceil(log2 copies)
    double block_success = 0;  ///< 1 - (1 - alpha)^copies
    double exact_error = 0;    ///< uncompressed protocol
    std::vector<double> post_error;  ///< [x * ny + y], error after a successful correction
    double predicted_error = 0;      ///< exact error of the compressed protocol
};

/// Alice applies M_x to shared copies of |phi> in turn and sends the index
/// of the first success (beta bits); Bob decodes that copy unchanged.
OneWayCompression compress_one_way(const QuantumOneWayProtocol& p, const Relation& f, const InputDistribution& mu,
                                   double delta);

/// Monte Carlo of the compressed protocol. Each copy succeeds with
/// probability alpha independently, and the decoded copy's error is the
/// exact post-correction error, so trials are drawn from the exact law.
Evaluation evaluate_compressed(const OneWayCompression& c, const QuantumOneWayProtocol& p, const Relation& f,
                               const InputDistribution& mu, std::size_t trials, std::uint64_t seed, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Alternating protocols.

/// Registers X (x) A (x) C (x) B (x) Y, row-major in that order. Alice's
/// input X and Bob's input Y are never modified. Round r = 0, 2, ... is
/// Alice's: U_{r,x} on A (x) C. Round r = 1, 3, ... is Bob's: U_{r,y} on
/// C (x) B. The message register C starts with Alice and changes hands
/// after every round. The round count is odd, so Bob ends up holding C and
/// finishes with the POVM {E_{y,z}} on C (x) B.
class QuantumTwoWayProtocol {
  public:
    QuantumTwoWayProtocol() = default;
    QuantumTwoWayProtocol(std::size_t nx, std::size_t ny, Index da, Index dc, Index db,
                          std::vector<std::vector<MatrixXc>> unitaries, std::vector<std::vector<MatrixXc>> povm);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t nz() const { return povm_.front().size(); }
    std::size_t rounds() const { return unitaries_.size(); }
    Index da() const { return da_; }
    Index dc() const { return dc_; }
    Index db() const { return db_; }
    Index work_dim() const { return da_ * dc_ * db_; }
    Index full_dim() const { return Index(nx_) * work_dim() * Index(ny_); }
    const MatrixXc& unitary(std::size_t r, std::size_t input) const { return unitaries_[r][input]; }

    /// State of A (x) C (x) B after rounds [from, to) starting from psi.
    VectorXc evolve(const VectorXc& psi, std::size_t x, std::size_t y, std::size_t from, std::size_t to) const;
    /// State of A (x) C (x) B after the first `r` rounds from |0>.
    VectorXc run(std::size_t x, std::size_t y, std::size_t r) const;
    /// Unnormalized weight of wrong answers when Bob (input y) measures the
    /// final work state w, judged against the true inputs (fx, fy).
    double wrong_weight(const Relation& f, std::size_t fx, std::size_t fy, std::size_t y, const VectorXc& w) const;

  private:
    std::size_t nx_ = 0, ny_ = 0;
    Index da_ = 1, dc_ = 1, db_ = 1;
    std::vector<std::vector<MatrixXc>> unitaries_;
    std::vector<std::vector<MatrixXc>> povm_;
};

/// Exact distributional error.
double exact_error(const QuantumTwoWayProtocol& p, const Relation& f, const InputDistribution& mu);

struct QuantumPrivacyLoss {
    double k_a = 0;  ///< I(X : Bob's registers), Bob's input in |mu_Y>
    double k_b = 0;  ///< I(Y : Alice's registers), Alice's input in |mu_X>
};

/// Privacy losses after `rounds` rounds; mu must be a product.
QuantumPrivacyLoss quantum_privacy_loss(const QuantumTwoWayProtocol& p, const InputDistribution& mu, std::size_t rounds);

/// sigma_x (Bob input in |mu_Y>), as a state on X A C B Y.
VectorXc alice_conditioned_state(const QuantumTwoWayProtocol& p, const Distribution& mu_y, std::size_t x, std::size_t rounds);
/// sigma_y (Alice input in |mu_X>).
VectorXc bob_conditioned_state(const QuantumTwoWayProtocol& p, const Distribution& mu_x, std::size_t y, std::size_t rounds);

// ---------------------------------------------------------------------------
// Two-message compression of the first t' rounds.

struct MultiroundCompression {
    std::size_t t_prime = 1;
    double delta = 0, delta_a = 0, delta_b = 0;
    QuantumPrivacyLoss privacy;
    Corrector alice, bob;  ///< cuts (X A | C B Y) and (C B Y | X A)
    double alpha = 0, beta = 0;
    double r = 0;                ///< E_mu r_xy
    std::vector<double> r_xy;    ///< [x * ny + y], both correctors succeed
    std::vector<double> post_error;  ///< error after resuming from the corrected copy
    double claim_ratio = 0;          ///< r / (alpha beta)
    double tail_mass = 0;            ///< exact Pr_mu[|r_xy / r - 1| >= 2 sqrt(delta_b)]
    std::uint64_t copies = 0;        ///< K = ceil((10 / r) log2(1 / delta))
    std::uint64_t set_size = 0;      ///< floor(2 alpha K)
    std::size_t alice_bits = 0;      ///< ceil(log2 sum_{j <= 2 alpha K} C(K, j))
    std::size_t bob_bits = 0;        ///< ceil(log2(2 alpha K))
    double exact_error = 0;          ///< original protocol
};

/// Replaces rounds 1..t' (t' odd) by corrections of shared copies of sigma:
/// Alice announces her successful copies (aborting when there are more
/// than 2 alpha K), Bob answers with the first copy where he also succeeds,
/// and the remaining rounds run on that copy.
MultiroundCompression compress_multiround_quantum(const QuantumTwoWayProtocol& p, const Relation& f,
                                                  const InputDistribution& mu, std::size_t t_prime, double delta);

struct MultiroundEvaluation {
    Evaluation run;
    double tail_fraction = 0;  ///< sampled Pr[|r_xy / r - 1| >= 2 sqrt(delta_b)]
    double tail_sigma = 0;
};

/// Monte Carlo of the compressed protocol drawn from its exact law:
/// |S_hat| ~ Binomial(K, alpha), Bob succeeds on each announced copy with
/// probability r_xy / alpha, and the resumed copy errs with post_error.
MultiroundEvaluation evaluate_multiround(const MultiroundCompression& c, const QuantumTwoWayProtocol& p, const Relation& f,
                                         const InputDistribution& mu, std::size_t trials, std::uint64_t seed,
                                         unsigned threads = 1);

// ---------------------------------------------------------------------------
// Demos and generators.

/// Index function on n-bit databases: Alice sends the first m bits as a
/// basis state; Bob reads bit i when i < m and flips a fair coin otherwise.
QuantumOneWayProtocol index_one_way_protocol(int n, int m);

/// Clean inner-product protocol on n bits: C ^= x, B ^= <C, y>, C ^= x.
QuantumTwoWayProtocol inner_product_protocol(int n);
Relation inner_product_relation(int n);

struct IndexTradeoff {
    double k_a = 0, k_b = 0;
    double error = 0;
    std::size_t alice_bits = 0, bob_bits = 0;
};

/// Exact privacy losses and error of the classical index trade-off protocol
/// under the uniform distribution.
IndexTradeoff index_tradeoff_demo(int n, int b);

/// Random one-way ensemble with Haar-random |psi_x> and, for each y, a
/// projective measurement in a Haar-random basis grouped into nz outcomes.
QuantumOneWayProtocol random_one_way_protocol(std::size_t nx, std::size_t ny, std::size_t nz, Index keep_dim,
                                              Index message_dim, Rng& rng);

/// Random alternating protocol with Haar-random per-input unitaries and a
/// random grouped projective measurement at the end.
QuantumTwoWayProtocol random_two_way_protocol(std::size_t nx, std::size_t ny, std::size_t nz, Index da, Index dc,
                                              Index db, std::size_t rounds, Rng& rng);

}  // namespace commlab
