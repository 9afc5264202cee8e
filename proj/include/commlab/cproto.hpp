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

// Classical private-coin protocols: trees of per-round message kernels,
// transcript laws, privacy loss, rejection-sampling compression to a
// one-way protocol, and an exhaustive one-way optimum for tiny relations.

#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "commlab/cinfo.hpp"
#include "commlab/rng.hpp"

namespace commlab {

/// f subset of X x Y x Z as a dense membership table; every (x, y) must
/// admit at least one z.
class Relation {
  public:
    Relation() = default;
    Relation(std::size_t nx, std::size_t ny, std::size_t nz, std::vector<std::uint8_t> table);

    static Relation from_predicate(std::size_t nx, std::size_t ny, std::size_t nz,
                                   const std::function<bool(std::size_t, std::size_t, std::size_t)>& f);
    /// z must equal g(x, y).
    static Relation from_function(std::size_t nx, std::size_t ny, std::size_t nz,
                                  const std::function<std::size_t(std::size_t, std::size_t)>& g);
    /// Equality on n-bit strings: z = [x == y].
    static Relation equality(int bits);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t nz() const { return nz_; }
    bool ok(std::size_t x, std::size_t y, std::size_t z) const { return table_[(x * ny_ + y) * nz_ + z] != 0; }

    /// m independent copies; an answer is correct iff every coordinate is.
    /// Tuples are indexed with the first coordinate least significant.
    Relation direct_sum(int m) const;

  private:
    std::size_t nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<std::uint8_t> table_;
};

enum class Speaker { Alice, Bob };

/// Row-major sparse kernel: rows are transcript prefixes, columns are the
/// symbols of the current round.
using Kernel = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Round {
    std::size_t alphabet = 1;
    std::vector<Kernel> kernel;  ///< indexed by the speaker's input
};

/// Alternating private-coin protocol. Alice speaks in rounds 1, 3, 5, ...
/// (index 0, 2, ... here), Bob in the others, and Bob outputs
/// z = output(y, transcript). Transcripts are mixed-radix integers with the
/// first round most significant.
class ClassicalProtocolTree {
  public:
    ClassicalProtocolTree() = default;
    ClassicalProtocolTree(std::size_t nx, std::size_t ny, std::size_t nz, std::vector<Round> rounds,
                          std::vector<std::vector<std::uint32_t>> output);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t nz() const { return nz_; }
    std::size_t rounds() const { return rounds_.size(); }
    const Round& round(std::size_t r) const { return rounds_[r]; }
    static Speaker speaker(std::size_t r) { return r % 2 == 0 ? Speaker::Alice : Speaker::Bob; }

    std::size_t transcripts() const { return total_; }
    /// Index of the length-r prefix of transcript s.
    std::size_t prefix(std::size_t s, std::size_t r) const { return s / suffix_[r]; }
    /// Symbol sent in round r of transcript s.
    std::size_t symbol(std::size_t s, std::size_t r) const { return (s / suffix_[r + 1]) % rounds_[r].alphabet; }

    std::uint32_t output(std::size_t y, std::size_t s) const { return output_[y][s]; }

    /// p^{x,y}(s, r) for one round.
    double round_probability(std::size_t x, std::size_t y, std::size_t s, std::size_t r) const;
    /// p^{x,y}(s) as the product over rounds.
    double path_probability(std::size_t x, std::size_t y, std::size_t s) const;
    /// Product over Alice's (resp. Bob's) rounds only.
    double alice_factor(std::size_t x, std::size_t s) const;
    double bob_factor(std::size_t y, std::size_t s) const;

    /// Calls fn(s, p) for every transcript with p^{x,y}(s) > 0.
    void for_each_path(std::size_t x, std::size_t y, const std::function<void(std::size_t, double)>& fn) const;

    /// Plain-communication bits: sum of ceil(log2 alphabet) over rounds.
    std::size_t bits_per_run() const;

    /// Samples one transcript.
    std::size_t sample(std::size_t x, std::size_t y, Rng& rng) const;

  private:
    std::size_t nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<Round> rounds_;
    std::vector<std::vector<std::uint32_t>> output_;
    std::vector<std::size_t> suffix_;  // suffix_[r] = product of alphabets r..t-1
    std::size_t total_ = 1;
};

/// Input law mu on X x Y.
using InputDistribution = JointDistribution;

/// Throws PreconditionError unless mu is a product within 1e-12.
void require_product(const InputDistribution& mu, const char* what);

/// Dense transcript law P_{x,y}; throws BudgetExceeded above 2^20 transcripts.
Distribution transcript_distribution(const ClassicalProtocolTree& tree, std::size_t x, std::size_t y);

struct TranscriptAverages {
    std::vector<std::vector<double>> p_x;  ///< P_x = E_{y ~ mu_Y} P_{x,y}
    std::vector<std::vector<double>> p_y;  ///< P_y = E_{x ~ mu_X} P_{x,y}
    std::vector<double> p_bar;             ///< E_mu P_{x,y}
};

/// Direct double expectation over the joint law; dense, so the
/// (|X| + |Y|) * transcripts table must fit a 2^24 budget.
TranscriptAverages average_transcripts(const ClassicalProtocolTree& tree, const InputDistribution& mu);

/// max_s |p^x(s) p^y(s) - p(s) p^{x,y}(s)| for one input pair.
double product_identity_check(const ClassicalProtocolTree& tree, const InputDistribution& mu, const TranscriptAverages& avg,
                              std::size_t x, std::size_t y);
double product_identity_check(const ClassicalProtocolTree& tree, const InputDistribution& mu, std::size_t x, std::size_t y);

struct PrivacyLoss {
    double k_a = 0;  ///< I(X:M)
    double k_b = 0;  ///< I(Y:M)
};

/// Exact (I(X:M), I(Y:M)) for product mu. Streams over x so large input
/// alphabets with few transcripts stay cheap.
PrivacyLoss privacy_loss_classical(const ClassicalProtocolTree& tree, const InputDistribution& mu);

/// Entropy of the transcript M under mu.
double transcript_entropy(const ClassicalProtocolTree& tree, const InputDistribution& mu);

/// Exact distributional error sum mu(x,y) Pr[(x, y, z) not in f].
double exact_error(const ClassicalProtocolTree& tree, const Relation& f, const InputDistribution& mu);

/// Per-input error Pr[(x, y, z) not in f].
double input_error(const ClassicalProtocolTree& tree, const Relation& f, std::size_t x, std::size_t y);

/// Output map that, for each (y, s), picks the z most likely to be correct
/// given the posterior over x.
std::vector<std::vector<std::uint32_t>> bayes_output(const ClassicalProtocolTree& tree, const Relation& f,
                                                     const InputDistribution& mu);

// ---------------------------------------------------------------------------
// Compression to one message.

/// Parameters and sets of the one-way rejection-sampling simulation.
///
/// Acceptance probabilities are p^x(s) / (p(s) T_A(x)) for Alice and
/// p^y(s) / (p(s) T_B(y)) for Bob with T_A(x) = max over Good^x of
/// p^x/p (resp. for Bob). These never exceed the worst-case normalizers
/// 2^((k+1)/delta^2), which are kept (as log2) for reporting; at any useful
/// delta those are far beyond anything that can be simulated.
struct CompressedOneWay {
    double delta_tilde = 0;
    double delta = 0;  ///< delta_tilde / 5
    double k_a = 0, k_b = 0;
    double log2_threshold_a = 0;  ///< (k_a + 1) / delta^2
    double log2_threshold_b = 0;  ///< (k_b + 1) / delta^2
    double log2_worst_case_rows = 0;   ///< log2 of ln(1/delta)/(1-delta) * 2^log2_threshold_b

    std::vector<bool> good_x, good_y;  ///< Good_X, Good_Y
    std::vector<std::vector<bool>> good_sx, good_sy;  ///< Good^x, Good^y over transcripts
    std::vector<double> t_a, t_b;  ///< per-input acceptance normalizers
    std::vector<double> accept_a;  ///< exact per-column acceptance Pr_{P_x}(Good^x)/T_A(x)
    std::uint64_t rows = 0;        ///< K = ceil(ln(1/delta)/(1-delta) * max_y T_B(y))

    TranscriptAverages averages;
    std::vector<std::size_t> support;  ///< transcripts with p(s) > 0
    std::vector<double> cdf;           ///< cumulative p over `support`

    double expected_bits = 0;  ///< c, expected bits of the untruncated protocol
    double cut = 0;            ///< c / delta
    std::uint64_t column_cap = std::uint64_t(1) << 24;
};

struct CompressionOptions {
    std::size_t prepass_trials = 10000;
    std::uint64_t prepass_seed = 0x5eed;
    unsigned threads = 1;
};

/// Builds the simulation for tree on product mu. Requires delta_tilde in
/// (0, 1/2 - eps).
CompressedOneWay compress_multiround_classical(const ClassicalProtocolTree& tree, const Relation& f,
                                               const InputDistribution& mu, double delta_tilde,
                                               const CompressionOptions& options = {});

struct OneWayRun {
    bool alice_abort = false;  ///< x not in Good_X
    bool truncated = false;    ///< message longer than c/delta
    bool bob_abort = false;    ///< y not in Good_Y or all K rows rejected
    std::size_t bits = 0;      ///< bits sent by Alice (one flag bit + codewords)
    std::size_t alice_columns = 0;  ///< total columns Alice inspected
    std::optional<std::size_t> transcript;
    std::optional<std::uint32_t> z;
    bool aborted() const { return alice_abort || truncated || bob_abort; }
};

/// One run with shared randomness keyed by `shared_key` and private coins
/// from the two generators. `truncate` selects the final protocol (with the
/// c/delta cut) instead of the intermediate one.
OneWayRun run_compressed(const CompressedOneWay& c, const ClassicalProtocolTree& tree, std::size_t x, std::size_t y,
                         std::uint64_t shared_key, Rng& alice, Rng& bob, bool truncate = true);

/// Law of Bob's accepted transcript for a good pair, conditioned on no abort:
/// p^{x,y}(s) / Pr(Good^x and Good^y) on the intersection, 0 elsewhere.
std::vector<double> accepted_transcript_law(const CompressedOneWay& c, const ClassicalProtocolTree& tree, std::size_t x,
                                            std::size_t y);

// ---------------------------------------------------------------------------
// Evaluation.

struct TrialRecord {
    std::uint32_t x = 0, y = 0;
    std::size_t bits = 0;
    bool correct = false;
    bool aborted = false;
    std::int64_t transcript = -1;
};

struct Evaluation {
    std::size_t trials = 0;
    double error = 0;         ///< Monte Carlo error
    double error_sigma = 0;   ///< sqrt(error (1 - error) / trials)
    double mean_bits = 0;
    double abort_rate = 0;
    std::optional<double> exact_error;  ///< enumerative, when available
    std::vector<std::size_t> bits_histogram;  ///< index = bits
    std::vector<TrialRecord> records;
};

/// Inverse-CDF sampler for input pairs drawn from mu.
class InputSampler {
  public:
    explicit InputSampler(const InputDistribution& mu);
    /// (x, y) for a uniform u in [0, 1).
    std::pair<std::size_t, std::size_t> operator()(double u) const;

  private:
    std::size_t ny_ = 1;
    std::vector<double> cdf_;
};

/// Aggregates per-trial records in order.
Evaluation summarize_trials(std::vector<TrialRecord> records);

/// Seeded Monte Carlo of the original tree; also fills the exact error.
Evaluation evaluate_protocol(const ClassicalProtocolTree& tree, const Relation& f, const InputDistribution& mu,
                             std::size_t trials, std::uint64_t seed, unsigned threads = 1);

/// Seeded Monte Carlo of the compressed protocol; trial i uses seeds
/// derived from (seed, i) only, so results do not depend on `threads`.
Evaluation evaluate_protocol(const CompressedOneWay& c, const ClassicalProtocolTree& tree, const Relation& f,
                             const InputDistribution& mu, std::size_t trials, std::uint64_t seed, unsigned threads = 1,
                             bool truncate = true);

// ---------------------------------------------------------------------------
// Constructions.

/// Index trade-off protocol: Alice holds a database of `database_bits` bits,
/// Bob an index into it. Round 1 is a constant Alice message, round 2 is
/// Bob's first `prefix_bits` index bits, round 3 is Alice's restriction of
/// the database to the addressed block. Output is the addressed bit.
/// database_bits must be a power of two.
ClassicalProtocolTree index_tradeoff_tree(int database_bits, int prefix_bits);
Relation index_relation(int database_bits);

/// Random tree with the given per-round alphabets; about `sparsity` of the
/// kernel entries are zeroed (rows keep at least one symbol).
ClassicalProtocolTree random_protocol_tree(std::size_t nx, std::size_t ny, std::size_t nz,
                                           const std::vector<std::size_t>& alphabets, Rng& rng, double sparsity = 0.3);

/// Copy of tree with a new output map.
ClassicalProtocolTree with_output(const ClassicalProtocolTree& tree, std::vector<std::vector<std::uint32_t>> output);

// ---------------------------------------------------------------------------
// Exhaustive one-way optimum.

struct OneWayOptimum {
    std::size_t messages = 1;  ///< fewest messages reaching error <= epsilon
    int bits = 0;              ///< ceil(log2 messages)
    double error = 0;          ///< optimal error with that many messages
    std::vector<std::uint32_t> message_of;  ///< an optimal Alice map
};

/// Exact optimum over deterministic one-way protocols (Alice sends m(x),
/// Bob answers z(y, m)) by subset dynamic programming; |X| <= 16.
OneWayOptimum brute_force_one_way(const Relation& f, const InputDistribution& mu, double epsilon);

/// Product law mu^{(x) m} in the tuple order of Relation::direct_sum.
InputDistribution direct_sum_distribution(const InputDistribution& mu, int m);

}  // namespace commlab
