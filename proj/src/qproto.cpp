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

#include "commlab/qproto.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <string>

#include "commlab/errors.hpp"
#include "commlab/parallel.hpp"
#include "commlab/random.hpp"

namespace commlab {

namespace {

constexpr double kOpTol = 1e-10;

VectorXc flatten(const MatrixXc& m) {
    VectorXc v(m.size());
    for (Index a = 0; a < m.rows(); ++a)
        for (Index b = 0; b < m.cols(); ++b) v(a * m.cols() + b) = m(a, b);
    return v;
}

MatrixXc unflatten(const VectorXc& v, Index rows, Index cols) {
    MatrixXc m(rows, cols);
    for (Index a = 0; a < rows; ++a)
        for (Index b = 0; b < cols; ++b) m(a, b) = v(a * cols + b);
    return m;
}

void check_povm(const std::vector<MatrixXc>& ops, Index dim, const std::string& where) {
    if (ops.empty()) throw DimensionMismatch(where + ": POVM has no outcomes");
    MatrixXc sum = MatrixXc::Zero(dim, dim);
    for (const auto& e : ops) {
        if (e.rows() != dim || e.cols() != dim) throw DimensionMismatch(where + ": POVM element has the wrong dimension");
        if (max_entry<double>(MatrixXc(e - e.adjoint())) > kOpTol) throw InvalidState(where + ": POVM element is not Hermitian");
        if (hermitian_eigenvalues<double>(e).minCoeff() < -kOpTol) throw InvalidState(where + ": POVM element is not PSD");
        sum += e;
    }
    if (max_entry<double>(MatrixXc(sum - MatrixXc::Identity(dim, dim))) > kOpTol)
        throw InvalidState(where + ": POVM elements do not sum to the identity");
}

/// S(sum w rho) - sum w S(rho).
double holevo(const std::vector<double>& w, const std::vector<MatrixXc>& states) {
    MatrixXc avg = MatrixXc::Zero(states.front().rows(), states.front().cols());
    double inner = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (w[i] <= 0) continue;
        avg += w[i] * states[i];
        inner += w[i] * operator_entropy<double>(states[i]);
    }
    return std::max(0.0, operator_entropy<double>(avg) - inner);
}

/// Rows of side A that carry input value x.
bool in_block(Index row, std::size_t x, Index input_dim, Index rest, InputSlot slot) {
    return slot == InputSlot::First ? std::size_t(row / rest) == x : std::size_t(row % input_dim) == x;
}

/// |x><x'| on the input register, identity elsewhere.
MatrixXc input_shift(std::size_t x, std::size_t from, Index input_dim, Index rest, InputSlot slot) {
    MatrixXc ket = MatrixXc::Zero(input_dim, input_dim);
    ket(Index(x), Index(from)) = 1;
    MatrixXc id = MatrixXc::Identity(rest, rest);
    return slot == InputSlot::First ? kron<double>(ket, id) : kron<double>(id, ket);
}

MatrixXc grouped_projective(Index dim, std::size_t nz, Rng& rng, std::vector<MatrixXc>& out) {
    MatrixXc u = haar_unitary(dim, rng);
    out.assign(nz, MatrixXc::Zero(dim, dim));
    for (Index j = 0; j < dim; ++j) out[std::size_t(j) % nz] += u.col(j) * u.col(j).adjoint();
    return u;
}

double log2_binomial_prefix(std::uint64_t k, std::uint64_t m) {
    // log2 sum_{j <= m} C(k, j) by log-sum-exp over lgamma terms
    std::vector<double> terms;
    for (std::uint64_t j = 0; j <= std::min(m, k); ++j)
        terms.push_back((std::lgamma(double(k) + 1) - std::lgamma(double(j) + 1) - std::lgamma(double(k - j) + 1)) / std::log(2.0));
    double top = *std::max_element(terms.begin(), terms.end());
    double acc = 0;
    for (double t : terms) acc += std::exp2(t - top);
    return top + std::log2(acc);
}

}  // namespace

std::size_t dimension_budget() {
    if (const char* env = std::getenv("COMMLAB_DIM_BUDGET")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return std::size_t(v);
    }
    return std::size_t(1) << 14;
}

void check_dimension(std::size_t dim, const char* what) {
    if (dim > dimension_budget())
        throw BudgetExceeded(std::string(what) + " needs dimension " + std::to_string(dim) + ", above the budget of " +
                             std::to_string(dimension_budget()));
}

// ---------------------------------------------------------------------------
// One-way protocols

QuantumOneWayProtocol::QuantumOneWayProtocol(Index keep_dim, Index message_dim, std::vector<VectorXc> psi,
                                             std::vector<std::vector<MatrixXc>> povm)
    : keep_(keep_dim), msg_(message_dim), psi_(std::move(psi)), povm_(std::move(povm)) {
    if (keep_ < 1 || msg_ < 1) throw DimensionMismatch("register dimensions must be positive");
    if (psi_.empty()) throw DimensionMismatch("protocol needs at least one input x");
    if (povm_.empty()) throw DimensionMismatch("protocol needs at least one input y");
    check_dimension(psi_.size() * std::size_t(keep_ * msg_), "one-way protocol");
    for (std::size_t x = 0; x < psi_.size(); ++x) {
        if (psi_[x].size() != keep_ * msg_) throw DimensionMismatch("state for x=" + std::to_string(x) + " has the wrong length");
        if (std::abs(psi_[x].norm() - 1) > kOpTol) throw InvalidState("state for x=" + std::to_string(x) + " is not normalized");
        psi_[x].normalize();
    }
    for (std::size_t y = 0; y < povm_.size(); ++y) {
        if (povm_[y].size() != povm_.front().size()) throw DimensionMismatch("every y needs the same outcome set");
        check_povm(povm_[y], msg_, "decoding for y=" + std::to_string(y));
    }
}

BipartitePureState QuantumOneWayProtocol::phi(std::size_t x) const {
    const Index block = keep_ * msg_;
    VectorXc v = VectorXc::Zero(Index(nx()) * block);
    v.segment(Index(x) * block, block) = psi_[x];
    return BipartitePureState(Index(nx()) * keep_, msg_, std::move(v));
}

DensityMatrix QuantumOneWayProtocol::message_state(std::size_t x) const {
    MatrixXc m = unflatten(psi_[x], keep_, msg_);
    return DensityMatrix(MatrixXc(m.transpose() * m.conjugate()));
}

std::vector<double> QuantumOneWayProtocol::outcome_law(std::size_t y, const MatrixXc& message) const {
    std::vector<double> out(nz());
    for (std::size_t z = 0; z < nz(); ++z) out[z] = std::max(0.0, (povm_[y][z] * message).trace().real());
    return out;
}

double QuantumOneWayProtocol::error_on(const Relation& f, std::size_t x, std::size_t y, const MatrixXc& message) const {
    auto law = outcome_law(y, message);
    double err = 0;
    for (std::size_t z = 0; z < law.size(); ++z)
        if (!f.ok(x, y, z)) err += law[z];
    return std::min(1.0, err);
}

BipartitePureState average_state(const QuantumOneWayProtocol& p, const Distribution& mu_x) {
    if (mu_x.size() != p.nx()) throw DimensionMismatch("input distribution does not match the protocol");
    const Index block = p.keep_dim() * p.message_dim();
    VectorXc v = VectorXc::Zero(Index(p.nx()) * block);
    for (std::size_t x = 0; x < p.nx(); ++x) v.segment(Index(x) * block, block) = std::sqrt(mu_x[x]) * p.psi(x);
    return BipartitePureState::normalized(Index(p.nx()) * p.keep_dim(), p.message_dim(), v);
}

static void check_relation(const QuantumOneWayProtocol& p, const Relation& f, const InputDistribution& mu) {
    if (f.nx() != p.nx() || f.ny() != p.ny() || f.nz() != p.nz()) throw DimensionMismatch("relation does not match the protocol");
    if (mu.nx() != p.nx() || mu.ny() != p.ny()) throw DimensionMismatch("input distribution does not match the protocol");
}

double exact_error(const QuantumOneWayProtocol& p, const Relation& f, const InputDistribution& mu) {
    check_relation(p, f, mu);
    double err = 0;
    for (std::size_t x = 0; x < p.nx(); ++x) {
        MatrixXc rho = p.message_state(x).matrix();
        for (std::size_t y = 0; y < p.ny(); ++y)
            if (mu(x, y) > 0) err += mu(x, y) * p.error_on(f, x, y, rho);
    }
    return err;
}

double message_information(const QuantumOneWayProtocol& p, const Distribution& mu_x) {
    std::vector<MatrixXc> states;
    for (std::size_t x = 0; x < p.nx(); ++x) states.push_back(p.message_state(x).matrix());
    return holevo(mu_x.probs(), states);
}

// ---------------------------------------------------------------------------
// Correctors

std::vector<MatrixXc> Corrector::apply(std::size_t x, const MatrixXc& psi) const {
    std::vector<MatrixXc> out;
    out.reserve(kraus[x].size());
    for (const auto& k : kraus[x]) out.push_back(k * psi);
    return out;
}

Corrector build_corrector(const std::vector<BipartitePureState>& ensemble, const Distribution& mu, double delta,
                          InputSlot slot) {
    if (ensemble.empty()) throw DimensionMismatch("empty ensemble");
    if (mu.size() != ensemble.size()) throw DimensionMismatch("one probability per ensemble member");
    if (!(delta > 0 && delta < 1)) throw PreconditionError("corrector residual must lie in (0, 1)");
    Corrector c;
    c.nx = ensemble.size();
    c.dim_a = ensemble.front().dim_a();
    c.dim_b = ensemble.front().dim_b();
    c.input_dim = Index(c.nx);
    c.slot = slot;
    c.delta = delta;
    if (c.dim_a % c.input_dim != 0) throw DimensionMismatch("side A does not contain an input register of size |X|");
    const Index rest = c.dim_a / c.input_dim;

    MatrixXc avg = MatrixXc::Zero(c.dim_a, c.dim_b);
    std::vector<MatrixXc> mats;
    for (std::size_t x = 0; x < c.nx; ++x) {
        const auto& e = ensemble[x];
        if (e.dim_a() != c.dim_a || e.dim_b() != c.dim_b) throw DimensionMismatch("ensemble members have different cuts");
        MatrixXc m = e.matrix();
        double outside = 0;
        for (Index a = 0; a < c.dim_a; ++a)
            if (!in_block(a, x, c.input_dim, rest, slot)) outside += m.row(a).squaredNorm();
        if (outside > 1e-12) throw InvalidState("ensemble member " + std::to_string(x) + " does not hold |x> in its input register");
        avg += std::sqrt(mu[x]) * m;
        mats.push_back(std::move(m));
    }
    BipartitePureState phi = BipartitePureState::normalized(c.dim_a, c.dim_b, flatten(avg));
    DensityMatrix rho = partial_trace(phi, Side::B);

    std::vector<DensityMatrix> marg;
    c.divergence.assign(c.nx, 0.0);
    for (std::size_t x = 0; x < c.nx; ++x) {
        marg.push_back(partial_trace(ensemble[x], Side::B));
        if (mu[x] > 0) {
            c.divergence[x] = std::max(0.0, relative_entropy(marg[x], rho));
            c.information += mu[x] * c.divergence[x];
        }
    }
    c.threshold = 4 * c.information / delta;

    c.good.assign(c.nx, false);
    c.weight.assign(c.nx, 0.0);
    c.alpha = 1;
    for (std::size_t x = 0; x < c.nx; ++x) {
        if (mu[x] <= 0 || c.divergence[x] > c.threshold + 1e-12) continue;
        c.weight[x] = std::min(1.0, steering_weight(phi, marg[x]));
        c.good[x] = c.weight[x] > 0;
        if (c.good[x]) c.alpha = std::min(c.alpha, c.weight[x]);
    }
    if (c.alpha < 1e-12) throw PreconditionError("corrector success probability underflows 1e-12");

    c.kraus.assign(c.nx, {});
    for (std::size_t x = 0; x < c.nx; ++x) {
        if (c.good[x]) {
            KrausOp steer = steering_kraus(phi, marg[x], c.weight[x]);
            BipartitePureState landed = steer.post_state(phi);
            MatrixXc k = std::sqrt(c.alpha / c.weight[x]) * uhlmann_align(landed, ensemble[x]) * steer.matrix();
            // keep only the |x> block so the input register is exact
            for (Index a = 0; a < c.dim_a; ++a)
                if (!in_block(a, x, c.input_dim, rest, slot)) k.row(a).setZero();
            c.kraus[x].push_back(std::move(k));
        } else {
            for (std::size_t from = 0; from < c.nx; ++from)
                c.kraus[x].push_back(std::sqrt(c.alpha) * input_shift(x, from, c.input_dim, rest, slot));
        }
    }

    // audit against the definition
    MatrixXc psi = phi.matrix();
    c.audit.distance.assign(c.nx, 0.0);
    for (std::size_t x = 0; x < c.nx; ++x) {
        auto branches = c.apply(x, psi);
        double success = 0;
        std::vector<VectorXc> vecs{flatten(mats[x])};
        std::vector<double> w{1.0};
        for (const auto& b : branches) {
            success += b.squaredNorm();
            for (Index a = 0; a < c.dim_a; ++a)
                if (!in_block(a, x, c.input_dim, rest, slot)) c.audit.leakage = std::max(c.audit.leakage, b.row(a).squaredNorm());
            vecs.push_back(flatten(b));
            w.push_back(-1 / c.alpha);
        }
        c.audit.success_deviation = std::max(c.audit.success_deviation, std::abs(success - c.alpha));
        c.audit.distance[x] = mixture_trace_norm<double>(vecs, w);
        c.audit.average_distance += mu[x] * c.audit.distance[x];
    }
    return c;
}

// ---------------------------------------------------------------------------
// One-message compression

OneWayCompression compress_one_way(const QuantumOneWayProtocol& p, const Relation& f, const InputDistribution& mu,
                                   double delta) {
    check_relation(p, f, mu);
    Distribution mx = mu.marginal_x();
    std::vector<BipartitePureState> ensemble;
    for (std::size_t x = 0; x < p.nx(); ++x) ensemble.push_back(p.phi(x));
    OneWayCompression c;
    c.delta = delta;
    c.corrector = build_corrector(ensemble, mx, delta);
    const double alpha = c.corrector.alpha;
    c.copies = std::max<std::uint64_t>(1, std::uint64_t(std::ceil(std::log2(2 / delta) / alpha - 1e-12)));
    c.beta = c.copies <= 1 ? 0 : int(std::bit_width(c.copies - 1));
    c.block_success = 1 - std::pow(1 - alpha, double(c.copies));
    c.exact_error = exact_error(p, f, mu);

    MatrixXc psi = average_state(p, mx).matrix();
    c.post_error.assign(p.nx() * p.ny(), 1.0);
    for (std::size_t x = 0; x < p.nx(); ++x) {
        MatrixXc message = MatrixXc::Zero(p.message_dim(), p.message_dim());
        for (const auto& b : c.corrector.apply(x, psi)) message += b.transpose() * b.conjugate();
        message /= alpha;
        for (std::size_t y = 0; y < p.ny(); ++y) {
            c.post_error[x * p.ny() + y] = p.error_on(f, x, y, message);
            c.predicted_error += mu(x, y) * (c.block_success * c.post_error[x * p.ny() + y] + 1 - c.block_success);
        }
    }
    return c;
}

Evaluation evaluate_compressed(const OneWayCompression& c, const QuantumOneWayProtocol& p, const Relation& f,
                               const InputDistribution& mu, std::size_t trials, std::uint64_t seed, unsigned threads) {
    check_relation(p, f, mu);
    InputSampler inputs(mu);
    std::vector<TrialRecord> rec(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        Rng in(derive_seed(seed, {i, 0})), coins(derive_seed(seed, {i, 1}));
        auto [x, y] = inputs(in.uniform());
        TrialRecord& r = rec[i];
        r.x = std::uint32_t(x);
        r.y = std::uint32_t(y);
        r.bits = std::size_t(c.beta);
        std::uint64_t first = coins.geometric(c.corrector.alpha);
        if (first > c.copies) {
            r.aborted = true;
            return;
        }
        r.transcript = std::int64_t(first);
        r.correct = !coins.bernoulli(c.post_error[x * p.ny() + y]);
    });
    return summarize_trials(std::move(rec));
}

// ---------------------------------------------------------------------------
// Alternating protocols

QuantumTwoWayProtocol::QuantumTwoWayProtocol(std::size_t nx, std::size_t ny, Index da, Index dc, Index db,
                                             std::vector<std::vector<MatrixXc>> unitaries,
                                             std::vector<std::vector<MatrixXc>> povm)
    : nx_(nx), ny_(ny), da_(da), dc_(dc), db_(db), unitaries_(std::move(unitaries)), povm_(std::move(povm)) {
    if (nx == 0 || ny == 0 || da < 1 || dc < 1 || db < 1) throw DimensionMismatch("register dimensions must be positive");
    if (unitaries_.size() % 2 == 0) throw InvalidState("the round count must be odd so that Bob holds the last message");
    check_dimension(std::size_t(full_dim()), "two-way protocol");
    for (std::size_t r = 0; r < unitaries_.size(); ++r) {
        const bool alice = r % 2 == 0;
        const std::size_t inputs = alice ? nx : ny;
        const Index dim = alice ? da * dc : dc * db;
        const std::string where = "round " + std::to_string(r + 1);
        if (unitaries_[r].size() != inputs) throw DimensionMismatch(where + ": one unitary per input is required");
        for (const auto& u : unitaries_[r]) {
            if (u.rows() != dim || u.cols() != dim) throw DimensionMismatch(where + ": unitary has the wrong dimension");
            if (!is_unitary<double>(u, kOpTol)) throw InvalidState(where + ": operator is not unitary");
        }
    }
    if (povm_.size() != ny) throw DimensionMismatch("one final measurement per y is required");
    for (std::size_t y = 0; y < ny; ++y) {
        if (povm_[y].size() != povm_.front().size()) throw DimensionMismatch("every y needs the same outcome set");
        check_povm(povm_[y], dc * db, "final measurement for y=" + std::to_string(y));
    }
}

VectorXc QuantumTwoWayProtocol::evolve(const VectorXc& psi, std::size_t x, std::size_t y, std::size_t from,
                                       std::size_t to) const {
    const Dims dims{da_, dc_, db_};
    VectorXc v = psi;
    for (std::size_t r = from; r < to; ++r) {
        if (r % 2 == 0)
            v = apply_local<double>(v, dims, 0, 2, unitaries_[r][x]);
        else
            v = apply_local<double>(v, dims, 1, 2, unitaries_[r][y]);
    }
    return v;
}

VectorXc QuantumTwoWayProtocol::run(std::size_t x, std::size_t y, std::size_t r) const {
    VectorXc zero = VectorXc::Zero(work_dim());
    zero(0) = 1;
    return evolve(zero, x, y, 0, r);
}

double QuantumTwoWayProtocol::wrong_weight(const Relation& f, std::size_t fx, std::size_t fy, std::size_t y,
                                           const VectorXc& w) const {
    MatrixXc m = unflatten(w, da_, dc_ * db_);
    double err = 0;
    for (std::size_t z = 0; z < nz(); ++z)
        if (!f.ok(fx, fy, z)) err += (m.conjugate() * povm_[y][z] * m.transpose()).trace().real();
    return std::max(0.0, err);
}

static void check_relation(const QuantumTwoWayProtocol& p, const Relation& f, const InputDistribution& mu) {
    if (f.nx() != p.nx() || f.ny() != p.ny() || f.nz() != p.nz()) throw DimensionMismatch("relation does not match the protocol");
    if (mu.nx() != p.nx() || mu.ny() != p.ny()) throw DimensionMismatch("input distribution does not match the protocol");
}

double exact_error(const QuantumTwoWayProtocol& p, const Relation& f, const InputDistribution& mu) {
    check_relation(p, f, mu);
    double err = 0;
    for (std::size_t x = 0; x < p.nx(); ++x)
        for (std::size_t y = 0; y < p.ny(); ++y)
            if (mu(x, y) > 0) err += mu(x, y) * p.wrong_weight(f, x, y, y, p.run(x, y, p.rounds()));
    return err;
}

VectorXc alice_conditioned_state(const QuantumTwoWayProtocol& p, const Distribution& mu_y, std::size_t x, std::size_t rounds) {
    const Index w = p.work_dim(), ny = Index(p.ny());
    VectorXc v = VectorXc::Zero(p.full_dim());
    for (std::size_t y = 0; y < p.ny(); ++y) {
        if (mu_y[y] <= 0) continue;
        VectorXc s = p.run(x, y, rounds);
        for (Index k = 0; k < w; ++k) v((Index(x) * w + k) * ny + Index(y)) = std::sqrt(mu_y[y]) * s(k);
    }
    return v;
}

VectorXc bob_conditioned_state(const QuantumTwoWayProtocol& p, const Distribution& mu_x, std::size_t y, std::size_t rounds) {
    const Index w = p.work_dim(), ny = Index(p.ny());
    VectorXc v = VectorXc::Zero(p.full_dim());
    for (std::size_t x = 0; x < p.nx(); ++x) {
        if (mu_x[x] <= 0) continue;
        VectorXc s = p.run(x, y, rounds);
        for (Index k = 0; k < w; ++k) v((Index(x) * w + k) * ny + Index(y)) = std::sqrt(mu_x[x]) * s(k);
    }
    return v;
}

QuantumPrivacyLoss quantum_privacy_loss(const QuantumTwoWayProtocol& p, const InputDistribution& mu, std::size_t rounds) {
    if (mu.nx() != p.nx() || mu.ny() != p.ny()) throw DimensionMismatch("input distribution does not match the protocol");
    if (rounds > p.rounds()) throw PreconditionError("round index beyond the protocol");
    require_product(mu, "quantum privacy loss");
    Distribution mx = mu.marginal_x(), my = mu.marginal_y();
    const bool bob_has_c = rounds % 2 == 1;
    const Index w = p.work_dim();
    QuantumPrivacyLoss out;

    // Bob's view: C (when he holds it), B and Y; Alice's input is classical.
    {
        const Dims dims{p.da(), p.dc(), p.db(), Index(p.ny())};
        const std::vector<int> keep = bob_has_c ? std::vector<int>{1, 2, 3} : std::vector<int>{2, 3};
        std::vector<MatrixXc> states;
        for (std::size_t x = 0; x < p.nx(); ++x) {
            VectorXc full = alice_conditioned_state(p, my, x, rounds);
            states.push_back(reduce_pure<double>(full.segment(Index(x) * w * Index(p.ny()), w * Index(p.ny())), dims, keep));
        }
        out.k_a = holevo(mx.probs(), states);
    }
    // Alice's view: X, A and C (when she holds it).
    {
        const Dims dims{Index(p.nx()), p.da(), p.dc(), p.db()};
        const std::vector<int> keep = bob_has_c ? std::vector<int>{0, 1} : std::vector<int>{0, 1, 2};
        std::vector<MatrixXc> states;
        for (std::size_t y = 0; y < p.ny(); ++y) {
            VectorXc full = bob_conditioned_state(p, mx, y, rounds);
            VectorXc slice(Index(p.nx()) * w);
            for (Index i = 0; i < slice.size(); ++i) slice(i) = full(i * Index(p.ny()) + Index(y));
            states.push_back(reduce_pure<double>(slice, dims, keep));
        }
        out.k_b = holevo(my.probs(), states);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Two-message compression

MultiroundCompression compress_multiround_quantum(const QuantumTwoWayProtocol& p, const Relation& f,
                                                  const InputDistribution& mu, std::size_t t_prime, double delta) {
    check_relation(p, f, mu);
    require_product(mu, "multi-round quantum compression");
    if (t_prime % 2 == 0 || t_prime > p.rounds()) throw PreconditionError("t' must be odd and at most the round count");
    if (!(delta > 0 && delta < 1)) throw PreconditionError("delta must lie in (0, 1)");
    Distribution mx = mu.marginal_x(), my = mu.marginal_y();
    const Index nx = Index(p.nx()), ny = Index(p.ny());
    const Index rows = nx * p.da(), cols = p.dc() * p.db() * ny;

    MultiroundCompression c;
    c.t_prime = t_prime;
    c.delta = delta;
    c.delta_b = (delta / 10) * (delta / 10);
    c.privacy = quantum_privacy_loss(p, mu, t_prime);
    c.exact_error = exact_error(p, f, mu);

    std::vector<BipartitePureState> alice_states, bob_states;
    for (std::size_t x = 0; x < p.nx(); ++x)
        alice_states.push_back(BipartitePureState::normalized(rows, cols, alice_conditioned_state(p, my, x, t_prime)));
    for (std::size_t y = 0; y < p.ny(); ++y) {
        MatrixXc m = unflatten(bob_conditioned_state(p, mx, y, t_prime), rows, cols);
        bob_states.push_back(BipartitePureState::from_matrix(MatrixXc(m.transpose())));
    }
    c.bob = build_corrector(bob_states, my, c.delta_b, InputSlot::Last);
    c.beta = c.bob.alpha;
    c.delta_a = c.delta_b * c.beta / 2;
    c.alice = build_corrector(alice_states, mx, c.delta_a, InputSlot::First);
    c.alpha = c.alice.alpha;

    // sigma on (X A) x (C B Y)
    MatrixXc sigma = MatrixXc::Zero(rows, cols);
    for (std::size_t x = 0; x < p.nx(); ++x) sigma += std::sqrt(mx[x]) * alice_states[x].matrix();

    c.r_xy.assign(p.nx() * p.ny(), 0.0);
    c.post_error.assign(p.nx() * p.ny(), 1.0);
    const Index w = p.work_dim();
    for (std::size_t x = 0; x < p.nx(); ++x) {
        auto after_alice = c.alice.apply(x, sigma);
        for (std::size_t y = 0; y < p.ny(); ++y) {
            double r = 0, wrong = 0;
            for (const auto& a : after_alice)
                for (const auto& n : c.bob.kraus[y]) {
                    MatrixXc branch = a * n.transpose();
                    r += branch.squaredNorm();
                    VectorXc v = flatten(branch);
                    // resume every (x', y') block with the inputs its registers hold
                    for (Index xs = 0; xs < nx; ++xs)
                        for (Index ys = 0; ys < ny; ++ys) {
                            VectorXc blk(w);
                            for (Index k = 0; k < w; ++k) blk(k) = v((xs * w + k) * ny + ys);
                            if (blk.squaredNorm() == 0) continue;
                            VectorXc fin = p.evolve(blk, std::size_t(xs), std::size_t(ys), t_prime, p.rounds());
                            wrong += p.wrong_weight(f, x, y, std::size_t(ys), fin);
                        }
                }
            c.r_xy[x * p.ny() + y] = r;
            if (r > 0) c.post_error[x * p.ny() + y] = std::min(1.0, wrong / r);
            c.r += mu(x, y) * r;
        }
    }
    c.claim_ratio = c.r / (c.alpha * c.beta);
    const double cut = 2 * std::sqrt(c.delta_b);
    for (std::size_t x = 0; x < p.nx(); ++x)
        for (std::size_t y = 0; y < p.ny(); ++y)
            if (std::abs(c.r_xy[x * p.ny() + y] / c.r - 1) >= cut) c.tail_mass += mu(x, y);

    if (c.r < 1e-12) throw PreconditionError("joint success probability underflows 1e-12");
    c.copies = std::uint64_t(std::ceil(10 / c.r * std::log2(1 / delta)));
    c.set_size = std::uint64_t(std::floor(2 * c.alpha * double(c.copies)));
    c.alice_bits = std::size_t(std::ceil(log2_binomial_prefix(c.copies, c.set_size) - 1e-9));
    c.bob_bits = c.set_size <= 1 ? 0 : std::size_t(std::bit_width(c.set_size - 1));
    return c;
}

MultiroundEvaluation evaluate_multiround(const MultiroundCompression& c, const QuantumTwoWayProtocol& p, const Relation& f,
                                         const InputDistribution& mu, std::size_t trials, std::uint64_t seed,
                                         unsigned threads) {
    check_relation(p, f, mu);
    InputSampler inputs(mu);
    const double cut = 2 * std::sqrt(c.delta_b);
    std::vector<TrialRecord> rec(trials);
    std::vector<std::uint8_t> tail(trials, 0);
    parallel_for(trials, threads, [&](std::size_t i) {
        Rng in(derive_seed(seed, {i, 0})), coins(derive_seed(seed, {i, 1})), probe(derive_seed(seed, {i, 4}));
        auto [x, y] = inputs(in.uniform());
        TrialRecord& r = rec[i];
        r.x = std::uint32_t(x);
        r.y = std::uint32_t(y);
        r.bits = c.alice_bits + c.bob_bits;
        const double rxy = c.r_xy[x * p.ny() + y];
        std::uint64_t hits = coins.binomial(c.copies, c.alpha);
        if (hits == 0 || hits > c.set_size) {
            r.aborted = true;
        } else {
            double bob = std::min(1.0, rxy / c.alpha);
            if (!coins.bernoulli(1 - std::pow(1 - bob, double(hits)))) {
                r.aborted = true;
            } else {
                r.correct = !coins.bernoulli(c.post_error[x * p.ny() + y]);
            }
        }
        // independent draw for the tail estimate
        auto [tx, ty] = inputs(probe.uniform());
        tail[i] = std::abs(c.r_xy[tx * p.ny() + ty] / c.r - 1) >= cut ? 1 : 0;
    });
    MultiroundEvaluation out;
    out.run = summarize_trials(std::move(rec));
    std::size_t hits = 0;
    for (auto t : tail) hits += t;
    const double n = double(std::max<std::size_t>(trials, 1));
    out.tail_fraction = double(hits) / n;
    out.tail_sigma = std::sqrt(out.tail_fraction * (1 - out.tail_fraction) / n);
    return out;
}

// ---------------------------------------------------------------------------
// Demos and generators

QuantumOneWayProtocol index_one_way_protocol(int n, int m) {
    if (n < 1 || n > 10 || m < 0 || m > n) throw PreconditionError("index protocol needs 1 <= n <= 10 and 0 <= m <= n");
    const std::size_t nx = std::size_t(1) << n;
    const Index msg = Index(1) << m;
    std::vector<VectorXc> psi;
    for (std::size_t x = 0; x < nx; ++x) {
        VectorXc v = VectorXc::Zero(msg);
        v(Index(x & std::size_t(msg - 1))) = 1;
        psi.push_back(std::move(v));
    }
    std::vector<std::vector<MatrixXc>> povm(std::size_t(n), std::vector<MatrixXc>(2, MatrixXc::Zero(msg, msg)));
    for (int i = 0; i < n; ++i) {
        if (i < m) {
            for (Index s = 0; s < msg; ++s) povm[std::size_t(i)][std::size_t((s >> i) & 1)](s, s) = 1;
        } else {
            povm[std::size_t(i)][0] = 0.5 * MatrixXc::Identity(msg, msg);
            povm[std::size_t(i)][1] = 0.5 * MatrixXc::Identity(msg, msg);
        }
    }
    return QuantumOneWayProtocol(1, msg, std::move(psi), std::move(povm));
}

QuantumTwoWayProtocol inner_product_protocol(int n) {
    if (n < 1 || n > 4) throw PreconditionError("inner product demo supports 1 <= n <= 4");
    const std::size_t size = std::size_t(1) << n;
    const Index dc = Index(size);
    auto xor_in = [&](std::size_t x) {
        MatrixXc u = MatrixXc::Zero(dc, dc);
        for (Index c = 0; c < dc; ++c) u(Index(std::size_t(c) ^ x), c) = 1;
        return u;
    };
    std::vector<std::vector<MatrixXc>> rounds(3);
    for (std::size_t x = 0; x < size; ++x) {
        rounds[0].push_back(xor_in(x));
        rounds[2].push_back(xor_in(x));
    }
    for (std::size_t y = 0; y < size; ++y) {
        MatrixXc u = MatrixXc::Zero(2 * dc, 2 * dc);
        for (Index c = 0; c < dc; ++c)
            for (Index b = 0; b < 2; ++b) {
                Index out = b ^ Index(std::popcount(std::size_t(c) & y) & 1);
                u(c * 2 + out, c * 2 + b) = 1;
            }
        rounds[1].push_back(std::move(u));
    }
    std::vector<std::vector<MatrixXc>> povm(size);
    for (auto& ops : povm)
        for (Index z = 0; z < 2; ++z) {
            MatrixXc proj = MatrixXc::Zero(2, 2);
            proj(z, z) = 1;
            ops.push_back(kron<double>(MatrixXc::Identity(dc, dc), proj));
        }
    return QuantumTwoWayProtocol(size, size, 1, dc, 2, std::move(rounds), std::move(povm));
}

Relation inner_product_relation(int n) {
    const std::size_t size = std::size_t(1) << n;
    return Relation::from_function(size, size, 2, [](std::size_t x, std::size_t y) { return std::size_t(std::popcount(x & y) & 1); });
}

IndexTradeoff index_tradeoff_demo(int n, int b) {
    auto tree = index_tradeoff_tree(n, b);
    auto mu = JointDistribution::product(Distribution::uniform(tree.nx()), Distribution::uniform(tree.ny()));
    auto k = privacy_loss_classical(tree, mu);
    IndexTradeoff out;
    out.k_a = k.k_a;
    out.k_b = k.k_b;
    out.error = exact_error(tree, index_relation(n), mu);
    out.alice_bits = std::size_t(n >> b);
    out.bob_bits = std::size_t(b);
    return out;
}

QuantumOneWayProtocol random_one_way_protocol(std::size_t nx, std::size_t ny, std::size_t nz, Index keep_dim,
                                              Index message_dim, Rng& rng) {
    std::vector<VectorXc> psi;
    for (std::size_t x = 0; x < nx; ++x) psi.push_back(random_unit_vector(keep_dim * message_dim, rng));
    std::vector<std::vector<MatrixXc>> povm(ny);
    for (auto& ops : povm) grouped_projective(message_dim, nz, rng, ops);
    return QuantumOneWayProtocol(keep_dim, message_dim, std::move(psi), std::move(povm));
}

QuantumTwoWayProtocol random_two_way_protocol(std::size_t nx, std::size_t ny, std::size_t nz, Index da, Index dc,
                                              Index db, std::size_t rounds, Rng& rng) {
    std::vector<std::vector<MatrixXc>> us(rounds);
    for (std::size_t r = 0; r < rounds; ++r) {
        const bool alice = r % 2 == 0;
        for (std::size_t i = 0; i < (alice ? nx : ny); ++i) us[r].push_back(haar_unitary(alice ? da * dc : dc * db, rng));
    }
    std::vector<std::vector<MatrixXc>> povm(ny);
    for (auto& ops : povm) grouped_projective(dc * db, nz, rng, ops);
    return QuantumTwoWayProtocol(nx, ny, da, dc, db, std::move(us), std::move(povm));
}

}  // namespace commlab
