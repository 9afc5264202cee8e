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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every instance is seeded, so the output is reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

#include "commlab/cinfo.hpp"
#include "commlab/cproto.hpp"
#include "commlab/entres.hpp"
#include "commlab/ersp.hpp"
#include "commlab/qmath.hpp"
#include "commlab/qproto.hpp"
#include "commlab/random.hpp"
#include "commlab/rng.hpp"
#include "oracles.hpp"

using namespace commlab;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok) { pass = pass && ok; }
};

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

Distribution random_law(std::size_t n, Rng& rng) {
    std::vector<double> w(n);
    for (auto& v : w) v = 0.1 + rng.uniform();
    return Distribution::from_weights(w);
}

Distribution sparse_law(std::size_t n, Rng& rng, double zero_prob) {
    std::vector<double> w(n);
    for (auto& v : w) v = rng.bernoulli(zero_prob) ? 0.0 : -std::log(1 - rng.uniform());
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0; })) w[0] = 1;
    return Distribution::from_weights(w);
}

InputDistribution uniform_product(std::size_t nx, std::size_t ny) {
    return JointDistribution::product(Distribution::uniform(nx), Distribution::uniform(ny));
}

Outcome corrector_audit() {
    Outcome o;
    Rng rng(derive_seed(2026, {1}));
    double worst_success = 0, worst_distance = 0, worst_leak = 0;
    for (int i = 0; i < 20; ++i) {
        const std::size_t nx = 2 + rng.below(7);
        const Index keep = 1 + Index(rng.below(4));
        const Index msg = std::max<Index>(2, 1 + Index(rng.below(std::size_t(16 / keep))));
        auto p = random_one_way_protocol(nx, 2, 2, keep, msg, rng);
        std::vector<BipartitePureState> ens;
        for (std::size_t x = 0; x < nx; ++x) ens.push_back(p.phi(x));
        auto c = build_corrector(ens, random_law(nx, rng), 0.2);
        worst_success = std::max(worst_success, c.audit.success_deviation);
        worst_leak = std::max(worst_leak, c.audit.leakage);
        worst_distance = std::max(worst_distance, c.audit.average_distance);
        o.require(c.audit.success_deviation <= 1e-9 && c.audit.leakage == 0.0 && c.audit.average_distance <= 0.2);
    }
    o.detail << "20 ensembles; max |Tr M_x - alpha| " << worst_success << ", max leakage " << worst_leak
             << ", max E_mu distance " << worst_distance << " (delta 0.2)";
    return o;
}

Outcome substate_oracle() {
    Outcome o;
    Rng rng(derive_seed(2026, {2}));
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const Index d = Index(2) << (i % 3);
        DensityMatrix sigma = random_density_matrix(d, rng);
        DensityMatrix rho = DensityMatrix::pure(random_unit_vector(d, rng));
        const double gap = std::abs(max_substate_weight(rho, sigma) - oracle::substate_bisection(rho.matrix(), sigma.matrix()));
        worst = std::max(worst, gap);
    }
    o.require(worst <= 1e-9);
    o.detail << "100 pairs, dims {2,4,8}; max |k - k_bisection| " << worst << " (tol 1e-9)";
    return o;
}

Outcome index_compression() {
    Outcome o;
    auto p = index_one_way_protocol(4, 2);
    auto f = index_relation(4);
    auto mu = uniform_product(16, 4);
    auto c = compress_one_way(p, f, mu, 0.2);
    auto ev = evaluate_compressed(c, p, f, mu, 100000, derive_seed(2026, {3}), threads());
    const double beta = std::ceil(std::log2(std::ceil(std::log2(2 / 0.2) / c.corrector.alpha)));
    const double bound = c.exact_error + 0.2 + 3 * ev.error_sigma;
    o.require(ev.error <= bound);
    o.require(double(c.beta) == beta);
    o.detail << "n=4, 1e5 trials; error " << ev.error << " <= " << bound << " (eps " << c.exact_error << "); alpha "
             << c.corrector.alpha << ", beta " << c.beta << " vs formula " << beta;
    return o;
}

Outcome multiround_claims() {
    Outcome o;
    Rng rng(derive_seed(2026, {4}));
    double worst_claim = -1, worst_tail = -1, worst_error = -1;
    int cases = 0;
    std::size_t max_dim = 0;
    for (int i = 0; i < 4; ++i) {
        const Index d = i == 3 ? 4 : 2;
        auto p = random_two_way_protocol(2 + rng.below(2), 2 + rng.below(2), 2, d, d, d, 3, rng);
        max_dim = std::max(max_dim, std::size_t(p.full_dim()));
        auto g = Relation::from_function(p.nx(), p.ny(), 2,
                                         [&](std::size_t x, std::size_t y) { return (x * 7 + y * 3 + std::size_t(i)) % 2; });
        auto mu = JointDistribution::product(random_law(p.nx(), rng), random_law(p.ny(), rng));
        for (std::size_t tp : {std::size_t(1), std::size_t(3)}) {
            auto c = compress_multiround_quantum(p, g, mu, tp, 0.2);
            auto ev = evaluate_multiround(c, p, g, mu, 100000, derive_seed(2026, {4, std::uint64_t(i), tp}), threads());
            const double claim = std::abs(c.claim_ratio - 1) - c.delta_b / 2;
            const double tail = ev.tail_fraction - std::sqrt(c.delta_b) - 3 * ev.tail_sigma;
            const double err = ev.run.error - c.exact_error - 0.2 - 3 * ev.run.error_sigma;
            worst_claim = std::max(worst_claim, claim);
            worst_tail = std::max(worst_tail, tail);
            worst_error = std::max(worst_error, err);
            o.require(claim <= 1e-9 && tail <= 0 && err <= 0);
            ++cases;
        }
    }
    o.detail << cases << " cases (t' 1 and 3, total dim <= " << max_dim << "), 1e5 trials; max slack: claim "
             << worst_claim << ", tail " << worst_tail << ", error " << worst_error << " (all must be <= 0)";
    return o;
}

Outcome classical_compression() {
    Outcome o;
    Rng rng(derive_seed(2026, {5}));
    const double delta = 0.25;
    int built = 0, attempts = 0;
    double worst_identity = 0, worst_error = -1, worst_z = -1e9;
    while (built < 10 && attempts < 200) {
        ++attempts;
        const std::size_t nx = 2 + rng.below(3), ny = 2 + rng.below(3);
        std::vector<std::size_t> alphabets(1 + rng.below(4));
        for (auto& a : alphabets) a = 2 + rng.below(3);
        auto base = random_protocol_tree(nx, ny, 2, alphabets, rng, 0.3);
        std::vector<std::uint8_t> table(nx * ny);
        for (auto& t : table) t = std::uint8_t(rng.below(2));
        auto f = Relation::from_function(nx, ny, 2, [&](std::size_t x, std::size_t y) { return table[x * ny + y]; });
        auto mu = JointDistribution::product(random_law(nx, rng), random_law(ny, rng));
        auto tree = with_output(base, bayes_output(base, f, mu));
        const double eps = exact_error(tree, f, mu);
        if (eps >= 0.5 - delta - 0.01) continue;
        ++built;

        CompressionOptions opt;
        opt.prepass_seed = derive_seed(2026, {5, std::uint64_t(built), 1});
        opt.threads = threads();
        auto c = compress_multiround_classical(tree, f, mu, delta, opt);
        auto ev = evaluate_protocol(c, tree, f, mu, 100000, derive_seed(2026, {5, std::uint64_t(built), 2}), threads());
        const double err = ev.error - eps - delta - 3 * ev.error_sigma;
        worst_error = std::max(worst_error, err);

        double identity = 0;
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y) identity = std::max(identity, product_identity_check(tree, mu, c.averages, x, y));
        worst_identity = std::max(worst_identity, identity);

        // Pooled chi-square of accepted transcripts against the conditioned law.
        const std::size_t n = tree.transcripts();
        std::vector<double> expected(n, 0.0), var(n, 0.0), observed(n, 0.0);
        for (const auto& r : ev.records) {
            if (r.aborted) continue;
            auto q = accepted_transcript_law(c, tree, r.x, r.y);
            for (std::size_t s = 0; s < n; ++s) {
                expected[s] += q[s];
                var[s] += q[s] * (1 - q[s]);
            }
            observed[std::size_t(r.transcript)] += 1;
        }
        double chi = 0;
        std::size_t cells = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (var[s] <= 0) continue;
            chi += (observed[s] - expected[s]) * (observed[s] - expected[s]) / var[s];
            ++cells;
        }
        const double z = cells ? (chi - double(cells)) / std::sqrt(2.0 * double(cells)) : 0.0;
        worst_z = std::max(worst_z, z);
        o.require(err <= 0 && identity <= 1e-10 && z <= 3);
    }
    o.require(built == 10);
    o.detail << built << " trees, delta~ 0.25, 1e5 runs each; max error slack " << worst_error << " (<= 0), max identity gap "
             << worst_identity << " (tol 1e-10), max pooled chi-square z " << worst_z << " (<= 3)";
    return o;
}

Outcome ersp_exactness() {
    Outcome o;
    Rng rng(derive_seed(2026, {6}));
    std::ostringstream per_d;
    for (Index d : {2, 4, 8}) {
        std::vector<VectorXc> targets{VectorXc::Unit(d, 0)};
        for (int k = 0; k < 2; ++k) targets.push_back(random_unit_vector(d, rng));
        ErspProtocol p(ErspInstance(targets, DensityMatrix::maximally_mixed(d)));
        double worst_gap = 0, min_fid = 1;
        for (std::size_t x = 0; x < targets.size(); ++x) {
            auto s = evaluate_ersp(p, x, 10000, std::uint64_t(1) << 20, derive_seed(2026, {6, std::uint64_t(d)}), threads());
            const double gap = std::abs(s.mean_j - double(d)) / s.sigma_j;
            worst_gap = std::max(worst_gap, gap);
            min_fid = std::min(min_fid, s.min_fidelity);
            o.require(gap <= 3 && s.min_fidelity >= 1 - 1e-9 && s.aborts == 0 && s.mean_bits <= s.bits_bound);
        }
        per_d << " d=" << d << ": |E[J]-d|/sigma " << worst_gap << ", min fidelity " << min_fid << ";";
    }
    o.detail << "1e4 trials per target;" << per_d.str() << " bits within log T + 2 log log T + 4";
    return o;
}

Outcome equality_with_entanglement() {
    Outcome o;
    auto part = build_partition(32, 8, 7);
    auto props = check_partition(part);
    auto prior = epr_prior(32);
    auto table = acceptance_table(part, prior);
    const bool equal_ok = std::abs(table.min_equal - 1) <= 1e-9;
    int bits = 0;
    for (std::size_t x = 0; x < 8; ++x) bits = std::max(bits, equality_protocol(part, prior, x, x).bits);
    auto low = low_rank_approximation(prior);

    Rng rng(derive_seed(2026, {7}));
    double worst_half = 0;
    for (int i = 0; i < 200; ++i) {
        const Index d = 2 + Index(rng.below(15));
        VectorXr lam = VectorXr::Zero(d);
        const double tail = std::pow(10.0, -1 - 4 * rng.uniform());
        lam(0) = 1 - tail;
        for (Index k = 1; k < d; ++k) lam(k) = tail * rng.uniform();
        lam.tail(d - 1) *= tail / std::max(lam.tail(d - 1).sum(), 1e-300);
        MatrixXc psi = MatrixXc::Zero(d, d);
        for (Index k = 0; k < d; ++k) psi(k, k) = std::sqrt(lam(k));
        worst_half = std::max(worst_half, low_rank_approximation(BipartitePureState::from_matrix(psi)).distance / 2);
    }

    o.require(equal_ok && bits == 4 && props.exact() && low.distance <= 0.05 && worst_half <= 0.05);
    o.detail << "M=32, N=8; equal acceptance min " << table.min_equal << ", unequal max " << table.max_unequal
             << ", unequal fraction > 1/4: " << table.unequal_fraction << "; bits " << bits << "; props 1/3/4 "
             << (props.exact() ? "exact" : "inexact") << " (cross pairs >= 1/4: " << props.cross_exceeding << "/"
             << props.cross_pairs << "); truncation distance on prior " << low.distance
             << ", max trace distance on 200 skewed priors " << worst_half << " (<= 0.05)";
    return o;
}

Outcome privacy_demos() {
    Outcome o;
    for (int n : {1, 2}) {
        auto p = inner_product_protocol(n);
        const std::size_t size = std::size_t(1) << n;
        const double k = quantum_privacy_loss(p, uniform_product(size, size), p.rounds()).k_a;
        o.require(k >= n / 2.0 - 1e-9);
        o.detail << "inner product n=" << n << ": I(X:B) " << k << " >= " << n / 2.0 << "; ";
    }
    auto t = index_tradeoff_demo(8, 1);
    o.require(std::abs(t.k_a - 4) <= 1e-12 && std::abs(t.k_b - 1) <= 1e-12);
    o.detail << "index (8,1): (k_a, k_b) = (" << t.k_a << ", " << t.k_b << ")";
    return o;
}

Outcome invariant_suite() {
    Outcome o;
    Rng rng(derive_seed(2026, {9}));
    const int cases = 500;
    int chain = 0, mono = 0, share = 0, post = 0, good = 0, logsum = 0, kraft = 0;
    for (int i = 0; i < cases; ++i) {
        // chain rule and monotonicity on A (x) B (x) C qubits
        DensityMatrix r = random_density_matrix(8, rng, 1 + i % 8);
        const Dims dims{2, 2, 2};
        auto s = [&](std::vector<int> keep) { return operator_entropy<double>(reduce<double>(r.matrix(), dims, keep)); };
        const double i_abc = mutual_information(r, Dims{2}, Dims{2, 2});
        const double i_ab = mutual_information(DensityMatrix{reduce<double>(r.matrix(), dims, {0, 1})}, 2, 2);
        const double cond = s({0, 1}) + s({1, 2}) - s({1}) - s({0, 1, 2});
        chain += std::abs(i_abc - (i_ab + cond)) <= 1e-9;
        mono += i_abc >= i_ab - 1e-9;

        // an input independent of the first share gives at most twice S(second share)
        const Index nx = 3, da = 2, db = 2;
        Distribution px = random_law(std::size_t(nx), rng);
        DensityMatrix tau = random_density_matrix(da, rng);
        MatrixXc joint = MatrixXc::Zero(nx * da * db, nx * da * db);
        for (Index x = 0; x < nx; ++x)
            joint.block(x * da * db, x * da * db, da * db, da * db) =
                px[std::size_t(x)] * kron<double>(tau.matrix(), random_density_matrix(db, rng, 1 + (i + x) % 2).matrix());
        const double s_b = operator_entropy<double>(reduce<double>(joint, Dims{nx, da, db}, {2}));
        share += mutual_information(DensityMatrix{joint}, Dims{nx}, Dims{da, db}) <= 2 * s_b + 1e-9;

        // post-selection
        DensityMatrix rho = random_density_matrix(4, rng), sigma = random_density_matrix(4, rng);
        MatrixXc g = ginibre(4, 4, rng);
        MatrixXc e = g * g.adjoint();
        e /= max_eigenvalue<double>(e);
        MatrixXc root = psd_sqrt<double>(e);
        const double p = std::real((e * rho.matrix()).trace()), q = std::real((e * sigma.matrix()).trace());
        const double after = trace_distance(DensityMatrix::normalized(root * rho.matrix() * root),
                                            DensityMatrix::normalized(root * sigma.matrix() * root));
        post += after <= trace_distance(rho, sigma) / std::max(p, q) + 1e-9;

        // good set
        Distribution a = sparse_law(8, rng, 0.3), b = sparse_law(8, rng, 0.0);
        const double c = kl_divergence(a, b);
        bool ok = true;
        for (double delta : {0.5, 0.25, 0.1}) {
            double mass = 0;
            for (auto x : good_set(a, b, c, delta)) {
                mass += a[x];
                ok = ok && std::log2(a[x] / b[x]) <= (c + 1) / delta + 1e-12;
            }
            ok = ok && mass >= 1 - delta;
        }
        good += ok;

        // log-sum on a random subset
        Distribution u = sparse_law(8, rng, 0.0), v = sparse_law(8, rng, 0.0);
        double partial = 0;
        for (std::size_t x = 0; x < 8; ++x)
            if (rng.bernoulli(0.5)) partial += u[x] * std::log2(u[x] / v[x]);
        logsum += partial > -1;

        // prefix code: distinct random integers, round trip and Kraft sum
        std::vector<std::uint64_t> values;
        for (int k = 0; k < 64; ++k) values.push_back(1 + (rng.below(std::size_t(1) << (1 + rng.below(40)))));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        std::string stream;
        double sum = 0;
        bool code_ok = true;
        for (auto n : values) {
            const std::string w = prefix_encode(n);
            code_ok = code_ok && w.size() == prefix_length(n) && prefix_length(n) <= prefix_length_bound(n);
            sum += std::ldexp(1.0, -int(w.size()));
            stream += w;
        }
        std::size_t pos = 0;
        for (auto n : values) code_ok = code_ok && prefix_decode(stream, pos) == n;
        kraft += code_ok && pos == stream.size() && sum <= 1.0;
    }
    double full = 0;
    for (std::uint64_t n = 1; n <= (std::uint64_t(1) << 20); ++n) full += std::ldexp(1.0, -int(prefix_length(n)));

    for (int count : {chain, mono, share, post, good, logsum, kraft}) o.require(count == cases);
    o.require(full <= 1.0);
    o.detail << "passed of " << cases << ": chain rule " << chain << ", monotonicity " << mono << ", independent share "
             << share << ", post-selection " << post << ", good set " << good << ", log-sum " << logsum << ", prefix code "
             << kraft << "; Kraft sum to 2^20 " << full;
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"corrector audit", corrector_audit},
        {"substate weight oracle", substate_oracle},
        {"one-way compression of index", index_compression},
        {"two-way compression claims", multiround_claims},
        {"classical multi-round compression", classical_compression},
        {"exact remote state preparation", ersp_exactness},
        {"equality with prior entanglement", equality_with_entanglement},
        {"privacy demos", privacy_demos},
        {"information invariants", invariant_suite},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "threw: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu: %s  %s: %s [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.str().c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures ? 1 : 0;
}
