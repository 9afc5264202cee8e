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

#include "commlab/cproto.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "commlab/errors.hpp"
#include "commlab/parallel.hpp"

namespace commlab {

namespace {

constexpr std::size_t kMaxTranscripts = std::size_t(1) << 20;
constexpr std::size_t kDenseBudget = std::size_t(1) << 24;
constexpr double kKernelTol = 1e-9;

double kl_dense(const std::vector<double>& p, const std::vector<double>& q) {
    return kl_divergence(std::span<const double>(p), std::span<const double>(q));
}

}  // namespace

// ---------------------------------------------------------------------------
// Relation

Relation::Relation(std::size_t nx, std::size_t ny, std::size_t nz, std::vector<std::uint8_t> table)
    : nx_(nx), ny_(ny), nz_(nz), table_(std::move(table)) {
    if (nx == 0 || ny == 0 || nz == 0) throw DimensionMismatch("relation alphabets must be non-empty");
    if (table_.size() != nx * ny * nz) throw DimensionMismatch("relation table size differs from |X|*|Y|*|Z|");
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            bool any = false;
            for (std::size_t z = 0; z < nz && !any; ++z) any = ok(x, y, z);
            if (!any)
                throw InvalidState("relation is not total: no answer for (x=" + std::to_string(x) + ", y=" +
                                   std::to_string(y) + ")");
        }
}

Relation Relation::from_predicate(std::size_t nx, std::size_t ny, std::size_t nz,
                                  const std::function<bool(std::size_t, std::size_t, std::size_t)>& f) {
    std::vector<std::uint8_t> t(nx * ny * nz);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t z = 0; z < nz; ++z) t[(x * ny + y) * nz + z] = f(x, y, z) ? 1 : 0;
    return Relation(nx, ny, nz, std::move(t));
}

Relation Relation::from_function(std::size_t nx, std::size_t ny, std::size_t nz,
                                 const std::function<std::size_t(std::size_t, std::size_t)>& g) {
    return from_predicate(nx, ny, nz, [&](std::size_t x, std::size_t y, std::size_t z) { return g(x, y) == z; });
}

Relation Relation::equality(int bits) {
    const std::size_t n = std::size_t(1) << bits;
    return from_function(n, n, 2, [](std::size_t x, std::size_t y) { return std::size_t(x == y); });
}

Relation Relation::direct_sum(int m) const {
    if (m < 1) throw PreconditionError("direct sum needs m >= 1");
    std::size_t nx = 1, ny = 1, nz = 1;
    for (int i = 0; i < m; ++i) {
        nx *= nx_;
        ny *= ny_;
        nz *= nz_;
    }
    if (nx * ny * nz > kDenseBudget) throw BudgetExceeded("direct sum relation table too large");
    return from_predicate(nx, ny, nz, [&](std::size_t x, std::size_t y, std::size_t z) {
        for (int i = 0; i < m; ++i) {
            if (!ok(x % nx_, y % ny_, z % nz_)) return false;
            x /= nx_;
            y /= ny_;
            z /= nz_;
        }
        return true;
    });
}

// ---------------------------------------------------------------------------
// Tree

ClassicalProtocolTree::ClassicalProtocolTree(std::size_t nx, std::size_t ny, std::size_t nz, std::vector<Round> rounds,
                                             std::vector<std::vector<std::uint32_t>> output)
    : nx_(nx), ny_(ny), nz_(nz), rounds_(std::move(rounds)), output_(std::move(output)) {
    if (nx == 0 || ny == 0 || nz == 0) throw DimensionMismatch("protocol alphabets must be non-empty");
    if (rounds_.empty()) throw InvalidState("protocol has no rounds");
    const std::size_t t = rounds_.size();
    suffix_.assign(t + 1, 1);
    for (std::size_t r = t; r-- > 0;) {
        if (rounds_[r].alphabet == 0) throw InvalidState("round " + std::to_string(r + 1) + " has an empty alphabet");
        suffix_[r] = suffix_[r + 1] * rounds_[r].alphabet;
        if (suffix_[r] > kMaxTranscripts) throw BudgetExceeded("protocol has more than 2^20 transcripts");
    }
    total_ = suffix_[0];
    std::size_t prefixes = 1;
    for (std::size_t r = 0; r < t; ++r) {
        const Round& rd = rounds_[r];
        const std::size_t inputs = speaker(r) == Speaker::Alice ? nx : ny;
        const std::string where = "round " + std::to_string(r + 1);
        if (rd.kernel.size() != inputs)
            throw DimensionMismatch(where + ": expected " + std::to_string(inputs) + " kernels, got " +
                                    std::to_string(rd.kernel.size()));
        for (std::size_t i = 0; i < inputs; ++i) {
            const Kernel& k = rd.kernel[i];
            if (std::size_t(k.rows()) != prefixes || std::size_t(k.cols()) != rd.alphabet)
                throw DimensionMismatch(where + ", input " + std::to_string(i) + ": kernel shape differs from prefixes x alphabet");
            for (Eigen::Index row = 0; row < k.outerSize(); ++row) {
                double sum = 0;
                for (Kernel::InnerIterator it(k, row); it; ++it) {
                    if (!(it.value() >= 0)) throw InvalidState(where + ", input " + std::to_string(i) + ": negative probability");
                    sum += it.value();
                }
                if (std::abs(sum - 1) > kKernelTol)
                    throw InvalidState(where + ", input " + std::to_string(i) + ", prefix " + std::to_string(row) +
                                       ": kernel row sums to " + std::to_string(sum) + ", not 1");
            }
        }
        prefixes *= rd.alphabet;
    }
    if (output_.size() != ny) throw DimensionMismatch("output map needs one row per y");
    for (const auto& row : output_) {
        if (row.size() != total_) throw DimensionMismatch("output map row length differs from transcript count");
        for (auto z : row)
            if (z >= nz) throw DimensionMismatch("output symbol out of range");
    }
}

double ClassicalProtocolTree::round_probability(std::size_t x, std::size_t y, std::size_t s, std::size_t r) const {
    const std::size_t input = speaker(r) == Speaker::Alice ? x : y;
    return rounds_[r].kernel[input].coeff(Eigen::Index(prefix(s, r)), Eigen::Index(symbol(s, r)));
}

double ClassicalProtocolTree::path_probability(std::size_t x, std::size_t y, std::size_t s) const {
    double p = 1;
    for (std::size_t r = 0; r < rounds_.size() && p > 0; ++r) p *= round_probability(x, y, s, r);
    return p;
}

double ClassicalProtocolTree::alice_factor(std::size_t x, std::size_t s) const {
    double p = 1;
    for (std::size_t r = 0; r < rounds_.size(); r += 2) p *= round_probability(x, 0, s, r);
    return p;
}

double ClassicalProtocolTree::bob_factor(std::size_t y, std::size_t s) const {
    double p = 1;
    for (std::size_t r = 1; r < rounds_.size(); r += 2) p *= round_probability(0, y, s, r);
    return p;
}

void ClassicalProtocolTree::for_each_path(std::size_t x, std::size_t y,
                                          const std::function<void(std::size_t, double)>& fn) const {
    // iterative DFS over (round, prefix, probability)
    struct Frame {
        std::size_t r, prefix;
        double p;
    };
    std::vector<Frame> stack{{0, 0, 1.0}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.r == rounds_.size()) {
            fn(f.prefix, f.p);
            continue;
        }
        const Round& rd = rounds_[f.r];
        const Kernel& k = rd.kernel[speaker(f.r) == Speaker::Alice ? x : y];
        for (Kernel::InnerIterator it(k, Eigen::Index(f.prefix)); it; ++it)
            if (it.value() > 0) stack.push_back({f.r + 1, f.prefix * rd.alphabet + std::size_t(it.col()), f.p * it.value()});
    }
}

std::size_t ClassicalProtocolTree::bits_per_run() const {
    std::size_t bits = 0;
    for (const auto& r : rounds_) bits += r.alphabet <= 1 ? 0 : std::size_t(std::bit_width(r.alphabet - 1));
    return bits;
}

std::size_t ClassicalProtocolTree::sample(std::size_t x, std::size_t y, Rng& rng) const {
    std::size_t prefix = 0;
    for (std::size_t r = 0; r < rounds_.size(); ++r) {
        const Kernel& k = rounds_[r].kernel[speaker(r) == Speaker::Alice ? x : y];
        double u = rng.uniform(), acc = 0;
        Eigen::Index pick = -1;
        for (Kernel::InnerIterator it(k, Eigen::Index(prefix)); it; ++it) {
            if (it.value() <= 0) continue;
            pick = it.col();
            acc += it.value();
            if (u < acc) break;
        }
        prefix = prefix * rounds_[r].alphabet + std::size_t(pick);
    }
    return prefix;
}

// ---------------------------------------------------------------------------
// Transcript laws

void require_product(const InputDistribution& mu, const char* what) {
    if (mu.product_deviation() > 1e-12) throw PreconditionError(std::string(what) + " needs a product input distribution");
}

Distribution transcript_distribution(const ClassicalProtocolTree& tree, std::size_t x, std::size_t y) {
    if (x >= tree.nx() || y >= tree.ny()) throw DimensionMismatch("input out of range");
    std::vector<double> p(tree.transcripts(), 0.0);
    tree.for_each_path(x, y, [&](std::size_t s, double v) { p[s] += v; });
    return Distribution::from_weights(std::move(p));
}

static void check_mu(const ClassicalProtocolTree& tree, const InputDistribution& mu) {
    if (mu.nx() != tree.nx() || mu.ny() != tree.ny()) throw DimensionMismatch("input distribution does not match the protocol");
}

TranscriptAverages average_transcripts(const ClassicalProtocolTree& tree, const InputDistribution& mu) {
    check_mu(tree, mu);
    const std::size_t t = tree.transcripts();
    if ((tree.nx() + tree.ny() + 1) * t > kDenseBudget) throw BudgetExceeded("transcript averages exceed the dense budget");
    Distribution mx = mu.marginal_x(), my = mu.marginal_y();
    TranscriptAverages avg;
    avg.p_x.assign(tree.nx(), std::vector<double>(t, 0.0));
    avg.p_y.assign(tree.ny(), std::vector<double>(t, 0.0));
    avg.p_bar.assign(t, 0.0);
    for (std::size_t x = 0; x < tree.nx(); ++x)
        for (std::size_t y = 0; y < tree.ny(); ++y)
            tree.for_each_path(x, y, [&](std::size_t s, double p) {
                avg.p_x[x][s] += my[y] * p;
                avg.p_y[y][s] += mx[x] * p;
                avg.p_bar[s] += mu(x, y) * p;
            });
    return avg;
}

double product_identity_check(const ClassicalProtocolTree& tree, const InputDistribution& mu, const TranscriptAverages& avg,
                              std::size_t x, std::size_t y) {
    check_mu(tree, mu);
    std::vector<double> pxy(tree.transcripts(), 0.0);
    tree.for_each_path(x, y, [&](std::size_t s, double p) { pxy[s] += p; });
    double dev = 0;
    for (std::size_t s = 0; s < pxy.size(); ++s)
        dev = std::max(dev, std::abs(avg.p_x[x][s] * avg.p_y[y][s] - avg.p_bar[s] * pxy[s]));
    return dev;
}

double product_identity_check(const ClassicalProtocolTree& tree, const InputDistribution& mu, std::size_t x, std::size_t y) {
    require_product(mu, "product identity check");
    return product_identity_check(tree, mu, average_transcripts(tree, mu), x, y);
}

PrivacyLoss privacy_loss_classical(const ClassicalProtocolTree& tree, const InputDistribution& mu) {
    check_mu(tree, mu);
    require_product(mu, "privacy loss");
    Distribution mx = mu.marginal_x(), my = mu.marginal_y();
    const std::size_t t = tree.transcripts();
    std::vector<double> p_bar(t, 0.0);
    for (std::size_t x = 0; x < tree.nx(); ++x) {
        if (mx[x] == 0) continue;
        for (std::size_t y = 0; y < tree.ny(); ++y)
            if (my[y] > 0) tree.for_each_path(x, y, [&](std::size_t s, double p) { p_bar[s] += mx[x] * my[y] * p; });
    }
    PrivacyLoss out;
    std::vector<double> cond(t, 0.0);
    std::vector<std::size_t> touched;
    auto accumulate = [&](double weight) {
        double kl = 0;
        for (std::size_t s : touched) {
            if (cond[s] > 0) kl += cond[s] * std::log2(cond[s] / p_bar[s]);
            cond[s] = 0;
        }
        touched.clear();
        return weight * kl;
    };
    for (std::size_t x = 0; x < tree.nx(); ++x) {
        if (mx[x] == 0) continue;
        for (std::size_t y = 0; y < tree.ny(); ++y)
            if (my[y] > 0)
                tree.for_each_path(x, y, [&](std::size_t s, double p) {
                    if (cond[s] == 0) touched.push_back(s);
                    cond[s] += my[y] * p;
                });
        out.k_a += accumulate(mx[x]);
    }
    for (std::size_t y = 0; y < tree.ny(); ++y) {
        if (my[y] == 0) continue;
        for (std::size_t x = 0; x < tree.nx(); ++x)
            if (mx[x] > 0)
                tree.for_each_path(x, y, [&](std::size_t s, double p) {
                    if (cond[s] == 0) touched.push_back(s);
                    cond[s] += mx[x] * p;
                });
        out.k_b += accumulate(my[y]);
    }
    out.k_a = std::max(out.k_a, 0.0);
    out.k_b = std::max(out.k_b, 0.0);
    return out;
}

double transcript_entropy(const ClassicalProtocolTree& tree, const InputDistribution& mu) {
    check_mu(tree, mu);
    std::vector<double> p_bar(tree.transcripts(), 0.0);
    for (std::size_t x = 0; x < tree.nx(); ++x)
        for (std::size_t y = 0; y < tree.ny(); ++y)
            if (mu(x, y) > 0) tree.for_each_path(x, y, [&](std::size_t s, double p) { p_bar[s] += mu(x, y) * p; });
    double h = 0;
    for (double p : p_bar)
        if (p > 0) h -= p * std::log2(p);
    return h;
}

double input_error(const ClassicalProtocolTree& tree, const Relation& f, std::size_t x, std::size_t y) {
    double err = 0;
    tree.for_each_path(x, y, [&](std::size_t s, double p) {
        if (!f.ok(x, y, tree.output(y, s))) err += p;
    });
    return err;
}

double exact_error(const ClassicalProtocolTree& tree, const Relation& f, const InputDistribution& mu) {
    check_mu(tree, mu);
    if (f.nx() != tree.nx() || f.ny() != tree.ny() || f.nz() != tree.nz())
        throw DimensionMismatch("relation does not match the protocol");
    double err = 0;
    for (std::size_t x = 0; x < tree.nx(); ++x)
        for (std::size_t y = 0; y < tree.ny(); ++y)
            if (mu(x, y) > 0) err += mu(x, y) * input_error(tree, f, x, y);
    return err;
}

std::vector<std::vector<std::uint32_t>> bayes_output(const ClassicalProtocolTree& tree, const Relation& f,
                                                     const InputDistribution& mu) {
    check_mu(tree, mu);
    const std::size_t t = tree.transcripts();
    std::vector<std::vector<std::uint32_t>> out(tree.ny(), std::vector<std::uint32_t>(t, 0));
    for (std::size_t y = 0; y < tree.ny(); ++y) {
        std::vector<double> score(t * tree.nz(), 0.0);
        for (std::size_t x = 0; x < tree.nx(); ++x) {
            if (mu(x, y) == 0) continue;
            tree.for_each_path(x, y, [&](std::size_t s, double p) {
                for (std::size_t z = 0; z < tree.nz(); ++z)
                    if (f.ok(x, y, z)) score[s * tree.nz() + z] += mu(x, y) * p;
            });
        }
        for (std::size_t s = 0; s < t; ++s) {
            std::size_t best = 0;
            for (std::size_t z = 1; z < tree.nz(); ++z)
                if (score[s * tree.nz() + z] > score[s * tree.nz() + best]) best = z;
            out[y][s] = std::uint32_t(best);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Compression

namespace {

std::size_t sample_shared(const CompressedOneWay& c, std::uint64_t key, std::uint64_t row, std::uint64_t col) {
    double target = counter_uniform(key, row, col) * c.cdf.back();
    auto it = std::upper_bound(c.cdf.begin(), c.cdf.end(), target);
    std::size_t i = std::min<std::size_t>(std::size_t(it - c.cdf.begin()), c.cdf.size() - 1);
    return c.support[i];
}

std::vector<TrialRecord> run_trials(std::size_t trials, unsigned threads,
                                    const std::function<TrialRecord(std::size_t)>& one) {
    std::vector<TrialRecord> rec(trials);
    parallel_for(trials, threads, [&](std::size_t i) { rec[i] = one(i); });
    return rec;
}

}  // namespace

InputSampler::InputSampler(const InputDistribution& mu) : ny_(mu.ny()), cdf_(mu.table().size()) {
    double acc = 0;
    for (std::size_t i = 0; i < cdf_.size(); ++i) cdf_[i] = (acc += mu.table()[i]);
}

std::pair<std::size_t, std::size_t> InputSampler::operator()(double u) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u * cdf_.back());
    std::size_t i = std::min<std::size_t>(std::size_t(it - cdf_.begin()), cdf_.size() - 1);
    // u * total can round up to the total; step back over empty tail cells
    while (i > 0 && cdf_[i] == cdf_[i - 1]) --i;
    return {i / ny_, i % ny_};
}

Evaluation summarize_trials(std::vector<TrialRecord> rec) {
    Evaluation ev;
    ev.trials = rec.size();
    std::size_t wrong = 0, aborted = 0;
    double bits = 0;
    for (const auto& r : rec) {
        wrong += r.correct ? 0 : 1;
        aborted += r.aborted ? 1 : 0;
        bits += double(r.bits);
        if (ev.bits_histogram.size() <= r.bits) ev.bits_histogram.resize(r.bits + 1, 0);
        ev.bits_histogram[r.bits]++;
    }
    const double n = double(std::max<std::size_t>(ev.trials, 1));
    ev.error = double(wrong) / n;
    ev.error_sigma = std::sqrt(ev.error * (1 - ev.error) / n);
    ev.mean_bits = bits / n;
    ev.abort_rate = double(aborted) / n;
    ev.records = std::move(rec);
    return ev;
}

CompressedOneWay compress_multiround_classical(const ClassicalProtocolTree& tree, const Relation& f,
                                               const InputDistribution& mu, double delta_tilde,
                                               const CompressionOptions& options) {
    check_mu(tree, mu);
    require_product(mu, "multi-round compression");
    const double eps = exact_error(tree, f, mu);
    if (!(delta_tilde > 0) || !(eps + delta_tilde < 0.5))
        throw PreconditionError("compression needs delta_tilde > 0 and eps + delta_tilde < 1/2 (eps = " + std::to_string(eps) + ")");

    CompressedOneWay c;
    c.delta_tilde = delta_tilde;
    c.delta = delta_tilde / 5;
    const double delta = c.delta;
    c.averages = average_transcripts(tree, mu);
    const auto& avg = c.averages;
    Distribution mx = mu.marginal_x(), my = mu.marginal_y();
    const std::size_t t = tree.transcripts();

    std::vector<double> kl_x(tree.nx(), 0.0), kl_y(tree.ny(), 0.0);
    for (std::size_t x = 0; x < tree.nx(); ++x)
        if (mx[x] > 0) {
            kl_x[x] = kl_dense(avg.p_x[x], avg.p_bar);
            c.k_a += mx[x] * kl_x[x];
        }
    for (std::size_t y = 0; y < tree.ny(); ++y)
        if (my[y] > 0) {
            kl_y[y] = kl_dense(avg.p_y[y], avg.p_bar);
            c.k_b += my[y] * kl_y[y];
        }
    c.log2_threshold_a = (c.k_a + 1) / (delta * delta);
    c.log2_threshold_b = (c.k_b + 1) / (delta * delta);
    c.log2_worst_case_rows = std::log2(std::log(1 / delta) / (1 - delta)) + c.log2_threshold_b;

    auto build_side = [&](const std::vector<std::vector<double>>& cond, const Distribution& marg,
                          const std::vector<double>& kl, double k, double log2_thr, std::vector<bool>& good,
                          std::vector<std::vector<bool>>& good_s, std::vector<double>& norm, std::vector<double>* accept) {
        const std::size_t n = cond.size();
        good.assign(n, false);
        good_s.assign(n, std::vector<bool>(t, false));
        norm.assign(n, 0.0);
        if (accept) accept->assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (marg[i] <= 0 || kl[i] > k / delta + 1e-12) continue;
            good[i] = true;
            double mass = 0, top = 0;
            for (std::size_t s = 0; s < t; ++s) {
                if (cond[i][s] <= 0) continue;
                double lr = std::log2(cond[i][s]) - std::log2(avg.p_bar[s]);
                if (lr > log2_thr) continue;
                good_s[i][s] = true;
                mass += cond[i][s];
                top = std::max(top, cond[i][s] / avg.p_bar[s]);
            }
            norm[i] = top;
            if (accept) (*accept)[i] = mass / top;
        }
    };
    build_side(avg.p_x, mx, kl_x, c.k_a, c.log2_threshold_a, c.good_x, c.good_sx, c.t_a, &c.accept_a);
    build_side(avg.p_y, my, kl_y, c.k_b, c.log2_threshold_b, c.good_y, c.good_sy, c.t_b, nullptr);

    double t_b_max = 0;
    for (std::size_t y = 0; y < tree.ny(); ++y)
        if (c.good_y[y]) t_b_max = std::max(t_b_max, c.t_b[y]);
    c.rows = std::uint64_t(std::ceil(std::log(1 / delta) / (1 - delta) * t_b_max));
    c.rows = std::max<std::uint64_t>(c.rows, 1);

    for (std::size_t s = 0; s < t; ++s)
        if (avg.p_bar[s] > 0) {
            if (avg.p_bar[s] < 1e-300) throw InvalidState("transcript probability below 1e-300");
            c.support.push_back(s);
            c.cdf.push_back((c.cdf.empty() ? 0.0 : c.cdf.back()) + avg.p_bar[s]);
        }

    // c: expected bits of the untruncated protocol, estimated by Monte Carlo.
    InputSampler inputs(mu);
    std::vector<TrialRecord> pre = run_trials(options.prepass_trials, options.threads, [&](std::size_t i) {
        Rng in(derive_seed(options.prepass_seed, {i, 0}));
        auto [x, y] = inputs(in.uniform());
        Rng alice(derive_seed(options.prepass_seed, {i, 2})), bob(derive_seed(options.prepass_seed, {i, 3}));
        OneWayRun run = run_compressed(c, tree, x, y, derive_seed(options.prepass_seed, {i, 1}),
                                       alice, bob, false);
        TrialRecord r;
        r.bits = run.bits;
        return r;
    });
    double total = 0;
    for (const auto& r : pre) total += double(r.bits);
    c.expected_bits = total / double(std::max<std::size_t>(pre.size(), 1));
    c.cut = c.expected_bits / delta;
    return c;
}

OneWayRun run_compressed(const CompressedOneWay& c, const ClassicalProtocolTree& tree, std::size_t x, std::size_t y,
                         std::uint64_t shared_key, Rng& alice, Rng& bob, bool truncate) {
    OneWayRun run;
    run.bits = 1;  // flag bit: abort or indices follow
    if (!c.good_x[x]) {
        run.alice_abort = true;
        return run;
    }
    const auto& px = c.averages.p_x[x];
    const auto& p = c.averages.p_bar;
    std::vector<std::uint64_t> index(c.rows);
    for (std::uint64_t i = 0; i < c.rows; ++i) {
        std::uint64_t j = 1;
        for (;; ++j) {
            if (j > c.column_cap) throw BudgetExceeded("shared-randomness row exhausted its column cap");
            std::size_t s = sample_shared(c, shared_key, i, j);
            ++run.alice_columns;
            if (c.good_sx[x][s] && alice.uniform() < px[s] / (p[s] * c.t_a[x])) break;
        }
        index[i] = j;
        run.bits += prefix_length(j);
    }
    if (truncate && double(run.bits) > c.cut) {
        run.truncated = true;
        run.bits = 1;
        return run;
    }
    if (!c.good_y[y]) {
        run.bob_abort = true;
        return run;
    }
    const auto& py = c.averages.p_y[y];
    for (std::uint64_t l = 0; l < c.rows; ++l) {
        std::size_t s = sample_shared(c, shared_key, l, index[l]);
        if (c.good_sy[y][s] && bob.uniform() < py[s] / (p[s] * c.t_b[y])) {
            run.transcript = s;
            run.z = tree.output(y, s);
            return run;
        }
    }
    run.bob_abort = true;
    return run;
}

std::vector<double> accepted_transcript_law(const CompressedOneWay& c, const ClassicalProtocolTree& tree, std::size_t x,
                                            std::size_t y) {
    std::vector<double> q(tree.transcripts(), 0.0);
    double mass = 0;
    tree.for_each_path(x, y, [&](std::size_t s, double p) {
        if (c.good_sx[x][s] && c.good_sy[y][s]) {
            q[s] += p;
            mass += p;
        }
    });
    if (mass > 0)
        for (double& v : q) v /= mass;
    return q;
}

Evaluation evaluate_protocol(const ClassicalProtocolTree& tree, const Relation& f, const InputDistribution& mu,
                             std::size_t trials, std::uint64_t seed, unsigned threads) {
    check_mu(tree, mu);
    InputSampler inputs(mu);
    const std::size_t bits = tree.bits_per_run();
    Evaluation ev = summarize_trials(run_trials(trials, threads, [&](std::size_t i) {
        Rng in(derive_seed(seed, {i, 0}));
        auto [x, y] = inputs(in.uniform());
        TrialRecord r;
        r.x = std::uint32_t(x);
        r.y = std::uint32_t(y);
        Rng coins(derive_seed(seed, {i, 1}));
        std::size_t s = tree.sample(r.x, r.y, coins);
        r.transcript = std::int64_t(s);
        r.correct = f.ok(r.x, r.y, tree.output(r.y, s));
        r.bits = bits;
        return r;
    }));
    ev.exact_error = exact_error(tree, f, mu);
    return ev;
}

Evaluation evaluate_protocol(const CompressedOneWay& c, const ClassicalProtocolTree& tree, const Relation& f,
                             const InputDistribution& mu, std::size_t trials, std::uint64_t seed, unsigned threads,
                             bool truncate) {
    check_mu(tree, mu);
    InputSampler inputs(mu);
    return summarize_trials(run_trials(trials, threads, [&](std::size_t i) {
        Rng in(derive_seed(seed, {i, 0}));
        auto [x, y] = inputs(in.uniform());
        TrialRecord r;
        r.x = std::uint32_t(x);
        r.y = std::uint32_t(y);
        Rng alice(derive_seed(seed, {i, 2})), bob(derive_seed(seed, {i, 3}));
        OneWayRun run = run_compressed(c, tree, r.x, r.y, derive_seed(seed, {i, 1}), alice, bob, truncate);
        r.bits = run.bits;
        r.aborted = run.aborted();
        r.correct = !run.aborted() && f.ok(r.x, r.y, *run.z);
        r.transcript = run.transcript ? std::int64_t(*run.transcript) : -1;
        return r;
    }));
}

// ---------------------------------------------------------------------------
// Constructions

ClassicalProtocolTree index_tradeoff_tree(int database_bits, int prefix_bits) {
    if (database_bits < 1 || !std::has_single_bit(unsigned(database_bits)) || database_bits > 16)
        throw PreconditionError("database size must be a power of two between 1 and 16");
    const int index_bits = std::countr_zero(unsigned(database_bits));
    if (prefix_bits < 0 || prefix_bits > index_bits) throw PreconditionError("prefix bits must lie in [0, log2 database size]");
    const std::size_t nx = std::size_t(1) << database_bits, ny = std::size_t(database_bits);
    const std::size_t groups = std::size_t(1) << prefix_bits;
    const int block = database_bits >> prefix_bits;
    const std::size_t block_alphabet = std::size_t(1) << block;

    std::vector<Round> rounds(3);
    rounds[0].alphabet = 1;
    rounds[1].alphabet = groups;
    rounds[2].alphabet = block_alphabet;
    Kernel one(1, 1);
    one.insert(0, 0) = 1.0;
    one.makeCompressed();
    rounds[0].kernel.assign(nx, one);
    for (std::size_t i = 0; i < ny; ++i) {
        Kernel k{1, Eigen::Index(groups)};
        k.insert(0, Eigen::Index(i >> (index_bits - prefix_bits))) = 1.0;
        k.makeCompressed();
        rounds[1].kernel.push_back(std::move(k));
    }
    rounds[2].kernel.reserve(nx);
    for (std::size_t x = 0; x < nx; ++x) {
        Kernel k{Eigen::Index(groups), Eigen::Index(block_alphabet)};
        k.reserve(Eigen::VectorXi::Constant(Eigen::Index(groups), 1));
        for (std::size_t g = 0; g < groups; ++g) {
            std::size_t msg = (x >> (g * std::size_t(block))) & (block_alphabet - 1);
            k.insert(Eigen::Index(g), Eigen::Index(msg)) = 1.0;
        }
        k.makeCompressed();
        rounds[2].kernel.push_back(std::move(k));
    }
    const std::size_t t = groups * block_alphabet;
    std::vector<std::vector<std::uint32_t>> out(ny, std::vector<std::uint32_t>(t, 0));
    for (std::size_t i = 0; i < ny; ++i) {
        std::size_t g = i >> (index_bits - prefix_bits);
        std::size_t offset = i - g * std::size_t(block);
        for (std::size_t m = 0; m < block_alphabet; ++m) out[i][g * block_alphabet + m] = std::uint32_t((m >> offset) & 1);
    }
    return ClassicalProtocolTree(nx, ny, 2, std::move(rounds), std::move(out));
}

Relation index_relation(int database_bits) {
    const std::size_t nx = std::size_t(1) << database_bits;
    return Relation::from_function(nx, std::size_t(database_bits), 2, [](std::size_t x, std::size_t i) { return (x >> i) & 1; });
}

ClassicalProtocolTree random_protocol_tree(std::size_t nx, std::size_t ny, std::size_t nz,
                                           const std::vector<std::size_t>& alphabets, Rng& rng, double sparsity) {
    std::vector<Round> rounds;
    std::size_t prefixes = 1;
    for (std::size_t r = 0; r < alphabets.size(); ++r) {
        Round rd;
        rd.alphabet = alphabets[r];
        const std::size_t inputs = ClassicalProtocolTree::speaker(r) == Speaker::Alice ? nx : ny;
        for (std::size_t i = 0; i < inputs; ++i) {
            Kernel k{Eigen::Index(prefixes), Eigen::Index(rd.alphabet)};
            std::vector<Eigen::Triplet<double>> trip;
            for (std::size_t row = 0; row < prefixes; ++row) {
                std::vector<double> w(rd.alphabet);
                for (auto& v : w) v = rng.bernoulli(sparsity) ? 0.0 : -std::log(1 - rng.uniform());
                if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0; })) w[rng.below(rd.alphabet)] = 1;
                double sum = std::accumulate(w.begin(), w.end(), 0.0);
                for (std::size_t a = 0; a < rd.alphabet; ++a)
                    if (w[a] > 0) trip.emplace_back(Eigen::Index(row), Eigen::Index(a), w[a] / sum);
            }
            k.setFromTriplets(trip.begin(), trip.end());
            k.makeCompressed();
            rd.kernel.push_back(std::move(k));
        }
        prefixes *= rd.alphabet;
        rounds.push_back(std::move(rd));
    }
    std::vector<std::vector<std::uint32_t>> out(ny, std::vector<std::uint32_t>(prefixes));
    for (auto& row : out)
        for (auto& z : row) z = std::uint32_t(rng.below(nz));
    return ClassicalProtocolTree(nx, ny, nz, std::move(rounds), std::move(out));
}

ClassicalProtocolTree with_output(const ClassicalProtocolTree& tree, std::vector<std::vector<std::uint32_t>> output) {
    std::vector<Round> rounds;
    for (std::size_t r = 0; r < tree.rounds(); ++r) rounds.push_back(tree.round(r));
    return ClassicalProtocolTree(tree.nx(), tree.ny(), tree.nz(), std::move(rounds), std::move(output));
}

// ---------------------------------------------------------------------------
// Exhaustive one-way optimum

OneWayOptimum brute_force_one_way(const Relation& f, const InputDistribution& mu, double epsilon) {
    const std::size_t nx = f.nx(), ny = f.ny(), nz = f.nz();
    if (mu.nx() != nx || mu.ny() != ny) throw DimensionMismatch("input distribution does not match the relation");
    if (nx > 16) throw BudgetExceeded("exhaustive one-way search supports |X| <= 16");
    const std::uint32_t full = (std::uint32_t(1) << nx) - 1;
    const std::size_t subsets = std::size_t(full) + 1;

    // value(B) = sum_y max_z sum_{x in B} mu(x,y) [f(x,y,z)]
    std::vector<double> value(subsets, 0.0);
    std::vector<double> acc(nz);
    for (std::uint32_t b = 1; b <= full; ++b) {
        double v = 0;
        for (std::size_t y = 0; y < ny; ++y) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t x = 0; x < nx; ++x)
                if (b >> x & 1)
                    for (std::size_t z = 0; z < nz; ++z)
                        if (f.ok(x, y, z)) acc[z] += mu(x, y);
            v += *std::max_element(acc.begin(), acc.end());
        }
        value[b] = v;
    }

    std::vector<std::vector<std::uint32_t>> choice;  // choice[c-1][S]
    std::vector<double> prev(value), cur(subsets);
    choice.emplace_back(subsets);
    for (std::uint32_t s = 0; s <= full; ++s) choice[0][s] = s;

    auto done = [&](const std::vector<double>& best, std::size_t c) -> std::optional<OneWayOptimum> {
        double err = std::max(0.0, 1.0 - best[full]);
        if (err > epsilon + 1e-12 && c < nx) return std::nullopt;
        OneWayOptimum o;
        o.messages = c;
        o.bits = c <= 1 ? 0 : int(std::bit_width(c - 1));
        o.error = err;
        o.message_of.assign(nx, 0);
        std::uint32_t rest = full;
        for (std::size_t level = c; level-- > 0 && rest;) {
            std::uint32_t part = choice[level][rest];
            for (std::size_t x = 0; x < nx; ++x)
                if (part >> x & 1) o.message_of[x] = std::uint32_t(c - 1 - level);
            rest &= ~part;
        }
        return o;
    };
    if (auto o = done(prev, 1)) return *o;

    for (std::size_t c = 2;; ++c) {
        choice.emplace_back(subsets);
        auto& ch = choice.back();
        cur[0] = 0;
        ch[0] = 0;
        for (std::uint32_t s = 1; s <= full; ++s) {
            const std::uint32_t low = s & (~s + 1);
            const std::uint32_t rest = s ^ low;
            double best = -1;
            std::uint32_t arg = s;
            // parts T = low | sub for every sub of rest
            for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
                const std::uint32_t part = low | sub;
                double v = value[part] + prev[s ^ part];
                if (v > best) {
                    best = v;
                    arg = part;
                }
                if (sub == 0) break;
            }
            cur[s] = best;
            ch[s] = arg;
        }
        std::swap(prev, cur);
        if (auto o = done(prev, c)) return *o;
    }
}

InputDistribution direct_sum_distribution(const InputDistribution& mu, int m) {
    if (m < 1) throw PreconditionError("direct sum needs m >= 1");
    std::size_t nx = 1, ny = 1;
    for (int i = 0; i < m; ++i) {
        nx *= mu.nx();
        ny *= mu.ny();
    }
    if (nx * ny > kDenseBudget) throw BudgetExceeded("direct sum input table too large");
    std::vector<double> t(nx * ny);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            double p = 1;
            std::size_t xx = x, yy = y;
            for (int i = 0; i < m; ++i) {
                p *= mu(xx % mu.nx(), yy % mu.ny());
                xx /= mu.nx();
                yy /= mu.ny();
            }
            t[x * ny + y] = p;
        }
    double sum = std::accumulate(t.begin(), t.end(), 0.0);
    for (double& v : t) v /= sum;
    return InputDistribution(nx, ny, std::move(t));
}

}  // namespace commlab
