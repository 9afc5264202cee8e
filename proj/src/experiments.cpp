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

#include "commlab/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "commlab/errors.hpp"
#include "commlab/rng.hpp"

namespace commlab {

namespace {

std::string num(double v) { return format_number(v); }
double r12(double v) { return round_number(v); }

Json estimate(double mean, double sigma) {
    return Json{{"mean", r12(mean)}, {"sigma", r12(sigma)}, {"low", r12(mean - 3 * sigma)}, {"high", r12(mean + 3 * sigma)}};
}

Json evaluation_json(const Evaluation& e) {
    Json j;
    j["trials"] = e.trials;
    j["error"] = estimate(e.error, e.error_sigma);
    j["mean_bits"] = r12(e.mean_bits);
    j["abort_rate"] = r12(e.abort_rate);
    if (e.exact_error) j["exact_error"] = r12(*e.exact_error);
    return j;
}

CsvTable trial_table(const Evaluation& e) {
    CsvTable t({"trial", "x", "y", "bits", "correct", "aborted"});
    for (std::size_t i = 0; i < e.records.size(); ++i) {
        const auto& r = e.records[i];
        t.add_row({std::to_string(i), std::to_string(r.x), std::to_string(r.y), std::to_string(r.bits),
                   r.correct ? "1" : "0", r.aborted ? "1" : "0"});
    }
    return t;
}

Json audit_json(const Corrector& c) {
    std::size_t good = 0;
    for (bool g : c.good) good += g ? 1 : 0;
    return Json{{"delta", r12(c.delta)},
                {"information", r12(c.information)},
                {"threshold", r12(c.threshold)},
                {"alpha", r12(c.alpha)},
                {"good_inputs", good},
                {"success_deviation", r12(c.audit.success_deviation)},
                {"leakage", r12(c.audit.leakage)},
                {"average_distance", r12(c.audit.average_distance)},
                {"pass", c.audit.passes(c.delta)}};
}

void require_trials(const ExperimentConfig& cfg) {
    if (cfg.trials == 0) throw PreconditionError("--trials must be positive for this experiment");
}

Report compress_classical(const ExperimentConfig& cfg, const Json& doc) {
    require_trials(cfg);
    auto inst = parse_classical(doc);
    const double delta = cfg.delta.value_or(0.25);
    CompressionOptions opt;
    opt.prepass_seed = derive_seed(cfg.seed, {1});
    opt.threads = cfg.threads;
    auto c = compress_multiround_classical(inst.tree, inst.relation, inst.inputs, delta, opt);
    auto original = evaluate_protocol(inst.tree, inst.relation, inst.inputs, cfg.trials, derive_seed(cfg.seed, {2}), cfg.threads);
    auto compressed =
        evaluate_protocol(c, inst.tree, inst.relation, inst.inputs, cfg.trials, derive_seed(cfg.seed, {3}), cfg.threads);
    const double exact = *original.exact_error;
    double identity = 0;
    for (std::size_t x = 0; x < inst.tree.nx(); ++x)
        for (std::size_t y = 0; y < inst.tree.ny(); ++y)
            identity = std::max(identity, product_identity_check(inst.tree, inst.inputs, c.averages, x, y));
    Report r;
    r.summary["parameters"] = Json{{"delta_tilde", r12(delta)}, {"delta", r12(c.delta)}, {"k_a", r12(c.k_a)},
                                   {"k_b", r12(c.k_b)}, {"rows", c.rows}, {"expected_bits", r12(c.expected_bits)},
                                   {"cut", r12(c.cut)}, {"log2_worst_case_rows", r12(c.log2_worst_case_rows)}};
    r.summary["original"] = evaluation_json(original);
    r.summary["compressed"] = evaluation_json(compressed);
    r.summary["error_bound"] = r12(exact + delta);
    r.summary["within_bound"] = compressed.error <= exact + delta + 3 * compressed.error_sigma;
    r.summary["product_identity"] = r12(identity);
    r.table = CsvTable({"trial", "x", "y", "bits", "correct", "aborted", "transcript"});
    for (std::size_t i = 0; i < compressed.records.size(); ++i) {
        const auto& t = compressed.records[i];
        r.table.add_row({std::to_string(i), std::to_string(t.x), std::to_string(t.y), std::to_string(t.bits),
                         t.correct ? "1" : "0", t.aborted ? "1" : "0", std::to_string(t.transcript)});
    }
    return r;
}

Report compress_quantum(const ExperimentConfig& cfg, const Json& doc) {
    require_trials(cfg);
    auto inst = parse_one_way(doc);
    const double delta = cfg.delta.value_or(0.2);
    auto c = compress_one_way(inst.protocol, inst.relation, inst.inputs, delta);
    auto ev = evaluate_compressed(c, inst.protocol, inst.relation, inst.inputs, cfg.trials, cfg.seed, cfg.threads);
    const double expected_beta = std::ceil(std::log2(std::ceil(std::log2(2 / delta) / c.corrector.alpha)));
    Report r;
    r.summary["corrector"] = audit_json(c.corrector);
    r.summary["copies"] = c.copies;
    r.summary["beta"] = c.beta;
    r.summary["beta_formula"] = r12(expected_beta);
    r.summary["block_success"] = r12(c.block_success);
    r.summary["exact_error"] = r12(c.exact_error);
    r.summary["predicted_error"] = r12(c.predicted_error);
    r.summary["compressed"] = evaluation_json(ev);
    r.summary["error_bound"] = r12(c.exact_error + delta);
    r.summary["within_bound"] = ev.error <= c.exact_error + delta + 3 * ev.error_sigma;
    r.table = trial_table(ev);
    return r;
}

Report compress_multiround(const ExperimentConfig& cfg, const Json& doc) {
    require_trials(cfg);
    auto inst = parse_two_way(doc);
    const double delta = cfg.delta.value_or(0.2);
    auto c = compress_multiround_quantum(inst.protocol, inst.relation, inst.inputs, inst.t_prime, delta);
    auto ev = evaluate_multiround(c, inst.protocol, inst.relation, inst.inputs, cfg.trials, cfg.seed, cfg.threads);
    Report r;
    r.summary["parameters"] = Json{{"t_prime", c.t_prime}, {"delta", r12(delta)}, {"delta_a", r12(c.delta_a)},
                                   {"delta_b", r12(c.delta_b)}, {"k_a", r12(c.privacy.k_a)}, {"k_b", r12(c.privacy.k_b)}};
    r.summary["alice"] = audit_json(c.alice);
    r.summary["bob"] = audit_json(c.bob);
    r.summary["r"] = r12(c.r);
    r.summary["claim_ratio"] = r12(c.claim_ratio);
    r.summary["claim_ratio_ok"] = std::abs(c.claim_ratio - 1) <= c.delta_b / 2 + 1e-9;
    r.summary["tail_mass"] = r12(c.tail_mass);
    r.summary["tail_fraction"] = estimate(ev.tail_fraction, ev.tail_sigma);
    r.summary["tail_bound"] = r12(std::sqrt(c.delta_b));
    r.summary["copies"] = c.copies;
    r.summary["set_size"] = c.set_size;
    r.summary["alice_bits"] = c.alice_bits;
    r.summary["bob_bits"] = c.bob_bits;
    r.summary["exact_error"] = r12(c.exact_error);
    r.summary["compressed"] = evaluation_json(ev.run);
    r.summary["error_bound"] = r12(c.exact_error + delta);
    r.summary["within_bound"] = ev.run.error <= c.exact_error + delta + 3 * ev.run.error_sigma;
    r.table = trial_table(ev.run);
    return r;
}

Report privacy(const ExperimentConfig&, const Json& doc) {
    Report r;
    r.table = CsvTable({"round", "k_a", "k_b"});
    const std::string kind = document_kind(doc);
    if (kind == "index-tradeoff") {
        auto t = parse_tradeoff(doc);
        auto d = index_tradeoff_demo(t.bits, t.prefix_bits);
        r.summary = Json{{"bits", t.bits}, {"prefix_bits", t.prefix_bits}, {"k_a", r12(d.k_a)}, {"k_b", r12(d.k_b)},
                         {"error", r12(d.error)}, {"alice_bits", d.alice_bits}, {"bob_bits", d.bob_bits}};
        r.table.add_row({"3", num(d.k_a), num(d.k_b)});
    } else if (kind == "classical-tree") {
        auto inst = parse_classical(doc);
        auto loss = privacy_loss_classical(inst.tree, inst.inputs);
        r.summary = Json{{"rounds", inst.tree.rounds()}, {"k_a", r12(loss.k_a)}, {"k_b", r12(loss.k_b)},
                         {"transcript_entropy", r12(transcript_entropy(inst.tree, inst.inputs))}};
        r.table.add_row({std::to_string(inst.tree.rounds()), num(loss.k_a), num(loss.k_b)});
    } else if (kind == "quantum-two-way") {
        auto inst = parse_two_way(doc);
        Json rounds = Json::array();
        for (std::size_t t = 0; t <= inst.protocol.rounds(); ++t) {
            auto loss = quantum_privacy_loss(inst.protocol, inst.inputs, t);
            rounds.push_back(Json{{"round", t}, {"k_a", r12(loss.k_a)}, {"k_b", r12(loss.k_b)}});
            r.table.add_row({std::to_string(t), num(loss.k_a), num(loss.k_b)});
        }
        auto last = quantum_privacy_loss(inst.protocol, inst.inputs, inst.protocol.rounds());
        r.summary = Json{{"rounds", rounds}, {"k_a", r12(last.k_a)}, {"k_b", r12(last.k_b)},
                         {"exact_error", r12(exact_error(inst.protocol, inst.relation, inst.inputs))}};
    } else {
        throw SchemaError("kind", "privacy needs an index-tradeoff, classical-tree or quantum-two-way document");
    }
    return r;
}

Report ersp(const ExperimentConfig& cfg, const Json& doc) {
    require_trials(cfg);
    auto d = parse_ersp(doc);
    ErspProtocol p(d.instance);
    Report r;
    r.table = CsvTable({"x", "trial", "j", "bits", "fidelity", "aborted"});
    Json inputs = Json::array();
    bool exact = true, bounded = true;
    for (std::size_t x = 0; x < d.instance.size(); ++x) {
        auto s = evaluate_ersp(p, x, cfg.trials, d.budget, cfg.seed, cfg.threads);
        exact = exact && s.min_fidelity >= 1 - 1e-9;
        bounded = bounded && s.mean_bits <= s.bits_bound;
        inputs.push_back(Json{{"x", x},
                              {"weight", r12(s.weight)},
                              {"cost", r12(s.cost)},
                              {"first_success", estimate(s.mean_j, s.sigma_j)},
                              {"mean_bits", r12(s.mean_bits)},
                              {"bits_bound", r12(s.bits_bound)},
                              {"min_fidelity", r12(s.min_fidelity)},
                              {"aborts", s.aborts}});
        for (std::size_t t = 0; t < s.records.size(); ++t) {
            const auto& rec = s.records[t];
            r.table.add_row({std::to_string(x), std::to_string(t), std::to_string(rec.j), std::to_string(rec.bits),
                             num(rec.fidelity), rec.aborted ? "1" : "0"});
        }
    }
    r.summary["budget"] = d.budget;
    r.summary["max_cost"] = r12(d.instance.max_cost());
    r.summary["inputs"] = inputs;
    r.summary["exact_outputs"] = exact;
    r.summary["bits_within_bound"] = bounded;
    return r;
}

Report eq_entangled(const ExperimentConfig& cfg, const Json& doc) {
    auto d = parse_partition(doc);
    auto part = build_partition(d.m, d.n, d.seed);
    auto check = check_partition(part);
    auto honest = acceptance_table(part, epr_prior(d.m));
    Report r;
    r.summary["M"] = d.m;
    r.summary["N"] = d.n;
    r.summary["partition_seed"] = d.seed;
    r.summary["bits"] = 4;
    r.summary["properties"] = Json{{"self_deviation", r12(check.self_deviation)},
                                   {"same_input_overlap", r12(check.same_input_overlap)},
                                   {"completeness", r12(check.completeness)},
                                   {"exact", check.exact()},
                                   {"max_cross_overlap", r12(check.max_cross_overlap)},
                                   {"mean_cross_overlap", r12(check.mean_cross_overlap)},
                                   {"cross_pairs", check.cross_pairs},
                                   {"cross_pairs_at_least_quarter", check.cross_exceeding}};
    r.summary["honest"] = Json{{"min_equal_accept", r12(honest.min_equal)},
                               {"max_unequal_accept", r12(honest.max_unequal)},
                               {"unequal_fraction_above_quarter", r12(honest.unequal_fraction)}};
    r.table = CsvTable({"rank_bound", "x", "x2", "accept"});
    auto add_table = [&](Index bound, const AcceptanceTable& t) {
        for (std::size_t x = 0; x < d.n; ++x)
            for (std::size_t x2 = 0; x2 < d.n; ++x2)
                r.table.add_row({std::to_string(bound), std::to_string(x), std::to_string(x2), num(t.accept[x * d.n + x2])});
    };
    add_table(d.m, honest);
    Json attacks = Json::array();
    for (Index b : d.rank_bounds) {
        auto a = truncation_attack(part, b);
        attacks.push_back(Json{{"rank_bound", b},
                               {"prior_distance", r12(a.prior_distance)},
                               {"entanglement", r12(a.entanglement)},
                               {"min_equal_accept", r12(a.attacked.min_equal)},
                               {"max_unequal_accept", r12(a.attacked.max_unequal)},
                               {"max_shift", r12(a.max_shift)},
                               {"below_13_20", a.below_threshold}});
        if (b != d.m) add_table(b, a.attacked);
    }
    r.summary["truncation"] = attacks;
    auto low = low_rank_approximation(epr_prior(d.m));
    r.summary["low_rank_prior"] = Json{{"entanglement", r12(low.entanglement)}, {"kept_rank", low.kept_rank},
                                       {"kept_mass", r12(low.kept_mass)}, {"distance", r12(low.distance)}};
    auto ev = low_dimension_evidence(part, d.subspace_dim, d.subspace_samples, cfg.seed);
    r.summary["low_dimension"] = Json{{"label", "statistical evidence"},
                                      {"subspace_dim", ev.subspace_dim},
                                      {"samples", ev.samples},
                                      {"worst_count", ev.worst_count},
                                      {"violations", ev.violations}};
    return r;
}

Report direct_sum(const ExperimentConfig&, const Json& doc) {
    auto d = parse_direct_sum(doc);
    auto one = brute_force_one_way(d.relation, d.inputs, d.epsilon);
    auto many = brute_force_one_way(d.relation.direct_sum(d.copies), direct_sum_distribution(d.inputs, d.copies), d.epsilon);
    Report r;
    r.summary["epsilon"] = r12(d.epsilon);
    r.summary["copies"] = d.copies;
    r.summary["single"] = Json{{"messages", one.messages}, {"bits", one.bits}, {"error", r12(one.error)}};
    r.summary["sum"] = Json{{"messages", many.messages}, {"bits", many.bits}, {"error", r12(many.error)}};
    if (one.bits > 0) r.summary["bits_ratio"] = r12(double(many.bits) / double(one.bits));
    r.summary["messages_ratio"] = r12(double(many.messages) / double(one.messages));
    r.table = CsvTable({"copies", "messages", "bits", "error"});
    r.table.add_row({"1", std::to_string(one.messages), std::to_string(one.bits), num(one.error)});
    r.table.add_row({std::to_string(d.copies), std::to_string(many.messages), std::to_string(many.bits), num(many.error)});
    return r;
}

Report corrector_audit(const ExperimentConfig& cfg, const Json& doc) {
    auto e = parse_ensemble(doc);
    auto c = build_corrector(e.states, e.distribution, cfg.delta.value_or(0.2));
    Report r;
    r.summary = audit_json(c);
    r.table = CsvTable({"x", "probability", "good", "weight", "divergence", "distance"});
    for (std::size_t x = 0; x < c.nx; ++x)
        r.table.add_row({std::to_string(x), num(e.distribution[x]), c.good[x] ? "1" : "0", num(c.weight[x]),
                         num(c.divergence[x]), num(c.audit.distance[x])});
    return r;
}

using Runner = std::function<Report(const ExperimentConfig&, const Json&)>;

const std::vector<std::pair<std::string, Runner>>& runners() {
    static const std::vector<std::pair<std::string, Runner>> table = {
        {"compress-classical", compress_classical}, {"compress-quantum", compress_quantum},
        {"compress-multiround", compress_multiround}, {"privacy", privacy},
        {"ersp", ersp}, {"eq-entangled", eq_entangled},
        {"direct-sum", direct_sum}, {"corrector-audit", corrector_audit},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, run] : runners()) n.push_back(name);
        return n;
    }();
    return names;
}

Report run_experiment(const ExperimentConfig& config, const Json& input) {
    for (const auto& [name, run] : runners()) {
        if (name != config.experiment) continue;
        if (config.delta && !(*config.delta > 0 && *config.delta < 1)) throw PreconditionError("--delta must lie in (0, 1)");
        Report r = run(config, input);
        Json echo{{"experiment", config.experiment}, {"input", config.input}, {"seed", config.seed}, {"trials", config.trials}};
        if (config.delta) echo["delta"] = r12(*config.delta);
        Json out{{"config", echo}, {"kind", document_kind(input)}};
        for (auto it = r.summary.begin(); it != r.summary.end(); ++it) out[it.key()] = it.value();
        r.summary = std::move(out);
        return r;
    }
    throw PreconditionError("unknown experiment \"" + config.experiment + "\"");
}

void write_report(const Report& report, const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out);
    const fs::path base = fs::path(config.out) / config.experiment;
    std::ofstream js(base.string() + ".json", std::ios::binary);
    js << report.summary.dump(2) << '\n';
    std::ofstream csv(base.string() + ".csv", std::ios::binary);
    report.table.write(csv);
    if (!js || !csv) throw std::runtime_error("cannot write report files under " + config.out);
}

}  // namespace commlab
