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

#include "commlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "commlab/errors.hpp"
#include "commlab/random.hpp"

namespace commlab {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& field(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path.empty() ? "document" : path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path.empty() ? "document" : path, "missing field \"" + key + "\"");
    return *it;
}

const Json& array(const Json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    return j;
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw SchemaError(path, "number is not finite");
    return v;
}

std::uint64_t count(const Json& j, const std::string& path) {
    if (!j.is_number_unsigned()) throw SchemaError(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

std::uint64_t count_field(const Json& j, const std::string& key, const std::string& path) {
    return count(field(j, key, path), join(path, key));
}

template <typename T>
T count_or(const Json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.contains(key)) return fallback;
    return T(count(j.at(key), join(path, key)));
}

std::complex<double> complex_value(const Json& j, const std::string& path) {
    if (j.is_number()) return {number(j, path), 0.0};
    if (j.is_array() && j.size() == 2) return {number(j[0], at(path, 0)), number(j[1], at(path, 1))};
    throw SchemaError(path, "expected a complex number [re, im]");
}

// Converts invariant failures raised by constructors into path-tagged errors.
template <typename F>
auto guarded(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        throw SchemaError(path.empty() ? "document" : path, e.what());
    }
}

std::size_t line_of(const std::string& text, std::size_t byte, std::size_t& column) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    column = col;
    return line;
}

void check_povm(const std::vector<std::vector<MatrixXc>>& povm, Index dim, const std::string& path) {
    for (std::size_t y = 0; y < povm.size(); ++y) {
        if (povm[y].empty()) throw SchemaError(at(path, y), "measurement has no outcomes");
        MatrixXc total = -MatrixXc::Identity(dim, dim);
        for (std::size_t z = 0; z < povm[y].size(); ++z) {
            if (povm[y][z].rows() != dim || povm[y][z].cols() != dim)
                throw SchemaError(at(at(path, y), z), "element must be " + std::to_string(dim) + " x " + std::to_string(dim));
            total += povm[y][z];
        }
        const double dev = max_entry<double>(total);
        if (dev > 1e-10)
            throw SchemaError(at(path, y), "POVM elements do not sum to the identity (max deviation " + format_number(dev) + ")");
    }
}

std::vector<std::vector<MatrixXc>> parse_matrix_table(const Json& j, const std::string& path) {
    std::vector<std::vector<MatrixXc>> out;
    for (std::size_t a = 0; a < array(j, path).size(); ++a) {
        const std::string pa = at(path, a);
        out.emplace_back();
        for (std::size_t b = 0; b < array(j[a], pa).size(); ++b) out.back().push_back(parse_matrix(j[a][b], at(pa, b)));
    }
    return out;
}

const Json* preset(const Json& doc) {
    auto it = doc.find("preset");
    return it == doc.end() ? nullptr : &*it;
}

std::string preset_name(const Json& p) {
    const Json& n = field(p, "name", "preset");
    if (!n.is_string()) throw SchemaError("preset.name", "expected a string");
    return n.get<std::string>();
}

InputDistribution inputs_or_uniform(const Json& doc, std::size_t nx, std::size_t ny) {
    if (!doc.contains("inputs"))
        return JointDistribution::product(Distribution::uniform(nx), Distribution::uniform(ny));
    return parse_inputs(doc.at("inputs"), nx, ny, "inputs");
}

void expect_kind(const Json& doc, const char* kind) {
    if (document_kind(doc) != kind) throw SchemaError("kind", std::string("expected \"") + kind + "\"");
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t col = 0;
        const std::size_t line = line_of(text, e.byte > 0 ? e.byte - 1 : 0, col);
        throw SchemaError(source + ":" + std::to_string(line) + ":" + std::to_string(col), "malformed JSON");
    }
}

Json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path, "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_json_text(buf.str(), path);
}

std::string document_kind(const Json& doc) {
    const Json& k = field(doc, "kind", "");
    if (!k.is_string()) throw SchemaError("kind", "expected a string");
    return k.get<std::string>();
}

MatrixXc parse_matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) throw SchemaError(at(path, 0), "expected a non-empty row");
    const std::size_t cols = j[0].size();
    MatrixXc m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string pr = at(path, r);
        if (!j[r].is_array() || j[r].size() != cols) throw SchemaError(pr, "row length differs from " + std::to_string(cols));
        for (std::size_t c = 0; c < cols; ++c) m(Index(r), Index(c)) = complex_value(j[r][c], at(pr, c));
    }
    return m;
}

VectorXc parse_vector(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty array");
    VectorXc v(Index(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(Index(i)) = complex_value(j[i], at(path, i));
    return v;
}

Distribution parse_distribution(const Json& j, std::size_t expected, const std::string& path) {
    if (j.is_string() && j.get<std::string>() == "uniform") {
        if (expected == 0) throw SchemaError(path, "\"uniform\" needs a known alphabet size");
        return Distribution::uniform(expected);
    }
    if (!j.is_object() || j.empty()) throw SchemaError(path, "expected {label: probability} or \"uniform\"");
    std::vector<std::string> labels;
    std::vector<double> probs;
    for (auto it = j.begin(); it != j.end(); ++it) {
        labels.push_back(it.key());
        probs.push_back(number(it.value(), join(path, it.key())));
    }
    if (expected > 0 && labels.size() != expected)
        throw SchemaError(path, "expected " + std::to_string(expected) + " labels, found " + std::to_string(labels.size()));
    return guarded(path, [&] { return Distribution(std::move(labels), std::move(probs)); });
}

InputDistribution parse_inputs(const Json& j, std::size_t nx, std::size_t ny, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    if (j.contains("joint")) {
        const std::string pj = join(path, "joint");
        const Json& t = array(j.at("joint"), pj);
        if (t.size() != nx) throw SchemaError(pj, "expected " + std::to_string(nx) + " rows");
        std::vector<double> table;
        for (std::size_t x = 0; x < nx; ++x) {
            if (!t[x].is_array() || t[x].size() != ny) throw SchemaError(at(pj, x), "expected " + std::to_string(ny) + " entries");
            for (std::size_t y = 0; y < ny; ++y) table.push_back(number(t[x][y], at(at(pj, x), y)));
        }
        return guarded(pj, [&] { return JointDistribution(nx, ny, std::move(table)); });
    }
    Distribution px = parse_distribution(field(j, "x", path), nx, join(path, "x"));
    Distribution py = parse_distribution(field(j, "y", path), ny, join(path, "y"));
    return JointDistribution::product(px, py);
}

Relation parse_relation(const Json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    if (j.contains("name")) {
        const std::string name = j.at("name").is_string() ? j.at("name").get<std::string>() : "";
        const int bits = int(count_field(j, "bits", path));
        if (bits < 1 || bits > 12) throw SchemaError(join(path, "bits"), "must lie in [1, 12]");
        return guarded(path, [&] {
            if (name == "equality") return Relation::equality(bits);
            if (name == "index") return index_relation(bits);
            if (name == "inner-product") return inner_product_relation(bits);
            throw SchemaError(join(path, "name"), "unknown relation \"" + name + "\"");
        });
    }
    const std::size_t nz = count_field(j, "outputs", path);
    if (nz < 1) throw SchemaError(join(path, "outputs"), "must be positive");
    const bool function = j.contains("function");
    const std::string pt = join(path, function ? "function" : "allowed");
    const Json& t = array(field(j, function ? "function" : "allowed", path), pt);
    const std::size_t nx = t.size();
    if (nx == 0 || !t[0].is_array()) throw SchemaError(pt, "expected one row per x");
    const std::size_t ny = t[0].size();
    std::vector<std::uint8_t> table(nx * ny * nz, 0);
    for (std::size_t x = 0; x < nx; ++x) {
        if (!t[x].is_array() || t[x].size() != ny) throw SchemaError(at(pt, x), "expected " + std::to_string(ny) + " entries");
        for (std::size_t y = 0; y < ny; ++y) {
            const std::string pxy = at(at(pt, x), y);
            std::vector<std::uint64_t> zs;
            if (function) {
                zs.push_back(count(t[x][y], pxy));
            } else {
                for (std::size_t k = 0; k < array(t[x][y], pxy).size(); ++k) zs.push_back(count(t[x][y][k], at(pxy, k)));
            }
            for (auto z : zs) {
                if (z >= nz) throw SchemaError(pxy, "output " + std::to_string(z) + " out of range");
                table[(x * ny + y) * nz + z] = 1;
            }
        }
    }
    return guarded(pt, [&] { return Relation(nx, ny, nz, std::move(table)); });
}

ClassicalInstance parse_classical(const Json& doc) {
    expect_kind(doc, "classical-tree");
    if (const Json* p = preset(doc)) {
        const std::string name = preset_name(*p);
        if (name == "index-tradeoff") {
            const int bits = int(count_field(*p, "bits", "preset"));
            const int prefix = int(count_field(*p, "prefix_bits", "preset"));
            auto tree = guarded("preset", [&] { return index_tradeoff_tree(bits, prefix); });
            Relation f = doc.contains("relation") ? parse_relation(doc.at("relation"), "relation") : index_relation(bits);
            auto mu = inputs_or_uniform(doc, tree.nx(), tree.ny());
            return {std::move(tree), std::move(f), std::move(mu)};
        }
        if (name == "random") {
            const std::size_t nx = count_field(*p, "nx", "preset"), ny = count_field(*p, "ny", "preset");
            Relation f = parse_relation(field(doc, "relation", ""), "relation");
            if (f.nx() != nx || f.ny() != ny) throw SchemaError("relation", "alphabet sizes differ from the preset");
            std::vector<std::size_t> alphabets;
            const Json& al = array(field(*p, "alphabets", "preset"), "preset.alphabets");
            for (std::size_t r = 0; r < al.size(); ++r) alphabets.push_back(count(al[r], at("preset.alphabets", r)));
            Rng rng(count_field(*p, "seed", "preset"));
            const double sparsity = p->contains("sparsity") ? number(p->at("sparsity"), "preset.sparsity") : 0.3;
            auto tree = guarded("preset", [&] { return random_protocol_tree(nx, ny, f.nz(), alphabets, rng, sparsity); });
            auto mu = inputs_or_uniform(doc, nx, ny);
            tree = with_output(tree, bayes_output(tree, f, mu));
            return {std::move(tree), std::move(f), std::move(mu)};
        }
        throw SchemaError("preset.name", "unknown classical preset \"" + name + "\"");
    }
    const std::size_t nx = count_field(doc, "nx", ""), ny = count_field(doc, "ny", "");
    Relation f = parse_relation(field(doc, "relation", ""), "relation");
    if (f.nx() != nx || f.ny() != ny) throw SchemaError("relation", "alphabet sizes differ from nx, ny");
    const Json& rs = array(field(doc, "rounds", ""), "rounds");
    std::vector<Round> rounds;
    std::size_t prefixes = 1;
    for (std::size_t r = 0; r < rs.size(); ++r) {
        const std::string pr = at("rounds", r);
        Round round;
        round.alphabet = count_field(rs[r], "alphabet", pr);
        if (round.alphabet < 1) throw SchemaError(join(pr, "alphabet"), "must be positive");
        const std::size_t inputs = r % 2 == 0 ? nx : ny;
        const std::string pk = join(pr, "kernel");
        const Json& ks = array(field(rs[r], "kernel", pr), pk);
        if (ks.size() != inputs)
            throw SchemaError(pk, "expected one table per " + std::string(r % 2 == 0 ? "x" : "y") + " (" +
                                      std::to_string(inputs) + ")");
        for (std::size_t i = 0; i < inputs; ++i) {
            const std::string pi = at(pk, i);
            const Json& rows = array(ks[i], pi);
            if (rows.size() != prefixes) throw SchemaError(pi, "expected " + std::to_string(prefixes) + " rows, one per prefix");
            std::vector<Eigen::Triplet<double>> trip;
            for (std::size_t s = 0; s < prefixes; ++s) {
                const std::string ps = at(pi, s);
                if (!rows[s].is_array() || rows[s].size() != round.alphabet)
                    throw SchemaError(ps, "expected " + std::to_string(round.alphabet) + " probabilities");
                double sum = 0;
                for (std::size_t a = 0; a < round.alphabet; ++a) {
                    const double v = number(rows[s][a], at(ps, a));
                    if (v < 0) throw SchemaError(at(ps, a), "negative probability");
                    sum += v;
                    if (v > 0) trip.emplace_back(Index(s), Index(a), v);
                }
                if (std::abs(sum - 1) > 1e-9) throw SchemaError(ps, "row sums to " + format_number(sum) + ", expected 1");
            }
            Kernel k{Index(prefixes), Index(round.alphabet)};
            k.setFromTriplets(trip.begin(), trip.end());
            round.kernel.push_back(std::move(k));
        }
        prefixes *= round.alphabet;
        if (prefixes > (std::size_t(1) << 20)) throw SchemaError(pr, "more than 2^20 transcripts");
        rounds.push_back(std::move(round));
    }
    auto mu = inputs_or_uniform(doc, nx, ny);
    std::vector<std::vector<std::uint32_t>> output(ny, std::vector<std::uint32_t>(prefixes, 0));
    const bool explicit_output = doc.contains("output");
    if (explicit_output) {
        const Json& o = array(doc.at("output"), "output");
        if (o.size() != ny) throw SchemaError("output", "expected one row per y");
        for (std::size_t y = 0; y < ny; ++y) {
            if (!o[y].is_array() || o[y].size() != prefixes)
                throw SchemaError(at("output", y), "expected " + std::to_string(prefixes) + " outputs, one per transcript");
            for (std::size_t s = 0; s < prefixes; ++s) {
                const auto z = count(o[y][s], at(at("output", y), s));
                if (z >= f.nz()) throw SchemaError(at(at("output", y), s), "output out of range");
                output[y][s] = std::uint32_t(z);
            }
        }
    }
    auto tree = guarded("rounds", [&] { return ClassicalProtocolTree(nx, ny, f.nz(), std::move(rounds), output); });
    if (!explicit_output) tree = with_output(tree, bayes_output(tree, f, mu));
    return {std::move(tree), std::move(f), std::move(mu)};
}

OneWayInstance parse_one_way(const Json& doc) {
    expect_kind(doc, "quantum-one-way");
    if (const Json* p = preset(doc)) {
        const std::string name = preset_name(*p);
        if (name == "index") {
            const int bits = int(count_field(*p, "bits", "preset"));
            const int sent = int(count_field(*p, "sent", "preset"));
            auto proto = guarded("preset", [&] { return index_one_way_protocol(bits, sent); });
            auto mu = inputs_or_uniform(doc, proto.nx(), proto.ny());
            return {std::move(proto), index_relation(bits), std::move(mu)};
        }
        if (name == "random") {
            Relation f = parse_relation(field(doc, "relation", ""), "relation");
            Rng rng(count_field(*p, "seed", "preset"));
            auto proto = guarded("preset", [&] {
                return random_one_way_protocol(f.nx(), f.ny(), f.nz(), Index(count_field(*p, "keep_dim", "preset")),
                                               Index(count_field(*p, "message_dim", "preset")), rng);
            });
            auto mu = inputs_or_uniform(doc, f.nx(), f.ny());
            return {std::move(proto), std::move(f), std::move(mu)};
        }
        throw SchemaError("preset.name", "unknown one-way preset \"" + name + "\"");
    }
    const Index keep = Index(count_field(doc, "keep_dim", "")), msg = Index(count_field(doc, "message_dim", ""));
    if (keep < 1 || msg < 1) throw SchemaError("document", "register dimensions must be positive");
    Relation f = parse_relation(field(doc, "relation", ""), "relation");
    const Json& st = array(field(doc, "states", ""), "states");
    if (st.size() != f.nx()) throw SchemaError("states", "expected one state per x (" + std::to_string(f.nx()) + ")");
    std::vector<VectorXc> psi;
    for (std::size_t x = 0; x < st.size(); ++x) {
        VectorXc v = parse_vector(st[x], at("states", x));
        if (v.size() != keep * msg) throw SchemaError(at("states", x), "length must be keep_dim * message_dim");
        if (std::abs(v.squaredNorm() - 1) > 1e-9) throw SchemaError(at("states", x), "state is not normalized");
        psi.push_back(std::move(v));
    }
    auto povm = parse_matrix_table(field(doc, "povm", ""), "povm");
    if (povm.size() != f.ny()) throw SchemaError("povm", "expected one measurement per y (" + std::to_string(f.ny()) + ")");
    check_povm(povm, msg, "povm");
    for (std::size_t y = 0; y < povm.size(); ++y)
        if (povm[y].size() != f.nz()) throw SchemaError(at("povm", y), "expected one element per output");
    auto proto = guarded("document", [&] { return QuantumOneWayProtocol(keep, msg, std::move(psi), std::move(povm)); });
    auto mu = inputs_or_uniform(doc, f.nx(), f.ny());
    return {std::move(proto), std::move(f), std::move(mu)};
}

TwoWayInstance parse_two_way(const Json& doc) {
    expect_kind(doc, "quantum-two-way");
    const std::size_t t_prime = count_or<std::size_t>(doc, "t_prime", "", 1);
    if (const Json* p = preset(doc)) {
        const std::string name = preset_name(*p);
        if (name == "inner-product") {
            const int bits = int(count_field(*p, "bits", "preset"));
            auto proto = guarded("preset", [&] { return inner_product_protocol(bits); });
            auto mu = inputs_or_uniform(doc, proto.nx(), proto.ny());
            return {std::move(proto), inner_product_relation(bits), std::move(mu), t_prime};
        }
        if (name == "random") {
            Relation f = parse_relation(field(doc, "relation", ""), "relation");
            Rng rng(count_field(*p, "seed", "preset"));
            auto proto = guarded("preset", [&] {
                return random_two_way_protocol(f.nx(), f.ny(), f.nz(), Index(count_field(*p, "da", "preset")),
                                               Index(count_field(*p, "dc", "preset")), Index(count_field(*p, "db", "preset")),
                                               count_field(*p, "rounds", "preset"), rng);
            });
            auto mu = inputs_or_uniform(doc, f.nx(), f.ny());
            return {std::move(proto), std::move(f), std::move(mu), t_prime};
        }
        throw SchemaError("preset.name", "unknown two-way preset \"" + name + "\"");
    }
    Relation f = parse_relation(field(doc, "relation", ""), "relation");
    const Index da = Index(count_field(doc, "da", "")), dc = Index(count_field(doc, "dc", "")),
                db = Index(count_field(doc, "db", ""));
    auto unitaries = parse_matrix_table(field(doc, "unitaries", ""), "unitaries");
    for (std::size_t r = 0; r < unitaries.size(); ++r) {
        const std::size_t inputs = r % 2 == 0 ? f.nx() : f.ny();
        if (unitaries[r].size() != inputs) throw SchemaError(at("unitaries", r), "expected one unitary per input");
        for (std::size_t i = 0; i < inputs; ++i)
            if (!is_unitary<double>(unitaries[r][i], 1e-9)) throw SchemaError(at(at("unitaries", r), i), "matrix is not unitary");
    }
    auto povm = parse_matrix_table(field(doc, "povm", ""), "povm");
    if (povm.size() != f.ny()) throw SchemaError("povm", "expected one measurement per y");
    check_povm(povm, dc * db, "povm");
    auto proto = guarded("document", [&] {
        return QuantumTwoWayProtocol(f.nx(), f.ny(), da, dc, db, std::move(unitaries), std::move(povm));
    });
    auto mu = inputs_or_uniform(doc, f.nx(), f.ny());
    return {std::move(proto), std::move(f), std::move(mu), t_prime};
}

EnsembleInstance parse_ensemble(const Json& doc) {
    expect_kind(doc, "ensemble");
    QuantumOneWayProtocol proto;
    if (const Json* p = preset(doc)) {
        if (preset_name(*p) != "random") throw SchemaError("preset.name", "unknown ensemble preset");
        Rng rng(count_field(*p, "seed", "preset"));
        proto = guarded("preset", [&] {
            return random_one_way_protocol(count_field(*p, "nx", "preset"), 1, 1, Index(count_field(*p, "keep_dim", "preset")),
                                           Index(count_field(*p, "message_dim", "preset")), rng);
        });
    } else {
        const Index keep = Index(count_field(doc, "keep_dim", "")), msg = Index(count_field(doc, "message_dim", ""));
        if (keep < 1 || msg < 1) throw SchemaError("document", "register dimensions must be positive");
        const Json& st = array(field(doc, "states", ""), "states");
        std::vector<VectorXc> psi;
        for (std::size_t x = 0; x < st.size(); ++x) {
            VectorXc v = parse_vector(st[x], at("states", x));
            if (v.size() != keep * msg) throw SchemaError(at("states", x), "length must be keep_dim * message_dim");
            if (std::abs(v.squaredNorm() - 1) > 1e-9) throw SchemaError(at("states", x), "state is not normalized");
            psi.push_back(std::move(v));
        }
        if (psi.empty()) throw SchemaError("states", "ensemble is empty");
        proto = guarded("states", [&] {
            return QuantumOneWayProtocol(keep, msg, std::move(psi), {{MatrixXc::Identity(msg, msg)}});
        });
    }
    EnsembleInstance e;
    for (std::size_t x = 0; x < proto.nx(); ++x) e.states.push_back(proto.phi(x));
    e.distribution = doc.contains("distribution") ? parse_distribution(doc.at("distribution"), proto.nx(), "distribution")
                                                  : Distribution::uniform(proto.nx());
    return e;
}

ErspDocument parse_ersp(const Json& doc) {
    expect_kind(doc, "ersp-instance");
    DensityMatrix sigma = guarded("sigma", [&] { return DensityMatrix(parse_matrix(field(doc, "sigma", ""), "sigma")); });
    ErspDocument out;
    if (doc.contains("targets")) {
        const Json& t = array(doc.at("targets"), "targets");
        std::vector<VectorXc> v;
        for (std::size_t x = 0; x < t.size(); ++x) {
            v.push_back(parse_vector(t[x], at("targets", x)));
            if (v.back().size() != sigma.dim()) throw SchemaError(at("targets", x), "dimension differs from sigma");
        }
        out.instance = guarded("targets", [&] { return ErspInstance(std::move(v), sigma); });
    } else {
        const Json& t = array(field(doc, "rho", ""), "rho");
        std::vector<DensityMatrix> rho;
        for (std::size_t x = 0; x < t.size(); ++x)
            rho.push_back(guarded(at("rho", x), [&] { return DensityMatrix(parse_matrix(t[x], at("rho", x))); }));
        out.instance = guarded("rho", [&] { return ErspInstance::from_density(rho, sigma); });
    }
    out.budget = count_or<std::uint64_t>(doc, "budget", "", out.budget);
    if (out.budget < 1) throw SchemaError("budget", "must be at least 1");
    return out;
}

PartitionDocument parse_partition(const Json& doc) {
    expect_kind(doc, "subspace-partition");
    PartitionDocument p;
    p.m = Index(count_field(doc, "M", ""));
    p.n = count_field(doc, "N", "");
    p.seed = count_or<std::uint64_t>(doc, "seed", "", p.seed);
    if (p.m < kBlocks || p.m % kBlocks != 0) throw SchemaError("M", "must be a positive multiple of 16");
    if (p.n < 1) throw SchemaError("N", "must be positive");
    if (doc.contains("rank_bounds")) {
        const Json& r = array(doc.at("rank_bounds"), "rank_bounds");
        for (std::size_t i = 0; i < r.size(); ++i) {
            p.rank_bounds.push_back(Index(count(r[i], at("rank_bounds", i))));
            if (p.rank_bounds.back() < 1) throw SchemaError(at("rank_bounds", i), "must be at least 1");
        }
    } else {
        p.rank_bounds = {1, p.m / 4, p.m};
    }
    p.subspace_dim = count_or<Index>(doc, "subspace_dim", "", 1);
    p.subspace_samples = count_or<std::size_t>(doc, "subspace_samples", "", p.subspace_samples);
    if (p.subspace_dim < 1 || p.subspace_dim > p.m) throw SchemaError("subspace_dim", "must lie in [1, M]");
    return p;
}

DirectSumDocument parse_direct_sum(const Json& doc) {
    expect_kind(doc, "direct-sum");
    DirectSumDocument d;
    d.relation = parse_relation(field(doc, "relation", ""), "relation");
    d.inputs = inputs_or_uniform(doc, d.relation.nx(), d.relation.ny());
    d.copies = int(count_or<std::size_t>(doc, "copies", "", 2));
    if (d.copies < 1) throw SchemaError("copies", "must be at least 1");
    if (doc.contains("epsilon")) d.epsilon = number(doc.at("epsilon"), "epsilon");
    if (!(d.epsilon >= 0 && d.epsilon < 1)) throw SchemaError("epsilon", "must lie in [0, 1)");
    std::size_t nx = 1;
    for (int k = 0; k < d.copies; ++k) nx *= d.relation.nx();
    if (nx > 16) throw SchemaError("copies", "exhaustive search needs at most 16 inputs for Alice in the sum");
    return d;
}

TradeoffDocument parse_tradeoff(const Json& doc) {
    expect_kind(doc, "index-tradeoff");
    TradeoffDocument t;
    t.bits = int(count_field(doc, "bits", ""));
    t.prefix_bits = int(count_field(doc, "prefix_bits", ""));
    if (t.bits < 1 || (t.bits & (t.bits - 1)) != 0) throw SchemaError("bits", "must be a power of two");
    if (t.prefix_bits < 0 || (1 << t.prefix_bits) > t.bits) throw SchemaError("prefix_bits", "must satisfy 2^prefix_bits <= bits");
    return t;
}

std::vector<std::string> validate_document(const Json& doc) {
    static const std::vector<std::pair<std::string, std::function<void(const Json&)>>> parsers = {
        {"classical-tree", [](const Json& d) { parse_classical(d); }},
        {"quantum-one-way", [](const Json& d) { parse_one_way(d); }},
        {"quantum-two-way", [](const Json& d) { parse_two_way(d); }},
        {"ensemble", [](const Json& d) { parse_ensemble(d); }},
        {"ersp-instance", [](const Json& d) { parse_ersp(d); }},
        {"subspace-partition", [](const Json& d) { parse_partition(d); }},
        {"direct-sum", [](const Json& d) { parse_direct_sum(d); }},
        {"index-tradeoff", [](const Json& d) { parse_tradeoff(d); }},
    };
    try {
        const std::string kind = document_kind(doc);
        for (const auto& [name, parse] : parsers)
            if (name == kind) {
                parse(doc);
                return {};
            }
        return {"kind: unknown document kind \"" + kind + "\""};
    } catch (const SchemaError& e) {
        return {e.what()};
    } catch (const std::exception& e) {
        return {std::string("document: ") + e.what()};
    }
}

std::vector<std::string> validate_file(const std::string& path) {
    try {
        return validate_document(load_json(path));
    } catch (const std::exception& e) {
        return {e.what()};
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round_number(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(format_number(v).c_str(), nullptr);
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw DimensionMismatch("CSV row width differs from the header");
    rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
}

}  // namespace commlab
