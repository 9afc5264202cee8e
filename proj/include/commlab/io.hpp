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

// JSON instance documents. Every document is an object with a "kind"
// field. Complex numbers are [re, im] pairs (a bare number is real),
// vectors are arrays of them, matrices arrays of rows, and distributions
// {label: probability} objects whose key order fixes the index order.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "commlab/cproto.hpp"
#include "commlab/entres.hpp"
#include "commlab/ersp.hpp"
#include "commlab/qproto.hpp"

namespace commlab {

using Json = nlohmann::ordered_json;

/// A document field is missing, malformed or violates an invariant.
class SchemaError : public std::invalid_argument {
  public:
    SchemaError(std::string path, const std::string& message)
        : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

/// Reads and parses a file; syntax errors carry line and column.
Json load_json(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& source);

std::string document_kind(const Json& doc);

MatrixXc parse_matrix(const Json& j, const std::string& path);
VectorXc parse_vector(const Json& j, const std::string& path);
/// Either a {label: p} object or the string "uniform" (needs expected > 0).
Distribution parse_distribution(const Json& j, std::size_t expected, const std::string& path);
/// {"x": ..., "y": ...} product form or {"joint": [[...]]}.
InputDistribution parse_inputs(const Json& j, std::size_t nx, std::size_t ny, const std::string& path);
/// {"name": "equality" | "index" | "inner-product", "bits": n},
/// {"function": [[z per y] per x], "outputs": nz} or
/// {"allowed": [[[z...] per y] per x], "outputs": nz}.
Relation parse_relation(const Json& j, const std::string& path);

struct ClassicalInstance {
    ClassicalProtocolTree tree;
    Relation relation;
    InputDistribution inputs;
};

struct OneWayInstance {
    QuantumOneWayProtocol protocol;
    Relation relation;
    InputDistribution inputs;
};

struct TwoWayInstance {
    QuantumTwoWayProtocol protocol;
    Relation relation;
    InputDistribution inputs;
    std::size_t t_prime = 1;
};

struct EnsembleInstance {
    std::vector<BipartitePureState> states;
    Distribution distribution;
};

struct ErspDocument {
    ErspInstance instance;
    std::uint64_t budget = std::uint64_t(1) << 20;
};

struct PartitionDocument {
    Index m = 32;
    std::size_t n = 8;
    std::uint64_t seed = 1;
    std::vector<Index> rank_bounds;
    Index subspace_dim = 1;
    std::size_t subspace_samples = 200;
};

struct DirectSumDocument {
    Relation relation;
    InputDistribution inputs;
    int copies = 2;
    double epsilon = 0.125;
};

struct TradeoffDocument {
    int bits = 8;
    int prefix_bits = 1;
};

ClassicalInstance parse_classical(const Json& doc);
OneWayInstance parse_one_way(const Json& doc);
TwoWayInstance parse_two_way(const Json& doc);
EnsembleInstance parse_ensemble(const Json& doc);
ErspDocument parse_ersp(const Json& doc);
PartitionDocument parse_partition(const Json& doc);
DirectSumDocument parse_direct_sum(const Json& doc);
TradeoffDocument parse_tradeoff(const Json& doc);

/// Builds the object a document describes; returns one diagnostic per
/// problem found (empty when the document is valid). Never throws.
std::vector<std::string> validate_document(const Json& doc);
std::vector<std::string> validate_file(const std::string& path);

/// 12 significant digits.
std::string format_number(double v);
/// v rounded to 12 significant digits, for JSON output.
double round_number(double v);

/// Minimal CSV table with a fixed header.
class CsvTable {
  public:
    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    void add_row(std::vector<std::string> row);
    void write(std::ostream& out) const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace commlab
