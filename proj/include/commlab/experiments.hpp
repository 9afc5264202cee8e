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

// Seeded experiments behind the command-line runner. A run is a pure
// function of (experiment, input document, seed, trials, delta); the
// thread count only changes wall time.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "commlab/io.hpp"

namespace commlab {

struct ExperimentConfig {
    std::string experiment;
    std::string input;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::optional<double> delta;
    std::string out;
    unsigned threads = 1;
};

struct Report {
    Json summary;
    CsvTable table;
};

const std::vector<std::string>& experiment_names();

/// Throws SchemaError for unusable documents and the library's errors for
/// failed preconditions.
Report run_experiment(const ExperimentConfig& config, const Json& input);

/// Writes <out>/<experiment>.json and <out>/<experiment>.csv.
void write_report(const Report& report, const ExperimentConfig& config);

}  // namespace commlab
