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

// commlab run --experiment NAME --input FILE --seed S --trials N [--delta D] [--out DIR] [--threads T]
// commlab validate FILE...

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commlab/errors.hpp"
#include "commlab/experiments.hpp"

namespace {

int run(const commlab::ExperimentConfig& cfg) {
    try {
        const auto doc = commlab::load_json(cfg.input);
        const auto report = commlab::run_experiment(cfg, doc);
        if (cfg.out.empty()) {
            std::cout << report.summary.dump(2) << '\n';
        } else {
            commlab::write_report(report, cfg);
            std::cout << "wrote " << cfg.out << "/" << cfg.experiment << ".{json,csv}\n";
        }
        return 0;
    } catch (const commlab::BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int validate(const std::vector<std::string>& files) {
    int status = 0;
    for (const auto& f : files) {
        const auto diags = commlab::validate_file(f);
        if (diags.empty()) {
            std::cout << f << ": ok\n";
            continue;
        }
        status = 1;
        for (const auto& d : diags) std::cout << f << ": " << d << '\n';
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seeded communication-protocol experiments"};
    app.require_subcommand(1);

    commlab::ExperimentConfig cfg;
    double delta = 0;
    auto* run_cmd = app.add_subcommand("run", "Run one experiment and write its report");
    run_cmd->add_option("--experiment", cfg.experiment, "Experiment name")
        ->required()
        ->check(CLI::IsMember(commlab::experiment_names()));
    run_cmd->add_option("--input", cfg.input, "Instance document (JSON)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", cfg.seed, "Master seed")->required();
    run_cmd->add_option("--trials", cfg.trials, "Monte Carlo trials")->required();
    auto* delta_opt = run_cmd->add_option("--delta", delta, "Error slack (delta, or delta-tilde for compress-classical)");
    run_cmd->add_option("--out", cfg.out, "Output directory; prints the summary when omitted");
    run_cmd->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::Range(1u, 256u));

    std::vector<std::string> files;
    auto* val_cmd = app.add_subcommand("validate", "Check instance documents");
    val_cmd->add_option("files", files, "Documents to check")->required();

    CLI11_PARSE(app, argc, argv);
    if (*run_cmd) {
        if (*delta_opt) cfg.delta = delta;
        return run(cfg);
    }
    return validate(files);
}
