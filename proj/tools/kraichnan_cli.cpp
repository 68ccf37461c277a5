// Copyright 2026 The Kraichnan Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kraichnan/io.hpp"
#include "kraichnan/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

using namespace kraichnan;

namespace {

int invalid(const std::vector<std::string> &errors) {
    std::cerr << runner::InvalidConfig(errors).diagnostics().dump(2) << std::endl;
    return 2;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Kraichnan transport experiments"};
    app.require_subcommand(1);

    auto *run = app.add_subcommand("run", "run the experiments listed in a JSON config");
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    run->add_option("--config", config_path, "config file (JSON)")->required();
    auto *seed_opt = run->add_option("--seed", seed, "overrides the config seed");
    run->add_option("--threads", threads, "caps OpenMP worker threads")->check(CLI::NonNegativeNumber);
    auto *out_opt = run->add_option("--out", out_dir, "overrides the config output_dir");
    bool snapshots = false;
    run->add_flag("--snapshots", snapshots, "write final fields as .bin with a JSON sidecar");

    auto *rep = app.add_subcommand("report", "aggregate completed runs");
    std::string report_dir;
    rep->add_option("--out", report_dir, "output directory of the runs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*rep) return runner::report(report_dir, std::cout).status;

    std::string text;
    nlohmann::json doc;
    try {
        text = io::read_file(config_path);
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        return invalid({"$: " + std::string(e.what())});
    } catch (const std::exception &e) {
        return invalid({"--config: " + std::string(e.what())});
    }
    runner::RunConfig cfg;
    try {
        cfg = runner::parse_config(doc);
    } catch (const runner::InvalidConfig &e) {
        std::cerr << e.diagnostics().dump(2) << std::endl;
        return 2;
    }
    if (*seed_opt) cfg.seed = seed;
    if (*out_opt) cfg.output_dir = out_dir;
    try {
        return runner::run(cfg, runner::RunOptions{threads, text, snapshots}, std::cout);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
