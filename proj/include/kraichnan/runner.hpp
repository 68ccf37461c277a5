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

#pragma once

#include "kraichnan/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace kraichnan::runner {

inline constexpr int kConfigSchema = 1;

struct ExperimentSpec {
    std::string name;           ///< an experiment name, or "report"
    nlohmann::json parameters;  ///< fully resolved
    std::vector<int> criteria;  ///< empty: every criterion of the experiment
    friend bool operator==(const ExperimentSpec &, const ExperimentSpec &) = default;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::vector<ExperimentSpec> experiments;
    friend bool operator==(const RunConfig &, const RunConfig &) = default;
};

/// Every problem found in a config, as "<json path>: <message>".
class InvalidConfig : public ConfigError {
public:
    explicit InvalidConfig(std::vector<std::string> errors);
    [[nodiscard]] const std::vector<std::string> &errors() const { return errors_; }
    [[nodiscard]] nlohmann::json diagnostics() const;

private:
    std::vector<std::string> errors_;
};

/// Validates and resolves a config document (defaults filled in). Throws InvalidConfig.
RunConfig parse_config(const nlohmann::json &doc);
nlohmann::json to_json(const RunConfig &cfg);

/// Library and toolchain versions recorded in the manifest.
nlohmann::json versions();

struct RunOptions {
    int threads = 0;             ///< 0: leave the OpenMP default
    std::string config_text;     ///< raw input, hashed into the manifest
    bool snapshots = false;      ///< also write final fields as <experiment>_<name>.bin/.json
};

/// Writes <experiment>_<table>.csv, <experiment>_summary.csv and manifest.json under cfg.output_dir.
/// Summary rows for criteria not evaluated by this run are carried over from an existing summary.
/// Exit status: 0 all checks passed, 1 a check failed or a numerical error occurred, 2 invalid configuration.
int run(const RunConfig &cfg, const RunOptions &opts, std::ostream &log);

struct ReportRow {
    int criterion = 0;
    std::string experiment, claim, measured, threshold, relation, passed;
};

struct Report {
    std::vector<ReportRow> rows;
    std::vector<std::string> missing;
    int status = 1;
};

/// Aggregates <experiment>_summary.csv files under `dir` into report.csv and report.txt.
Report report(const std::filesystem::path &dir, std::ostream &out);

}  // namespace kraichnan::runner
