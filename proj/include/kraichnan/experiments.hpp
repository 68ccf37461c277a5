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

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace kraichnan::experiments {

/// Outcome of one acceptance criterion.
struct Check {
    int criterion = 0;
    std::string claim;
    double measured = 0.0;
    double threshold = 0.0;
    std::string relation;  ///< how measured is compared with threshold
    bool passed = false;
    std::string detail;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Final field of a run; write(stem) produces <stem>.bin and <stem>.json.
struct Snapshot {
    std::string name;
    std::function<void(const std::filesystem::path &stem)> write;
};

struct Result {
    std::string experiment;
    nlohmann::json params;
    std::uint64_t seed = 0;
    std::vector<Check> checks;
    std::vector<Table> tables;
    std::vector<Snapshot> snapshots;
    [[nodiscard]] bool passed() const;
};

/// Experiment names in canonical order.
const std::vector<std::string> &experiment_names();
bool is_experiment(const std::string &name);

/// Criteria evaluated by an experiment, and the experiment owning a criterion.
const std::vector<int> &criteria_of(const std::string &experiment);
const std::string &experiment_of(int criterion);
std::vector<int> all_criteria();

nlohmann::json default_params(const std::string &experiment);

/// One message per unknown key, type mismatch or non-positive value.
std::vector<std::string> parameter_errors(const std::string &experiment, const nlohmann::json &overrides);

/// Defaults overlaid with `overrides`. Unknown keys, type mismatches and non-positive values throw ConfigError.
nlohmann::json resolve_params(const std::string &experiment, const nlohmann::json &overrides);

/// Runs `experiment` with resolved parameters; `only` restricts the evaluated criteria (empty: all).
Result run_experiment(const std::string &experiment, const nlohmann::json &params, std::uint64_t seed,
                      const std::set<int> &only = {});

/// Default parameters, single criterion.
Result run_criterion(int criterion, std::uint64_t seed);

}  // namespace kraichnan::experiments
