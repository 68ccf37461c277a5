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

#include "kraichnan/runner.hpp"

#include "kraichnan/experiments.hpp"
#include "kraichnan/io.hpp"
#include "kraichnan/kernels.hpp"

#include <Eigen/Core>
#include <fftw3.h>
#include <openssl/crypto.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#ifndef KRAICHNAN_VERSION
#define KRAICHNAN_VERSION "unknown"
#endif

namespace kraichnan::runner {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string> &v, const std::string &sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ExperimentSpec parse_entry(const json &item, const std::string &where, std::vector<std::string> &errors) {
    ExperimentSpec spec;
    json params;
    if (item.is_string()) {
        spec.name = item.get<std::string>();
    } else if (item.is_object()) {
        for (const auto &[key, value] : item.items()) {
            if (key != "name" && key != "parameters" && key != "criteria") errors.push_back(where + "." + key + ": unknown key");
        }
        if (!item.contains("name") || !item["name"].is_string()) {
            errors.push_back(where + ".name: required string");
            return spec;
        }
        spec.name = item["name"].get<std::string>();
        if (item.contains("parameters")) params = item["parameters"];
        if (item.contains("criteria")) {
            const auto &c = item["criteria"];
            if (!c.is_array() || c.empty()) {
                errors.push_back(where + ".criteria: expected a non-empty array of integers");
            } else {
                for (const auto &v : c) {
                    if (!v.is_number_integer()) {
                        errors.push_back(where + ".criteria: expected integers");
                        continue;
                    }
                    spec.criteria.push_back(v.get<int>());
                }
            }
        }
    } else {
        errors.push_back(where + ": expected an experiment name or object");
        return spec;
    }

    if (spec.name == "report") {
        if (!params.is_null() && !params.empty()) errors.push_back(where + ".parameters: report takes no parameters");
        if (!spec.criteria.empty()) errors.push_back(where + ".criteria: report takes no criteria");
        spec.criteria.clear();
        return spec;
    }
    if (!experiments::is_experiment(spec.name)) {
        errors.push_back(where + ".name: unknown experiment '" + spec.name + "'");
        return spec;
    }
    const auto bad = experiments::parameter_errors(spec.name, params);
    for (const auto &e : bad) errors.push_back(where + ".parameters: " + e);
    if (bad.empty()) spec.parameters = experiments::resolve_params(spec.name, params);
    const auto &own = experiments::criteria_of(spec.name);
    std::sort(spec.criteria.begin(), spec.criteria.end());
    spec.criteria.erase(std::unique(spec.criteria.begin(), spec.criteria.end()), spec.criteria.end());
    for (int id : spec.criteria) {
        if (std::find(own.begin(), own.end(), id) == own.end()) {
            errors.push_back(where + ".criteria: " + spec.name + " does not evaluate criterion " + std::to_string(id));
        }
    }
    return spec;
}

std::vector<std::string> summary_columns() {
    return {"experiment", "criterion", "claim", "measured", "threshold", "relation", "passed", "detail"};
}

}  // namespace

InvalidConfig::InvalidConfig(std::vector<std::string> errors)
    : ConfigError("invalid config: " + join(errors, "; ")), errors_(std::move(errors)) {}

json InvalidConfig::diagnostics() const {
    json out{{"status", 2}, {"error", "invalid_config"}, {"diagnostics", json::array()}};
    for (const auto &e : errors_) {
        const auto colon = e.find(": ");
        out["diagnostics"].push_back(json{{"path", e.substr(0, colon)},
                                          {"message", colon == std::string::npos ? e : e.substr(colon + 2)}});
    }
    return out;
}

RunConfig parse_config(const json &doc) {
    std::vector<std::string> errors;
    RunConfig cfg;
    if (!doc.is_object()) throw InvalidConfig({"$: config must be a JSON object"});
    for (const auto &[key, value] : doc.items()) {
        if (key != "schema" && key != "seed" && key != "output_dir" && key != "experiments") {
            errors.push_back("$." + key + ": unknown key");
        }
    }
    if (doc.contains("schema") && doc["schema"] != kConfigSchema) errors.push_back("$.schema: only schema 1 is supported");
    if (doc.contains("seed")) {
        if (doc["seed"].is_number_unsigned() ||
            (doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0)) {
            cfg.seed = doc["seed"].get<std::uint64_t>();
        } else {
            errors.push_back("$.seed: expected a non-negative integer");
        }
    }
    if (doc.contains("output_dir")) {
        if (doc["output_dir"].is_string() && !doc["output_dir"].get<std::string>().empty()) {
            cfg.output_dir = doc["output_dir"].get<std::string>();
        } else {
            errors.push_back("$.output_dir: expected a non-empty string");
        }
    }
    if (!doc.contains("experiments") || !doc["experiments"].is_array()) {
        errors.push_back("$.experiments: required array");
    } else if (doc["experiments"].empty()) {
        errors.push_back("$.experiments: empty experiment list");
    } else {
        std::set<std::string> seen;
        for (std::size_t i = 0; i < doc["experiments"].size(); ++i) {
            const std::string where = "$.experiments[" + std::to_string(i) + "]";
            auto spec = parse_entry(doc["experiments"][i], where, errors);
            if (!spec.name.empty() && !seen.insert(spec.name).second) {
                errors.push_back(where + ".name: '" + spec.name + "' listed twice");
            }
            cfg.experiments.push_back(std::move(spec));
        }
    }
    if (!errors.empty()) throw InvalidConfig(std::move(errors));
    return cfg;
}

json to_json(const RunConfig &cfg) {
    json ex = json::array();
    for (const auto &s : cfg.experiments) {
        json e{{"name", s.name}};
        if (!s.parameters.is_null()) e["parameters"] = s.parameters;
        if (!s.criteria.empty()) e["criteria"] = s.criteria;
        ex.push_back(std::move(e));
    }
    return json{{"schema", kConfigSchema}, {"seed", cfg.seed}, {"output_dir", cfg.output_dir}, {"experiments", ex}};
}

json versions() {
    json v;
    v["kraichnan"] = KRAICHNAN_VERSION;
    v["compiler"] = __VERSION__;
    v["cxx_standard"] = static_cast<long>(__cplusplus);
    v["fftw"] = std::string(fftw_version);
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    v["openssl"] = std::string(OpenSSL_version(OPENSSL_VERSION));
    v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                         "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    return v;
}

int run(const RunConfig &cfg, const RunOptions &opts, std::ostream &log) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const int threads = kernels::set_thread_cap(opts.threads);
    const std::string started = utc_now();
    json runs = json::array();
    int status = 0;
    bool want_report = false;

    for (const auto &spec : cfg.experiments) {
        if (spec.name == "report") {
            want_report = true;
            continue;
        }
        json entry{{"experiment", spec.name}, {"criteria", spec.criteria}};
        const auto t0 = std::chrono::steady_clock::now();
        log << "running " << spec.name << std::endl;
        try {
            const std::set<int> only(spec.criteria.begin(), spec.criteria.end());
            const auto r = experiments::run_experiment(spec.name, spec.parameters, cfg.seed, only);
            std::vector<std::string> files;
            for (const auto &t : r.tables) {
                const std::string f = spec.name + "_" + t.name + ".csv";
                io::write_csv(dir / f, t.columns, t.rows);
                files.push_back(f);
            }
            if (opts.snapshots) {
                for (const auto &s : r.snapshots) {
                    const std::string stem = spec.name + "_" + s.name;
                    s.write(dir / stem);
                    files.push_back(stem + ".bin");
                    files.push_back(stem + ".json");
                }
            }
            std::vector<std::vector<std::string>> rows;
            std::set<int> fresh;
            for (const auto &c : r.checks) {
                fresh.insert(c.criterion);
                rows.push_back({spec.name, std::to_string(c.criterion), c.claim, io::format_double(c.measured),
                                io::format_double(c.threshold), c.relation, c.passed ? "true" : "false", c.detail});
                log << (c.passed ? "[PASS] " : "[FAIL] ") << "criterion " << c.criterion << ": " << c.claim
                    << "\n        measured " << io::format_double(c.measured) << ", threshold "
                    << io::format_double(c.threshold) << " (" << c.relation << ")\n        " << c.detail << "\n";
            }
            const std::string summary = spec.name + "_summary.csv";
            // rows of criteria evaluated by earlier runs into this directory are kept
            if (fs::exists(dir / summary)) {
                const auto old = io::read_csv(dir / summary);
                for (std::size_t i = 1; i < old.size(); ++i) {
                    if (old[i].size() == summary_columns().size() && !fresh.count(std::stoi(old[i][1]))) rows.push_back(old[i]);
                }
                std::sort(rows.begin(), rows.end(),
                          [](const auto &a, const auto &b) { return std::stoi(a[1]) < std::stoi(b[1]); });
            }
            io::write_text_csv(dir / summary, summary_columns(), rows);
            files.push_back(summary);
            entry["status"] = r.passed() ? "passed" : "failed";
            entry["files"] = files;
            if (!r.passed()) status = std::max(status, 1);
        } catch (const ConfigError &e) {
            entry["status"] = "invalid_config";
            entry["error"] = e.what();
            log << "invalid configuration: " << e.what() << "\n";
            status = 2;
        } catch (const std::exception &e) {
            entry["status"] = "error";
            entry["error"] = e.what();
            log << "error: " << e.what() << "\n";
            status = std::max(status, 1);
        }
        entry["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log << spec.name << " finished in " << entry["seconds"].get<double>() << " s" << std::endl;
        runs.push_back(std::move(entry));
    }

    if (want_report) {
        const auto rep = report(dir, log);
        status = std::max(status, rep.status);
    }

    const std::string resolved = to_json(cfg).dump(2);
    json manifest{{"schema", 1},
                  {"config", to_json(cfg)},
                  {"seed", cfg.seed},
                  {"input_hash", opts.config_text.empty() ? json() : json(io::git_blob_sha1(opts.config_text))},
                  {"resolved_config_hash", io::git_blob_sha1(resolved)},
                  {"versions", versions()},
                  {"threads", threads},
                  {"started_utc", started},
                  {"finished_utc", utc_now()},
                  {"runs", runs},
                  {"status", status}};
    io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return status;
}

Report report(const fs::path &dir, std::ostream &out) {
    Report rep;
    if (fs::is_directory(dir)) {
        for (const auto &name : experiments::experiment_names()) {
            const fs::path f = dir / (name + "_summary.csv");
            const auto &own = experiments::criteria_of(name);
            if (!fs::exists(f)) {
                std::string ids;
                for (int id : own) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
                rep.missing.push_back(name + " (criteria " + ids + ")");
                continue;
            }
            const auto rows = io::read_csv(f);
            std::set<int> present;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                const auto &r = rows[i];
                if (r.size() < 7) continue;
                ReportRow row{std::stoi(r[1]), r[0], r[2], r[3], r[4], r[5], r[6]};
                present.insert(row.criterion);
                rep.rows.push_back(std::move(row));
            }
            for (int id : own) {
                if (!present.count(id)) rep.missing.push_back("criterion " + std::to_string(id) + " (" + name + ")");
            }
        }
        std::sort(rep.rows.begin(), rep.rows.end(),
                  [](const ReportRow &a, const ReportRow &b) { return a.criterion < b.criterion; });

        std::vector<std::vector<std::string>> csv;
        for (const auto &r : rep.rows) {
            csv.push_back({std::to_string(r.criterion), r.experiment, r.claim, r.measured, r.threshold, r.relation, r.passed});
        }
        io::write_text_csv(dir / "report.csv",
                           {"criterion", "experiment", "claim", "measured", "threshold", "relation", "passed"}, csv);
    } else {
        rep.missing.push_back("output directory " + dir.string() + " does not exist");
    }

    std::string text;
    char line[512];
    std::snprintf(line, sizeof line, "%-4s %-16s %-6s %-14s %-14s %s\n", "id", "experiment", "result", "measured",
                  "threshold", "claim (relation)");
    text += line;
    bool all_pass = true;
    for (const auto &r : rep.rows) {
        const bool ok = r.passed == "true";
        all_pass = all_pass && ok;
        std::snprintf(line, sizeof line, "%-4d %-16s %-6s %-14s %-14s %s (%s)\n", r.criterion, r.experiment.c_str(),
                      ok ? "PASS" : "FAIL", r.measured.c_str(), r.threshold.c_str(), r.claim.c_str(), r.relation.c_str());
        text += line;
    }
    for (const auto &m : rep.missing) text += "missing: " + m + "\n";
    if (fs::is_directory(dir)) io::write_file(dir / "report.txt", text);
    out << text;
    rep.status = (!rep.rows.empty() && rep.missing.empty() && all_pass) ? 0 : 1;
    return rep;
}

}  // namespace kraichnan::runner
