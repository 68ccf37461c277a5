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

#include "kraichnan/spectral.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kraichnan::io {

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// CSV with a `# schema=1` comment line, a header row and numeric rows.
void write_csv(const std::filesystem::path &path, const std::vector<std::string> &columns,
               const std::vector<std::vector<double>> &rows);

/// Rows of strings; fields are quoted when they contain a comma or quote.
void write_text_csv(const std::filesystem::path &path, const std::vector<std::string> &columns,
                    const std::vector<std::vector<std::string>> &rows);

/// Parses a file written by write_text_csv / write_csv (comment lines skipped). First row is the header.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &path);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view content);

/// SHA-1 of "blob <size>\0<content>", as git hashes file contents.
std::string git_blob_sha1(std::string_view content);

/// Coefficients as raw little-endian complex doubles (<stem>.bin) and a JSON sidecar (<stem>.json).
void write_snapshot(const std::filesystem::path &stem, const SpectralVectorField &field, double t);
void write_snapshot(const std::filesystem::path &stem, const SpectralScalarField &field, double t);

}  // namespace kraichnan::io
