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

#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace kraichnan::io {

namespace {

std::string quote(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_line(const std::string &line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path &path, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(path, mode);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

void sidecar(const std::filesystem::path &stem, const SpectralGrid &g, double t, int components) {
    nlohmann::json h;
    h["schema"] = 1;
    h["time"] = t;
    h["dim"] = g.dim();
    h["points"] = g.points();
    h["k_max"] = g.kmax();
    h["components"] = components;
    h["coefficients_per_component"] = g.complex_size();
    h["layout"] = "r2c half spectrum, row-major, last axis halved; complex float64 little-endian, component-major";
    h["convention"] = "f(x) = sum_k c_k exp(i k.x) on [0, 2 pi)^d";
    auto os = open_out(std::filesystem::path(stem).concat(".json"));
    os << h.dump(2) << '\n';
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &columns,
               const std::vector<std::vector<double>> &rows) {
    std::vector<std::vector<std::string>> text;
    text.reserve(rows.size());
    for (const auto &r : rows) {
        if (r.size() != columns.size()) throw ContractViolation("write_csv: row width differs from the header");
        std::vector<std::string> t;
        for (double v : r) t.push_back(format_double(v));
        text.push_back(std::move(t));
    }
    write_text_csv(path, columns, text);
}

void write_text_csv(const std::filesystem::path &path, const std::vector<std::string> &columns,
                    const std::vector<std::vector<std::string>> &rows) {
    auto os = open_out(path);
    os << "# schema=1\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << quote(columns[i]);
    os << '\n';
    for (const auto &r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << quote(r[i]);
        os << '\n';
    }
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::vector<std::vector<std::string>> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        out.push_back(split_line(line));
    }
    return out;
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path &path, std::string_view content) {
    auto os = open_out(path, std::ios::out | std::ios::binary);
    os.write(content.data(), std::streamsize(content.size()));
}

std::string git_blob_sha1(std::string_view content) {
    std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0');
    blob.append(content);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1) {
        throw std::runtime_error("SHA-1 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        const unsigned char c = md[i];
        out += hex[c >> 4];
        out += hex[c & 15];
    }
    return out;
}

void write_snapshot(const std::filesystem::path &stem, const SpectralVectorField &field, double t) {
    auto os = open_out(std::filesystem::path(stem).concat(".bin"), std::ios::out | std::ios::binary);
    for (const auto &c : field.c) os.write(reinterpret_cast<const char *>(c.data()), std::streamsize(c.size() * sizeof(Complex)));
    sidecar(stem, *field.grid, t, 3);
}

void write_snapshot(const std::filesystem::path &stem, const SpectralScalarField &field, double t) {
    auto os = open_out(std::filesystem::path(stem).concat(".bin"), std::ios::out | std::ios::binary);
    os.write(reinterpret_cast<const char *>(field.c.data()), std::streamsize(field.c.size() * sizeof(Complex)));
    sidecar(stem, *field.grid, t, 1);
}

}  // namespace kraichnan::io
