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

#include "kraichnan/noise_basis.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <ostream>
#include <unordered_map>

namespace kraichnan {

namespace {

void check_dim(int d) { require(d == 2 || d == 3, "dimension must be 2 or 3"); }

bool on_shell(const IVec &k, int n) {
    const int r2 = norm2(k);
    return r2 >= n * n && r2 <= 4 * n * n;
}

double cached_c_n(int n, int d) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, double> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find({n, d});
    if (it != cache.end()) return it->second;
    const double c = shell_sums(n, d).c_n;
    cache.emplace(std::make_pair(n, d), c);
    return c;
}

void fix_sign(Vec3 &v) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

}  // namespace

std::uint64_t WaveIndex::id() const {
    std::uint64_t h = 0;
    for (int c : k) h = (h << 20) | std::uint64_t(c + (1 << 19));
    return (h << 3) | std::uint64_t(j);
}

std::vector<IVec> shell_vectors(int n, int d) {
    check_dim(d);
    require(n >= 1, "shell parameter n must be >= 1");
    std::vector<IVec> out;
    const int m = 2 * n;
    const int zlim = d == 3 ? m : 0;
    for (int x = -m; x <= m; ++x) {
        for (int y = -m; y <= m; ++y) {
            for (int z = -zlim; z <= zlim; ++z) {
                const IVec k{x, y, z};
                if (on_shell(k, n)) out.push_back(k);
            }
        }
    }
    return out;
}

std::vector<Vec3> build_frame(const IVec &k, int d) {
    check_dim(d);
    if (norm2(k) == 0) throw ConfigError("build_frame: zero wave vector");
    if (d == 2 && k[2] != 0) throw ConfigError("build_frame: third coordinate must vanish for d = 2");
    const IVec rep = lex_positive(k) ? k : negate(k);
    const Vec3 khat = to_vec3(rep).normalized();
    if (d == 2) {
        Vec3 a(-khat[1], khat[0], 0.0);
        fix_sign(a);
        return {a};
    }
    int axis = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(rep[i]) < std::abs(rep[axis])) axis = i;
    }
    Vec3 e = Vec3::Unit(axis);
    Vec3 a1 = (e - e.dot(khat) * khat).normalized();
    Vec3 a2 = khat.cross(a1).normalized();
    fix_sign(a1);
    fix_sign(a2);
    return {a1, a2};
}

double theta_scalar(const IVec &k, int n, int d, double kappa_T) {
    check_dim(d);
    require(n >= 1, "shell parameter n must be >= 1");
    require(kappa_T > 0.0, "kappa_T must be positive");
    if (!on_shell(k, n)) return 0.0;
    const double c_n = cached_c_n(n, d);
    return std::sqrt(d * kappa_T / ((d - 1) * c_n)) * std::pow(double(norm2(k)), -0.25 * d);
}

double theta_vector(const IVec &k, int n, double chi) {
    require(n >= 1, "shell parameter n must be >= 1");
    require(chi > 0.0, "chi must be positive");
    if (!on_shell(k, n)) return 0.0;
    return std::sqrt(chi) * std::pow(double(norm2(k)), -1.25);
}

ShellSums shell_sums(int n, int d) {
    ShellSums s{n, d, 0.0, 0.0, 0.0};
    for (const auto &k : shell_vectors(n, d)) {
        const double r2 = norm2(k);
        s.c_n += std::pow(r2, -0.5 * d);
        s.eta_n += std::pow(r2, -2.5);
        s.alpha_n += std::pow(r2, -1.5);
    }
    return s;
}

ModeTable ModeTable::scalar(int d, int n, double kappa_T) {
    ModeTable t;
    t.dim_ = d;
    t.n_ = n;
    for (const auto &k : shell_vectors(n, d)) {
        const auto frame = build_frame(k, d);
        const double th = theta_scalar(k, n, d, kappa_T);
        for (int j = 1; j <= d - 1; ++j) t.modes_.push_back({{k, j}, frame[j - 1], th});
    }
    return t;
}

ModeTable ModeTable::vector(int n, double chi) {
    ModeTable t;
    t.dim_ = 3;
    t.n_ = n;
    for (const auto &k : shell_vectors(n, 3)) {
        const auto frame = build_frame(k, 3);
        const double th = theta_vector(k, n, chi);
        for (int j = 1; j <= 2; ++j) t.modes_.push_back({{k, j}, frame[j - 1], th});
    }
    return t;
}

ModeTable ModeTable::empty(int d) {
    check_dim(d);
    ModeTable t;
    t.dim_ = d;
    return t;
}

int ModeTable::max_wavenumber() const {
    int m = 0;
    for (const auto &mode : modes_) {
        m = std::max(m, int(std::ceil(std::sqrt(double(norm2(mode.index.k))) - 1e-12)));
    }
    return m;
}

Mat3 ModeTable::isotropy_sum() const {
    Mat3 s = Mat3::Zero();
    for (const auto &m : modes_) s += m.theta * m.theta * m.a * m.a.transpose();
    return s;
}

Mat3 ModeTable::wavevector_moment() const {
    Mat3 s = Mat3::Zero();
    for (const auto &m : modes_) {
        const Vec3 k = to_vec3(m.index.k);
        s += m.theta * m.theta * k * k.transpose();
    }
    return s;
}

void ModeTable::write_csv(std::ostream &os) const {
    os << "# schema=1\nkx,ky,kz,j,theta\n";
    os.precision(17);
    for (const auto &m : modes_) {
        os << m.index.k[0] << ',' << m.index.k[1] << ',' << m.index.k[2] << ',' << m.index.j << ','
           << m.theta << '\n';
    }
}

NoiseRealization sample_increments(std::span<const NoiseMode> modes, double dt, RandomStream stream,
                                   std::uint64_t step, int substeps) {
    require(dt > 0.0, "dt must be positive");
    require(substeps >= 1, "substeps must be >= 1");
    NoiseRealization out{dt, stream, step, std::vector<Complex>(modes.size())};

    std::unordered_map<std::uint64_t, std::size_t> position;
    position.reserve(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) position.emplace(modes[i].index.id(), i);

    const double scale = std::sqrt(dt / substeps);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const WaveIndex &w = modes[i].index;
        if (!w.in_positive_half()) continue;
        Complex sum = 0.0;
        for (int s = 0; s < substeps; ++s) {
            const auto [re, im] = stream.normal_pair(w.id(), step * std::uint64_t(substeps) + std::uint64_t(s));
            sum += Complex(re, im);
        }
        out.increments[i] = scale * sum;
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const WaveIndex &w = modes[i].index;
        if (w.in_positive_half()) continue;
        const auto it = position.find(WaveIndex{negate(w.k), w.j}.id());
        if (it == position.end()) {
            throw ContractViolation("sample_increments: mode set is not closed under k -> -k");
        }
        out.increments[i] = std::conj(out.increments[it->second]);
    }
    return out;
}

}  // namespace kraichnan
