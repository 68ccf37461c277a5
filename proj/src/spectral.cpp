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

#include "kraichnan/spectral.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>

namespace kraichnan {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex &planner_mutex() {
    static std::mutex m;
    return m;
}

int wrap(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace

int SpectralGrid::nice_size(int min_points) {
    for (int n = std::max(min_points, 2);; ++n) {
        if (n % 2) continue;
        int m = n;
        for (int p : {2, 3, 5}) {
            while (m % p == 0) m /= p;
        }
        if (m == 1) return n;
    }
}

SpectralGrid::SpectralGrid(int dim, int kmax, int points) : dim_(dim), kmax_(kmax) {
    require(dim == 2 || dim == 3, "SpectralGrid: dimension must be 2 or 3");
    require(kmax >= 1, "SpectralGrid: kmax must be >= 1");
    n_ = points > 0 ? points : nice_size(3 * kmax);
    require(n_ % 2 == 0, "SpectralGrid: point count must be even");
    require(n_ >= 3 * kmax, "SpectralGrid: dealiasing requires N >= 3 kmax");

    const int half = n_ / 2 + 1;
    real_size_ = 1;
    for (int a = 0; a < dim_; ++a) real_size_ *= std::size_t(n_);
    complex_size_ = real_size_ / std::size_t(n_) * std::size_t(half);

    kvec_.resize(complex_size_);
    k2_.resize(complex_size_);
    weight_.resize(complex_size_);
    const long long k2max = (long long)kmax_ * kmax_;
    for (std::size_t idx = 0; idx < complex_size_; ++idx) {
        IVec k{0, 0, 0};
        std::size_t rem = idx;
        const int last = int(rem % std::size_t(half));
        rem /= std::size_t(half);
        k[dim_ - 1] = last;
        for (int a = dim_ - 2; a >= 0; --a) {
            k[a] = wrap(int(rem % std::size_t(n_)), n_);
            rem /= std::size_t(n_);
        }
        kvec_[idx] = k;
        k2_[idx] = norm2(k);
        const bool keep = k2_[idx] > 0 && k2_[idx] <= k2max;
        weight_[idx] = keep ? (last == 0 ? 1.0 : 2.0) : 0.0;
    }

    std::vector<int> dims(std::size_t(dim_), n_);
    RVec r(real_size_);
    CVec c(complex_size_);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c(dim_, dims.data(), r.data(), reinterpret_cast<fftw_complex *>(c.data()),
                                 FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r(dim_, dims.data(), reinterpret_cast<fftw_complex *>(c.data()), r.data(),
                                  FFTW_ESTIMATE);
}

SpectralGrid::~SpectralGrid() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
}

std::ptrdiff_t SpectralGrid::index_of(const IVec &k) const {
    if (k[dim_ - 1] < 0) return -1;
    for (int a = 0; a < dim_; ++a) {
        if (2 * std::abs(k[a]) >= n_) return -1;
    }
    const int half = n_ / 2 + 1;
    std::size_t idx = 0;
    for (int a = 0; a < dim_ - 1; ++a) idx = idx * std::size_t(n_) + std::size_t((k[a] + n_) % n_);
    return std::ptrdiff_t(idx * std::size_t(half) + std::size_t(k[dim_ - 1]));
}

Vec3 SpectralGrid::point(std::size_t idx) const {
    Vec3 x = Vec3::Zero();
    const double h = kTwoPi / n_;
    for (int a = dim_ - 1; a >= 0; --a) {
        x[a] = h * double(idx % std::size_t(n_));
        idx /= std::size_t(n_);
    }
    return x;
}

void SpectralGrid::to_physical(const CVec &spec, RVec &phys, CVec &scratch) const {
    scratch.assign(spec.begin(), spec.end());
    phys.resize(real_size_);
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex *>(scratch.data()), phys.data());
}

void SpectralGrid::to_spectral_full(const RVec &phys, CVec &spec) const {
    spec.resize(complex_size_);
    // r2c preserves its input; the const_cast only satisfies the C signature.
    fftw_execute_dft_r2c(forward_, const_cast<double *>(phys.data()), reinterpret_cast<fftw_complex *>(spec.data()));
    const double scale = 1.0 / double(real_size_);
    for (auto &v : spec) v *= scale;
}

void SpectralGrid::to_spectral(const RVec &phys, CVec &spec) const {
    to_spectral_full(phys, spec);
    for (std::size_t i = 0; i < complex_size_; ++i) {
        if (weight_[i] == 0.0) spec[i] = 0.0;
    }
}

Complex SpectralGrid::lookup(const CVec &spec, const IVec &k) const {
    const auto idx = index_of(k);
    if (idx >= 0) return spec[std::size_t(idx)];
    const auto nidx = index_of(negate(k));
    if (nidx >= 0) return std::conj(spec[std::size_t(nidx)]);
    return 0.0;
}

SpectralScalarField::SpectralScalarField(GridPtr g) : grid(std::move(g)), c(grid->complex_size()) {}

Complex SpectralScalarField::coeff(const IVec &k) const {
    const auto idx = grid->index_of(k);
    if (idx >= 0) return grid->active(std::size_t(idx)) ? c[std::size_t(idx)] : Complex(0.0);
    const auto nidx = grid->index_of(negate(k));
    if (nidx >= 0 && grid->active(std::size_t(nidx))) return std::conj(c[std::size_t(nidx)]);
    return 0.0;
}

void SpectralScalarField::set(const IVec &k, Complex value) {
    if (norm2(k) > grid->kmax() * grid->kmax()) throw ConfigError("set: mode outside the retained band");
    if (norm2(k) == 0) throw ConfigError("set: the mean mode is fixed at zero");
    if (const auto idx = grid->index_of(k); idx >= 0) c[std::size_t(idx)] = value;
    if (const auto nidx = grid->index_of(negate(k)); nidx >= 0) c[std::size_t(nidx)] = std::conj(value);
}

RVec SpectralScalarField::physical() const {
    RVec out;
    CVec scratch;
    grid->to_physical(c, out, scratch);
    return out;
}

SpectralScalarField SpectralScalarField::from_physical(GridPtr g, const RVec &values) {
    SpectralScalarField f(g);
    g->to_spectral(values, f.c);
    return f;
}

SpectralVectorField::SpectralVectorField(GridPtr g) : grid(std::move(g)) {
    require(grid->dim() == 3, "vector fields live on T^3");
    for (auto &comp : c) comp.assign(grid->complex_size(), Complex(0.0));
}

Eigen::Vector3cd SpectralVectorField::coeff(const IVec &k) const {
    Eigen::Vector3cd v;
    for (int a = 0; a < 3; ++a) {
        const auto idx = grid->index_of(k);
        if (idx >= 0) {
            v[a] = grid->active(std::size_t(idx)) ? c[a][std::size_t(idx)] : Complex(0.0);
        } else {
            const auto nidx = grid->index_of(negate(k));
            v[a] = (nidx >= 0 && grid->active(std::size_t(nidx))) ? std::conj(c[a][std::size_t(nidx)]) : Complex(0.0);
        }
    }
    return v;
}

void SpectralVectorField::set(const IVec &k, const Eigen::Vector3cd &value) {
    if (norm2(k) > grid->kmax() * grid->kmax()) throw ConfigError("set: mode outside the retained band");
    if (norm2(k) == 0) throw ConfigError("set: the mean mode is fixed at zero");
    const auto idx = grid->index_of(k);
    const auto nidx = grid->index_of(negate(k));
    for (int a = 0; a < 3; ++a) {
        if (idx >= 0) c[a][std::size_t(idx)] = value[a];
        if (nidx >= 0) c[a][std::size_t(nidx)] = std::conj(value[a]);
    }
}

std::array<RVec, 3> SpectralVectorField::physical() const {
    std::array<RVec, 3> out;
    CVec scratch;
    for (int a = 0; a < 3; ++a) grid->to_physical(c[a], out[a], scratch);
    return out;
}

SpectralVectorField SpectralVectorField::from_physical(GridPtr g, const std::array<RVec, 3> &values) {
    SpectralVectorField f(g);
    for (int a = 0; a < 3; ++a) g->to_spectral(values[a], f.c[a]);
    return f;
}

double inner(const SpectralGrid &g, const CVec &a, const CVec &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.complex_size(); ++i) {
        const double w = g.weight(i);
        if (w > 0.0) s += w * (a[i] * std::conj(b[i])).real();
    }
    return g.volume() * s;
}

double max_divergence(const SpectralVectorField &f) {
    const auto &g = *f.grid;
    double m = 0.0;
    for (std::size_t i = 0; i < g.complex_size(); ++i) {
        if (!g.active(i)) continue;
        const IVec &k = g.wavevector(i);
        const Complex div = double(k[0]) * f.c[0][i] + double(k[1]) * f.c[1][i] + double(k[2]) * f.c[2][i];
        m = std::max(m, std::abs(div));
    }
    return m;
}

double reality_defect(const SpectralGrid &g, const CVec &a) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.complex_size(); ++i) {
        const IVec &k = g.wavevector(i);
        if (k[g.dim() - 1] != 0) continue;
        const auto j = g.index_of(negate(k));
        if (j < 0) continue;
        m = std::max(m, std::abs(a[i] - std::conj(a[std::size_t(j)])));
    }
    return m;
}

}  // namespace kraichnan
