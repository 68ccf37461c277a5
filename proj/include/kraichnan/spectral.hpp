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

#include <fftw3.h>

#include <cstddef>
#include <memory>
#include <new>
#include <vector>

namespace kraichnan {

/// Allocator returning FFTW-aligned storage so a single plan can run on any buffer.
template <class T>
struct FftwAllocator {
    using value_type = T;
    FftwAllocator() = default;
    template <class U>
    FftwAllocator(const FftwAllocator<U> &) {}
    T *allocate(std::size_t n) {
        if (auto *p = static_cast<T *>(fftw_malloc(n * sizeof(T)))) return p;
        throw std::bad_alloc();
    }
    void deallocate(T *p, std::size_t) { fftw_free(p); }
    template <class U>
    bool operator==(const FftwAllocator<U> &) const { return true; }
};

using RVec = std::vector<double, FftwAllocator<double>>;
using CVec = std::vector<Complex, FftwAllocator<Complex>>;

/// Periodic grid on [0, 2pi)^d with a half-complex (r2c) spectral layout.
///
/// Convention: f(x) = sum_k c_k exp(i k.x), so c_k = (2pi)^{-d} int f exp(-i k.x) dx and
/// ||f||^2_{L^2} = (2pi)^d sum_k |c_k|^2. Retained modes satisfy 0 < |k| <= kmax; the grid has
/// N >= 3 kmax points per axis (2/3 rule), so products of a kmax-band field with any field of
/// band <= kmax are alias-free on the retained modes.
class SpectralGrid {
public:
    SpectralGrid(int dim, int kmax, int points = 0);
    ~SpectralGrid();
    SpectralGrid(const SpectralGrid &) = delete;
    SpectralGrid &operator=(const SpectralGrid &) = delete;

    /// Smallest 2^a 3^b 5^c that is even and >= min_points.
    static int nice_size(int min_points);

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] int points() const { return n_; }
    [[nodiscard]] int kmax() const { return kmax_; }
    [[nodiscard]] std::size_t real_size() const { return real_size_; }
    [[nodiscard]] std::size_t complex_size() const { return complex_size_; }
    [[nodiscard]] double volume() const { return std::pow(kTwoPi, dim_); }
    [[nodiscard]] double cell_volume() const { return volume() / double(real_size_); }

    [[nodiscard]] const IVec &wavevector(std::size_t idx) const { return kvec_[idx]; }
    [[nodiscard]] int k2(std::size_t idx) const { return k2_[idx]; }
    [[nodiscard]] bool active(std::size_t idx) const { return weight_[idx] > 0.0; }
    /// Multiplicity of a stored coefficient in Parseval sums (2 if its conjugate is implicit).
    [[nodiscard]] double weight(std::size_t idx) const { return weight_[idx]; }
    /// Storage index of k, or -1 if k is represented by the conjugate of -k.
    [[nodiscard]] std::ptrdiff_t index_of(const IVec &k) const;
    /// Physical coordinates of real-grid point `idx` (row-major).
    [[nodiscard]] Vec3 point(std::size_t idx) const;

    /// spec -> values on the grid. `scratch` is resized as needed.
    void to_physical(const CVec &spec, RVec &phys, CVec &scratch) const;
    /// values -> coefficients restricted to retained modes.
    void to_spectral(const RVec &phys, CVec &spec) const;
    /// values -> all grid coefficients, mean and Nyquist included (no truncation).
    void to_spectral_full(const RVec &phys, CVec &spec) const;
    /// Coefficient of wave vector k of the full transform (conjugate lookup when needed).
    [[nodiscard]] Complex lookup(const CVec &spec, const IVec &k) const;

private:
    int dim_;
    int kmax_;
    int n_;
    std::size_t real_size_ = 0;
    std::size_t complex_size_ = 0;
    std::vector<IVec> kvec_;
    std::vector<int> k2_;
    std::vector<double> weight_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Real zero-mean scalar field stored by its retained Fourier coefficients.
struct SpectralScalarField {
    GridPtr grid;
    CVec c;

    SpectralScalarField() = default;
    explicit SpectralScalarField(GridPtr g);

    [[nodiscard]] Complex coeff(const IVec &k) const;
    /// Sets coefficient k and the conjugate at -k.
    void set(const IVec &k, Complex value);
    [[nodiscard]] RVec physical() const;
    static SpectralScalarField from_physical(GridPtr g, const RVec &values);
};

/// Real zero-mean vector field on T^3 (three spectral components).
struct SpectralVectorField {
    GridPtr grid;
    std::array<CVec, 3> c;

    SpectralVectorField() = default;
    explicit SpectralVectorField(GridPtr g);

    [[nodiscard]] Eigen::Vector3cd coeff(const IVec &k) const;
    void set(const IVec &k, const Eigen::Vector3cd &value);
    [[nodiscard]] std::array<RVec, 3> physical() const;
    static SpectralVectorField from_physical(GridPtr g, const std::array<RVec, 3> &values);
};

/// (2pi)^d sum_k a_k conj(b_k) over all retained modes (real for real fields).
double inner(const SpectralGrid &g, const CVec &a, const CVec &b);

/// max over stored modes of |k . c(k)| (spectral divergence).
double max_divergence(const SpectralVectorField &f);

/// max |c(k) - conj(c(-k))| over pairs stored twice (the last-axis zero plane).
double reality_defect(const SpectralGrid &g, const CVec &a);

}  // namespace kraichnan
