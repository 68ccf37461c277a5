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

// Pointwise and stencil kernels in two flavours: `serial` is the plain reference loop,
// `omp` the OpenMP-parallel version. Both perform the same floating-point operations per
// element in the same order, so results agree bitwise; tests rely on that.

#include "kraichnan/common.hpp"

#include <cstddef>
#include <cstdint>
#include <span>

namespace kraichnan::kernels {

/// Geometry of a uniform cubic cell grid on [lo, lo + cells*h]^3.
struct CubeGrid {
    int cells = 0;
    double lo = 0.0;
    double h = 0.0;

    [[nodiscard]] std::size_t size() const { return std::size_t(cells) * cells * cells; }
    [[nodiscard]] std::size_t index(int i, int j, int k) const {
        return (std::size_t(i) * cells + std::size_t(j)) * cells + std::size_t(k);
    }
    [[nodiscard]] Vec3 center(int i, int j, int k) const {
        return {lo + (i + 0.5) * h, lo + (j + 0.5) * h, lo + (k + 0.5) * h};
    }
};

/// Parameters of one explicit finite-volume step of d_t rho = div(L(b) grad rho),
/// L(b) = c_L (2|b|^2 I - b b^T), no-flux walls, positivity-preserving outflow limiter.
struct DiffusionStep {
    double c_L = 0.0;
    double dt = 0.0;
};

/// Particle state for the limit SDE db = kappa A(b) dW.
struct SdeStep {
    double sqrt_cL = 0.0;   ///< eigenvalue of A along b, per unit |b|
    double sqrt_2cL = 0.0;  ///< eigenvalue of A across b, per unit |b|
    double kappa = 1.0;     ///< diffusion calibration factor
    double dt = 0.0;
    double floor = 0.0;     ///< radius below which A is frozen at this radius
    bool milstein = false;  ///< add the diagonal Milstein correction
};

namespace serial {

/// out[p] = sum_a u[a][p] * g[a][p].
void dot(std::span<double> out, std::span<const double *const> u, std::span<const double *const> g);

/// out = u x b pointwise.
void cross(std::array<double *, 3> out, std::array<const double *, 3> u, std::array<const double *, 3> b,
           std::size_t n);

/// One explicit step; rho_out must not alias rho_in. Returns number of limited cells.
std::size_t diffusion_step(const CubeGrid &grid, const DiffusionStep &p, std::span<const double> rho_in,
                           std::span<double> rho_out);

/// Advances each particle by `steps` Euler-Maruyama (or Milstein-diagonal) steps. Normals
/// are drawn from stream (seed, first_path + path) at step indices first_step + s.
/// Returns the number of guard activations.
std::size_t advance_particles(std::span<Vec3> b, const SdeStep &p, std::uint64_t seed, std::uint64_t first_path,
                              std::uint64_t first_step, int steps);

}  // namespace serial

namespace omp {

void dot(std::span<double> out, std::span<const double *const> u, std::span<const double *const> g);
void cross(std::array<double *, 3> out, std::array<const double *, 3> u, std::array<const double *, 3> b,
           std::size_t n);
std::size_t diffusion_step(const CubeGrid &grid, const DiffusionStep &p, std::span<const double> rho_in,
                           std::span<double> rho_out);
std::size_t advance_particles(std::span<Vec3> b, const SdeStep &p, std::uint64_t seed, std::uint64_t first_path,
                              std::uint64_t first_step, int steps);

}  // namespace omp

/// Sets the OpenMP worker cap (no-op without OpenMP). Returns the effective count.
int set_thread_cap(int threads);

}  // namespace kraichnan::kernels
