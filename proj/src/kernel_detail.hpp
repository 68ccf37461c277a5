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

// Per-element bodies shared by the serial and OpenMP kernels.

#include "kraichnan/kernels.hpp"
#include "kraichnan/rng.hpp"

namespace kraichnan::kernels::detail {

inline Mat3 diffusion_matrix(double c_L, const Vec3 &b) {
    return c_L * (2.0 * b.squaredNorm() * Mat3::Identity() - b * b.transpose());
}

/// Mass flux density -(L grad rho) . e_axis through the face between cell (i,j,k) and its
/// upper neighbour along `axis`. Wall faces carry zero flux; missing tangential neighbours
/// are replaced by the cell itself (zero-gradient ghost).
inline double face_flux(const CubeGrid &g, double c_L, const double *rho, int i, int j, int k, int axis) {
    const int n = g.cells;
    std::array<int, 3> lo{i, j, k};
    std::array<int, 3> hi = lo;
    hi[axis] += 1;
    if (hi[axis] >= n) return 0.0;
    const Vec3 bf = 0.5 * (g.center(lo[0], lo[1], lo[2]) + g.center(hi[0], hi[1], hi[2]));
    const double half = 0.25 * g.h * g.h;
    // arithmetic mean of L at the two centres = L(face) + c_L h^2/4 (2 I - e e^T) for quadratic L
    Mat3 lf = diffusion_matrix(c_L, bf);
    lf += c_L * half * (2.0 * Mat3::Identity() - Vec3::Unit(axis) * Vec3::Unit(axis).transpose());
    auto at = [&](const std::array<int, 3> &c) { return rho[g.index(c[0], c[1], c[2])]; };
    Vec3 grad;
    grad[axis] = (at(hi) - at(lo)) / g.h;
    for (int t = 0; t < 3; ++t) {
        if (t == axis) continue;
        auto shift = [&](std::array<int, 3> c, int d) {
            c[t] = std::clamp(c[t] + d, 0, n - 1);
            return at(c);
        };
        grad[t] = (shift(lo, 1) + shift(hi, 1) - shift(lo, -1) - shift(hi, -1)) / (4.0 * g.h);
    }
    return -(lf.row(axis).dot(grad));
}

/// Outflow limiter factor of a cell given the fluxes through its six faces
/// (ordered: -x, +x, -y, +y, -z, +z; each positive along +axis).
inline double limiter(double rho_c, const std::array<double, 6> &flux, double dt_over_h) {
    double out = 0.0;
    for (int a = 0; a < 3; ++a) {
        out += std::max(0.0, -flux[2 * a]);    // leaves through the lower face
        out += std::max(0.0, flux[2 * a + 1]);  // leaves through the upper face
    }
    const double loss = dt_over_h * out;
    const double avail = std::max(rho_c, 0.0);
    return loss > avail ? avail / loss : 1.0;
}

inline double cell_update(double rho_c, const std::array<double, 6> &limited, double dt_over_h) {
    const double div = (limited[1] - limited[0]) + (limited[3] - limited[2]) + (limited[5] - limited[4]);
    // roundoff can leave a drained cell at -eps * rho
    return std::max(rho_c - dt_over_h * div, 0.0);
}

/// A(b) v for A = s_par |b| P_b + s_perp |b| (I - P_b).
inline Vec3 apply_sqrt_diffusion(const Vec3 &b, double r, double s_par, double s_perp, const Vec3 &v) {
    if (r == 0.0) return Vec3::Zero();
    return s_perp * r * v + (s_par - s_perp) * (b.dot(v) / r) * b;
}

/// Directional derivative (v . grad_b)(A(b) e_j).
inline Vec3 sqrt_diffusion_derivative(const Vec3 &b, double r, double s_par, double s_perp, int j, const Vec3 &v) {
    if (r == 0.0) return Vec3::Zero();
    const double bv = b.dot(v);
    Vec3 d = s_perp * (bv / r) * Vec3::Unit(j);
    d += (s_par - s_perp) * (v[j] * b / r + b[j] * v / r - b[j] * bv / (r * r * r) * b);
    return d;
}

inline std::size_t particle_step(Vec3 &b, const SdeStep &p, const RandomStream &rs, std::uint64_t step) {
    double r = b.norm();
    if (r == 0.0) return 0;
    std::size_t guarded = 0;
    Vec3 beval = b;
    if (r < p.floor) {
        beval = b * (p.floor / r);
        r = p.floor;
        guarded = 1;
    }
    const auto [z0, z1] = rs.normal_pair(0, step);
    const auto [z2, z3] = rs.normal_pair(1, step);
    (void)z3;
    const Vec3 xi(z0, z1, z2);
    const double sq = std::sqrt(p.dt);
    Vec3 db = p.kappa * sq * apply_sqrt_diffusion(beval, r, p.sqrt_cL, p.sqrt_2cL, xi);
    if (p.milstein) {
        for (int j = 0; j < 3; ++j) {
            const Vec3 col = apply_sqrt_diffusion(beval, r, p.sqrt_cL, p.sqrt_2cL, Vec3::Unit(j));
            db += 0.5 * p.kappa * p.kappa * (xi[j] * xi[j] - 1.0) * p.dt *
                  sqrt_diffusion_derivative(beval, r, p.sqrt_cL, p.sqrt_2cL, j, col);
        }
    }
    b += db;
    return guarded;
}

}  // namespace kraichnan::kernels::detail
