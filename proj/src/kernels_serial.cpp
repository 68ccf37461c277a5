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

#include "kernel_detail.hpp"

namespace kraichnan::kernels::serial {

void dot(std::span<double> out, std::span<const double *const> u, std::span<const double *const> g) {
    for (std::size_t p = 0; p < out.size(); ++p) {
        double s = 0.0;
        for (std::size_t a = 0; a < u.size(); ++a) s += u[a][p] * g[a][p];
        out[p] = s;
    }
}

void cross(std::array<double *, 3> out, std::array<const double *, 3> u, std::array<const double *, 3> b,
           std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) {
        out[0][p] = u[1][p] * b[2][p] - u[2][p] * b[1][p];
        out[1][p] = u[2][p] * b[0][p] - u[0][p] * b[2][p];
        out[2][p] = u[0][p] * b[1][p] - u[1][p] * b[0][p];
    }
}

std::size_t diffusion_step(const CubeGrid &g, const DiffusionStep &p, std::span<const double> rho_in,
                           std::span<double> rho_out) {
    const int n = g.cells;
    const double dth = p.dt / g.h;
    const double *rho = rho_in.data();
    auto fluxes = [&](int i, int j, int k) {
        std::array<double, 6> f{};
        const std::array<int, 3> c{i, j, k};
        for (int a = 0; a < 3; ++a) {
            std::array<int, 3> below = c;
            below[a] -= 1;
            f[2 * a] = below[a] >= 0 ? detail::face_flux(g, p.c_L, rho, below[0], below[1], below[2], a) : 0.0;
            f[2 * a + 1] = detail::face_flux(g, p.c_L, rho, i, j, k, a);
        }
        return f;
    };

    std::vector<double> factor(g.size());
    std::size_t limited = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const auto id = g.index(i, j, k);
                factor[id] = detail::limiter(rho[id], fluxes(i, j, k), dth);
                if (factor[id] < 1.0) ++limited;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const auto id = g.index(i, j, k);
                auto f = fluxes(i, j, k);
                const std::array<int, 3> c{i, j, k};
                for (int a = 0; a < 3; ++a) {
                    std::array<int, 3> nb = c;
                    nb[a] -= 1;
                    if (nb[a] >= 0) {
                        f[2 * a] *= f[2 * a] > 0.0 ? factor[g.index(nb[0], nb[1], nb[2])] : factor[id];
                    }
                    nb[a] += 2;
                    if (nb[a] < n) {
                        f[2 * a + 1] *= f[2 * a + 1] > 0.0 ? factor[id] : factor[g.index(nb[0], nb[1], nb[2])];
                    }
                }
                rho_out[id] = detail::cell_update(rho[id], f, dth);
            }
        }
    }
    return limited;
}

std::size_t advance_particles(std::span<Vec3> b, const SdeStep &p, std::uint64_t seed, std::uint64_t first_path,
                              std::uint64_t first_step, int steps) {
    std::size_t guarded = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const RandomStream rs{seed, first_path + i};
        for (int s = 0; s < steps; ++s) guarded += detail::particle_step(b[i], p, rs, first_step + std::uint64_t(s));
    }
    return guarded;
}

}  // namespace kraichnan::kernels::serial
