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

#ifdef _OPENMP
#include <omp.h>
#endif

#include <vector>

namespace kraichnan::kernels {

int set_thread_cap(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
    return omp_get_max_threads();
#else
    (void)threads;
    return 1;
#endif
}

namespace omp {

void dot(std::span<double> out, std::span<const double *const> u, std::span<const double *const> g) {
    const auto n = static_cast<std::ptrdiff_t>(out.size());
    const std::size_t na = u.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < n; ++p) {
        double s = 0.0;
        for (std::size_t a = 0; a < na; ++a) s += u[a][p] * g[a][p];
        out[p] = s;
    }
}

void cross(std::array<double *, 3> out, std::array<const double *, 3> u, std::array<const double *, 3> b,
           std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n); ++p) {
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
    // face flux arrays: flux[a][cell] is the flux through the upper face of `cell` along a
    std::array<std::vector<double>, 3> flux;
    for (auto &f : flux) f.assign(g.size(), 0.0);
    std::vector<double> factor(g.size());

#pragma omp parallel for collapse(2) schedule(static)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const auto id = g.index(i, j, k);
                for (int a = 0; a < 3; ++a) flux[a][id] = detail::face_flux(g, p.c_L, rho, i, j, k, a);
            }
        }
    }

    auto lower = [&](int a, int i, int j, int k) {
        std::array<int, 3> c{i, j, k};
        c[a] -= 1;
        return c[a] >= 0 ? flux[a][g.index(c[0], c[1], c[2])] : 0.0;
    };
    auto gather = [&](int i, int j, int k) {
        const auto id = g.index(i, j, k);
        return std::array<double, 6>{lower(0, i, j, k), flux[0][id], lower(1, i, j, k),
                                     flux[1][id], lower(2, i, j, k), flux[2][id]};
    };

    std::size_t limited = 0;
#pragma omp parallel for collapse(2) schedule(static) reduction(+ : limited)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const auto id = g.index(i, j, k);
                factor[id] = detail::limiter(rho[id], gather(i, j, k), dth);
                if (factor[id] < 1.0) ++limited;
            }
        }
    }

#pragma omp parallel for collapse(2) schedule(static)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const auto id = g.index(i, j, k);
                auto f = gather(i, j, k);
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
    const auto count = static_cast<std::ptrdiff_t>(b.size());
#pragma omp parallel for schedule(static) reduction(+ : guarded)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const RandomStream rs{seed, first_path + std::uint64_t(i)};
        for (int s = 0; s < steps; ++s) guarded += detail::particle_step(b[i], p, rs, first_step + std::uint64_t(s));
    }
    return guarded;
}

}  // namespace omp
}  // namespace kraichnan::kernels
