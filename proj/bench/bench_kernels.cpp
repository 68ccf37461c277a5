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

// Serial reference kernels against their OpenMP counterparts.

#include "kraichnan/kernels.hpp"
#include "kraichnan/vlasov_limit.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace kraichnan;
namespace K = kraichnan::kernels;

namespace {

std::vector<double> ramp(std::size_t n, double phase) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(0.001 * double(i) + phase);
    return v;
}

template <bool Omp>
void bm_cross(benchmark::State &state) {
    const auto n = std::size_t(state.range(0));
    std::array<std::vector<double>, 3> u, b, out;
    for (int a = 0; a < 3; ++a) {
        u[a] = ramp(n, a);
        b[a] = ramp(n, 3 + a);
        out[a].assign(n, 0.0);
    }
    for (auto _ : state) {
        const std::array<double *, 3> o{out[0].data(), out[1].data(), out[2].data()};
        const std::array<const double *, 3> pu{u[0].data(), u[1].data(), u[2].data()};
        const std::array<const double *, 3> pb{b[0].data(), b[1].data(), b[2].data()};
        if constexpr (Omp) K::omp::cross(o, pu, pb, n); else K::serial::cross(o, pu, pb, n);
        benchmark::DoNotOptimize(out[0].data());
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(n));
}

template <bool Omp>
void bm_dot(benchmark::State &state) {
    const auto n = std::size_t(state.range(0));
    std::vector<std::vector<double>> u(3), g(3);
    std::vector<const double *> pu, pg;
    for (int a = 0; a < 3; ++a) {
        u[a] = ramp(n, a);
        g[a] = ramp(n, 2 * a + 1);
        pu.push_back(u[a].data());
        pg.push_back(g[a].data());
    }
    std::vector<double> out(n);
    for (auto _ : state) {
        if constexpr (Omp) K::omp::dot(out, pu, pg); else K::serial::dot(out, pu, pg);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(n));
}

template <bool Omp>
void bm_diffusion(benchmark::State &state) {
    BGridDensity rho(int(state.range(0)), 5.0);
    rho.deposit(Vec3(1.0, 0.0, 0.0));
    const K::DiffusionStep p{c_L(), fp_max_dt(rho, 1.0)};
    std::vector<double> out(rho.rho.size());
    for (auto _ : state) {
        if constexpr (Omp) K::omp::diffusion_step(rho.grid, p, rho.rho, out); else K::serial::diffusion_step(rho.grid, p, rho.rho, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(rho.rho.size()));
}

template <bool Omp>
void bm_particles(benchmark::State &state) {
    std::vector<Vec3> b(std::size_t(state.range(0)), Vec3::UnitX());
    const double cl = c_L();
    const K::SdeStep p{std::sqrt(cl), std::sqrt(2.0 * cl), std::sqrt(2.0), 1e-4, 1e-8, false};
    std::uint64_t step = 0;
    for (auto _ : state) {
        if constexpr (Omp) K::omp::advance_particles(b, p, 1, 0, step, 10); else K::serial::advance_particles(b, p, 1, 0, step, 10);
        step += 10;
        benchmark::DoNotOptimize(b.data());
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(b.size()) * 10);
}

}  // namespace

BENCHMARK(bm_cross<false>)->Name("cross/serial")->Arg(1 << 15)->Arg(1 << 18);
BENCHMARK(bm_cross<true>)->Name("cross/omp")->Arg(1 << 15)->Arg(1 << 18);
BENCHMARK(bm_dot<false>)->Name("dot/serial")->Arg(1 << 15)->Arg(1 << 18);
BENCHMARK(bm_dot<true>)->Name("dot/omp")->Arg(1 << 15)->Arg(1 << 18);
BENCHMARK(bm_diffusion<false>)->Name("diffusion_step/serial")->Arg(32)->Arg(64);
BENCHMARK(bm_diffusion<true>)->Name("diffusion_step/omp")->Arg(32)->Arg(64);
BENCHMARK(bm_particles<false>)->Name("advance_particles/serial")->Arg(10000);
BENCHMARK(bm_particles<true>)->Name("advance_particles/omp")->Arg(10000);

BENCHMARK_MAIN();
