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

#include "kraichnan/scalar_transport.hpp"

#include <doctest.h>

#include <map>

using namespace kraichnan;

namespace {

ScalarRunConfig small_cfg() {
    ScalarRunConfig c;
    c.d = 2;
    c.n = 2;
    c.K_max = 8;
    c.dt = 5e-4;
    c.T = 0.01;
    c.seed = 11;
    return c;
}

SpectralScalarField smooth_field(const GridPtr &g) {
    SpectralScalarField f(g);
    f.set({1, 0, 0}, {0.5, 0.0});
    f.set({0, 1, 0}, {0.0, -0.3});
    f.set({1, 1, 0}, {0.2, 0.1});
    return f;
}

}  // namespace

TEST_CASE("validation") {
    auto c = small_cfg();
    CHECK_NOTHROW(validate(c));
    c.K_max = 3;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_cfg();
    c.dt = 0.002;
    c.T = 0.01;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_cfg();
    c.T = 0.0102;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("trivial dynamics") {
    const ScalarTransportSolver solver(small_cfg());
    const NoisePath path{{1, 2}};
    const SpectralScalarField zero(solver.grid());
    const auto z = solver.run(zero, path);
    for (auto v : z.c) CHECK(v == Complex(0.0));

    const ScalarTransportSolver quiet(small_cfg(), ModeTable::empty(2));
    const auto f = smooth_field(quiet.grid());
    const auto g = quiet.run(f, path);
    for (std::size_t i = 0; i < f.c.size(); ++i) CHECK(g.c[i] == f.c[i]);
}

TEST_CASE("one Euler-Maruyama step against the mode-coupling sum") {
    auto cfg = small_cfg();
    cfg.scheme = ScalarScheme::EulerMaruyama;
    const ScalarTransportSolver solver(cfg);
    const auto &grid = *solver.grid();
    SpectralScalarField f(solver.grid());
    f.set({1, 2, 0}, {0.7, -0.2});
    const auto noise = solver.noise({{3, 4}}, 0);
    const auto out = solver.step(f, noise);

    // c'_k = c_k (1 - kappa |k|^2 dt) + sum_m theta_m dW_m (a_m . i q) c_q with k = k_m + q
    std::map<IVec, Complex> expect;
    for (const IVec &q : {IVec{1, 2, 0}, IVec{-1, -2, 0}}) {
        const Complex cq = f.coeff(q);
        expect[q] += cq * (1.0 - cfg.kappa_T * norm2(q) * cfg.dt);
        const auto modes = solver.modes().modes();
        for (std::size_t i = 0; i < modes.size(); ++i) {
            const IVec k{modes[i].index.k[0] + q[0], modes[i].index.k[1] + q[1], 0};
            if (norm2(k) == 0 || norm2(k) > cfg.K_max * cfg.K_max) continue;
            const double aq = modes[i].a[0] * q[0] + modes[i].a[1] * q[1];
            expect[k] += modes[i].theta * noise.increments[i] * Complex(0.0, aq) * cq;
        }
    }
    int compared = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.complex_size(); ++i) {
        if (!grid.active(i)) continue;
        const auto it = expect.find(grid.wavevector(i));
        const Complex e = it == expect.end() ? Complex(0.0) : it->second;
        worst = std::max(worst, std::abs(out.c[i] - e));
        ++compared;
    }
    CHECK(compared > 100);
    CHECK(worst < 1e-14);
}

TEST_CASE("midpoint scheme conserves the L2 norm and reality") {
    const ScalarTransportSolver solver(small_cfg());
    const auto f = smooth_field(solver.grid());
    const double n0 = l2_norm(f);
    double worst = 0.0, defect = 0.0;
    (void)solver.run(f, {{5, 0}}, [&](int, const SpectralScalarField &th) {
        worst = std::max(worst, std::abs(l2_norm(th) - n0) / n0);
        defect = std::max(defect, reality_defect(*th.grid, th.c));
        CHECK(th.c[0] == Complex(0.0));
    });
    CHECK(worst < 1e-11);
    CHECK(defect < 1e-14);

    // the field moved: transport is active
    const auto last = solver.run(f, {{5, 0}});
    double moved = 0.0;
    for (std::size_t i = 0; i < f.c.size(); ++i) moved += std::norm(last.c[i] - f.c[i]);
    CHECK(moved > 1e-6);
}

TEST_CASE("norms and heat semigroup") {
    const ScalarTransportSolver solver(small_cfg());
    SpectralScalarField f(solver.grid());
    CHECK(l2_norm(f) == 0.0);
    f.set({1, 0, 0}, {0.3, 0.4});
    CHECK(l2_norm(f) * l2_norm(f) == doctest::Approx(2 * 0.25 * kTwoPi * kTwoPi));
    const auto h = heat_limit(f, 1.0, 1.0);
    CHECK(std::abs(h.coeff({1, 0, 0}) - std::exp(-1.0) * Complex(0.3, 0.4)) < 1e-15);
    const auto h0 = heat_limit(f, 0.0, 1.0);
    CHECK(h0.c == f.c);
    const auto g = smooth_field(solver.grid());
    for (double t : {0.1, 0.5, 2.0}) CHECK(l2_norm(heat_limit(g, t, 0.7)) <= l2_norm(g) * std::exp(-0.7 * t) + 1e-15);
    CHECK_THROWS_AS(heat_limit(f, -1.0, 1.0), ConfigError);
}

TEST_CASE("weak error estimator") {
    const ScalarTransportSolver solver(small_cfg());
    const auto f = smooth_field(solver.grid());
    std::vector<SpectralScalarField> same(5, f);
    CHECK(weak_error(same, f, f).mean == 0.0);
    SpectralScalarField psi(solver.grid());
    psi.set({5, 2, 0}, 1.0);
    const ScalarTransportSolver quiet(small_cfg(), ModeTable::empty(2));
    const auto ens = run_ensemble(quiet, f, 0, 4);
    CHECK(weak_error(ens, heat_limit(f, 0.01, 1.0), psi).mean < 1e-20);
    CHECK_THROWS_AS(weak_error({}, f, f), ConfigError);
}

TEST_CASE("ensemble equals sequential runs") {
    const ScalarTransportSolver solver(small_cfg());
    const auto f = smooth_field(solver.grid());
    const auto ens = run_ensemble(solver, f, 10, 3);
    for (int p = 0; p < 3; ++p) {
        const auto one = solver.run(f, {{small_cfg().seed, 10 + std::uint64_t(p)}});
        CHECK(one.c == ens[std::size_t(p)].c);
    }
}

TEST_CASE("renormalization") {
    auto cfg = small_cfg();
    cfg.n = 1;
    cfg.K_max = 6;
    cfg.T = 0.04;
    cfg.dt = 8e-4;
    const NoisePath path{{8, 1}};
    const ScalarTransportSolver coarse(cfg);
    SpectralScalarField f(coarse.grid());
    f.set({1, 0, 0}, {0.25, 0.0});
    CHECK(renormalization_check(coarse, f, [](double x) { return x; }, path, path) < 1e-15);
    CHECK(renormalization_check(coarse, f, [](double) { return 3.0; }, path, path) < 1e-15);
    CHECK_THROWS_AS(renormalization_check(coarse, f, [](double x) { return x; }, path, {{8, 2}}), ContractViolation);

    auto square = [](double x) { return x * x; };
    const double e1 = renormalization_check(coarse, f, square, path, path);
    auto fine_cfg = cfg;
    fine_cfg.dt = cfg.dt / 2;
    fine_cfg.K_max = 2 * cfg.K_max;
    const ScalarTransportSolver fine(fine_cfg);
    SpectralScalarField ff(fine.grid());
    ff.set({1, 0, 0}, {0.25, 0.0});
    const NoisePath fine_path{{8, 1}, 1};
    const NoisePath coarse_path{{8, 1}, 2};
    const double e1b = renormalization_check(coarse, f, square, coarse_path, coarse_path);
    const double e2 = renormalization_check(fine, ff, square, fine_path, fine_path);
    MESSAGE("renormalization discrepancy " << e1 << " " << e1b << " -> " << e2);
    CHECK(e1 > 0.0);
    CHECK(e2 <= 0.5 * e1b);
}
