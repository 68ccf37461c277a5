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

#include "kraichnan/vector_advection.hpp"

#include <doctest.h>

#include <map>

using namespace kraichnan;

namespace {

VectorRunConfig small_cfg() {
    VectorRunConfig c;
    c.n = 1;
    c.K_max = 6;
    c.dt = 1e-4;
    c.T = 0.002;
    c.seed = 7;
    return c;
}

SpectralVectorField smooth_field(const GridPtr &g) {
    SpectralVectorField B(g);
    B.set({1, 0, 0}, Eigen::Vector3cd(0.0, 1.0, Complex(0.0, 0.5)));
    B.set({0, 1, 1}, Eigen::Vector3cd(0.4, Complex(0.2, 0.1), Complex(-0.2, -0.1)));
    B.set({1, 1, 0}, Eigen::Vector3cd(0.0, 0.0, 0.3));
    return B;
}

Eigen::Vector3cd project(const IVec &k, const Eigen::Vector3cd &v) {
    const Vec3 kv = to_vec3(k);
    return v - kv * (kv.cast<Complex>().dot(v)) / kv.squaredNorm();
}

}  // namespace

TEST_CASE("vector config validation") {
    auto c = small_cfg();
    CHECK_NOTHROW(validate(c));
    c.K_max = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_cfg();
    c.dt = 1e-2;
    c.T = 0.02;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_cfg();
    c.gamma = 2;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("Leray projection") {
    const VectorAdvectionSolver solver(small_cfg());
    const auto g = solver.grid();
    SpectralVectorField grad(g);
    for (const IVec &k : {IVec{1, 2, 0}, IVec{0, -1, 3}, IVec{2, 2, 2}}) {
        grad.set(k, to_vec3(k).cast<Complex>() * Complex(0.3, -0.7));
    }
    const auto p = leray_project(grad);
    for (int a = 0; a < 3; ++a)
        for (auto v : p.c[a]) CHECK(std::abs(v) < 1e-15);

    SpectralVectorField f(g);
    f.set({1, 2, 0}, Eigen::Vector3cd(1.0, Complex(0.0, 1.0), 0.5));
    f.set({-1, 1, 1}, Eigen::Vector3cd(0.2, 0.0, -0.4));
    const auto p1 = leray_project(f);
    const auto p2 = leray_project(p1);
    CHECK(max_divergence(p1) < 1e-13);
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < p1.c[a].size(); ++i) CHECK(std::abs(p2.c[a][i] - p1.c[a][i]) < 1e-15);
    CHECK(energy(p1) <= energy(f));
}

TEST_CASE("vector solver constants") {
    const VectorAdvectionSolver solver(small_cfg());
    const auto s = shell_sums(1, 3);
    CHECK(solver.viscosity() == doctest::Approx(2.0 / 3.0 * s.eta_n).epsilon(1e-12));
    const Mat3 m = solver.wavevector_moment();
    CHECK((m - 2.0 / 3.0 * s.alpha_n * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero field and quiet noise") {
    const VectorAdvectionSolver solver(small_cfg());
    const SpectralVectorField zero(solver.grid());
    const auto z = solver.run(zero, {{1, 1}});
    for (int a = 0; a < 3; ++a)
        for (auto v : z.c[a]) CHECK(v == Complex(0.0));

    const VectorAdvectionSolver quiet(small_cfg(), ModeTable::empty(3));
    const auto B = smooth_field(quiet.grid());
    const auto out = quiet.run(B, {{1, 1}});
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < B.c[a].size(); ++i) CHECK(out.c[a][i] == B.c[a][i]);
}

TEST_CASE("one vector step against the mode-coupling sum") {
    const auto cfg = small_cfg();
    const VectorAdvectionSolver solver(cfg);
    const auto &grid = *solver.grid();
    SpectralVectorField B(solver.grid());
    const IVec q{1, -1, 2};
    const Eigen::Vector3cd bq = project(q, Eigen::Vector3cd(Complex(0.3, 0.2), -0.5, Complex(0.0, 0.7)));
    B.set(q, bq);
    const auto noise = solver.noise({{9, 2}}, 0);
    const auto out = solver.step(B, noise);

    // u . grad B - B . grad u for a product of two plane waves, then P at the output wave vector
    std::map<IVec, Eigen::Vector3cd> expect;
    for (int s : {1, -1}) {
        const IVec qs = s > 0 ? q : negate(q);
        const Eigen::Vector3cd c = s > 0 ? bq : Eigen::Vector3cd(bq.conjugate());
        auto &self = expect[qs];
        if (self.size() == 0) self.setZero();
        self += c * (1.0 - solver.viscosity() * norm2(qs) * cfg.dt);
        const auto modes = solver.modes().modes();
        for (std::size_t i = 0; i < modes.size(); ++i) {
            const IVec &km = modes[i].index.k;
            const IVec k{km[0] + qs[0], km[1] + qs[1], km[2] + qs[2]};
            if (norm2(k) == 0 || norm2(k) > cfg.K_max * cfg.K_max) continue;
            const Complex w = modes[i].theta * noise.increments[i];
            const Vec3 a = modes[i].a;
            const Complex aq = Complex(0.0, a.dot(to_vec3(qs)));
            const Complex ck = (c.transpose() * to_vec3(km).cast<Complex>())(0);
            const Eigen::Vector3cd term = w * (aq * c - Complex(0.0, 1.0) * ck * a.cast<Complex>());
            auto &slot = expect[k];
            if (slot.size() == 0) slot.setZero();
            slot += project(k, term);
        }
    }
    int compared = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.complex_size(); ++i) {
        if (!grid.active(i)) continue;
        const auto it = expect.find(grid.wavevector(i));
        for (int a = 0; a < 3; ++a) {
            const Complex e = it == expect.end() ? Complex(0.0) : it->second[a];
            worst = std::max(worst, std::abs(out.c[a][i] - e));
        }
        ++compared;
    }
    CHECK(compared > 100);
    CHECK(worst < 1e-14);
}

TEST_CASE("vector run keeps the field divergence free") {
    const VectorAdvectionSolver solver(small_cfg());
    const auto B = leray_project(smooth_field(solver.grid()));
    double div = 0.0, defect = 0.0;
    (void)solver.run(B, {{3, 0}}, [&](int, const SpectralVectorField &b) {
        div = std::max(div, max_divergence(b));
        for (int a = 0; a < 3; ++a) defect = std::max(defect, reality_defect(*b.grid, b.c[a]));
    });
    CHECK(div < 1e-12);
    CHECK(defect < 1e-14);
    CHECK(solver.drift_increment(B) > 0.0);
}

TEST_CASE("energy residual bookkeeping") {
    const VectorAdvectionSolver solver(small_cfg());
    const auto B = leray_project(smooth_field(solver.grid()));
    const NoisePath path{{4, 4}};
    std::vector<SpectralVectorField> traj;
    (void)solver.run(B, path, [&](int, const SpectralVectorField &b) { traj.push_back(b); });
    const auto a = ito_energy_residual(solver, traj, path, true);
    const auto b = ito_energy_residual(solver, B, path, true);
    REQUIRE(a.residual.size() == std::size_t(solver.config().steps()));
    CHECK(a.energy.size() == a.residual.size() + 1);
    for (std::size_t m = 0; m < a.residual.size(); ++m) {
        CHECK(a.residual[m] == b.residual[m]);
        CHECK(a.energy[m + 1] - a.energy[m] == doctest::Approx(a.martingale[m] + a.drift[m] + a.residual[m]));
        CHECK(a.qv_expected[m] > 0.0);
        CHECK(a.cutoff[m] >= 0.0);
    }
    // the initial field and the noise are both band limited well inside K_max
    CHECK(a.cutoff[0] < 1e-20 * a.energy[0]);
    traj.pop_back();
    CHECK_THROWS_AS((void)ito_energy_residual(solver, traj, path), ContractViolation);

    // one-step residual is second order in the increment: far below the martingale scale
    double res = 0.0, mart = 0.0;
    for (std::size_t m = 0; m < a.residual.size(); ++m) {
        res += std::abs(a.residual[m]);
        mart += std::abs(a.martingale[m]);
    }
    CHECK(res < 0.2 * mart);
}

TEST_CASE("cutoff energy is the truncated part of the noise term") {
    const VectorAdvectionSolver solver(small_cfg());
    SpectralVectorField B(solver.grid());
    B.set({0, 0, 5}, Eigen::Vector3cd(1.0, Complex(0.0, 1.0), 0.0));
    const auto vel = solver.velocity(solver.noise({{2, 2}}, 0));
    double cut = -1.0;
    const auto n = solver.noise_term(vel, B, &cut);
    CHECK(cut > 0.0);

    // the same term on a grid that retains every product mode
    auto wide = small_cfg();
    wide.K_max = 10;
    const VectorAdvectionSolver big(wide);
    SpectralVectorField Bw(big.grid());
    Bw.set({0, 0, 5}, Eigen::Vector3cd(1.0, Complex(0.0, 1.0), 0.0));
    double none = -1.0;
    const auto nw = big.noise_term(big.velocity(big.noise({{2, 2}}, 0)), Bw, &none);
    CHECK(none < 1e-20);
    double outside = 0.0;
    const auto &gw = *big.grid();
    for (std::size_t p = 0; p < gw.complex_size(); ++p) {
        if (gw.k2(p) <= 36) continue;
        for (int a = 0; a < 3; ++a) outside += gw.weight(p) * std::norm(nw.c[a][p]);
    }
    CHECK(cut == doctest::Approx(outside * gw.volume()).epsilon(1e-10));
    CHECK(energy(nw) == doctest::Approx(energy(n) + cut).epsilon(1e-10));
}

TEST_CASE("martingale quadratic variation matches the stretching sum") {
    // E[M^2] = 8 dt sum_k |<B . grad sigma_k, B>|^2 at a fixed field, checked over many noise draws
    const VectorAdvectionSolver solver(small_cfg());
    const auto B = leray_project(smooth_field(solver.grid()));
    const double expect = 8.0 * solver.config().dt * solver.stretching_square_sum(B);
    double s = 0.0, s2 = 0.0;
    const int draws = 400;
    for (int i = 0; i < draws; ++i) {
        const double m = solver.martingale_increment(solver.velocity(solver.noise({{17, 3}}, std::uint64_t(i))), B);
        s += m * m;
        s2 += m * m * m * m;
    }
    const double mean = s / draws;
    const double se = std::sqrt((s2 / draws - mean * mean) / draws);
    CHECK(std::abs(mean - expect) < 4.0 * se);
    CHECK(se < 0.2 * expect);
}

TEST_CASE("sup moment estimate") {
    const auto e = sup_moment({1.0, 4.0, 9.0}, 4.0);
    CHECK(e.mean == doctest::Approx((1.0 + 16.0 + 81.0) / 3.0));
    CHECK(e.std_error > 0.0);
    CHECK(sup_moment({2.0}, 4.0).std_error == 0.0);
    CHECK_THROWS_AS((void)sup_moment({}, 4.0), ConfigError);
}

TEST_CASE("Vlasov residuals") {
    auto cfg = small_cfg();
    cfg.T = 0.001;
    const VectorAdvectionSolver solver(cfg);
    const auto B = leray_project(smooth_field(solver.grid()));
    const NoisePath path{{6, 1}};

    const auto c = vlasov_residual(solver, B, path, constant_function(2.0));
    for (double g : c.gap) CHECK(std::abs(g) < 1e-12);

    const auto x = vlasov_residual(solver, B, path, x_mode_function({1, 2, 0}, 0.3));
    for (std::size_t m = 0; m < x.gap.size(); ++m) {
        CHECK(std::abs(x.gap[m]) < 1e-11);
        CHECK(std::abs(x.transport[m]) < 1e-11);
    }

    // |b|^2 on the range of B: the residual reduces to the cumulative energy residual
    const auto e = vlasov_residual(solver, B, path, truncated_energy_function(50.0, 60.0));
    const auto er = ito_energy_residual(solver, B, path);
    double cum = 0.0;
    for (std::size_t m = 0; m < e.gap.size(); ++m) {
        cum += er.residual[m];
        CHECK(std::abs(e.gap[m] - cum) < 1e-9 * er.energy[0]);
        CHECK(e.lhs[m] == doctest::Approx(er.energy[m + 1] - er.energy[0]).epsilon(1e-9));
    }

    const auto mx = vlasov_residual(solver, B, path, mixed_function(Vec3(0.0, 1.0, 0.0), 1.5));
    CHECK(mx.gap.size() == std::size_t(cfg.steps()));
}
