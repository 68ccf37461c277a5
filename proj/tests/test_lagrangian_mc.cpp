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

#include "kraichnan/lagrangian_mc.hpp"
#include "kraichnan/vector_advection.hpp"

#include <doctest.h>

using namespace kraichnan;

namespace {

SdeConfig small_sde() {
    SdeConfig c;
    c.dt = 1e-3;
    c.T = 0.02;
    c.paths = 2000;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("sde config validation") {
    auto c = small_sde();
    CHECK_NOTHROW(validate(c));
    c.paths = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_sde();
    c.T = 0.0205;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("limit sde basics") {
    auto c = small_sde();
    const auto zero = simulate_limit_sde(Vec3::Zero(), c);
    for (const auto &b : zero.b) CHECK(b == Vec3::Zero());

    const Vec3 b0(1.0, 0.0, 0.0);
    const auto s = simulate_limit_sde(b0, c, Backend::Serial);
    const auto o = simulate_limit_sde(b0, c, Backend::Omp);
    CHECK(s.b == o.b);
    CHECK(s.guarded == 0);
    CHECK(s.t == doctest::Approx(0.02));
    CHECK(simulate_limit_sde(b0, c).b == o.b);

    // EM second moment: E|b_{m+1}|^2 = (1 + kappa^2 5 c_L dt) E|b_m|^2 exactly
    c.paths = 40000;
    const auto e = simulate_limit_sde(b0, c);
    const auto g = growth_rate(e.b, b0, c.T);
    const double oracle = c.steps() * std::log1p(c.kappa * c.kappa * 5.0 * c_L() * c.dt) / c.T;
    CHECK(std::abs(g.mean - oracle) < 3.0 * g.std_error);
    CHECK(g.std_error < 0.05 * oracle);
}

TEST_CASE("limit sde moments and rotation equivariance") {
    auto c = small_sde();
    const Vec3 b0(0.0, 2.0, 0.0);
    const auto m = limit_sde_moments(b0, c, 5);
    CHECK(m.t.size() == 5);
    CHECK(m.mean_r2.front() == doctest::Approx(4.0));
    CHECK(m.zero_hits == 0);
    CHECK(m.mean_log_r.back() > m.mean_log_r.front());
    const auto end = simulate_limit_sde(b0, c);
    double s = 0.0;
    for (const auto &b : end.b) s += b.squaredNorm();
    CHECK(m.mean_r2.back() == doctest::Approx(s / double(end.b.size())).epsilon(1e-12));
    CHECK(m.hit_fraction.back() == 0.0);

    const TargetBall ball{b0 + Vec3(0.0, 1.0, 0.0), 1.5};
    const auto mb = limit_sde_moments(b0, c, 5, &ball);
    const auto probe = support_probe(b0, ball.center, ball.eps, c);
    CHECK(mb.hit_fraction.back() == doctest::Approx(probe.fraction).epsilon(1e-12));
    CHECK(mb.hit_fraction.front() == 1.0);
    CHECK(mb.var_r2.front() == doctest::Approx(0.0));

    // same stream, rotated start: A(Rb) = R A(b) R^T, so |b| statistics agree in law
    c.paths = 20000;
    const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Vec3(1, 1, 0).normalized()).toRotationMatrix();
    auto a = simulate_limit_sde(b0, c);
    c.seed = 99;
    auto r = simulate_limit_sde(R * b0, c);
    double ma = 0.0, mr = 0.0, va = 0.0;
    for (std::size_t i = 0; i < a.b.size(); ++i) {
        ma += a.b[i].norm();
        mr += r.b[i].norm();
        va += a.b[i].squaredNorm();
    }
    const double n = double(a.b.size());
    const double se = std::sqrt(2.0 * (va / n - (ma / n) * (ma / n)) / n);
    CHECK(std::abs(ma - mr) / n < 4.0 * se);
}

TEST_CASE("empirical law, hits and large values") {
    ParticleEnsemble one;
    one.b = {Vec3(0.3, -0.2, 0.1)};
    const BinBox box{3, -1.0, 1.0, 8};
    const auto law = empirical_law(one, box);
    CHECK(law.hist.weights[std::size_t(box.locate(one.b[0]))] == 1.0);
    CHECK(law.std_error[std::size_t(box.locate(one.b[0]))] == 0.0);

    const auto w = wilson_interval(0, 100);
    CHECK(w.ci_low == 0.0);
    CHECK(w.ci_high > 0.0);
    const auto w2 = wilson_interval(50, 100);
    CHECK(w2.ci_low < 0.5);
    CHECK(w2.ci_high > 0.5);
    CHECK(w2.ci_high - 0.5 == doctest::Approx(0.5 - w2.ci_low));

    auto c = small_sde();
    c.T = 0.001;
    const Vec3 b0(1.0, 0.0, 0.0);
    CHECK(support_probe(b0, b0, 0.5, c).fraction == 1.0);
    CHECK(support_probe(Vec3::Zero(), b0, 0.5, c).fraction == 0.0);

    const auto g = std::make_shared<SpectralGrid>(3, 4, 24);
    SpectralVectorField B(g);
    B.set({1, 0, 0}, Eigen::Vector3cd(0.0, 0.5, 0.0));
    const auto v = GridValues::of(B);
    CHECK(large_values_fraction(v, Vec3(1, 1, 1), 1.0, 0.0) == 1.0);
    CHECK(large_values_fraction(v, Vec3(1, 1, 1), 1.0, 1.01) == 0.0);
    const double f = large_values_fraction(v, Vec3(0.0, 1, 1), 1.0, 0.9);
    CHECK(f > 0.0);
    CHECK(f < 1.0);
    CHECK_THROWS_AS((void)large_values_fraction(v, Vec3(1, 1, 1), 0.2, 0.5), ConfigError);
}

TEST_CASE("total variation against a density") {
    BGridDensity rho(8, 2.0);
    rho.deposit(Vec3(0.25, 0.25, 0.25));
    ParticleEnsemble e;
    e.b = {Vec3(0.25, 0.25, 0.25), Vec3(0.3, 0.3, 0.3)};
    CHECK(total_variation(empirical_law(e, BinBox{3, -2.0, 2.0, 4}), rho) < 1e-12);
    e.b = {Vec3(-1.5, 0.25, 0.25)};
    CHECK(total_variation(empirical_law(e, BinBox{3, -2.0, 2.0, 8}), rho) == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)total_variation(empirical_law(e, BinBox{3, -2.0, 2.0, 3}), rho), ConfigError);
}

TEST_CASE("mode sum against the spectral velocity") {
    VectorRunConfig vc;
    vc.n = 1;
    vc.K_max = 4;
    vc.dt = 1e-3;
    vc.T = 0.001;
    const VectorAdvectionSolver solver(vc);
    const auto noise = solver.noise({{4, 5}}, 0);
    const auto vel = solver.velocity(noise);
    const auto grad = solver.velocity_gradient(vel);
    const ModeSum sum(solver.modes().modes(), noise);
    const Vec3 b(0.3, -1.0, 0.5);
    const auto &g = *solver.grid();
    double worst = 0.0;
    for (std::size_t p = 0; p < g.real_size(); p += 97) {
        Vec3 u, bgu;
        sum.evaluate(g.point(p), b, u, bgu);
        for (int i = 0; i < 3; ++i) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) s += b[j] * grad[i * 3 + j][p];
            worst = std::max({worst, std::abs(u[i] - vel.u[i][p]), std::abs(bgu[i] - s)});
        }
    }
    CHECK(worst < 1e-13);
}

TEST_CASE("finite-n particles") {
    FiniteNConfig c;
    c.n = 1;
    c.dt = 1e-3;
    c.T = 0.004;
    c.seed = 2;
    const auto x0 = halton_points(16);
    for (const auto &x : x0)
        for (int a = 0; a < 3; ++a) CHECK((x[a] >= 0.0 && x[a] < kTwoPi));
    const std::vector<Vec3> b0(x0.size(), Vec3(1.0, 0.0, 0.0));

    const auto frozen = simulate_finite_n(x0, b0, c, ModeTable::empty(3));
    for (std::size_t i = 0; i < x0.size(); ++i) {
        CHECK((frozen.x[i] - x0[i]).norm() < 1e-14);
        CHECK(frozen.b[i] == b0[i]);
    }

    c.environments = 2;
    const auto a = simulate_finite_n(x0, b0, c);
    const auto b = simulate_finite_n(x0, b0, c);
    CHECK(a.b == b.b);
    CHECK(a.x == b.x);
    REQUIRE(a.b.size() == 32);
    CHECK(a.b[0] != a.b[16]);

    // one mode: k . X and k . b are conserved, so the midpoint step is explicit
    NoiseMode m1;
    m1.index = {{1, 2, 0}, 1};
    m1.a = build_frame(m1.index.k, 3)[0];
    m1.theta = 0.4;
    NoiseMode m2 = m1;
    m2.index.k = negate(m1.index.k);
    const std::vector<NoiseMode> modes{m1, m2};
    NoiseRealization nz;
    nz.increments = {Complex(0.03, -0.05), Complex(0.03, 0.05)};
    const ModeSum sum(modes, nz);
    Vec3 x(0.4, 1.1, 2.0), bb(0.5, -0.2, 0.9);
    const Vec3 k = to_vec3(m1.index.k);
    const double psi = k.dot(x) + std::arg(nz.increments[0]);
    const double amp = 2.0 * m1.theta * std::abs(nz.increments[0]);
    const Vec3 x_expect = x - amp * std::cos(psi) * m1.a;
    const Vec3 b_expect = bb + amp * std::sin(psi) * k.dot(bb) * m1.a;
    midpoint_particle_step(sum, x, bb, 1e-14, 10);
    CHECK((x - x_expect).norm() < 1e-14);
    CHECK((bb - b_expect).norm() < 1e-14);
}
