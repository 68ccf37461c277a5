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

#include "kraichnan/noise_basis.hpp"
#include "kraichnan/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace kraichnan;

namespace {

// brute-force sum over the shell with plain integer arithmetic
double lattice_sum(int n, int d, double power) {
    double s = 0.0;
    const int m = 2 * n;
    for (int x = -m; x <= m; ++x)
        for (int y = -m; y <= m; ++y)
            for (int z = (d == 3 ? -m : 0); z <= (d == 3 ? m : 0); ++z) {
                const int r2 = x * x + y * y + z * z;
                if (r2 >= n * n && r2 <= 4 * n * n) s += std::pow(std::sqrt(double(r2)), -power);
            }
    return s;
}

}  // namespace

TEST_CASE("philox known answers") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("random stream is addressable and deterministic") {
    const RandomStream a{7, 3};
    const RandomStream b{7, 3};
    CHECK(a.normal_pair(11, 5) == b.normal_pair(11, 5));
    CHECK(a.normal_pair(11, 5) != a.normal_pair(11, 6));
    CHECK(a.normal_pair(11, 5) != RandomStream{7, 4}.normal_pair(11, 5));
    double s = 0.0, s2 = 0.0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) {
        const auto [x, y] = a.normal_pair(0, std::uint64_t(i));
        s += x + y;
        s2 += x * x + y * y;
    }
    CHECK(std::abs(s / (2 * m)) < 4.0 / std::sqrt(2.0 * m));
    CHECK(std::abs(s2 / (2 * m) - 1.0) < 4.0 * std::sqrt(2.0 / (2 * m)));
}

TEST_CASE("build_frame") {
    SUBCASE("axis aligned") {
        const auto f = build_frame({1, 0, 0}, 3);
        REQUIRE(f.size() == 2);
        CHECK((f[0] - Vec3(0, 1, 0)).norm() == doctest::Approx(0.0));
        CHECK((f[1] - Vec3(0, 0, 1)).norm() == doctest::Approx(0.0));
    }
    SUBCASE("even in k") {
        for (const IVec &k : {IVec{-1, 0, 0}, IVec{2, -3, 1}, IVec{0, -1, 4}}) {
            const auto f = build_frame(k, 3);
            const auto g = build_frame(negate(k), 3);
            for (int j = 0; j < 2; ++j) CHECK((f[j] - g[j]).norm() == 0.0);
        }
    }
    SUBCASE("orthonormal with k on every shell vector") {
        for (int d : {2, 3}) {
            for (const auto &k : shell_vectors(3, d)) {
                const Vec3 kh = to_vec3(k).normalized();
                const auto f = build_frame(k, d);
                REQUIRE(int(f.size()) == d - 1);
                for (std::size_t i = 0; i < f.size(); ++i) {
                    CHECK(std::abs(f[i].norm() - 1.0) < 1e-14);
                    CHECK(std::abs(f[i].dot(kh)) < 1e-14);
                    for (std::size_t j = i + 1; j < f.size(); ++j) CHECK(std::abs(f[i].dot(f[j])) < 1e-14);
                }
            }
        }
    }
    SUBCASE("k = (1,1,0) against Gram-Schmidt") {
        const auto f = build_frame({1, 1, 0}, 3);
        // least aligned axis is z: a1 = e_z, a2 = khat x e_z
        const double r = 1.0 / std::sqrt(2.0);
        CHECK((f[0] - Vec3(0, 0, 1)).norm() < 1e-14);
        CHECK((f[1] - Vec3(r, -r, 0)).norm() < 1e-14);
    }
    CHECK_THROWS_AS(build_frame({0, 0, 0}, 3), ConfigError);
}

TEST_CASE("theta coefficients") {
    CHECK(theta_scalar({1, 0, 0}, 2, 2, 1.0) == 0.0);
    const double c2 = lattice_sum(2, 2, 2.0);
    CHECK(theta_scalar({2, 0, 0}, 2, 2, 1.0) == doctest::Approx(std::sqrt(2.0 / c2) * 0.5).epsilon(1e-14));
    CHECK(theta_scalar({1, 2, 0}, 2, 2, 4.0) == doctest::Approx(2.0 * theta_scalar({1, 2, 0}, 2, 2, 1.0)));
    CHECK(theta_vector({2, 0, 0}, 2, 1.0) == doctest::Approx(std::pow(2.0, -2.5)));
    CHECK(theta_vector({0, 2, 0}, 2, 1.0) == doctest::Approx(0.17677669529663687));
    CHECK(theta_vector({1, 1, 1}, 1, 1.0) == doctest::Approx(std::pow(3.0, -1.25)).epsilon(1e-14));
    CHECK(theta_vector({5, 0, 0}, 2, 1.0) == 0.0);
    CHECK_THROWS_AS(theta_vector({1, 0, 0}, 0, 1.0), ConfigError);
    CHECK_THROWS_AS(theta_scalar({1, 0, 0}, 1, 2, -1.0), ConfigError);
}

TEST_CASE("shell sums") {
    const auto s1 = shell_sums(1, 3);
    CHECK(s1.eta_n == doctest::Approx(6 + 12 * std::pow(2.0, -2.5) + 8 * std::pow(3.0, -2.5) + 6 * std::pow(4.0, -2.5)).epsilon(1e-14));
    CHECK(s1.eta_n == doctest::Approx(8.82202058283931).epsilon(1e-13));
    CHECK(s1.alpha_n == doctest::Approx(12.532241404958288).epsilon(1e-13));
    CHECK(shell_vectors(1, 3).size() == 32);
    for (int n = 1; n <= 8; ++n) {
        for (int d : {2, 3}) {
            const auto s = shell_sums(n, d);
            CHECK(s.c_n == doctest::Approx(lattice_sum(n, d, d)).epsilon(1e-13));
            if (d == 3) {
                CHECK(s.eta_n == doctest::Approx(lattice_sum(n, 3, 5)).epsilon(1e-13));
                CHECK(s.alpha_n == doctest::Approx(lattice_sum(n, 3, 3)).epsilon(1e-13));
            }
        }
    }
    const double target = 4.0 * std::numbers::pi * std::log(2.0);
    double prev = 1e9;
    for (int n : {8, 16, 32}) {
        const double err = std::abs(shell_sums(n, 3).alpha_n - target);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("isotropy identity") {
    for (int n : {1, 2, 4}) {
        const auto t = ModeTable::vector(n, 1.0);
        const double eta = shell_sums(n, 3).eta_n;
        const Mat3 diff = t.isotropy_sum() - (2.0 / 3.0) * eta * Mat3::Identity();
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
        const Mat3 mom = t.wavevector_moment() - (2.0 * shell_sums(n, 3).alpha_n / 3.0) * Mat3::Identity();
        CHECK(mom.cwiseAbs().maxCoeff() < 1e-12);
    }
    // scalar noise in 2D: sum theta^2 a a^T = kappa_T I
    const auto t = ModeTable::scalar(2, 3, 0.7);
    const Mat3 s = t.isotropy_sum();
    CHECK(s(0, 0) == doctest::Approx(0.7).epsilon(1e-13));
    CHECK(s(1, 1) == doctest::Approx(0.7).epsilon(1e-13));
    CHECK(std::abs(s(0, 1)) < 1e-13);
}

TEST_CASE("sample_increments") {
    const auto t = ModeTable::scalar(2, 2, 1.0);
    const RandomStream rs{42, 1};
    const auto r1 = sample_increments(t, 0.01, rs, 3);
    const auto r2 = sample_increments(t, 0.01, rs, 3);
    CHECK(r1.increments == r2.increments);

    std::set<std::uint64_t> ids;
    for (std::size_t i = 0; i < t.size(); ++i) ids.insert(t.modes()[i].index.id());
    CHECK(ids.size() == t.size());

    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto &w = t.modes()[i].index;
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (t.modes()[j].index == WaveIndex{negate(w.k), w.j}) CHECK(r1.increments[j] == std::conj(r1.increments[i]));
        }
    }

    SUBCASE("second moment") {
        const int m = 100000;
        double s = 0.0, s4 = 0.0;
        const double dt = 0.5;
        const auto small = ModeTable::scalar(2, 1, 1.0);
        for (int step = 0; step < m; ++step) {
            const auto r = sample_increments(small, dt, rs, std::uint64_t(step));
            const double v = std::norm(r.increments[0]) / dt;
            s += v;
            s4 += v * v;
        }
        const double mean = s / m;
        const double se = std::sqrt((s4 / m - mean * mean) / m);
        CHECK(std::abs(mean - 2.0) < 3.0 * se);
    }

    SUBCASE("substeps share the fine path") {
        const auto coarse = sample_increments(t, 0.02, rs, 1, 2);
        const auto f0 = sample_increments(t, 0.01, rs, 2);
        const auto f1 = sample_increments(t, 0.01, rs, 3);
        for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(coarse.increments[i] - (f0.increments[i] + f1.increments[i])) < 1e-15);
    }

    SUBCASE("missing conjugate partner") {
        std::vector<NoiseMode> half;
        for (const auto &m : t.modes())
            if (!m.index.in_positive_half()) half.push_back(m);
        CHECK_THROWS_AS(sample_increments(half, 0.01, rs, 0), ContractViolation);
    }
}

TEST_CASE("mode table export") {
    std::ostringstream os;
    ModeTable::vector(1, 1.0).write_csv(os);
    const auto s = os.str();
    CHECK(s.rfind("# schema=1\nkx,ky,kz,j,theta\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 2 + 64);
}
