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

#include "kraichnan/spectral.hpp"

#include <doctest.h>

#include <random>

using namespace kraichnan;

namespace {

SpectralScalarField random_field(GridPtr g, unsigned seed, int band) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    SpectralScalarField f(g);
    for (int x = -band; x <= band; ++x)
        for (int y = -band; y <= band; ++y)
            for (int z = (g->dim() == 3 ? -band : 0); z <= (g->dim() == 3 ? band : 0); ++z) {
                const IVec k{x, y, z};
                if (lex_positive(k) && norm2(k) <= band * band) f.set(k, {nd(rng), nd(rng)});
            }
    return f;
}

}  // namespace

TEST_CASE("grid sizes") {
    CHECK(SpectralGrid::nice_size(48) == 48);
    CHECK(SpectralGrid::nice_size(49) == 50);
    CHECK(SpectralGrid::nice_size(31) == 32);
    const SpectralGrid g(2, 16);
    CHECK(g.points() == 48);
    CHECK(g.complex_size() == 48 * 25);
    CHECK_THROWS_AS(SpectralGrid(2, 16, 40), ConfigError);
}

TEST_CASE("single mode parseval") {
    auto g = std::make_shared<SpectralGrid>(2, 8);
    SpectralScalarField f(g);
    const Complex c(0.3, -0.4);
    f.set({2, 1, 0}, c);
    CHECK(f.coeff({-2, -1, 0}) == std::conj(c));
    const double norm2v = inner(*g, f.c, f.c);
    CHECK(norm2v == doctest::Approx(2.0 * std::norm(c) * kTwoPi * kTwoPi).epsilon(1e-14));
    // last-coordinate-zero plane stores both signs explicitly
    f = SpectralScalarField(g);
    f.set({3, 0, 0}, c);
    CHECK(inner(*g, f.c, f.c) == doctest::Approx(2.0 * std::norm(c) * kTwoPi * kTwoPi).epsilon(1e-14));
    CHECK(reality_defect(*g, f.c) == 0.0);
}

TEST_CASE("parseval against physical quadrature") {
    for (int d : {2, 3}) {
        auto g = std::make_shared<SpectralGrid>(d, 6);
        const auto f = random_field(g, 5 + d, 6);
        const auto v = f.physical();
        double q = 0.0;
        for (double x : v) q += x * x;
        q *= g->cell_volume();
        CHECK(inner(*g, f.c, f.c) == doctest::Approx(q).epsilon(1e-10));

        // pointwise value of the series
        const std::size_t idx = 17;
        const Vec3 x = g->point(idx);
        double direct = 0.0;
        for (std::size_t i = 0; i < g->complex_size(); ++i) {
            if (!g->active(i)) continue;
            const double phase = to_vec3(g->wavevector(i)).dot(x);
            direct += g->weight(i) * (f.c[i] * std::exp(Complex(0, phase))).real();
        }
        CHECK(v[idx] == doctest::Approx(direct).epsilon(1e-12));

        const auto back = SpectralScalarField::from_physical(g, v);
        double err = 0.0;
        for (std::size_t i = 0; i < g->complex_size(); ++i) err = std::max(err, std::abs(back.c[i] - f.c[i]));
        CHECK(err < 1e-13);
    }
}

TEST_CASE("vector field helpers") {
    auto g = std::make_shared<SpectralGrid>(3, 4);
    SpectralVectorField b(g);
    b.set({1, 0, 0}, Eigen::Vector3cd(0.0, 1.0, Complex(0, 1)));
    CHECK(max_divergence(b) == 0.0);
    b.set({0, 1, 0}, Eigen::Vector3cd(0.0, 1.0, 0.0));
    CHECK(max_divergence(b) == doctest::Approx(1.0));
    CHECK_THROWS_AS(b.set({5, 0, 0}, Eigen::Vector3cd::Zero()), ConfigError);
    CHECK_THROWS_AS(SpectralVectorField(std::make_shared<SpectralGrid>(2, 4)), ConfigError);
}
