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
#include "kraichnan/young_measures.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace kraichnan;

namespace {

GridPtr grid2() { return std::make_shared<SpectralGrid>(2, 8, 32); }

SpectralScalarField wave(const GridPtr &g) {
    SpectralScalarField f(g);
    f.set({1, 0, 0}, {0.5, 0.0});
    f.set({0, 2, 0}, {0.0, 0.25});
    return f;
}

GriddedYoungMeasure random_measure(std::mt19937 &rng, const BinBox &box) {
    GriddedYoungMeasure mu(2, 2, box);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t c = 0; c < mu.cell_count(); ++c) {
        auto &w = mu.cell(c).weights;
        double s = 0.0;
        for (auto &x : w) s += (x = u(rng) < 0.3 ? u(rng) : 0.0);
        if (s == 0.0) w[0] = s = 1.0;
        for (auto &x : w) x /= s;
    }
    return mu;
}

}  // namespace

TEST_CASE("bin boxes") {
    const BinBox b1{1, -1.0, 1.0, 4};
    CHECK(b1.bins() == 4);
    CHECK(b1.locate(Vec3(-1.0, 0, 0)) == 0);
    CHECK(b1.locate(Vec3(1.0, 0, 0)) == 3);
    CHECK(b1.locate(Vec3(0.1, 0, 0)) == 2);
    CHECK(b1.locate(Vec3(1.5, 0, 0)) == -1);
    CHECK(b1.center(2)[0] == doctest::Approx(0.25));
    const BinBox b3{3, -2.0, 2.0, 4};
    CHECK(b3.bins() == 64);
    const Vec3 v(0.3, -1.2, 1.9);
    CHECK((b3.center(b3.locate(v)) - v).cwiseAbs().maxCoeff() <= 0.5 * b3.width());
    CHECK_THROWS_AS(validate(BinBox{2, 0.0, 1.0, 3}), ConfigError);
    CHECK(default_box(0.5, 3).hi == 2.0);
}

TEST_CASE("empirical measure of simple fields") {
    const auto g = grid2();
    const BinBox box{1, -2.0, 2.0, 40};

    SpectralScalarField c(g);
    c.c[0] = 0.7;
    const auto mu = empirical_measure(GridValues::of(c), 4, box);
    const int bin = box.locate(Vec3(0.7, 0, 0));
    for (std::size_t k = 0; k < mu.cell_count(); ++k) {
        CHECK(mu.cell(k).weights[std::size_t(bin)] == doctest::Approx(1.0));
        CHECK(mu.cell(k).overflow == 0.0);
    }
    CHECK(pair(mu, [](const Vec3 &) { return 1.0; }, [](const Vec3 &) { return 1.0; }) ==
          doctest::Approx(kTwoPi * kTwoPi));
    CHECK(pair(mu, [](const Vec3 &b) { return b[0] * b[0]; }, [](const Vec3 &x) { return 1.0 + std::cos(x[0]); }) ==
          doctest::Approx(box.center(bin)[0] * box.center(bin)[0] * kTwoPi * kTwoPi).epsilon(1e-12));

    // two-level field: 1 on x < pi, -1 elsewhere, cells of width pi/2
    GridValues two{g.get(), {RVec(g->real_size())}};
    for (std::size_t p = 0; p < g->real_size(); ++p) two.components[0][p] = g->point(p)[0] < std::numbers::pi ? 1.0 : -1.0;
    const auto m2 = empirical_measure(two, 4, box);
    const int up = box.locate(Vec3(1.0, 0, 0)), down = box.locate(Vec3(-1.0, 0, 0));
    for (std::size_t k = 0; k < m2.cell_count(); ++k) {
        const bool left = m2.cell_center(k)[0] < std::numbers::pi;
        CHECK(m2.cell(k).weights[std::size_t(left ? up : down)] == doctest::Approx(1.0));
    }
    // the same field on cells straddling the interface: volume fractions
    const auto m3 = empirical_measure(two, 1, box);
    CHECK(m3.cell(0).weights[std::size_t(up)] == doctest::Approx(0.5));

    double norm = 0.0;
    for (double w : m2.cell(3).weights) norm += w;
    CHECK(std::abs(norm - 1.0) < 1e-12);
    CHECK_THROWS_AS((void)empirical_measure(two, 64, box), ConfigError);
}

TEST_CASE("mean field and second moment track the field") {
    const auto g = grid2();
    const auto f = wave(g);
    const auto values = GridValues::of(f);
    const BinBox box{1, -2.0, 2.0, 200};
    const auto mu = empirical_measure(values, 8, box);
    const auto mf = mean_field(mu);
    CHECK_FALSE(mf.warning);
    // oracle: average of the grid values in each cell
    std::vector<double> avg(mu.cell_count(), 0.0), cnt(mu.cell_count(), 0.0);
    for (std::size_t p = 0; p < g->real_size(); ++p) {
        const Vec3 x = g->point(p);
        const std::size_t c = std::size_t(int(x[0] / kTwoPi * 8)) * 8 + std::size_t(int(x[1] / kTwoPi * 8));
        avg[c] += values.components[0][p];
        cnt[c] += 1.0;
    }
    for (std::size_t c = 0; c < avg.size(); ++c) CHECK(std::abs(mf.values[c][0] - avg[c] / cnt[c]) <= 0.5 * box.width());
    const auto exact = cell_averages(values, 8);
    REQUIRE(exact.size() == avg.size());
    for (std::size_t c = 0; c < avg.size(); ++c) CHECK(std::abs(exact[c][0] - avg[c] / cnt[c]) < 1e-14);

    const auto m2 = second_moment(mu);
    const double l2 = std::pow(l2_norm(f), 2);
    CHECK(m2.value == doctest::Approx(l2).epsilon(2 * box.width()));
    CHECK(pair(mu, [](const Vec3 &b) { return b[0] * b[0]; }, [](const Vec3 &) { return 1.0; }) ==
          doctest::Approx(m2.value));

    // mass outside the box is kept and flagged
    const auto tight = empirical_measure(values, 8, BinBox{1, -0.1, 0.1, 4});
    CHECK(tight.overflow_mass() > 0.5);
    CHECK(mean_field(tight).warning);
    const auto mt = second_moment(tight);
    CHECK(mt.warning);
    CHECK(mt.value == doctest::Approx(l2).epsilon(0.05));

    // symmetric two-point measure has zero barycenter
    GriddedYoungMeasure sym(2, 1, box);
    sym.cell(0).weights[std::size_t(box.locate(Vec3(1.01, 0, 0)))] = 0.5;
    sym.cell(0).weights[std::size_t(box.locate(Vec3(-1.01, 0, 0)))] = 0.5;
    CHECK(std::abs(mean_field(sym).values[0][0]) < 1e-14);
}

TEST_CASE("cells split a grid evenly when boundaries fall on grid points") {
    // 48 points per axis, 8 cells: every cell boundary is a grid point
    const auto g = std::make_shared<SpectralGrid>(2, 8, 48);
    const auto f = wave(g);
    const auto values = GridValues::of(f);
    const auto mu = empirical_measure(values, 8, BinBox{1, -2.0, 2.0, 1 << 15});
    const double l2 = std::pow(l2_norm(f), 2);
    CHECK(second_moment(mu).value == doctest::Approx(l2).epsilon(1e-4));
    const auto avg = cell_averages(values, 8);
    double total = 0.0;
    for (const auto &a : avg) total += a[0];
    CHECK(std::abs(total) < 1e-12);  // zero-mean field, equal cells
}

TEST_CASE("vector empirical measure") {
    const auto g = std::make_shared<SpectralGrid>(3, 4, 12);
    SpectralVectorField B(g);
    B.set({1, 0, 0}, Eigen::Vector3cd(0.0, 0.5, Complex(0.0, 0.25)));
    const auto mu = empirical_measure(GridValues::of(B), 2, default_box(1.0, 3, 16));
    CHECK(mu.overflow_mass() == 0.0);
    CHECK(second_moment(mu).value == doctest::Approx(energy(B)).epsilon(0.1));
    const auto mf = mean_field(mu);
    CHECK(mf.values.size() == 8);
    std::ostringstream csv, hdr;
    mu.write(csv, hdr);
    CHECK(csv.str().rfind("# schema=1\ncell_ix,bin_ix,weight\n", 0) == 0);
    CHECK(hdr.str().find("\"bin_edges\"") != std::string::npos);
}

TEST_CASE("occupation measures") {
    const auto g = std::make_shared<SpectralGrid>(2, 32, 128);
    SpectralScalarField f(g);
    f.set({1, 0, 0}, {0.5, 0.0});
    const auto values = GridValues::of(f);
    const BinBox box{1, -1.5, 1.5, 60};
    const Vec3 x0(1.0, 2.0, 0.0);
    const double fx0 = std::cos(1.0);
    const int target = box.locate(Vec3(fx0, 0, 0));
    const auto wide = occupation_measure(values, x0, 0.6, box);
    const auto narrow = occupation_measure(values, x0, 0.3, box);
    CHECK(narrow.weights[std::size_t(target)] > wide.weights[std::size_t(target)]);
    // |cos x - cos x0| <= sin(x0 + eps) eps on the ball
    auto near = [&](const ValueHistogram &h, double eps) {
        double s = 0.0;
        for (int b = 0; b < box.bins(); ++b) {
            if (std::abs(box.center(b)[0] - fx0) <= std::sin(1.0 + eps) * eps + box.width()) s += h.weights[std::size_t(b)];
        }
        return s;
    };
    CHECK(near(narrow, 0.3) == doctest::Approx(1.0));
    CHECK(near(wide, 0.6) == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)occupation_measure(values, x0, 0.15, box), ConfigError);

    // oracle: direct counting of the grid points in the ball
    std::vector<double> count(std::size_t(box.bins()), 0.0);
    double total = 0.0;
    for (std::size_t p = 0; p < g->real_size(); ++p) {
        if (torus_distance(g->point(p), x0, 2) >= 0.6) continue;
        count[std::size_t(box.locate(Vec3(values.components[0][p], 0, 0)))] += 1.0;
        total += 1.0;
    }
    for (std::size_t b = 0; b < count.size(); ++b) CHECK(wide.weights[b] == doctest::Approx(count[b] / total));

    SpectralScalarField c(g);
    c.c[0] = -0.3;
    const auto dirac = occupation_measure(GridValues::of(c), x0, 0.3, box);
    CHECK(dirac.weights[std::size_t(box.locate(Vec3(-0.3, 0, 0)))] == doctest::Approx(1.0));
}

TEST_CASE("rho metric axioms") {
    const BinBox box{1, -2.0, 2.0, 8};
    const MeasureMetricFamily fam(2, 1, 2.0);
    CHECK(fam.size() == 64);
    CHECK(fam.tail_bound() == std::pow(2.0, -63));
    std::mt19937 rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto a = random_measure(rng, box), b = random_measure(rng, box), c = random_measure(rng, box);
        const double ab = rho_distance(a, b, fam).value, ba = rho_distance(b, a, fam).value;
        const double ac = rho_distance(a, c, fam).value, bc = rho_distance(b, c, fam).value;
        CHECK(rho_distance(a, a, fam).value == 0.0);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
        CHECK(ac <= ab + bc + 1e-15);
    }
    for (int i = 0; i < fam.size(); ++i) {
        const double v = fam.evaluate(i, Vec3(0.3, 5.0, 0), Vec3(0.1, 0, 0));
        CHECK(std::abs(v) <= 1.0);
    }
}

TEST_CASE("rho separates nearby Dirac measures monotonically") {
    const BinBox box{1, -2.0, 2.0, 400};
    const MeasureMetricFamily fam(2, 1, 2.0);
    auto dirac = [&](double v) {
        GriddedYoungMeasure mu(2, 2, box);
        for (std::size_t c = 0; c < mu.cell_count(); ++c) mu.cell(c).weights[std::size_t(box.locate(Vec3(v, 0, 0)))] = 1.0;
        return mu;
    };
    const auto zero = dirac(0.0);
    double last = 1e9;
    for (double v : {1.6, 0.8, 0.4, 0.2, 0.1}) {
        const double r = rho_distance(zero, dirac(v), fam).value;
        CHECK(r < last);
        CHECK(r > 0.0);
        last = r;
    }
}
