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

#include "kraichnan/young_measures.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

namespace kraichnan {

namespace {

int cell_of(const Vec3 &x, int d, int cells) {
    int c = 0;
    for (int a = 0; a < d; ++a) {
        const int i = std::clamp(int(std::floor(x[a] / kTwoPi * cells + 1e-9)), 0, cells - 1);
        c = c * cells + i;
    }
    return c;
}

template <class F>
double integrate_cell(const ValueHistogram &h, F &&f) {
    double s = 0.0;
    for (std::size_t b = 0; b < h.weights.size(); ++b) {
        if (h.weights[b] != 0.0) s += h.weights[b] * f(h.box.center(int(b)));
    }
    if (h.overflow > 0.0) s += h.overflow * f(h.overflow_mean);
    return s;
}

}  // namespace

void add_sample(ValueHistogram &h, const Vec3 &v, double w) {
    const int bin = h.box.locate(v);
    if (bin >= 0) {
        h.weights[std::size_t(bin)] += w;
        return;
    }
    h.overflow_mean = (h.overflow * h.overflow_mean + w * v) / (h.overflow + w);
    h.overflow_square = (h.overflow * h.overflow_square + w * v.squaredNorm()) / (h.overflow + w);
    h.overflow += w;
}

ValueHistogram empty_histogram(const BinBox &box) {
    ValueHistogram h;
    h.box = box;
    h.weights.assign(std::size_t(box.bins()), 0.0);
    return h;
}

int BinBox::bins() const {
    int b = 1;
    for (int a = 0; a < value_dim; ++a) b *= bins_per_axis;
    return b;
}

int BinBox::locate(const Vec3 &v) const {
    int idx = 0;
    for (int a = 0; a < value_dim; ++a) {
        if (!(v[a] >= lo && v[a] <= hi)) return -1;
        const int i = std::min(int((v[a] - lo) / width()), bins_per_axis - 1);
        idx = idx * bins_per_axis + i;
    }
    return idx;
}

Vec3 BinBox::center(int bin) const {
    Vec3 c = Vec3::Zero();
    for (int a = value_dim - 1; a >= 0; --a) {
        c[a] = lo + (bin % bins_per_axis + 0.5) * width();
        bin /= bins_per_axis;
    }
    return c;
}

void validate(const BinBox &box) {
    require(box.value_dim == 1 || box.value_dim == 3, "bins: value dimension must be 1 or 3");
    require(box.hi > box.lo, "bins: empty box");
    require(box.bins_per_axis >= 1, "bins: need at least one bin per axis");
}

BinBox default_box(double sup_value, int value_dim, int bins_per_axis) {
    const double m = sup_value > 0.0 ? sup_value : 1.0;
    return {value_dim, -4.0 * m, 4.0 * m, bins_per_axis};
}

GriddedYoungMeasure::GriddedYoungMeasure(int d, int cells_per_axis, BinBox box)
    : d_(d), cells_(cells_per_axis), box_(box) {
    require(d == 2 || d == 3, "Young measure: torus dimension must be 2 or 3");
    require(cells_per_axis >= 1, "Young measure: need at least one cell per axis");
    validate(box);
    std::size_t n = 1;
    for (int a = 0; a < d; ++a) n *= std::size_t(cells_per_axis);
    hist_.assign(n, empty_histogram(box));
}

double GriddedYoungMeasure::cell_volume() const { return std::pow(kTwoPi / cells_, d_); }

Vec3 GriddedYoungMeasure::cell_center(std::size_t cell) const {
    Vec3 x = Vec3::Zero();
    const double h = kTwoPi / cells_;
    for (int a = d_ - 1; a >= 0; --a) {
        x[a] = (double(cell % std::size_t(cells_)) + 0.5) * h;
        cell /= std::size_t(cells_);
    }
    return x;
}

double GriddedYoungMeasure::overflow_mass() const {
    double s = 0.0;
    for (const auto &h : hist_) s += h.overflow;
    return s / double(hist_.size());
}

void GriddedYoungMeasure::write(std::ostream &csv, std::ostream &header) const {
    csv << "# schema=1\ncell_ix,bin_ix,weight\n";
    csv.precision(17);
    const int bins = box_.bins();
    for (std::size_t c = 0; c < hist_.size(); ++c) {
        for (int b = 0; b < bins; ++b) {
            if (hist_[c].weights[std::size_t(b)] != 0.0) csv << c << ',' << b << ',' << hist_[c].weights[std::size_t(b)] << '\n';
        }
        if (hist_[c].overflow > 0.0) csv << c << ',' << bins << ',' << hist_[c].overflow << '\n';
    }
    nlohmann::json h;
    h["schema"] = 1;
    h["torus_dim"] = d_;
    h["cells_per_axis"] = cells_;
    h["cell_width"] = kTwoPi / cells_;
    h["cell_order"] = "row-major over axes";
    h["value_dim"] = box_.value_dim;
    std::vector<double> edges;
    for (int i = 0; i <= box_.bins_per_axis; ++i) edges.push_back(box_.lo + i * box_.width());
    h["bin_edges"] = edges;
    h["overflow_bin"] = bins;
    h["overflow_mass"] = overflow_mass();
    header << h.dump(2) << '\n';
}

GridValues GridValues::of(const SpectralScalarField &f) {
    GridValues g{f.grid.get(), {}};
    g.components.push_back(f.physical());
    return g;
}

GridValues GridValues::of(const SpectralVectorField &f) {
    GridValues g{f.grid.get(), {}};
    for (auto &c : f.physical()) g.components.push_back(std::move(c));
    return g;
}

Vec3 GridValues::at(std::size_t p) const {
    Vec3 v = Vec3::Zero();
    for (std::size_t a = 0; a < components.size(); ++a) v[Eigen::Index(a)] = components[a][p];
    return v;
}

GriddedYoungMeasure empirical_measure(const GridValues &field, int cells_per_axis, const BinBox &box) {
    require(field.grid != nullptr, "empirical_measure: no grid");
    require(int(field.components.size()) == box.value_dim, "empirical_measure: field and bins differ in dimension");
    const auto &g = *field.grid;
    require(g.points() >= cells_per_axis, "empirical_measure: grid coarser than the cells");
    GriddedYoungMeasure mu(g.dim(), cells_per_axis, box);

    std::vector<std::vector<std::size_t>> members(mu.cell_count());
    for (std::size_t p = 0; p < g.real_size(); ++p) members[std::size_t(cell_of(g.point(p), g.dim(), cells_per_axis))].push_back(p);
    for (const auto &m : members) require(!m.empty(), "empirical_measure: empty cell");

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(members.size()); ++c) {
        auto &h = mu.cell(std::size_t(c));
        const double w = 1.0 / double(members[std::size_t(c)].size());
        for (std::size_t p : members[std::size_t(c)]) add_sample(h, field.at(p), w);
    }
    return mu;
}

std::vector<Vec3> cell_averages(const GridValues &field, int cells_per_axis) {
    require(field.grid != nullptr, "cell_averages: no grid");
    const auto &g = *field.grid;
    require(cells_per_axis >= 1 && g.points() >= cells_per_axis, "cell_averages: grid coarser than the cells");
    std::size_t count = 1;
    for (int a = 0; a < g.dim(); ++a) count *= std::size_t(cells_per_axis);
    std::vector<Vec3> sum(count, Vec3::Zero());
    std::vector<std::size_t> hits(count, 0);
    for (std::size_t p = 0; p < g.real_size(); ++p) {
        const auto c = std::size_t(cell_of(g.point(p), g.dim(), cells_per_axis));
        sum[c] += field.at(p);
        ++hits[c];
    }
    for (std::size_t c = 0; c < count; ++c) {
        require(hits[c] > 0, "cell_averages: empty cell");
        sum[c] /= double(hits[c]);
    }
    return sum;
}

ValueHistogram occupation_measure(const GridValues &field, const Vec3 &x0, double eps, const BinBox &box,
                                  std::size_t min_points) {
    require(field.grid != nullptr, "occupation_measure: no grid");
    require(eps > 0.0, "occupation_measure: eps must be positive");
    require(int(field.components.size()) == box.value_dim, "occupation_measure: field and bins differ in dimension");
    validate(box);
    const auto &g = *field.grid;
    std::vector<std::size_t> inside;
    for (std::size_t p = 0; p < g.real_size(); ++p) {
        if (torus_distance(g.point(p), x0, g.dim()) < eps) inside.push_back(p);
    }
    require(inside.size() >= min_points, "occupation_measure: ball resolved by " + std::to_string(inside.size()) +
                                             " grid points, need " + std::to_string(min_points));
    ValueHistogram h = empty_histogram(box);
    const double w = 1.0 / double(inside.size());
    for (std::size_t p : inside) add_sample(h, field.at(p), w);
    return h;
}

double pair(const GriddedYoungMeasure &mu, const ValueFunction &phi, const SpaceFunction &psi) {
    double s = 0.0;
    for (std::size_t c = 0; c < mu.cell_count(); ++c) {
        s += psi(mu.cell_center(c)) * integrate_cell(mu.cell(c), phi);
    }
    return s * mu.cell_volume();
}

MeanField mean_field(const GriddedYoungMeasure &mu) {
    MeanField out;
    out.values.resize(mu.cell_count());
    for (std::size_t c = 0; c < mu.cell_count(); ++c) {
        Vec3 m = Vec3::Zero();
        const auto &h = mu.cell(c);
        for (std::size_t b = 0; b < h.weights.size(); ++b) {
            if (h.weights[b] != 0.0) m += h.weights[b] * h.box.center(int(b));
        }
        out.values[c] = m + h.overflow * h.overflow_mean;
    }
    out.overflow = mu.overflow_mass();
    out.warning = out.overflow > 0.01;
    return out;
}

MomentEstimate second_moment(const GriddedYoungMeasure &mu) {
    MomentEstimate out;
    for (std::size_t c = 0; c < mu.cell_count(); ++c) {
        const auto &h = mu.cell(c);
        double s = 0.0;
        for (std::size_t b = 0; b < h.weights.size(); ++b) {
            if (h.weights[b] != 0.0) s += h.weights[b] * h.box.center(int(b)).squaredNorm();
        }
        out.value += s + h.overflow * h.overflow_square;
    }
    out.value *= mu.cell_volume();
    out.overflow = mu.overflow_mass();
    out.warning = out.overflow > 0.01;
    return out;
}

MeasureMetricFamily::MeasureMetricFamily(int d, int value_dim, double value_radius, int count)
    : d_(d), k_(value_dim) {
    require(d + value_dim <= 6, "metric family: at most six coordinates");
    require(value_radius > 0.0 && count >= 1, "metric family: radius and count must be positive");
    static constexpr int primes[6] = {2, 3, 5, 7, 11, 13};
    // function i: Halton point i/4, slope (1 or 4)/radius, sign +-
    for (int i = 0; i < count; ++i) {
        const std::uint64_t idx = std::uint64_t(i / 4) + 1;
        std::array<double, 6> z{};
        for (int a = 0; a < d + value_dim; ++a) {
            const double u = radical_inverse(idx, primes[a]);
            z[std::size_t(a)] = a < d ? kTwoPi * u : value_radius * (2.0 * u - 1.0);
        }
        centers_.push_back(z);
        slope_.push_back((i % 4 < 2 ? 1.0 : 4.0) / value_radius);
        sign_.push_back(i % 2 == 0 ? 1.0 : -1.0);
    }
}

double MeasureMetricFamily::tail_bound() const { return std::pow(2.0, 1.0 - size()); }

double MeasureMetricFamily::evaluate(int i, const Vec3 &x, const Vec3 &b) const {
    const auto &z = centers_[std::size_t(i)];
    const Vec3 zx(z[0], z[1], d_ == 3 ? z[2] : 0.0);
    double r2 = std::pow(torus_distance(x, zx, d_), 2);
    for (int a = 0; a < k_; ++a) r2 += std::pow(b[a] - z[std::size_t(d_ + a)], 2);
    return sign_[std::size_t(i)] * std::max(1.0 - slope_[std::size_t(i)] * std::sqrt(r2), 0.0);
}

std::vector<double> family_integrals(const GriddedYoungMeasure &mu, const MeasureMetricFamily &family) {
    require(family.size() > 0, "metric family is empty");
    std::vector<double> out(std::size_t(family.size()), 0.0);
    const double w = 1.0 / double(mu.cell_count());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < family.size(); ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < mu.cell_count(); ++c) {
            const Vec3 x = mu.cell_center(c);
            s += integrate_cell(mu.cell(c), [&](const Vec3 &b) { return family.evaluate(i, x, b); });
        }
        out[std::size_t(i)] = s * w;
    }
    return out;
}

RhoDistance rho_distance(const GriddedYoungMeasure &mu, const GriddedYoungMeasure &nu,
                         const MeasureMetricFamily &family) {
    require(mu.dim() == nu.dim() && mu.box().value_dim == nu.box().value_dim,
            "rho_distance: measures live on different spaces");
    const auto a = family_integrals(mu, family);
    const auto b = family_integrals(nu, family);
    RhoDistance r;
    double scale = 0.5;
    for (std::size_t i = 0; i < a.size(); ++i, scale *= 0.5) r.value += scale * std::abs(a[i] - b[i]);
    r.tail_bound = family.tail_bound();
    return r;
}

}  // namespace kraichnan
