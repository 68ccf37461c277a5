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

#pragma once

#include "kraichnan/common.hpp"
#include "kraichnan/spectral.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace kraichnan {

/// Uniform bins over a box in R^k (k = 1 or 3), plus one overflow bin per cell.
struct BinBox {
    int value_dim = 1;
    double lo = -1.0;
    double hi = 1.0;
    int bins_per_axis = 32;

    [[nodiscard]] int bins() const;
    [[nodiscard]] double width() const { return (hi - lo) / bins_per_axis; }
    /// Bin index of v, or -1 if v lies outside the box.
    [[nodiscard]] int locate(const Vec3 &v) const;
    [[nodiscard]] Vec3 center(int bin) const;
};

void validate(const BinBox &box);

/// Default box [-4 m, 4 m]^k with m the sup of the field.
BinBox default_box(double sup_value, int value_dim, int bins_per_axis = 32);

/// Histogram over R^k with explicit overflow.
struct ValueHistogram {
    BinBox box;
    std::vector<double> weights;  ///< probability per bin
    double overflow = 0.0;        ///< probability outside the box
    Vec3 overflow_mean = Vec3::Zero();  ///< barycenter of the overflowed samples
    double overflow_square = 0.0;       ///< mean |b|^2 of the overflowed samples
};

ValueHistogram empty_histogram(const BinBox &box);
/// Adds probability w at value v, into the overflow bin if v lies outside the box.
void add_sample(ValueHistogram &h, const Vec3 &v, double w);

/// mu(x, db) on congruent x-cells of the torus, one ValueHistogram per cell.
class GriddedYoungMeasure {
public:
    GriddedYoungMeasure(int d, int cells_per_axis, BinBox box);

    [[nodiscard]] int dim() const { return d_; }
    [[nodiscard]] int cells_per_axis() const { return cells_; }
    [[nodiscard]] std::size_t cell_count() const { return hist_.size(); }
    [[nodiscard]] const BinBox &box() const { return box_; }
    [[nodiscard]] double cell_volume() const;
    [[nodiscard]] Vec3 cell_center(std::size_t cell) const;
    [[nodiscard]] const ValueHistogram &cell(std::size_t c) const { return hist_[c]; }
    [[nodiscard]] ValueHistogram &cell(std::size_t c) { return hist_[c]; }
    /// Volume-weighted overflow probability.
    [[nodiscard]] double overflow_mass() const;

    /// CSV long format (cell_ix, bin_ix, weight), overflow at bin_ix = bins, and a JSON header.
    void write(std::ostream &csv, std::ostream &header) const;

private:
    int d_;
    int cells_;
    BinBox box_;
    std::vector<ValueHistogram> hist_;
};

/// Field values on a physical grid: one RVec per component.
struct GridValues {
    const SpectralGrid *grid = nullptr;
    std::vector<RVec> components;

    static GridValues of(const SpectralScalarField &f);
    static GridValues of(const SpectralVectorField &f);
    [[nodiscard]] Vec3 at(std::size_t p) const;
};

/// Unbinned per-cell means of the field (same cell partition as empirical_measure).
std::vector<Vec3> cell_averages(const GridValues &field, int cells_per_axis);

GriddedYoungMeasure empirical_measure(const GridValues &field, int cells_per_axis, const BinBox &box);

/// Push-forward of normalized Lebesgue measure on the torus ball B(x0, eps).
ValueHistogram occupation_measure(const GridValues &field, const Vec3 &x0, double eps, const BinBox &box,
                                  std::size_t min_points = 100);

using ValueFunction = std::function<double(const Vec3 &b)>;
using SpaceFunction = std::function<double(const Vec3 &x)>;

/// int phi(b) psi(x) mu(x, db) dx by cell-centre and bin-centre quadrature.
double pair(const GriddedYoungMeasure &mu, const ValueFunction &phi, const SpaceFunction &psi);

struct MeanField {
    std::vector<Vec3> values;  ///< per-cell barycenter
    double overflow = 0.0;
    bool warning = false;      ///< overflow above 1%
};
MeanField mean_field(const GriddedYoungMeasure &mu);

struct MomentEstimate {
    double value = 0.0;
    double overflow = 0.0;
    bool warning = false;
};
/// int |b|^2 mu(x, db) dx.
MomentEstimate second_moment(const GriddedYoungMeasure &mu);

/// Fixed enumeration of 1-bounded Lipschitz cone functions on T^d x R^k.
class MeasureMetricFamily {
public:
    /// `value_radius` bounds the b-coordinates of the dense points.
    MeasureMetricFamily(int d, int value_dim, double value_radius, int count = 64);

    [[nodiscard]] int size() const { return int(centers_.size()); }
    [[nodiscard]] double tail_bound() const;
    /// g_i(x, b) = sign * max(1 - slope * dist((x,b), z_i), 0).
    [[nodiscard]] double evaluate(int i, const Vec3 &x, const Vec3 &b) const;

private:
    int d_;
    int k_;
    std::vector<std::array<double, 6>> centers_;
    std::vector<double> slope_;
    std::vector<double> sign_;
};

/// int g dmu per unit x-volume, for every g in the family.
std::vector<double> family_integrals(const GriddedYoungMeasure &mu, const MeasureMetricFamily &family);

struct RhoDistance {
    double value = 0.0;
    double tail_bound = 0.0;
};
RhoDistance rho_distance(const GriddedYoungMeasure &mu, const GriddedYoungMeasure &nu,
                         const MeasureMetricFamily &family);

}  // namespace kraichnan
