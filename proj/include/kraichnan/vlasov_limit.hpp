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
#include "kraichnan/kernels.hpp"
#include "kraichnan/noise_basis.hpp"
#include "kraichnan/spectral.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace kraichnan {

/// 8 pi chi log 2 / 15.
double c_L(double chi = 1.0);

/// L(b) = c_L (2 |b|^2 I - b b^T).
Mat3 L_matrix(const Vec3 &b, double chi = 1.0);
/// L^n(b) = chi sum_{n <= |k| <= 2n} (b.k)^2 / |k|^5 (I - k k^T / |k|^2), summed over the lattice shell.
Mat3 Ln_matrix(const Vec3 &b, int n, double chi = 1.0);
/// Symmetric square root of L: sqrt(c_L) |b| P_b + sqrt(2 c_L) |b| (I - P_b).
Mat3 A_matrix(const Vec3 &b, double chi = 1.0);

/// L^n(b) as a precomputed quadratic form in b: L^n_ij(b) = sum_pq T_ijpq b_p b_q.
class LnTensor {
public:
    LnTensor(int n, double chi = 1.0);
    /// sum_{k,j} theta^2 (b.k)^2 a a^T over an explicit mode list; equals L^n for a full vector shell.
    explicit LnTensor(std::span<const NoiseMode> modes);
    [[nodiscard]] Mat3 operator()(const Vec3 &b) const;

private:
    std::array<Mat3, 6> parts_{};  // coefficient of b_p b_q for p <= q
};

enum class Backend { Serial, Omp };

/// Density on the cube [-half_width, half_width]^3 with no-flux walls.
struct BGridDensity {
    kernels::CubeGrid grid;
    std::vector<double> rho;
    double t = 0.0;

    BGridDensity() = default;
    BGridDensity(int cells, double half_width);

    [[nodiscard]] double cell_volume() const { return grid.h * grid.h * grid.h; }
    /// Adds mass m at point b with cloud-in-cell weights.
    void deposit(const Vec3 &b, double m = 1.0);
    [[nodiscard]] double mass() const;
    /// int |b|^2 rho db.
    [[nodiscard]] double m2() const;
    /// Mass in the outermost layer of cells.
    [[nodiscard]] double boundary_mass() const;
    /// Midpoint-rule integral of f against rho.
    [[nodiscard]] double integrate(const std::function<double(const Vec3 &)> &f) const;
    /// Mass aggregated onto a coarser cube grid (cells must divide grid.cells).
    [[nodiscard]] std::vector<double> coarsen(int cells) const;

    /// Raw binary dump (little-endian doubles) plus a JSON header written to `header`.
    void write(std::ostream &data, std::ostream &header) const;
};

/// Largest stable step: dt max_box tr L / h^2 <= cfl.
double fp_max_dt(const BGridDensity &rho, double chi, double cfl = 0.5);

/// One explicit step of d_t rho = div_b(L(b) grad_b rho). Throws ConfigError if dt exceeds the CFL bound.
BGridDensity fp_step(const BGridDensity &rho, double dt, double chi = 1.0, Backend backend = Backend::Omp);

struct FpSample {
    double t, mass, m2, boundary_mass;
};

/// Advances in `steps` steps of size dt, sampling moments every `sample_every` steps (and at the start).
std::vector<FpSample> fp_advance(BGridDensity &rho, double dt, int steps, double chi = 1.0, int sample_every = 1,
                                 Backend backend = Backend::Omp);

/// int phi(theta) psi(x) mu(t, x, d theta) dx for the scalar limit measure, as <e^{kappa_T t Lap} (phi o theta0), psi>.
/// The constant part of phi o theta0 is kept exactly (it is invariant under the heat flow).
double scalar_limit_pairing(const SpectralScalarField &theta0, double t, double kappa_T,
                            const std::function<double(double)> &phi, const std::function<double(const Vec3 &)> &psi);

/// A C^2 test function on b-space with its derivatives.
struct BTestFunction {
    std::function<double(const Vec3 &)> value;
    std::function<Vec3(const Vec3 &)> gradient;
    std::function<Mat3(const Vec3 &)> hessian;
    Vec3 center = Vec3::Zero();
    double support_radius = 0.0;  ///< f vanishes for |b - center| >= support_radius (0: unbounded)
};

/// (1 - |b - c|^2 / r^2)^3 inside the ball of radius r around c, zero outside.
BTestFunction bump_function(const Vec3 &center, double radius);
/// |b|^2 times a smooth cutoff that equals 1 for |b| <= r0 and 0 for |b| >= r1.
BTestFunction truncated_square(double r0, double r1);

/// |[int f rho(t_end) - int f rho(t_0)] - int int div_b(L grad_b f) rho ds|, with the time integral
/// taken by the trapezoid rule over the snapshots. Throws ConfigError if supp f reaches the walls.
double weak_form_residual(const std::vector<BGridDensity> &trajectory, const BTestFunction &f, double chi = 1.0);

struct RefinementStudy {
    std::vector<int> cells;
    std::vector<double> residuals;
    double slope = 0.0;  ///< fitted d log(residual) / d log(h)
};

/// Runs the FP solver from a Gaussian blob at each resolution and reports the weak residual and its slope in h.
RefinementStudy weak_form_refinement(const std::vector<int> &cells, double half_width, const Vec3 &center,
                                     double width, double T, const BTestFunction &f, double chi = 1.0);

}  // namespace kraichnan
