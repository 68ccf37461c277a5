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

#include "kraichnan/noise_basis.hpp"
#include "kraichnan/scalar_transport.hpp"
#include "kraichnan/spectral.hpp"

#include <functional>
#include <vector>

namespace kraichnan {

struct VectorRunConfig {
    int n = 2;
    double chi = 1.0;
    int K_max = 8;
    double dt = 7.5e-5;
    double T = 0.05;
    std::uint64_t seed = 0;
    int gamma = 4;

    [[nodiscard]] int steps() const;
};

/// Throws ConfigError on out-of-range parameters, including dt (2/3) chi eta_n K_max^2 > 1/8.
void validate(const VectorRunConfig &cfg);

/// (I - k k^T / |k|^2) applied to every coefficient.
SpectralVectorField leray_project(const SpectralVectorField &field);
/// ||B||^2_{L^2}.
double energy(const SpectralVectorField &B);
/// <B, phi> = int B . phi dx.
double mean_field_pairing(const SpectralVectorField &B, const SpectralVectorField &phi);

/// Velocity increment u = sum_k sigma_k dW^k, spectral and on the physical grid.
struct VelocityField {
    std::array<CVec, 3> spec;
    std::array<RVec, 3> u;
};

/// Euler-Maruyama solver for dB = (2/3) chi eta_n Lap B dt + sum_k (sigma_k . grad B - B . grad sigma_k) dW^k,
/// Leray-projected and truncated to |k| <= K_max after every step.
class VectorAdvectionSolver {
public:
    explicit VectorAdvectionSolver(const VectorRunConfig &cfg);
    VectorAdvectionSolver(const VectorRunConfig &cfg, ModeTable modes);

    [[nodiscard]] const VectorRunConfig &config() const { return cfg_; }
    [[nodiscard]] const GridPtr &grid() const { return grid_; }
    [[nodiscard]] const ModeTable &modes() const { return modes_; }
    /// Ito drift coefficient: trace of sum theta^2 a a^T over 3, i.e. (2/3) chi eta_n for a full shell.
    [[nodiscard]] double viscosity() const { return nu_; }
    /// sum_{k,j} theta^2 k k^T.
    [[nodiscard]] const Mat3 &wavevector_moment() const { return moment_; }

    [[nodiscard]] NoiseRealization noise(const NoisePath &path, std::uint64_t step) const;
    [[nodiscard]] VelocityField velocity(const NoiseRealization &noise) const;
    /// grad[i*3+j] = d_j u_i on the physical grid.
    [[nodiscard]] std::array<RVec, 9> velocity_gradient(const VelocityField &vel) const;
    /// u . grad B - B . grad u = curl(B x u) for divergence-free u and B, truncated to the retained modes.
    /// With cutoff_energy set, also stores ||(I - P_K) N||^2, the part of the untruncated term beyond K_max.
    [[nodiscard]] SpectralVectorField noise_term(const VelocityField &vel, const SpectralVectorField &B,
                                                 double *cutoff_energy = nullptr) const;
    /// (1 + nu dt Lap) B + noise_term, Leray-projected.
    [[nodiscard]] SpectralVectorField diffuse_and_add(const SpectralVectorField &B, SpectralVectorField noise_term) const;
    [[nodiscard]] SpectralVectorField step(const SpectralVectorField &B, const NoiseRealization &noise) const;

    using Observer = std::function<void(int step, const SpectralVectorField &)>;
    [[nodiscard]] SpectralVectorField run(const SpectralVectorField &B0, const NoisePath &path,
                                          const Observer &observe = {}) const;

    /// -2 <B . grad u, B>: the martingale increment of ||B||^2 over one step.
    [[nodiscard]] double martingale_increment(const VelocityField &vel, const SpectralVectorField &B) const;
    /// Same increment from a precomputed noise term N: 2 <N, B>.
    [[nodiscard]] static double martingale_increment(const SpectralVectorField &noise_term,
                                                     const SpectralVectorField &B);
    /// 2 sum_k ||B . grad sigma_k||^2 dt = 2 dt int B^T M B dx.
    [[nodiscard]] double drift_increment(const SpectralVectorField &B) const;
    /// sum_k |<B . grad sigma_k, B>|^2 over every mode (both signs of k).
    [[nodiscard]] double stretching_square_sum(const SpectralVectorField &B) const;

private:
    VectorRunConfig cfg_;
    GridPtr grid_;
    ModeTable modes_;
    double nu_ = 0.0;
    Mat3 moment_ = Mat3::Zero();
};

struct EnergyResidualSeries {
    std::vector<double> energy;        ///< ||B_m||^2, m = 0..steps
    std::vector<double> martingale;    ///< recorded martingale increments
    std::vector<double> drift;         ///< 2 sum ||B . grad sigma||^2 dt
    std::vector<double> residual;      ///< d||B||^2 - martingale - drift
    std::vector<double> cutoff;        ///< noise energy removed by the spectral truncation in this step
    std::vector<double> running_mean;  ///< mean of residual[0..m]
    std::vector<double> qv_expected;   ///< 8 dt sum_k |<B . grad sigma_k, B>|^2 (empty unless requested)
};

/// Residuals of the Ito energy identity along a stored trajectory driven by `path`.
EnergyResidualSeries ito_energy_residual(const VectorAdvectionSolver &solver,
                                         const std::vector<SpectralVectorField> &trajectory, const NoisePath &path,
                                         bool with_qv = false);
/// Same, running the solver from B0 without storing the trajectory.
EnergyResidualSeries ito_energy_residual(const VectorAdvectionSolver &solver, const SpectralVectorField &B0,
                                         const NoisePath &path, bool with_qv = false);

/// E sup_t ||B_t||^gamma estimated from per-path sup_t ||B_t||^2 values.
Estimate sup_moment(const std::vector<double> &sup_energy, double gamma);

/// A C^2 test function on T^3 x R^3 with the partial derivatives used by the Vlasov identity.
struct PhaseSpaceFunction {
    std::function<double(const Vec3 &x, const Vec3 &b)> value;
    std::function<Vec3(const Vec3 &x, const Vec3 &b)> grad_x;
    std::function<double(const Vec3 &x, const Vec3 &b)> lap_x;
    std::function<Vec3(const Vec3 &x, const Vec3 &b)> grad_b;
    std::function<Mat3(const Vec3 &x, const Vec3 &b)> hess_b;
};

PhaseSpaceFunction constant_function(double c);
/// f(x, b) = cos(m . x + phase).
PhaseSpaceFunction x_mode_function(const IVec &m, double phase);
/// f(x, b) = |b|^2 S(|b|) with a C^2 cutoff S equal to 1 below r0 and 0 above r1.
PhaseSpaceFunction truncated_energy_function(double r0, double r1);
/// f(x, b) = cos(x_1) * g(b) with g a C^2 bump of radius r around c.
PhaseSpaceFunction mixed_function(const Vec3 &c, double r);

struct VlasovResidualSeries {
    std::vector<double> lhs;          ///< int f(x, B_m) - f(x, B_0) dx
    std::vector<double> transport;    ///< -sum int sigma . grad_x f dW, accumulated
    std::vector<double> stretching;   ///< -sum int (B . grad sigma) . grad_b f dW, accumulated
    std::vector<double> x_diffusion;  ///< nu int Lap_x f dt, accumulated
    std::vector<double> b_diffusion;  ///< int div_b(L^n grad_b f) dt, accumulated
    std::vector<double> gap;          ///< lhs - sum of the four terms
};

/// Pathwise check of the Vlasov identity for int f(x, B_t(x)) dx along the run from B0 driven by `path`.
VlasovResidualSeries vlasov_residual(const VectorAdvectionSolver &solver, const SpectralVectorField &B0,
                                     const NoisePath &path, const PhaseSpaceFunction &f);

}  // namespace kraichnan
