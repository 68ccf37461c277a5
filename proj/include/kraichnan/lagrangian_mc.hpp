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
#include "kraichnan/noise_basis.hpp"
#include "kraichnan/vlasov_limit.hpp"
#include "kraichnan/young_measures.hpp"

#include <cstdint>
#include <numbers>
#include <vector>

namespace kraichnan {

enum class SdeScheme { EulerMaruyama, MilsteinDiagonal };

/// Limit SDE db = kappa A(b) dW.
struct SdeConfig {
    SdeScheme scheme = SdeScheme::EulerMaruyama;
    double dt = 1e-4;
    double T = 0.05;
    std::size_t paths = 100000;
    double kappa = std::numbers::sqrt2;
    double floor_rel = 1e-8;  ///< A is frozen below floor_rel * |b0|
    double chi = 1.0;
    std::uint64_t seed = 0;

    [[nodiscard]] int steps() const;
};

void validate(const SdeConfig &cfg);

struct ParticleEnsemble {
    std::vector<Vec3> x;  ///< empty for the limit SDE
    std::vector<Vec3> b;
    double t = 0.0;
    std::size_t guarded = 0;  ///< particle-steps taken with the frozen-A guard
};

/// Paths are independent; path i uses RandomStream{seed, i}.
ParticleEnsemble simulate_limit_sde(const Vec3 &b0, const SdeConfig &cfg, Backend backend = Backend::Omp);

/// Moments of |b|^2 recorded along the run.
struct SdeMoments {
    std::vector<double> t;
    std::vector<double> mean_r2;
    std::vector<double> se_r2;
    std::vector<double> mean_log_r;
    std::vector<double> var_r2;
    std::vector<double> hit_fraction;  ///< share of paths inside the target ball; zero without a target
    std::size_t zero_hits = 0;  ///< paths with |b| = 0 at any record time
};
struct TargetBall {
    Vec3 center;
    double eps;
};
SdeMoments limit_sde_moments(const Vec3 &b0, const SdeConfig &cfg, int record_every,
                             const TargetBall *target = nullptr);

/// Relative growth rate log(E|b_T|^2 / |b0|^2) / T with a delta-method standard error.
Estimate growth_rate(const std::vector<Vec3> &b, const Vec3 &b0, double T);

/// Finite-n Lagrangian system dX = -sum sigma_k(X) o dW, db = -sum (b . grad sigma_k)(X) o dW.
struct FiniteNConfig {
    int n = 4;
    double chi = 1.0;
    double dt = 1e-3;
    double T = 0.02;
    std::uint64_t seed = 0;
    int environments = 1;        ///< independent noise realizations
    double tolerance = 1e-10;    ///< midpoint iteration, relative
    int max_iterations = 60;

    [[nodiscard]] int steps() const;
};

void validate(const FiniteNConfig &cfg);

/// Evaluates u = sum sigma_k dW^k and (b . grad) u at arbitrary points for one noise step.
class ModeSum {
public:
    ModeSum(std::span<const NoiseMode> modes, const NoiseRealization &noise);
    /// u(x) and (b . grad) u(x).
    void evaluate(const Vec3 &x, const Vec3 &b, Vec3 &u, Vec3 &bgu) const;

private:
    struct Entry {
        IVec k;
        Vec3 a1, a2;       ///< theta * a for the two frame vectors
        Complex w1, w2;    ///< increments
    };
    std::vector<Entry> entries_;
    int kmax_ = 0;
};

/// One Stratonovich midpoint step of a single particle in a frozen noise step.
void midpoint_particle_step(const ModeSum &sum, Vec3 &x, Vec3 &b, double tol, int max_iterations);

/// Particles x0s[i] with values b0s[i], all environments share the particle set; the result holds
/// environments * particles entries, environment-major. Environment e uses RandomStream{seed, e}.
ParticleEnsemble simulate_finite_n(const std::vector<Vec3> &x0s, const std::vector<Vec3> &b0s,
                                   const FiniteNConfig &cfg, const ModeTable &modes);
ParticleEnsemble simulate_finite_n(const std::vector<Vec3> &x0s, const std::vector<Vec3> &b0s,
                                   const FiniteNConfig &cfg);

/// Normalized histogram with per-bin binomial standard errors.
struct EmpiricalLaw {
    ValueHistogram hist;
    std::vector<double> std_error;
    std::size_t samples = 0;
};
EmpiricalLaw empirical_law(const ParticleEnsemble &ensemble, const BinBox &box);

/// Binned total variation between a particle law and a density on matching bins.
double total_variation(const EmpiricalLaw &law, const BGridDensity &rho);

struct HitFraction {
    double fraction = 0.0;
    double ci_low = 0.0;   ///< Wilson 95% interval
    double ci_high = 0.0;
    std::size_t hits = 0;
    std::size_t paths = 0;
};
HitFraction wilson_interval(std::size_t hits, std::size_t paths);

/// P(|b_T - b_star| <= eps) under the limit SDE.
HitFraction support_probe(const Vec3 &b0, const Vec3 &b_star, double eps, const SdeConfig &cfg);

/// Fraction of grid points in the torus ball B(x0, r) with |field| >= R.
double large_values_fraction(const GridValues &field, const Vec3 &x0, double r, double R,
                             std::size_t min_points = 100);

/// Low-discrepancy points on the torus T^3.
std::vector<Vec3> halton_points(std::size_t count);

}  // namespace kraichnan
