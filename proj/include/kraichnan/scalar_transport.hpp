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
#include "kraichnan/spectral.hpp"

#include <functional>
#include <vector>

namespace kraichnan {

enum class ScalarScheme { Midpoint, EulerMaruyama };

struct ScalarRunConfig {
    int d = 2;
    int n = 4;
    double kappa_T = 1.0;
    int K_max = 16;
    double dt = 1e-4;
    double T = 0.1;
    std::uint64_t seed = 0;
    ScalarScheme scheme = ScalarScheme::Midpoint;

    [[nodiscard]] int steps() const;
};

/// Throws ConfigError on out-of-range parameters, including dt kappa_T K_max^2 > 1/(8d).
void validate(const ScalarRunConfig &cfg);

/// One Brownian path: a random stream and the refinement level it is sampled at.
struct NoisePath {
    RandomStream stream;
    int substeps = 1;

    friend bool operator==(const NoisePath &a, const NoisePath &b) {
        return a.stream.seed == b.stream.seed && a.stream.stream == b.stream.stream && a.substeps == b.substeps;
    }
};

/// Galerkin solver for d theta = kappa_T Lap theta dt + sum_k sigma_k . grad theta dW^k (Ito), whose
/// Stratonovich form is pure transport.
class ScalarTransportSolver {
public:
    explicit ScalarTransportSolver(const ScalarRunConfig &cfg);
    ScalarTransportSolver(const ScalarRunConfig &cfg, ModeTable modes);

    [[nodiscard]] const ScalarRunConfig &config() const { return cfg_; }
    [[nodiscard]] const GridPtr &grid() const { return grid_; }
    [[nodiscard]] const ModeTable &modes() const { return modes_; }

    /// Velocity increment sum_k sigma_k dW^k on the physical grid, one array per component.
    [[nodiscard]] std::vector<RVec> velocity(const NoiseRealization &noise) const;
    /// P[u . grad x], truncated to the retained band.
    [[nodiscard]] SpectralScalarField transport(const std::vector<RVec> &u, const SpectralScalarField &x) const;

    [[nodiscard]] SpectralScalarField step(const SpectralScalarField &theta, const NoiseRealization &noise) const;
    [[nodiscard]] NoiseRealization noise(const NoisePath &path, std::uint64_t step) const;

    using Observer = std::function<void(int step, const SpectralScalarField &)>;
    /// Runs cfg.steps() steps along `path`, calling `observe` after every step (and at step 0).
    [[nodiscard]] SpectralScalarField run(const SpectralScalarField &theta0, const NoisePath &path,
                                          const Observer &observe = {}) const;

private:
    ScalarRunConfig cfg_;
    GridPtr grid_;
    ModeTable modes_;
};

/// Final states of `count` independent paths (streams first_stream, first_stream+1, ...),
/// computed in parallel.
std::vector<SpectralScalarField> run_ensemble(const ScalarTransportSolver &solver, const SpectralScalarField &theta0,
                                              std::uint64_t first_stream, int count, int substeps = 1);

/// Convenience wrapper building a solver for cfg (use the solver directly inside loops).
SpectralScalarField step_scalar(const SpectralScalarField &theta, const NoiseRealization &noise,
                                const ScalarRunConfig &cfg);

double l2_norm(const SpectralScalarField &theta);
SpectralScalarField heat_limit(const SpectralScalarField &theta0, double t, double kappa_T);

/// Monte Carlo estimate of E <theta_T - theta_bar_T, psi>^2 over the ensemble.
Estimate weak_error(const std::vector<SpectralScalarField> &paths, const SpectralScalarField &theta_bar,
                    const SpectralScalarField &psi);

/// sup over observed steps of || P phi(theta_t) - vartheta_t || where vartheta starts from P phi(theta0).
/// Both runs must use the same path, else ContractViolation.
double renormalization_check(const ScalarTransportSolver &solver, const SpectralScalarField &theta0,
                             const std::function<double(double)> &phi, const NoisePath &path_theta,
                             const NoisePath &path_phi, int observe_every = 1);

/// P[phi o f] with the mean removed.
SpectralScalarField compose(const SpectralScalarField &f, const std::function<double(double)> &phi);

}  // namespace kraichnan
