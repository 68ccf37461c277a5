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

#include "kraichnan/scalar_transport.hpp"
#include "kraichnan/kernels.hpp"

#include <cmath>

namespace kraichnan {

namespace {

constexpr double kIterationTolerance = 1e-13;
constexpr int kMaxIterations = 200;

void axpy(CVec &y, double a, const CVec &x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double diff_norm(const SpectralGrid &g, const CVec &a, const CVec &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += g.weight(i) * std::norm(a[i] - b[i]);
    return std::sqrt(g.volume() * s);
}

}  // namespace

int ScalarRunConfig::steps() const { return int(std::llround(T / dt)); }

void validate(const ScalarRunConfig &cfg) {
    require(cfg.d == 2 || cfg.d == 3, "d must be 2 or 3");
    require(cfg.n >= 1, "n must be >= 1");
    require(cfg.kappa_T > 0.0, "kappa_T must be positive");
    require(cfg.K_max >= 2 * cfg.n, "K_max must be >= 2n to resolve every noise mode");
    require(cfg.dt > 0.0 && cfg.T >= 0.0, "dt must be positive and T nonnegative");
    require(std::abs(cfg.steps() * cfg.dt - cfg.T) <= 1e-9 * std::max(1.0, cfg.T), "T must be a multiple of dt");
    require(cfg.dt * cfg.kappa_T * cfg.K_max * cfg.K_max <= 1.0 / (8.0 * cfg.d),
            "stability: dt kappa_T K_max^2 must be <= 1/(8d)");
}

ScalarTransportSolver::ScalarTransportSolver(const ScalarRunConfig &cfg)
    : ScalarTransportSolver(cfg, (validate(cfg), ModeTable::scalar(cfg.d, cfg.n, cfg.kappa_T))) {}

ScalarTransportSolver::ScalarTransportSolver(const ScalarRunConfig &cfg, ModeTable modes)
    : cfg_(cfg), modes_(std::move(modes)) {
    validate(cfg);
    require(modes_.dim() == cfg.d, "mode table dimension does not match the run");
    const int band = std::max(modes_.max_wavenumber(), 2 * cfg.n);
    const int points = SpectralGrid::nice_size(std::max(3 * cfg.K_max, 2 * cfg.K_max + band + 1));
    grid_ = std::make_shared<SpectralGrid>(cfg.d, cfg.K_max, points);
}

std::vector<RVec> ScalarTransportSolver::velocity(const NoiseRealization &noise) const {
    const auto &g = *grid_;
    const auto modes = modes_.modes();
    std::vector<CVec> uh(std::size_t(cfg_.d), CVec(g.complex_size(), Complex(0.0)));
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const auto idx = g.index_of(modes[i].index.k);
        if (idx < 0) continue;
        const Complex w = modes[i].theta * noise.increments[i];
        for (int a = 0; a < cfg_.d; ++a) uh[a][std::size_t(idx)] += w * modes[i].a[a];
    }
    std::vector<RVec> u(std::size_t(cfg_.d));
    CVec scratch;
    for (int a = 0; a < cfg_.d; ++a) g.to_physical(uh[a], u[a], scratch);
    return u;
}

SpectralScalarField ScalarTransportSolver::transport(const std::vector<RVec> &u, const SpectralScalarField &x) const {
    const auto &g = *grid_;
    std::vector<RVec> grad(std::size_t(cfg_.d));
    CVec dh(g.complex_size()), scratch;
    for (int a = 0; a < cfg_.d; ++a) {
        for (std::size_t i = 0; i < g.complex_size(); ++i) dh[i] = Complex(0.0, g.wavevector(i)[a]) * x.c[i];
        g.to_physical(dh, grad[a], scratch);
    }
    std::vector<const double *> up, gp;
    for (int a = 0; a < cfg_.d; ++a) {
        up.push_back(u[a].data());
        gp.push_back(grad[a].data());
    }
    RVec prod(g.real_size());
    kernels::omp::dot(prod, up, gp);
    SpectralScalarField out(grid_);
    g.to_spectral(prod, out.c);
    return out;
}

NoiseRealization ScalarTransportSolver::noise(const NoisePath &path, std::uint64_t step) const {
    return sample_increments(modes_, cfg_.dt, path.stream, step, path.substeps);
}

SpectralScalarField ScalarTransportSolver::step(const SpectralScalarField &theta, const NoiseRealization &noise) const {
    if (noise.increments.size() != modes_.size()) throw ContractViolation("noise does not match the mode table");
    const auto &g = *grid_;
    const auto u = velocity(noise);
    const auto a_theta = transport(u, theta);

    if (cfg_.scheme == ScalarScheme::EulerMaruyama) {
        SpectralScalarField out = theta;
        for (std::size_t i = 0; i < g.complex_size(); ++i) {
            out.c[i] += -cfg_.kappa_T * g.k2(i) * cfg_.dt * theta.c[i] + a_theta.c[i];
        }
        return out;
    }

    // y = theta + A((theta + y)/2), A linear: y = theta + A theta / 2 + A y / 2
    SpectralScalarField base = theta;
    axpy(base.c, 0.5, a_theta.c);
    SpectralScalarField y = theta;
    axpy(y.c, 1.0, a_theta.c);
    const double scale = std::max(std::sqrt(inner(g, theta.c, theta.c)), 1e-300);
    for (int it = 0; it < kMaxIterations; ++it) {
        SpectralScalarField next = base;
        axpy(next.c, 0.5, transport(u, y).c);
        const double change = diff_norm(g, next.c, y.c);
        y = std::move(next);
        if (change <= kIterationTolerance * scale) return y;
    }
    throw NumericalError("midpoint iteration did not converge; reduce dt");
}

SpectralScalarField ScalarTransportSolver::run(const SpectralScalarField &theta0, const NoisePath &path,
                                               const Observer &observe) const {
    SpectralScalarField theta = theta0;
    if (observe) observe(0, theta);
    const int steps = cfg_.steps();
    for (int m = 0; m < steps; ++m) {
        theta = step(theta, noise(path, std::uint64_t(m)));
        if (observe) observe(m + 1, theta);
    }
    return theta;
}

std::vector<SpectralScalarField> run_ensemble(const ScalarTransportSolver &solver, const SpectralScalarField &theta0,
                                              std::uint64_t first_stream, int count, int substeps) {
    std::vector<SpectralScalarField> out(std::size_t(std::max(count, 0)));
#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < count; ++p) {
        const NoisePath path{{solver.config().seed, first_stream + std::uint64_t(p)}, substeps};
        out[std::size_t(p)] = solver.run(theta0, path);
    }
    return out;
}

SpectralScalarField step_scalar(const SpectralScalarField &theta, const NoiseRealization &noise,
                                const ScalarRunConfig &cfg) {
    const ScalarTransportSolver solver(cfg);
    if (theta.grid->points() != solver.grid()->points() || theta.grid->kmax() != cfg.K_max) {
        throw ContractViolation("step_scalar: field grid does not match the configuration");
    }
    auto out = solver.step(theta, noise);
    out.grid = theta.grid;
    return out;
}

double l2_norm(const SpectralScalarField &theta) { return std::sqrt(inner(*theta.grid, theta.c, theta.c)); }

SpectralScalarField heat_limit(const SpectralScalarField &theta0, double t, double kappa_T) {
    require(t >= 0.0, "heat_limit: t must be nonnegative");
    SpectralScalarField out = theta0;
    const auto &g = *theta0.grid;
    for (std::size_t i = 0; i < g.complex_size(); ++i) out.c[i] *= std::exp(-kappa_T * g.k2(i) * t);
    return out;
}

Estimate weak_error(const std::vector<SpectralScalarField> &paths, const SpectralScalarField &theta_bar,
                    const SpectralScalarField &psi) {
    require(!paths.empty(), "weak_error: empty ensemble");
    const auto &g = *theta_bar.grid;
    const double ref = inner(g, theta_bar.c, psi.c);
    double s = 0.0, s2 = 0.0;
    for (const auto &p : paths) {
        const double e = inner(g, p.c, psi.c) - ref;
        s += e * e;
        s2 += e * e * e * e;
    }
    const double m = double(paths.size());
    const double mean = s / m;
    const double var = paths.size() > 1 ? std::max(s2 / m - mean * mean, 0.0) * m / (m - 1) : 0.0;
    return {mean, std::sqrt(var / m)};
}

SpectralScalarField compose(const SpectralScalarField &f, const std::function<double(double)> &phi) {
    RVec v = f.physical();
    for (auto &x : v) x = phi(x);
    return SpectralScalarField::from_physical(f.grid, v);
}

double renormalization_check(const ScalarTransportSolver &solver, const SpectralScalarField &theta0,
                             const std::function<double(double)> &phi, const NoisePath &path_theta,
                             const NoisePath &path_phi, int observe_every) {
    if (!(path_theta == path_phi)) throw ContractViolation("renormalization_check: runs must share one noise path");
    require(observe_every >= 1, "observe_every must be >= 1");
    std::vector<SpectralScalarField> theta_obs;
    (void)solver.run(theta0, path_theta, [&](int m, const SpectralScalarField &th) {
        if (m % observe_every == 0) theta_obs.push_back(th);
    });
    double worst = 0.0;
    std::size_t i = 0;
    (void)solver.run(compose(theta0, phi), path_phi, [&](int m, const SpectralScalarField &vt) {
        if (m % observe_every != 0) return;
        const auto lhs = compose(theta_obs[i++], phi);
        worst = std::max(worst, diff_norm(*vt.grid, lhs.c, vt.c));
    });
    return worst;
}

}  // namespace kraichnan
