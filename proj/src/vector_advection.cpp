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
#include "kraichnan/kernels.hpp"
#include "kraichnan/vlasov_limit.hpp"

#include <cmath>

namespace kraichnan {

namespace {

std::array<RVec, 3> physical(const SpectralGrid &g, const SpectralVectorField &B) {
    std::array<RVec, 3> out;
    CVec scratch;
    for (int a = 0; a < 3; ++a) g.to_physical(B.c[a], out[a], scratch);
    return out;
}

std::array<RVec, 9> gradient(const SpectralGrid &g, const std::array<CVec, 3> &c) {
    std::array<RVec, 9> out;
    CVec d(g.complex_size()), scratch;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (std::size_t p = 0; p < g.complex_size(); ++p) d[p] = Complex(0.0, g.wavevector(p)[j]) * c[i][p];
            g.to_physical(d, out[i * 3 + j], scratch);
        }
    }
    return out;
}

void project_in_place(const SpectralGrid &g, std::array<CVec, 3> &c) {
    for (std::size_t p = 0; p < g.complex_size(); ++p) {
        const int k2 = g.k2(p);
        if (k2 == 0) continue;
        const IVec &k = g.wavevector(p);
        const Complex kc = double(k[0]) * c[0][p] + double(k[1]) * c[1][p] + double(k[2]) * c[2][p];
        for (int a = 0; a < 3; ++a) c[a][p] -= double(k[a]) * kc / double(k2);
    }
}

struct Workspace {
    std::array<RVec, 3> b, e;
    std::array<CVec, 3> eh;
    CVec scratch;
};

/// Per-step bookkeeping shared by the stored-trajectory and the streaming residual.
class EnergyTracker {
public:
    EnergyTracker(const VectorAdvectionSolver &s, bool qv) : solver_(s), qv_(qv) {}

    void start(const SpectralVectorField &B0) { out_.energy.push_back(energy(B0)); }

    void add(const SpectralVectorField &B, const SpectralVectorField &noise_term, double cutoff,
             const SpectralVectorField &next) {
        const double m = VectorAdvectionSolver::martingale_increment(noise_term, B);
        const double d = solver_.drift_increment(B);
        const double e = energy(next);
        const double r = e - out_.energy.back() - m - d;
        out_.energy.push_back(e);
        out_.martingale.push_back(m);
        out_.drift.push_back(d);
        out_.residual.push_back(r);
        out_.cutoff.push_back(cutoff);
        sum_ += r;
        out_.running_mean.push_back(sum_ / double(out_.residual.size()));
        if (qv_) out_.qv_expected.push_back(8.0 * solver_.config().dt * solver_.stretching_square_sum(B));
    }

    EnergyResidualSeries take() { return std::move(out_); }

private:
    const VectorAdvectionSolver &solver_;
    bool qv_;
    double sum_ = 0.0;
    EnergyResidualSeries out_;
};

}  // namespace

int VectorRunConfig::steps() const { return int(std::llround(T / dt)); }

void validate(const VectorRunConfig &cfg) {
    require(cfg.n >= 1, "n must be >= 1");
    require(cfg.chi > 0.0, "chi must be positive");
    require(cfg.K_max >= 2 * cfg.n, "K_max must be >= 2n to resolve every noise mode");
    require(cfg.dt > 0.0 && cfg.T >= 0.0, "dt must be positive and T nonnegative");
    require(std::abs(cfg.steps() * cfg.dt - cfg.T) <= 1e-9 * std::max(1.0, cfg.T), "T must be a multiple of dt");
    require(cfg.gamma >= 4, "gamma must be >= 4");
    const double nu = 2.0 / 3.0 * cfg.chi * shell_sums(cfg.n, 3).eta_n;
    require(cfg.dt * nu * cfg.K_max * cfg.K_max <= 0.125, "stability: dt (2/3) chi eta_n K_max^2 must be <= 1/8");
}

SpectralVectorField leray_project(const SpectralVectorField &field) {
    SpectralVectorField out = field;
    project_in_place(*field.grid, out.c);
    return out;
}

double energy(const SpectralVectorField &B) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) s += inner(*B.grid, B.c[a], B.c[a]);
    return s;
}

double mean_field_pairing(const SpectralVectorField &B, const SpectralVectorField &phi) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) s += inner(*B.grid, B.c[a], phi.c[a]);
    return s;
}

VectorAdvectionSolver::VectorAdvectionSolver(const VectorRunConfig &cfg)
    : VectorAdvectionSolver(cfg, (validate(cfg), ModeTable::vector(cfg.n, cfg.chi))) {}

VectorAdvectionSolver::VectorAdvectionSolver(const VectorRunConfig &cfg, ModeTable modes)
    : cfg_(cfg), modes_(std::move(modes)) {
    validate(cfg);
    require(modes_.dim() == 3, "vector noise needs a 3D mode table");
    const int band = std::max(modes_.max_wavenumber(), 2 * cfg.n);
    const int points = SpectralGrid::nice_size(std::max(3 * cfg.K_max, 2 * cfg.K_max + band + 1));
    grid_ = std::make_shared<SpectralGrid>(3, cfg.K_max, points);
    nu_ = modes_.isotropy_sum().trace() / 3.0;
    moment_ = modes_.wavevector_moment();
}

NoiseRealization VectorAdvectionSolver::noise(const NoisePath &path, std::uint64_t step) const {
    return sample_increments(modes_, cfg_.dt, path.stream, step, path.substeps);
}

VelocityField VectorAdvectionSolver::velocity(const NoiseRealization &noise) const {
    if (noise.increments.size() != modes_.size()) throw ContractViolation("noise does not match the mode table");
    const auto &g = *grid_;
    VelocityField v;
    for (auto &c : v.spec) c.assign(g.complex_size(), Complex(0.0));
    const auto modes = modes_.modes();
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const auto idx = g.index_of(modes[i].index.k);
        if (idx < 0) continue;
        const Complex w = modes[i].theta * noise.increments[i];
        for (int a = 0; a < 3; ++a) v.spec[a][std::size_t(idx)] += w * modes[i].a[a];
    }
    CVec scratch;
    for (int a = 0; a < 3; ++a) g.to_physical(v.spec[a], v.u[a], scratch);
    return v;
}

std::array<RVec, 9> VectorAdvectionSolver::velocity_gradient(const VelocityField &vel) const {
    return gradient(*grid_, vel.spec);
}

SpectralVectorField VectorAdvectionSolver::noise_term(const VelocityField &vel, const SpectralVectorField &B,
                                                      double *cutoff_energy) const {
    const auto &g = *grid_;
    thread_local Workspace ws;
    for (int a = 0; a < 3; ++a) {
        g.to_physical(B.c[a], ws.b[a], ws.scratch);
        ws.e[a].resize(g.real_size());
    }
    kernels::omp::cross({ws.e[0].data(), ws.e[1].data(), ws.e[2].data()},
                        {ws.b[0].data(), ws.b[1].data(), ws.b[2].data()},
                        {vel.u[0].data(), vel.u[1].data(), vel.u[2].data()}, g.real_size());
    for (int a = 0; a < 3; ++a) g.to_spectral_full(ws.e[a], ws.eh[a]);
    SpectralVectorField res(grid_);
    const int K2 = cfg_.K_max * cfg_.K_max;
    double cut = 0.0;
    for (std::size_t p = 0; p < g.complex_size(); ++p) {
        const IVec &k = g.wavevector(p);
        const Complex i(0.0, 1.0);
        const Complex c0 = i * (double(k[1]) * ws.eh[2][p] - double(k[2]) * ws.eh[1][p]);
        const Complex c1 = i * (double(k[2]) * ws.eh[0][p] - double(k[0]) * ws.eh[2][p]);
        const Complex c2 = i * (double(k[0]) * ws.eh[1][p] - double(k[1]) * ws.eh[0][p]);
        if (g.k2(p) <= K2 && g.active(p)) {
            res.c[0][p] = c0;
            res.c[1][p] = c1;
            res.c[2][p] = c2;
        } else if (cutoff_energy && g.k2(p) > K2) {
            const double w = (k[g.dim() - 1] == 0 || 2 * std::abs(k[g.dim() - 1]) == g.points()) ? 1.0 : 2.0;
            cut += w * (std::norm(c0) + std::norm(c1) + std::norm(c2));
        }
    }
    if (cutoff_energy) *cutoff_energy = cut * g.volume();
    return res;
}

SpectralVectorField VectorAdvectionSolver::diffuse_and_add(const SpectralVectorField &B,
                                                           SpectralVectorField noise_term) const {
    const auto &g = *grid_;
    for (int a = 0; a < 3; ++a) {
        for (std::size_t p = 0; p < g.complex_size(); ++p) {
            noise_term.c[a][p] += (1.0 - nu_ * g.k2(p) * cfg_.dt) * B.c[a][p];
        }
    }
    project_in_place(g, noise_term.c);
    return noise_term;
}

SpectralVectorField VectorAdvectionSolver::step(const SpectralVectorField &B, const NoiseRealization &noise) const {
    return diffuse_and_add(B, noise_term(velocity(noise), B));
}

SpectralVectorField VectorAdvectionSolver::run(const SpectralVectorField &B0, const NoisePath &path,
                                               const Observer &observe) const {
    SpectralVectorField B = B0;
    if (observe) observe(0, B);
    for (int m = 0; m < cfg_.steps(); ++m) {
        B = step(B, noise(path, std::uint64_t(m)));
        if (observe) observe(m + 1, B);
    }
    return B;
}

double VectorAdvectionSolver::martingale_increment(const VelocityField &vel, const SpectralVectorField &B) const {
    return martingale_increment(noise_term(vel, B), B);
}

double VectorAdvectionSolver::martingale_increment(const SpectralVectorField &noise_term,
                                                   const SpectralVectorField &B) {
    // <u . grad B, B> = 0, so -2 <B . grad u, B> = 2 <N, B>
    return 2.0 * mean_field_pairing(noise_term, B);
}

double VectorAdvectionSolver::drift_increment(const SpectralVectorField &B) const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (moment_(i, j) != 0.0) s += moment_(i, j) * inner(*grid_, B.c[i], B.c[j]);
        }
    return 2.0 * cfg_.dt * s;
}

double VectorAdvectionSolver::stretching_square_sum(const SpectralVectorField &B) const {
    const auto &g = *grid_;
    const auto b = physical(g, B);
    std::array<CVec, 6> prod;
    RVec tmp(g.real_size());
    int idx = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            for (std::size_t p = 0; p < g.real_size(); ++p) tmp[p] = b[i][p] * b[j][p];
            g.to_spectral_full(tmp, prod[idx++]);
        }
    auto pair_index = [](int i, int j) {
        if (i > j) std::swap(i, j);
        return i == 0 ? j : (i == 1 ? 2 + j : 5);
    };
    double s = 0.0;
    for (const auto &mode : modes_.modes()) {
        const IVec mk = negate(mode.index.k);
        Complex c = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) c += mode.index.k[j] * mode.a[i] * g.lookup(prod[pair_index(i, j)], mk);
        c *= Complex(0.0, mode.theta * g.volume());
        s += std::norm(c);
    }
    return s;
}

EnergyResidualSeries ito_energy_residual(const VectorAdvectionSolver &solver,
                                         const std::vector<SpectralVectorField> &trajectory, const NoisePath &path,
                                         bool with_qv) {
    if (trajectory.size() != std::size_t(solver.config().steps()) + 1) {
        throw ContractViolation("ito_energy_residual: trajectory length does not match the run");
    }
    EnergyTracker tr(solver, with_qv);
    tr.start(trajectory.front());
    for (std::size_t m = 0; m + 1 < trajectory.size(); ++m) {
        double cut = 0.0;
        const auto n = solver.noise_term(solver.velocity(solver.noise(path, m)), trajectory[m], &cut);
        tr.add(trajectory[m], n, cut, trajectory[m + 1]);
    }
    return tr.take();
}

EnergyResidualSeries ito_energy_residual(const VectorAdvectionSolver &solver, const SpectralVectorField &B0,
                                         const NoisePath &path, bool with_qv) {
    EnergyTracker tr(solver, with_qv);
    tr.start(B0);
    SpectralVectorField B = B0;
    for (int m = 0; m < solver.config().steps(); ++m) {
        double cut = 0.0;
        const auto n = solver.noise_term(solver.velocity(solver.noise(path, std::uint64_t(m))), B, &cut);
        SpectralVectorField next = solver.diffuse_and_add(B, n);
        tr.add(B, n, cut, next);
        B = std::move(next);
    }
    return tr.take();
}

Estimate sup_moment(const std::vector<double> &sup_energy, double gamma) {
    require(!sup_energy.empty(), "sup_moment: empty ensemble");
    double s = 0.0, s2 = 0.0;
    for (double e : sup_energy) {
        const double v = std::pow(e, 0.5 * gamma);
        s += v;
        s2 += v * v;
    }
    const double m = double(sup_energy.size());
    const double mean = s / m;
    const double var = m > 1 ? std::max(s2 / m - mean * mean, 0.0) * m / (m - 1) : 0.0;
    return {mean, std::sqrt(var / m)};
}

PhaseSpaceFunction constant_function(double c) {
    PhaseSpaceFunction f;
    f.value = [c](const Vec3 &, const Vec3 &) { return c; };
    f.grad_x = [](const Vec3 &, const Vec3 &) { return Vec3::Zero().eval(); };
    f.lap_x = [](const Vec3 &, const Vec3 &) { return 0.0; };
    f.grad_b = [](const Vec3 &, const Vec3 &) { return Vec3::Zero().eval(); };
    f.hess_b = [](const Vec3 &, const Vec3 &) { return Mat3::Zero().eval(); };
    return f;
}

PhaseSpaceFunction x_mode_function(const IVec &m, double phase) {
    const Vec3 mv = to_vec3(m);
    PhaseSpaceFunction f = constant_function(0.0);
    f.value = [=](const Vec3 &x, const Vec3 &) { return std::cos(mv.dot(x) + phase); };
    f.grad_x = [=](const Vec3 &x, const Vec3 &) -> Vec3 { return -std::sin(mv.dot(x) + phase) * mv; };
    f.lap_x = [=](const Vec3 &x, const Vec3 &) { return -mv.squaredNorm() * std::cos(mv.dot(x) + phase); };
    return f;
}

PhaseSpaceFunction truncated_energy_function(double r0, double r1) {
    const auto g = truncated_square(r0, r1);
    PhaseSpaceFunction f = constant_function(0.0);
    f.value = [g](const Vec3 &, const Vec3 &b) { return g.value(b); };
    f.grad_b = [g](const Vec3 &, const Vec3 &b) { return g.gradient(b); };
    f.hess_b = [g](const Vec3 &, const Vec3 &b) { return g.hessian(b); };
    return f;
}

PhaseSpaceFunction mixed_function(const Vec3 &c, double r) {
    const auto g = bump_function(c, r);
    PhaseSpaceFunction f;
    f.value = [g](const Vec3 &x, const Vec3 &b) { return std::cos(x[0]) * g.value(b); };
    f.grad_x = [g](const Vec3 &x, const Vec3 &b) -> Vec3 { return Vec3(-std::sin(x[0]) * g.value(b), 0.0, 0.0); };
    f.lap_x = [g](const Vec3 &x, const Vec3 &b) { return -std::cos(x[0]) * g.value(b); };
    f.grad_b = [g](const Vec3 &x, const Vec3 &b) -> Vec3 { return std::cos(x[0]) * g.gradient(b); };
    f.hess_b = [g](const Vec3 &x, const Vec3 &b) -> Mat3 { return std::cos(x[0]) * g.hessian(b); };
    return f;
}

VlasovResidualSeries vlasov_residual(const VectorAdvectionSolver &solver, const SpectralVectorField &B0,
                                     const NoisePath &path, const PhaseSpaceFunction &f) {
    const auto &g = *solver.grid();
    const LnTensor ln(solver.modes().modes());
    const double dt = solver.config().dt;
    const double nu = solver.viscosity();

    auto integral_f = [&](const std::array<RVec, 3> &b) {
        double s = 0.0;
        for (std::size_t p = 0; p < g.real_size(); ++p) s += f.value(g.point(p), Vec3(b[0][p], b[1][p], b[2][p]));
        return s * g.cell_volume();
    };

    VlasovResidualSeries out;
    SpectralVectorField B = B0;
    auto b = physical(g, B);
    const double f0 = integral_f(b);
    double tr = 0.0, st = 0.0, xd = 0.0, bd = 0.0;
    for (int m = 0; m < solver.config().steps(); ++m) {
        const auto vel = solver.velocity(solver.noise(path, std::uint64_t(m)));
        const auto grad_u = solver.velocity_gradient(vel);
        double s_tr = 0.0, s_st = 0.0, s_xd = 0.0, s_bd = 0.0;
        for (std::size_t p = 0; p < g.real_size(); ++p) {
            const Vec3 x = g.point(p);
            const Vec3 bv(b[0][p], b[1][p], b[2][p]);
            const Vec3 u(vel.u[0][p], vel.u[1][p], vel.u[2][p]);
            Vec3 stretch = Vec3::Zero();
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) stretch[i] += bv[j] * grad_u[i * 3 + j][p];
            s_tr += u.dot(f.grad_x(x, bv));
            s_st += stretch.dot(f.grad_b(x, bv));
            s_xd += f.lap_x(x, bv);
            s_bd += ln(bv).cwiseProduct(f.hess_b(x, bv)).sum();
        }
        const double w = g.cell_volume();
        tr -= s_tr * w;
        st -= s_st * w;
        xd += nu * s_xd * w * dt;
        bd += s_bd * w * dt;

        B = solver.diffuse_and_add(B, solver.noise_term(vel, B));
        b = physical(g, B);
        const double lhs = integral_f(b) - f0;
        out.lhs.push_back(lhs);
        out.transport.push_back(tr);
        out.stretching.push_back(st);
        out.x_diffusion.push_back(xd);
        out.b_diffusion.push_back(bd);
        out.gap.push_back(lhs - tr - st - xd - bd);
    }
    return out;
}

}  // namespace kraichnan
