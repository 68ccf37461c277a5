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

#include "kraichnan/vlasov_limit.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

namespace kraichnan {

namespace {

double clamp_unit(double u) { return std::clamp(u, 0.0, 1.0); }

void check_support(const BGridDensity &rho, const BTestFunction &f) {
    const double limit = rho.grid.lo + rho.grid.cells * rho.grid.h - 2.0 * rho.grid.h;
    require(f.support_radius > 0.0, "weak form test function must have compact support");
    for (int a = 0; a < 3; ++a) {
        require(std::abs(f.center[a]) + f.support_radius <= limit, "test function support touches the box boundary");
    }
}

double generator_integral(const BGridDensity &rho, const BTestFunction &f, double chi) {
    const auto &g = rho.grid;
    double s = 0.0;
    for (int i = 0; i < g.cells; ++i)
        for (int j = 0; j < g.cells; ++j)
            for (int k = 0; k < g.cells; ++k) {
                const double r = rho.rho[g.index(i, j, k)];
                if (r == 0.0) continue;
                const Vec3 b = g.center(i, j, k);
                if (f.support_radius > 0.0 && (b - f.center).norm() >= f.support_radius) continue;
                s += r * (L_matrix(b, chi).cwiseProduct(f.hessian(b))).sum();
            }
    return s * rho.cell_volume();
}

}  // namespace

double c_L(double chi) { return 8.0 * std::numbers::pi * chi * std::log(2.0) / 15.0; }

Mat3 L_matrix(const Vec3 &b, double chi) {
    return c_L(chi) * (2.0 * b.squaredNorm() * Mat3::Identity() - b * b.transpose());
}

Mat3 Ln_matrix(const Vec3 &b, int n, double chi) {
    Mat3 out = Mat3::Zero();
    for (const auto &k : shell_vectors(n, 3)) {
        const Vec3 kv = to_vec3(k);
        const double k2 = kv.squaredNorm();
        const double bk = b.dot(kv);
        out += (bk * bk / std::pow(k2, 2.5)) * (Mat3::Identity() - kv * kv.transpose() / k2);
    }
    return chi * out;
}

Mat3 A_matrix(const Vec3 &b, double chi) {
    const double r = b.norm();
    if (r == 0.0) return Mat3::Zero();
    const Mat3 P = b * b.transpose() / (r * r);
    const double c = c_L(chi);
    return std::sqrt(c) * r * P + std::sqrt(2.0 * c) * r * (Mat3::Identity() - P);
}

LnTensor::LnTensor(int n, double chi) {
    for (auto &m : parts_) m.setZero();
    for (const auto &k : shell_vectors(n, 3)) {
        const Vec3 kv = to_vec3(k);
        const double k2 = kv.squaredNorm();
        const Mat3 proj = chi / std::pow(k2, 2.5) * (Mat3::Identity() - kv * kv.transpose() / k2);
        int idx = 0;
        for (int p = 0; p < 3; ++p)
            for (int q = p; q < 3; ++q) parts_[idx++] += (p == q ? 1.0 : 2.0) * kv[p] * kv[q] * proj;
    }
}

LnTensor::LnTensor(std::span<const NoiseMode> modes) {
    for (auto &m : parts_) m.setZero();
    for (const auto &mode : modes) {
        const Vec3 kv = to_vec3(mode.index.k);
        const Mat3 aa = mode.theta * mode.theta * mode.a * mode.a.transpose();
        int idx = 0;
        for (int p = 0; p < 3; ++p)
            for (int q = p; q < 3; ++q) parts_[idx++] += (p == q ? 1.0 : 2.0) * kv[p] * kv[q] * aa;
    }
}

Mat3 LnTensor::operator()(const Vec3 &b) const {
    Mat3 out = Mat3::Zero();
    int idx = 0;
    for (int p = 0; p < 3; ++p)
        for (int q = p; q < 3; ++q) out += b[p] * b[q] * parts_[idx++];
    return out;
}

BGridDensity::BGridDensity(int cells, double half_width)
    : grid{cells, -half_width, 2.0 * half_width / cells}, rho(grid.size(), 0.0) {
    require(cells >= 4, "density grid needs at least 4 cells per axis");
    require(half_width > 0.0, "box half width must be positive");
}

void BGridDensity::deposit(const Vec3 &b, double m) {
    std::array<int, 3> i0{};
    std::array<double, 3> w1{};
    for (int a = 0; a < 3; ++a) {
        const double s = std::clamp((b[a] - grid.lo) / grid.h - 0.5, 0.0, double(grid.cells - 1));
        i0[a] = std::min(int(std::floor(s)), grid.cells - 2);
        w1[a] = s - i0[a];
    }
    const double scale = m / cell_volume();
    for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < 2; ++dk) {
                const double w = (di ? w1[0] : 1 - w1[0]) * (dj ? w1[1] : 1 - w1[1]) * (dk ? w1[2] : 1 - w1[2]);
                rho[grid.index(i0[0] + di, i0[1] + dj, i0[2] + dk)] += w * scale;
            }
}

double BGridDensity::mass() const {
    double s = 0.0;
    for (double v : rho) s += v;
    return s * cell_volume();
}

double BGridDensity::m2() const {
    return integrate([](const Vec3 &b) { return b.squaredNorm(); });
}

double BGridDensity::boundary_mass() const {
    const int n = grid.cells;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                if (i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1) s += rho[grid.index(i, j, k)];
            }
    return s * cell_volume();
}

double BGridDensity::integrate(const std::function<double(const Vec3 &)> &f) const {
    double s = 0.0;
    for (int i = 0; i < grid.cells; ++i)
        for (int j = 0; j < grid.cells; ++j)
            for (int k = 0; k < grid.cells; ++k) {
                const double r = rho[grid.index(i, j, k)];
                if (r != 0.0) s += r * f(grid.center(i, j, k));
            }
    return s * cell_volume();
}

std::vector<double> BGridDensity::coarsen(int cells) const {
    require(cells >= 1 && grid.cells % cells == 0, "coarse cell count must divide the grid");
    const int f = grid.cells / cells;
    std::vector<double> out(std::size_t(cells) * cells * cells, 0.0);
    for (int i = 0; i < grid.cells; ++i)
        for (int j = 0; j < grid.cells; ++j)
            for (int k = 0; k < grid.cells; ++k) {
                out[(std::size_t(i / f) * cells + std::size_t(j / f)) * cells + std::size_t(k / f)] +=
                    rho[grid.index(i, j, k)] * cell_volume();
            }
    return out;
}

void BGridDensity::write(std::ostream &data, std::ostream &header) const {
    data.write(reinterpret_cast<const char *>(rho.data()), std::streamsize(rho.size() * sizeof(double)));
    nlohmann::json h;
    h["box"] = {grid.lo, grid.lo + grid.cells * grid.h};
    h["cells"] = grid.cells;
    h["h"] = grid.h;
    h["time"] = t;
    h["layout"] = "row-major (i, j, k), float64 little-endian";
    header << h.dump(2) << '\n';
}

double fp_max_dt(const BGridDensity &rho, double chi, double cfl) {
    const double w = std::abs(rho.grid.lo);
    const double tr_max = 5.0 * c_L(chi) * 3.0 * w * w;
    return cfl * rho.grid.h * rho.grid.h / tr_max;
}

BGridDensity fp_step(const BGridDensity &rho, double dt, double chi, Backend backend) {
    require(dt > 0.0, "fp_step: dt must be positive");
    require(dt <= fp_max_dt(rho, chi) * (1.0 + 1e-12), "fp_step: CFL bound violated");
    BGridDensity out = rho;
    const kernels::DiffusionStep p{c_L(chi), dt};
    if (backend == Backend::Serial) {
        kernels::serial::diffusion_step(rho.grid, p, rho.rho, out.rho);
    } else {
        kernels::omp::diffusion_step(rho.grid, p, rho.rho, out.rho);
    }
    out.t = rho.t + dt;
    return out;
}

std::vector<FpSample> fp_advance(BGridDensity &rho, double dt, int steps, double chi, int sample_every,
                                 Backend backend) {
    require(dt > 0.0 && dt <= fp_max_dt(rho, chi) * (1.0 + 1e-12), "fp_advance: CFL bound violated");
    require(sample_every >= 1, "sample_every must be >= 1");
    const kernels::DiffusionStep p{c_L(chi), dt};
    std::vector<double> next(rho.rho.size());
    std::vector<FpSample> out{{rho.t, rho.mass(), rho.m2(), rho.boundary_mass()}};
    const double t0 = rho.t;
    for (int s = 1; s <= steps; ++s) {
        if (backend == Backend::Serial) {
            kernels::serial::diffusion_step(rho.grid, p, rho.rho, next);
        } else {
            kernels::omp::diffusion_step(rho.grid, p, rho.rho, next);
        }
        rho.rho.swap(next);
        rho.t = t0 + s * dt;
        if (s % sample_every == 0 || s == steps) out.push_back({rho.t, rho.mass(), rho.m2(), rho.boundary_mass()});
    }
    return out;
}

double scalar_limit_pairing(const SpectralScalarField &theta0, double t, double kappa_T,
                            const std::function<double(double)> &phi, const std::function<double(const Vec3 &)> &psi) {
    require(t >= 0.0, "scalar_limit_pairing: t must be nonnegative");
    const auto &g = *theta0.grid;
    RVec v = theta0.physical();
    for (auto &x : v) x = phi(x);
    CVec spec;
    g.to_spectral_full(v, spec);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= std::exp(-kappa_T * g.k2(i) * t);
    CVec scratch;
    g.to_physical(spec, v, scratch);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * psi(g.point(i));
    return s * g.cell_volume();
}

BTestFunction bump_function(const Vec3 &center, double radius) {
    require(radius > 0.0, "bump radius must be positive");
    const double r2 = radius * radius;
    BTestFunction f;
    f.center = center;
    f.support_radius = radius;
    f.value = [=](const Vec3 &b) {
        const double q = 1.0 - (b - center).squaredNorm() / r2;
        return q > 0.0 ? q * q * q : 0.0;
    };
    f.gradient = [=](const Vec3 &b) -> Vec3 {
        const Vec3 d = b - center;
        const double q = 1.0 - d.squaredNorm() / r2;
        return q > 0.0 ? Vec3(-6.0 * q * q / r2 * d) : Vec3::Zero();
    };
    f.hessian = [=](const Vec3 &b) -> Mat3 {
        const Vec3 d = b - center;
        const double q = 1.0 - d.squaredNorm() / r2;
        if (q <= 0.0) return Mat3::Zero();
        return 24.0 * q / (r2 * r2) * d * d.transpose() - 6.0 * q * q / r2 * Mat3::Identity();
    };
    return f;
}

BTestFunction truncated_square(double r0, double r1) {
    require(0.0 < r0 && r0 < r1, "truncated_square needs 0 < r0 < r1");
    const double w = r1 - r0;
    auto S = [=](double r) {
        const double u = clamp_unit((r - r0) / w);
        return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    };
    auto dS = [=](double r) {
        const double u = clamp_unit((r - r0) / w);
        return -30.0 * u * u * (1.0 - u) * (1.0 - u) / w;
    };
    auto d2S = [=](double r) {
        const double u = clamp_unit((r - r0) / w);
        return -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (w * w);
    };
    BTestFunction f;
    f.support_radius = r1;
    f.value = [=](const Vec3 &b) { return b.squaredNorm() * S(b.norm()); };
    f.gradient = [=](const Vec3 &b) -> Vec3 {
        const double r = b.norm();
        return (2.0 * S(r) + r * dS(r)) * b;
    };
    f.hessian = [=](const Vec3 &b) -> Mat3 {
        const double r = b.norm();
        const double g = 2.0 * S(r) + r * dS(r);
        if (r <= r0) return g * Mat3::Identity();
        const double gp = 3.0 * dS(r) + r * d2S(r);
        return g * Mat3::Identity() + gp / r * b * b.transpose();
    };
    return f;
}

double weak_form_residual(const std::vector<BGridDensity> &trajectory, const BTestFunction &f, double chi) {
    require(trajectory.size() >= 2, "weak_form_residual needs at least two snapshots");
    check_support(trajectory.front(), f);
    double gen = 0.0;
    double prev = generator_integral(trajectory[0], f, chi);
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        const double cur = generator_integral(trajectory[i], f, chi);
        gen += 0.5 * (trajectory[i].t - trajectory[i - 1].t) * (prev + cur);
        prev = cur;
    }
    const double lhs = trajectory.back().integrate(f.value) - trajectory.front().integrate(f.value);
    return std::abs(lhs - gen);
}

RefinementStudy weak_form_refinement(const std::vector<int> &cells, double half_width, const Vec3 &center,
                                     double width, double T, const BTestFunction &f, double chi) {
    require(cells.size() >= 2, "refinement needs at least two resolutions");
    RefinementStudy out;
    out.cells = cells;
    for (int n : cells) {
        BGridDensity rho(n, half_width);
        check_support(rho, f);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const Vec3 b = rho.grid.center(i, j, k);
                    rho.rho[rho.grid.index(i, j, k)] = std::exp(-(b - center).squaredNorm() / (2 * width * width));
                }
        const double m = rho.mass();
        for (auto &v : rho.rho) v /= m;

        const double dt_max = fp_max_dt(rho, chi, 0.25);
        const int steps = int(std::ceil(T / dt_max));
        const double dt = T / steps;
        const double f0 = rho.integrate(f.value);
        double gen = 0.0;
        double prev = generator_integral(rho, f, chi);
        for (int s = 0; s < steps; ++s) {
            rho = fp_step(rho, dt, chi);
            const double cur = generator_integral(rho, f, chi);
            gen += 0.5 * dt * (prev + cur);
            prev = cur;
        }
        out.residuals.push_back(std::abs(rho.integrate(f.value) - f0 - gen));
    }
    // least-squares slope of log residual against log h
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double x = std::log(2.0 * half_width / cells[i]);
        const double y = std::log(std::max(out.residuals[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

}  // namespace kraichnan
