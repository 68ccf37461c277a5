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

#include "kraichnan/lagrangian_mc.hpp"
#include "kraichnan/kernels.hpp"

#include <cmath>
#include <map>

namespace kraichnan {

namespace {

kernels::SdeStep sde_step(const SdeConfig &cfg, const Vec3 &b0) {
    kernels::SdeStep p;
    p.sqrt_cL = std::sqrt(c_L(cfg.chi));
    p.sqrt_2cL = std::sqrt(2.0 * c_L(cfg.chi));
    p.kappa = cfg.kappa;
    p.dt = cfg.dt;
    p.floor = cfg.floor_rel * b0.norm();
    p.milstein = cfg.scheme == SdeScheme::MilsteinDiagonal;
    return p;
}

Vec3 wrap(Vec3 x) {
    for (int a = 0; a < 3; ++a) {
        x[a] = std::fmod(x[a], kTwoPi);
        if (x[a] < 0.0) x[a] += kTwoPi;
    }
    return x;
}

}  // namespace

int SdeConfig::steps() const { return int(std::llround(T / dt)); }

void validate(const SdeConfig &cfg) {
    require(cfg.dt > 0.0 && cfg.T >= 0.0, "sde: dt must be positive and T nonnegative");
    require(std::abs(cfg.steps() * cfg.dt - cfg.T) <= 1e-9 * std::max(1.0, cfg.T), "sde: T must be a multiple of dt");
    require(cfg.paths >= 1, "sde: need at least one path");
    require(cfg.kappa > 0.0 && cfg.chi > 0.0, "sde: kappa and chi must be positive");
    require(cfg.floor_rel >= 0.0, "sde: floor must be nonnegative");
}

ParticleEnsemble simulate_limit_sde(const Vec3 &b0, const SdeConfig &cfg, Backend backend) {
    validate(cfg);
    ParticleEnsemble e;
    e.b.assign(cfg.paths, b0);
    const auto p = sde_step(cfg, b0);
    e.guarded = backend == Backend::Serial ? kernels::serial::advance_particles(e.b, p, cfg.seed, 0, 0, cfg.steps())
                                           : kernels::omp::advance_particles(e.b, p, cfg.seed, 0, 0, cfg.steps());
    e.t = cfg.steps() * cfg.dt;
    return e;
}

SdeMoments limit_sde_moments(const Vec3 &b0, const SdeConfig &cfg, int record_every, const TargetBall *target) {
    validate(cfg);
    require(record_every >= 1, "sde: record_every must be positive");
    require(target == nullptr || target->eps > 0.0, "sde: target radius must be positive");
    const auto p = sde_step(cfg, b0);
    std::vector<Vec3> b(cfg.paths, b0);
    std::vector<char> hit(cfg.paths, 0);
    SdeMoments out;
    auto record = [&](int step) {
        double s = 0.0, s2 = 0.0, sl = 0.0;
        std::size_t inside = 0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double r2 = b[i].squaredNorm();
            if (target != nullptr && (b[i] - target->center).norm() <= target->eps) ++inside;
            s += r2;
            s2 += r2 * r2;
            if (r2 == 0.0) hit[i] = 1;
            sl += r2 > 0.0 ? 0.5 * std::log(r2) : 0.0;
        }
        const double m = double(b.size());
        out.t.push_back(step * cfg.dt);
        out.mean_r2.push_back(s / m);
        out.se_r2.push_back(m > 1 ? std::sqrt(std::max(s2 / m - (s / m) * (s / m), 0.0) / (m - 1)) : 0.0);
        out.mean_log_r.push_back(sl / m);
        out.var_r2.push_back(std::max(s2 / m - (s / m) * (s / m), 0.0));
        out.hit_fraction.push_back(double(inside) / m);
    };
    record(0);
    for (int done = 0; done < cfg.steps();) {
        const int chunk = std::min(record_every, cfg.steps() - done);
        kernels::omp::advance_particles(b, p, cfg.seed, 0, std::uint64_t(done), chunk);
        done += chunk;
        record(done);
    }
    for (char h : hit) out.zero_hits += std::size_t(h);
    return out;
}

Estimate growth_rate(const std::vector<Vec3> &b, const Vec3 &b0, double T) {
    require(!b.empty() && T > 0.0 && b0.norm() > 0.0, "growth_rate: need paths, T > 0 and b0 != 0");
    const double r0 = b0.squaredNorm();
    double s = 0.0, s2 = 0.0;
    for (const auto &v : b) {
        const double q = v.squaredNorm() / r0;
        s += q;
        s2 += q * q;
    }
    const double m = double(b.size());
    const double mean = s / m;
    const double se = m > 1 ? std::sqrt(std::max(s2 / m - mean * mean, 0.0) / (m - 1)) : 0.0;
    return {std::log(mean) / T, se / (mean * T)};
}

int FiniteNConfig::steps() const { return int(std::llround(T / dt)); }

void validate(const FiniteNConfig &cfg) {
    require(cfg.n >= 1 && cfg.chi > 0.0, "finite-n: need n >= 1 and chi > 0");
    require(cfg.dt > 0.0 && cfg.T >= 0.0, "finite-n: dt must be positive and T nonnegative");
    require(std::abs(cfg.steps() * cfg.dt - cfg.T) <= 1e-9 * std::max(1.0, cfg.T), "finite-n: T must be a multiple of dt");
    require(cfg.environments >= 1, "finite-n: need at least one environment");
    require(cfg.tolerance > 0.0 && cfg.max_iterations >= 1, "finite-n: invalid midpoint iteration settings");
}

ModeSum::ModeSum(std::span<const NoiseMode> modes, const NoiseRealization &noise) {
    if (noise.increments.size() != modes.size()) throw ContractViolation("noise does not match the mode list");
    std::map<IVec, std::size_t> slot;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const auto &m = modes[i];
        if (!m.index.in_positive_half() || m.theta == 0.0) continue;
        auto [it, fresh] = slot.try_emplace(m.index.k, entries_.size());
        if (fresh) {
            entries_.push_back({m.index.k, Vec3::Zero(), Vec3::Zero(), 0.0, 0.0});
            for (int a = 0; a < 3; ++a) kmax_ = std::max(kmax_, std::abs(m.index.k[a]));
        }
        auto &e = entries_[it->second];
        if (m.index.j == 1) {
            e.a1 = m.theta * m.a;
            e.w1 = noise.increments[i];
        } else {
            e.a2 = m.theta * m.a;
            e.w2 = noise.increments[i];
        }
    }
}

void ModeSum::evaluate(const Vec3 &x, const Vec3 &b, Vec3 &u, Vec3 &bgu) const {
    // per-axis tables e[a][m + kmax] = exp(i m x_a)
    thread_local std::vector<Complex> table;
    const int w = 2 * kmax_ + 1;
    table.resize(std::size_t(3 * w));
    for (int a = 0; a < 3; ++a) {
        Complex *t = table.data() + a * w + kmax_;
        t[0] = 1.0;
        for (int m = 1; m <= kmax_; ++m) {
            t[m] = std::polar(1.0, m * x[a]);
            t[-m] = std::conj(t[m]);
        }
    }
    u.setZero();
    bgu.setZero();
    const Complex *tx = table.data() + kmax_;
    const Complex *ty = tx + w;
    const Complex *tz = ty + w;
    for (const auto &e : entries_) {
        const Complex ph = tx[e.k[0]] * ty[e.k[1]] * tz[e.k[2]];
        const Complex c1 = e.w1 * ph, c2 = e.w2 * ph;
        const double kb = e.k[0] * b[0] + e.k[1] * b[1] + e.k[2] * b[2];
        u += 2.0 * (c1.real() * e.a1 + c2.real() * e.a2);
        bgu -= 2.0 * kb * (c1.imag() * e.a1 + c2.imag() * e.a2);
    }
}

void midpoint_particle_step(const ModeSum &sum, Vec3 &x, Vec3 &b, double tol, int max_iterations) {
    Vec3 u, bgu;
    sum.evaluate(x, b, u, bgu);
    Vec3 x1 = x - u, b1 = b - bgu;
    const double scale_b = std::max(b.norm(), 1e-300);
    for (int it = 0; it < max_iterations; ++it) {
        sum.evaluate(0.5 * (x + x1), 0.5 * (b + b1), u, bgu);
        const Vec3 xn = x - u, bn = b - bgu;
        const double change = std::max((xn - x1).norm(), (bn - b1).norm() / scale_b);
        x1 = xn;
        b1 = bn;
        if (change <= tol) {
            x = x1;
            b = b1;
            return;
        }
    }
    throw NumericalError("midpoint particle step did not converge");
}

ParticleEnsemble simulate_finite_n(const std::vector<Vec3> &x0s, const std::vector<Vec3> &b0s,
                                   const FiniteNConfig &cfg, const ModeTable &modes) {
    validate(cfg);
    require(x0s.size() == b0s.size() && !x0s.empty(), "finite-n: need matching, nonempty particle lists");
    require(modes.dim() == 3, "finite-n: vector noise needs a 3D mode table");
    const std::size_t P = x0s.size();
    ParticleEnsemble out;
    out.x.resize(P * std::size_t(cfg.environments));
    out.b.resize(out.x.size());
    for (int env = 0; env < cfg.environments; ++env) {
        std::vector<Vec3> x = x0s, b = b0s;
        const RandomStream stream{cfg.seed, std::uint64_t(env)};
        for (int m = 0; m < cfg.steps(); ++m) {
            const ModeSum sum(modes.modes(), sample_increments(modes, cfg.dt, stream, std::uint64_t(m)));
#pragma omp parallel for schedule(dynamic, 4)
            for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(P); ++i) {
                midpoint_particle_step(sum, x[std::size_t(i)], b[std::size_t(i)], cfg.tolerance, cfg.max_iterations);
            }
        }
        for (std::size_t i = 0; i < P; ++i) {
            out.x[std::size_t(env) * P + i] = wrap(x[i]);
            out.b[std::size_t(env) * P + i] = b[i];
        }
    }
    out.t = cfg.steps() * cfg.dt;
    return out;
}

ParticleEnsemble simulate_finite_n(const std::vector<Vec3> &x0s, const std::vector<Vec3> &b0s,
                                   const FiniteNConfig &cfg) {
    validate(cfg);
    return simulate_finite_n(x0s, b0s, cfg, ModeTable::vector(cfg.n, cfg.chi));
}

EmpiricalLaw empirical_law(const ParticleEnsemble &ensemble, const BinBox &box) {
    validate(box);
    require(!ensemble.b.empty(), "empirical_law: empty ensemble");
    EmpiricalLaw law;
    law.hist = empty_histogram(box);
    law.samples = ensemble.b.size();
    const double w = 1.0 / double(law.samples);
    for (const auto &v : ensemble.b) add_sample(law.hist, v, w);
    law.std_error.resize(law.hist.weights.size());
    for (std::size_t i = 0; i < law.std_error.size(); ++i) {
        const double p = law.hist.weights[i];
        law.std_error[i] = std::sqrt(p * (1.0 - p) / double(law.samples));
    }
    return law;
}

double total_variation(const EmpiricalLaw &law, const BGridDensity &rho) {
    const auto &box = law.hist.box;
    const double hi = rho.grid.lo + rho.grid.cells * rho.grid.h;
    require(box.value_dim == 3, "total_variation: the density lives in R^3");
    require(std::abs(box.lo - rho.grid.lo) < 1e-12 && std::abs(box.hi - hi) < 1e-12,
            "total_variation: bins and density cover different boxes");
    require(rho.grid.cells % box.bins_per_axis == 0, "total_variation: bins must coarsen the density grid");
    const auto q = rho.coarsen(box.bins_per_axis);
    double mass = 0.0;
    for (double v : q) mass += v;
    require(mass > 0.0, "total_variation: density has no mass");
    double tv = law.hist.overflow;
    for (std::size_t i = 0; i < q.size(); ++i) tv += std::abs(law.hist.weights[i] - q[i] / mass);
    return 0.5 * tv;
}

HitFraction wilson_interval(std::size_t hits, std::size_t paths) {
    require(paths > 0, "wilson_interval: no paths");
    const double z = 1.959963984540054;
    const double n = double(paths), p = double(hits) / n;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    return {p, hits == 0 ? 0.0 : std::max(center - half, 0.0), hits == paths ? 1.0 : std::min(center + half, 1.0), hits,
            paths};
}

HitFraction support_probe(const Vec3 &b0, const Vec3 &b_star, double eps, const SdeConfig &cfg) {
    require(eps > 0.0, "support_probe: eps must be positive");
    const auto e = simulate_limit_sde(b0, cfg);
    std::size_t hits = 0;
    for (const auto &v : e.b) hits += (v - b_star).norm() <= eps ? 1 : 0;
    return wilson_interval(hits, e.b.size());
}

double large_values_fraction(const GridValues &field, const Vec3 &x0, double r, double R, std::size_t min_points) {
    require(field.grid != nullptr, "large_values_fraction: no grid");
    require(r > 0.0 && R >= 0.0, "large_values_fraction: need r > 0 and R >= 0");
    const auto &g = *field.grid;
    std::size_t inside = 0, large = 0;
    for (std::size_t p = 0; p < g.real_size(); ++p) {
        if (torus_distance(g.point(p), x0, g.dim()) >= r) continue;
        ++inside;
        if (field.at(p).norm() >= R) ++large;
    }
    require(inside >= min_points, "large_values_fraction: ball resolved by " + std::to_string(inside) +
                                      " grid points, need " + std::to_string(min_points));
    return double(large) / double(inside);
}

std::vector<Vec3> halton_points(std::size_t count) {
    std::vector<Vec3> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = kTwoPi * Vec3(radical_inverse(i + 1, 2), radical_inverse(i + 1, 3), radical_inverse(i + 1, 5));
    }
    return out;
}

}  // namespace kraichnan
