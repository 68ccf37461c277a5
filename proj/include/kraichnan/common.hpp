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

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kraichnan {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Integer lattice vector; unused trailing coordinates are zero when d < 3.
using IVec = std::array<int, 3>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Invalid parameters or configuration (maps to CLI status 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A caller broke a precondition that is not a plain configuration issue.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A numerical procedure failed to reach its target (e.g. fixed-point iteration).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Van der Corput radical inverse of i in the given base.
inline double radical_inverse(std::uint64_t i, int base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * double(i % std::uint64_t(base));
        i /= std::uint64_t(base);
    }
    return r;
}

/// Monte Carlo mean with its standard error.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

inline int norm2(const IVec &k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

inline IVec negate(const IVec &k) { return {-k[0], -k[1], -k[2]}; }

inline Vec3 to_vec3(const IVec &k) { return {double(k[0]), double(k[1]), double(k[2])}; }

/// Lexicographically positive: first nonzero coordinate > 0. Defines Gamma_+.
inline bool lex_positive(const IVec &k) {
    for (int c : k) {
        if (c != 0) return c > 0;
    }
    return false;
}

/// Periodic distance between two points of [0, 2pi)^d (d <= 3, unused coords zero).
inline double torus_distance(const Vec3 &x, const Vec3 &y, int dim) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
        double d = std::fmod(std::abs(x[a] - y[a]), kTwoPi);
        d = std::min(d, kTwoPi - d);
        s += d * d;
    }
    return std::sqrt(s);
}

inline void require(bool cond, const std::string &msg) {
    if (!cond) throw ConfigError(msg);
}

}  // namespace kraichnan
