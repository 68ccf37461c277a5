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
#include "kraichnan/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace kraichnan {

/// A lattice wave index (k, j) with k != 0 and 1 <= j <= d-1.
struct WaveIndex {
    IVec k{};
    int j = 1;

    [[nodiscard]] bool in_positive_half() const { return lex_positive(k); }
    /// Stable identifier used to address the random stream of this mode.
    [[nodiscard]] std::uint64_t id() const;

    friend bool operator==(const WaveIndex &, const WaveIndex &) = default;
};

/// One Kraichnan mode sigma_{k,j}(x) = theta * a * exp(i k.x).
struct NoiseMode {
    WaveIndex index;
    Vec3 a = Vec3::Zero();
    double theta = 0.0;
};

/// Exact lattice sums over the shell n <= |k| <= 2n.
struct ShellSums {
    int n = 0;
    int d = 0;
    double c_n = 0.0;      ///< sum |k|^-d
    double eta_n = 0.0;    ///< sum |k|^-5 (meaningful for d = 3)
    double alpha_n = 0.0;  ///< sum |k|^-3 (meaningful for d = 3)
};

/// All lattice vectors with n^2 <= |k|^2 <= 4 n^2, in lexicographic order.
std::vector<IVec> shell_vectors(int n, int d);

/// Orthonormal completion {a_1..a_{d-1}} of k/|k|. Even in k by construction.
std::vector<Vec3> build_frame(const IVec &k, int d);

double theta_scalar(const IVec &k, int n, int d, double kappa_T);
double theta_vector(const IVec &k, int n, double chi);
ShellSums shell_sums(int n, int d);

/// Full (both half-spaces) list of noise modes on one shell with their coefficients.
class ModeTable {
public:
    /// Passive-scalar noise: theta = sqrt(d kappa_T / ((d-1) c_n)) |k|^{-d/2}.
    static ModeTable scalar(int d, int n, double kappa_T);
    /// Passive-vector noise (d = 3): theta = sqrt(chi) |k|^{-5/2}.
    static ModeTable vector(int n, double chi);
    /// Table with no active modes (every coefficient zero).
    static ModeTable empty(int d);

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] int shell() const { return n_; }
    [[nodiscard]] std::span<const NoiseMode> modes() const { return modes_; }
    [[nodiscard]] std::size_t size() const { return modes_.size(); }
    [[nodiscard]] int max_wavenumber() const;

    /// sum_{k,j} theta^2 a (x) a.
    [[nodiscard]] Mat3 isotropy_sum() const;
    /// sum_{k,j} theta^2 k (x) k; gives sum_{k,j} |B . grad sigma_{k,j}|^2 = B^T M B pointwise.
    [[nodiscard]] Mat3 wavevector_moment() const;

    /// Debug export, columns kx,ky,kz,j,theta.
    void write_csv(std::ostream &os) const;

private:
    int dim_ = 3;
    int n_ = 0;
    std::vector<NoiseMode> modes_;
};

/// Complex Brownian increments for one time step, aligned with a mode list.
struct NoiseRealization {
    double dt = 0.0;
    RandomStream stream;
    std::uint64_t step = 0;
    std::vector<Complex> increments;  ///< increments[i] belongs to modes[i]
};

/// Draws dW^{k,j} over [step*dt, (step+1)*dt]. Fresh N(0,dt)+iN(0,dt) draws for k in Gamma_+,
/// conjugates for Gamma_-. With substeps > 1 the increment is summed from finer increments
/// addressed at resolution dt/substeps, so coarse and fine runs share one Brownian path.
NoiseRealization sample_increments(std::span<const NoiseMode> modes, double dt, RandomStream stream,
                                   std::uint64_t step, int substeps = 1);

inline NoiseRealization sample_increments(const ModeTable &table, double dt, RandomStream stream,
                                          std::uint64_t step, int substeps = 1) {
    return sample_increments(table.modes(), dt, stream, step, substeps);
}

}  // namespace kraichnan
