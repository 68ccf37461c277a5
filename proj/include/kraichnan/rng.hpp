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

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace kraichnan {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Stateless: the output is a pure function of (key, counter).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Counter single_round(const Counter &c, const Key &k) {
        const std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
        const std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
        return {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
                std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
    }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Identifies one reproducible random stream: (global seed, stream id).
/// Draws are addressed by (slot, step); the same address always yields the same numbers.
struct RandomStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    /// Two independent standard normals for address (slot, step).
    [[nodiscard]] std::pair<double, double> normal_pair(std::uint64_t slot, std::uint64_t step) const {
        const auto u = raw(slot, step);
        return box_muller(u[0], u[1], u[2], u[3]);
    }

    /// Uniform in (0, 1) for address (slot, step); four per address, selected by lane.
    [[nodiscard]] double uniform(std::uint64_t slot, std::uint64_t step, int lane = 0) const {
        const auto u = raw(slot, step);
        return to_open_unit(u[lane & 3]);
    }

    [[nodiscard]] Philox4x32::Counter raw(std::uint64_t slot, std::uint64_t step) const {
        const std::uint64_t k = splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
        const Philox4x32::Key key{std::uint32_t(k), std::uint32_t(k >> 32)};
        const Philox4x32::Counter ctr{std::uint32_t(step), std::uint32_t(step >> 32), std::uint32_t(slot),
                                      std::uint32_t(slot >> 32)};
        return Philox4x32::generate(ctr, key);
    }

private:
    static double to_open_unit(std::uint32_t a) { return (double(a) + 0.5) * 0x1p-32; }

    static std::pair<double, double> box_muller(std::uint32_t a, std::uint32_t b, std::uint32_t c,
                                                std::uint32_t d) {
        // 53-bit uniforms from two 32-bit words each
        const double u1 = (double((std::uint64_t(a) << 21) ^ (b >> 11)) + 0.5) * 0x1p-53;
        const double u2 = (double((std::uint64_t(c) << 21) ^ (d >> 11)) + 0.5) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }
};

}  // namespace kraichnan
