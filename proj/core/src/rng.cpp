/*
   Copyright 2026 The spdekit Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include "spdekit/rng.hpp"

#include <cmath>
#include <numbers>

namespace spdekit {

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;  // golden ratio
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;  // sqrt(3) - 1
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline std::uint32_t mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    return static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, hi1;
        const std::uint32_t lo0 = mulhilo(kPhiloxM4x32A, ctr[0], hi0);
        const std::uint32_t lo1 = mulhilo(kPhiloxM4x32B, ctr[2], hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW32A;
        key[1] += kPhiloxW32B;
    }
    return ctr;
}

namespace {

inline std::array<std::uint32_t, 4> block_at(const DrawKey& k, std::uint32_t block) {
    const std::array<std::uint32_t, 4> ctr = {k.mode, k.step, k.realization,
                                              (k.stream << 8) | (block & 0xFFu)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(k.seed),
                                              static_cast<std::uint32_t>(k.seed >> 32)};
    return philox4x32(ctr, key);
}

// 53-bit uniform in (0,1): never returns 0, safe under log().
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<double, 2> normal_pair(const DrawKey& k, std::uint32_t block) {
    const auto w = block_at(k, block);
    const double u1 = to_unit(w[0], w[1]);
    const double u2 = to_unit(w[2], w[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

double uniform01(const DrawKey& k, std::uint32_t block) {
    const auto w = block_at(k, block);
    return to_unit(w[0], w[1]);
}

}  // namespace spdekit
