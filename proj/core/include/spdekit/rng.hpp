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
#pragma once

#include <array>
#include <cstdint>

namespace spdekit {

// Philox4x32, 10 rounds. Counter-based: every (counter, key) pair maps to an
// independent 128-bit block, so parallel Monte-Carlo draws need no shared
// state and results are independent of scheduling order.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Identifies one logical draw site. Layout of the philox counter:
//   c0 = mode index, c1 = step index, c2 = realization, c3 = (stream << 8) | block.
// `stream` separates purposes (e.g. independent noise per scheme); `block`
// enumerates successive 128-bit blocks at the same site.
struct DrawKey {
    std::uint64_t seed = 0;
    std::uint32_t realization = 0;
    std::uint32_t step = 0;
    std::uint32_t mode = 0;
    std::uint32_t stream = 0;
};

// Two independent standard normals via Box-Muller from one philox block.
std::array<double, 2> normal_pair(const DrawKey& k, std::uint32_t block);

// Uniform in (0,1), one philox block per call (used sparingly, e.g. seeds).
double uniform01(const DrawKey& k, std::uint32_t block);

}  // namespace spdekit
