// SPDX-License-Identifier: Apache-2.0
//
// csi-forge: MIMO-OFDM CSI acquisition simulator and dataset toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace csiforge
{
    /// SplitMix64 finalizer. Used to derive independent seed substreams.
    constexpr std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    /// Deterministic 64-bit mix of a seed with any number of stream coordinates.
    constexpr std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords)
    {
        std::uint64_t h = splitmix64(seed);
        for (auto c : coords)
            h = splitmix64(h ^ splitmix64(c + 0x632BE59BD9B4E019ull));
        return h;
    }

    using Rng = std::mt19937_64;

    // Stream tags keep the substreams of one seed apart.
    enum class Stream : std::uint64_t
    {
        config = 1,
        run = 2,
        channel = 3,
        pilots = 4,
        snr = 5,
        split = 6,
        mask = 7,
    };

    inline std::uint64_t substream(std::uint64_t seed, Stream tag, std::initializer_list<std::uint64_t> coords = {})
    {
        std::uint64_t h = mix_seed(seed, {static_cast<std::uint64_t>(tag)});
        for (auto c : coords)
            h = mix_seed(h, {c});
        return h;
    }
} // namespace csiforge
