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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csiforge
{
    enum class ChannelType : std::uint8_t
    {
        UMi = 0,
        UMa = 1,
        RMa = 2,
    };

    std::string_view to_string(ChannelType t);
    ChannelType channel_type_from_string(std::string_view s);

    /// One simulation setting: a row of the configuration table plus derived constants.
    ///
    /// Pilot symbols are 1-based symbol numbers within the 14-symbol slot. Subcarriers,
    /// groups and antennas are 0-based everywhere in the code.
    struct SimConfig
    {
        ChannelType channel_type = ChannelType::UMi;
        double carrier_hz = 2.6e9;
        double subcarrier_spacing_hz = 15e3;
        double snr_db = 20.0;
        double speed_kmh = 3.0;
        int n_tx = 4;
        int n_rx = 2;
        int n_groups = 100;  // B
        int group_size = 12; // M
        std::vector<int> pilot_symbols{2, 5, 8, 11};
        int n_symbols = 14; // L
        std::uint64_t seed = 0;

        // Correlation coefficient between receive antennas of the noise; 0 gives C_n = sigma^2 I.
        double noise_rho = 0.0;

        int n_subcarriers() const { return n_groups * group_size; }
        int n_zero() const { return group_size - n_tx; }
        int n_pilot_symbols() const { return static_cast<int>(pilot_symbols.size()); }

        /// OFDM symbol duration including the normal cyclic prefix (slot of 14 symbols lasts 1 ms / 2^mu).
        double symbol_duration() const;

        /// Pilot power P for unit noise variance.
        double pilot_power() const;

        /// Maximum Doppler frequency v f_c / c.
        double max_doppler_hz() const;

        /// Two-sided width w of the rectangular Doppler spectrum.
        double doppler_width_hz() const { return 2.0 * max_doppler_hz(); }

        /// Throws std::invalid_argument when a field is out of range.
        void validate() const;

        /// Stable 64-bit identity of the setting (seed and SNR excluded).
        std::uint64_t id() const;

        bool operator==(const SimConfig &) const = default;
    };

    /// The configuration universe the dataset samples from.
    namespace universe
    {
        struct CarrierOption
        {
            double carrier_hz;
            double subcarrier_spacing_hz;
        };
        struct AntennaOption
        {
            int n_tx;
            int n_rx;
        };

        inline constexpr std::array<ChannelType, 3> channel_types{ChannelType::UMi, ChannelType::UMa, ChannelType::RMa};
        inline constexpr std::array<CarrierOption, 2> carriers{{{2.6e9, 15e3}, {3.5e9, 30e3}}};
        inline constexpr std::array<double, 5> speeds_kmh{3, 10, 30, 60, 90};
        inline constexpr std::array<AntennaOption, 6> antennas{{{4, 1}, {4, 2}, {4, 4}, {8, 1}, {8, 2}, {8, 4}}};
        inline constexpr std::array<int, 4> group_counts{25, 50, 75, 100};
        inline constexpr std::array<int, 3> group_sizes{12, 24, 48};
        inline const std::array<std::vector<int>, 4> pilot_sets{
            std::vector<int>{2, 8}, std::vector<int>{2, 6, 10}, std::vector<int>{4, 8, 12}, std::vector<int>{2, 5, 8, 11}};
        inline constexpr double snr_min_db = 0.0;
        inline constexpr double snr_max_db = 30.0;

        /// Canonical text of the universe, hashed into dataset manifests.
        std::string describe();
    } // namespace universe

    struct ConfigDraw
    {
        SimConfig config;
        int rejections = 0;
    };

    /// Draws configuration `index` of the stream rooted at `master_seed`, rejecting
    /// combinations without a zero-pilot subcarrier (M - N_T < 1).
    ConfigDraw draw_config(std::uint64_t master_seed, std::uint64_t index);

    inline SimConfig sample_config(std::uint64_t master_seed, std::uint64_t index)
    {
        return draw_config(master_seed, index).config;
    }
} // namespace csiforge
