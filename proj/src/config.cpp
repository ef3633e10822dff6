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

#include "csiforge/config.hpp"
#include "csiforge/rng.hpp"
#include "csiforge/types.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace csiforge
{
    std::string_view to_string(ChannelType t)
    {
        switch (t)
        {
        case ChannelType::UMi:
            return "UMi";
        case ChannelType::UMa:
            return "UMa";
        case ChannelType::RMa:
            return "RMa";
        }
        return "?";
    }

    ChannelType channel_type_from_string(std::string_view s)
    {
        for (auto t : universe::channel_types)
            if (to_string(t) == s)
                return t;
        throw std::invalid_argument("Unknown channel type: " + std::string(s));
    }

    double SimConfig::symbol_duration() const
    {
        // 14 symbols per slot, slot duration 1 ms scaled by 15 kHz / f_sc.
        const double slot_s = 1e-3 * 15e3 / subcarrier_spacing_hz;
        return slot_s / 14.0;
    }

    double SimConfig::pilot_power() const { return std::pow(10.0, snr_db / 10.0); }

    double SimConfig::max_doppler_hz() const { return speed_kmh / 3.6 * carrier_hz / kSpeedOfLight; }

    void SimConfig::validate() const
    {
        if (n_tx < 1 || n_rx < 1)
            throw std::invalid_argument("Antenna counts must be positive.");
        if (n_groups < 1 || group_size < 1)
            throw std::invalid_argument("Subcarrier group count and size must be positive.");
        if (n_zero() < 1)
            throw std::invalid_argument("Group size must exceed the number of transmit antennas (N_Z >= 1).");
        if (n_symbols != 14)
            throw std::invalid_argument("A slot has 14 OFDM symbols.");
        if (pilot_symbols.size() < 2 || pilot_symbols.size() > 4)
            throw std::invalid_argument("Pilot symbol set must contain 2 to 4 symbols.");
        if (!std::is_sorted(pilot_symbols.begin(), pilot_symbols.end()) ||
            std::adjacent_find(pilot_symbols.begin(), pilot_symbols.end()) != pilot_symbols.end())
            throw std::invalid_argument("Pilot symbols must be strictly increasing.");
        if (pilot_symbols.front() < 1 || pilot_symbols.back() > n_symbols)
            throw std::invalid_argument("Pilot symbols must lie in [1, 14].");
        if (!(carrier_hz > 0.0) || !(subcarrier_spacing_hz > 0.0))
            throw std::invalid_argument("Carrier and subcarrier spacing must be positive.");
        if (!(speed_kmh >= 0.0))
            throw std::invalid_argument("Speed cannot be negative.");
        if (!(snr_db >= universe::snr_min_db && snr_db <= universe::snr_max_db))
            throw std::invalid_argument("SNR must lie in [0, 30] dB.");
        if (!(noise_rho > -1.0 && noise_rho < 1.0))
            throw std::invalid_argument("Noise correlation must lie in (-1, 1).");
    }

    std::uint64_t SimConfig::id() const
    {
        std::uint64_t h = mix_seed(0x43534644ull, {static_cast<std::uint64_t>(channel_type),
                                                   std::bit_cast<std::uint64_t>(carrier_hz),
                                                   std::bit_cast<std::uint64_t>(subcarrier_spacing_hz),
                                                   std::bit_cast<std::uint64_t>(speed_kmh),
                                                   static_cast<std::uint64_t>(n_tx),
                                                   static_cast<std::uint64_t>(n_rx),
                                                   static_cast<std::uint64_t>(n_groups),
                                                   static_cast<std::uint64_t>(group_size),
                                                   std::bit_cast<std::uint64_t>(noise_rho)});
        for (int s : pilot_symbols)
            h = mix_seed(h, {static_cast<std::uint64_t>(s)});
        return h;
    }

    std::string universe::describe()
    {
        std::ostringstream os;
        os << "channel_types=UMi,UMa,RMa;carriers=";
        for (auto c : carriers)
            os << c.carrier_hz << '/' << c.subcarrier_spacing_hz << ',';
        os << ";snr=" << snr_min_db << ".." << snr_max_db << ";speeds=";
        for (auto v : speeds_kmh)
            os << v << ',';
        os << ";antennas=";
        for (auto a : antennas)
            os << a.n_tx << 'x' << a.n_rx << ',';
        os << ";B=";
        for (auto b : group_counts)
            os << b << ',';
        os << ";M=";
        for (auto m : group_sizes)
            os << m << ',';
        os << ";S=";
        for (const auto &s : pilot_sets)
        {
            for (int l : s)
                os << l << ' ';
            os << ',';
        }
        return os.str();
    }

    namespace
    {
        template <class Container>
        const auto &pick(Rng &rng, const Container &c)
        {
            std::uniform_int_distribution<std::size_t> d(0, c.size() - 1);
            return c[d(rng)];
        }
    } // namespace

    ConfigDraw draw_config(std::uint64_t master_seed, std::uint64_t index)
    {
        Rng rng(substream(master_seed, Stream::config, {index}));
        ConfigDraw draw;
        for (;;)
        {
            SimConfig cfg;
            cfg.channel_type = pick(rng, universe::channel_types);
            const auto carrier = pick(rng, universe::carriers);
            cfg.carrier_hz = carrier.carrier_hz;
            cfg.subcarrier_spacing_hz = carrier.subcarrier_spacing_hz;
            cfg.speed_kmh = pick(rng, universe::speeds_kmh);
            const auto ant = pick(rng, universe::antennas);
            cfg.n_tx = ant.n_tx;
            cfg.n_rx = ant.n_rx;
            cfg.n_groups = pick(rng, universe::group_counts);
            cfg.group_size = pick(rng, universe::group_sizes);
            cfg.pilot_symbols = pick(rng, universe::pilot_sets);
            cfg.snr_db = std::uniform_real_distribution<double>(universe::snr_min_db, universe::snr_max_db)(rng);
            cfg.seed = rng();
            if (cfg.n_zero() >= 1)
            {
                draw.config = std::move(cfg);
                return draw;
            }
            ++draw.rejections;
        }
    }
} // namespace csiforge
