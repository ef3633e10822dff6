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

#include "csiforge/config.hpp"
#include "csiforge/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace csiforge
{
    /// Delay-window presets per channel type: (min, max) delay-profile length in seconds.
    struct DelayPreset
    {
        double min_len_s;
        double max_len_s;
    };
    DelayPreset delay_preset(ChannelType t);

    /// Knobs of the synthetic tap model. Overrides pin the genie parameters.
    struct ChannelOptions
    {
        int n_taps = 32;
        int n_sinusoids = 64;
        std::optional<double> center_s;       // mu*
        std::optional<double> length_s;       // l*
        std::optional<double> doppler_width_hz; // w*
    };

    /// A wide-sense stationary MIMO-OFDM channel built from discrete taps.
    ///
    /// Tap delays are shared across antenna pairs and drawn uniformly inside the rectangular
    /// delay window; every (rx, tx, tap) gain is an independent sum-of-sinusoids process with
    /// frequencies uniform over the rectangular Doppler band, so its autocorrelation is
    /// sinc(w* dt). The realization is kept in parametric form and evaluated on demand.
    class ChannelRealization
    {
      public:
        ChannelRealization() = default;

        int n_slots() const { return n_slots_; }
        int n_rx() const { return n_rx_; }
        int n_tx() const { return n_tx_; }
        int n_taps() const { return static_cast<int>(tap_delays_.size()); }
        int n_sinusoids() const { return n_sinusoids_; }

        double genie_mu() const { return genie_mu_; }
        double genie_len() const { return genie_len_; }
        double genie_w() const { return genie_w_; }
        const std::vector<double> &tap_delays() const { return tap_delays_; }

        /// Time of 1-based symbol `symbol` in slot `slot`; slots are contiguous.
        double symbol_time(int slot, int symbol) const;

        /// Complex gain of one tap at time t (seconds).
        cd tap_gain(int rx, int tx, int tap, double t) const;

        /// H[k, l, n] entry (rx, tx) for 0-based subcarrier k and 1-based symbol l.
        cd response(int k, int symbol, int slot, int rx, int tx) const;

        /// Gains of every tap at the given symbols of a slot, indexed [rx, tx, tap, symbol].
        CTensor<4> tap_gains(int slot, const std::vector<int> &symbols) const;

        /// Channel at the comb pilots: h_j[M m + j, l] as a tensor [N_T, B, |S|, N_R].
        CTensor<4> pilot_response(int slot) const;

      private:
        friend ChannelRealization generate_channel(const SimConfig &, int, std::uint64_t, const ChannelOptions &);

        int n_slots_ = 0;
        int n_rx_ = 0;
        int n_tx_ = 0;
        int n_sinusoids_ = 0;
        int n_symbols_ = 14;
        int n_groups_ = 0;
        int group_size_ = 0;
        double symbol_duration_ = 0.0;
        double subcarrier_spacing_ = 0.0;
        std::vector<int> pilot_symbols_;
        double genie_mu_ = 0.0;
        double genie_len_ = 0.0;
        double genie_w_ = 0.0;
        double tap_scale_ = 0.0;
        std::vector<double> tap_delays_;
        // Per (rx, tx, tap, sinusoid): Doppler frequency in Hz and initial phase.
        std::vector<double> frequencies_;
        std::vector<double> phases_;
    };

    /// Builds a channel realization spanning `n_slots` slots. Throws on n_slots <= 0.
    ChannelRealization generate_channel(const SimConfig &cfg, int n_slots, std::uint64_t rng_seed,
                                        const ChannelOptions &options = {});

    /// Pilot power and noise covariance parameters of a transmission.
    struct LinkBudget
    {
        double pilot_power = 1.0;
        double noise_variance = 1.0;
        double noise_rho = 0.0;

        /// P = 10^(snr/10) with unit noise variance.
        static LinkBudget from_config(const SimConfig &cfg);

        /// sigma^2 on the diagonal, rho sigma^2 off it.
        CMatrix noise_covariance(int n_rx) const;
    };

    /// Received comb-type pilot responses and the noise-only samples of one slot.
    struct PilotObservation
    {
        CTensor<4> h_tilde; // [N_T, B, |S|, N_R]
        CTensor<3> z_tilde; // [B N_Z, |S|, N_R]
        SimConfig config;
        int slot_index = 0;
    };

    /// 0-based subcarrier carrying noise sample k (0-based) of the zero-pilot comb.
    int zero_subcarrier(const SimConfig &cfg, int k);

    PilotObservation transmit_pilots(const SimConfig &cfg, const ChannelRealization &chan, int slot,
                                     std::uint64_t rng_seed);
    PilotObservation transmit_pilots(const SimConfig &cfg, const ChannelRealization &chan, int slot,
                                     std::uint64_t rng_seed, const LinkBudget &budget);
} // namespace csiforge
