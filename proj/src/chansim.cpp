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

#include "csiforge/chansim.hpp"
#include "csiforge/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace csiforge
{
    DelayPreset delay_preset(ChannelType t)
    {
        switch (t)
        {
        case ChannelType::UMi:
            return {50e-9, 300e-9};
        case ChannelType::UMa:
            return {100e-9, 600e-9};
        case ChannelType::RMa:
            return {30e-9, 150e-9};
        }
        throw std::invalid_argument("Unknown channel type.");
    }

    double ChannelRealization::symbol_time(int slot, int symbol) const
    {
        return (static_cast<double>(slot) * n_symbols_ + (symbol - 1)) * symbol_duration_;
    }

    cd ChannelRealization::tap_gain(int rx, int tx, int tap, double t) const
    {
        const std::size_t base = ((static_cast<std::size_t>(rx) * n_tx_ + tx) * n_taps() + tap) * n_sinusoids_;
        cd g = 0.0;
        for (int s = 0; s < n_sinusoids_; ++s)
            g += std::polar(1.0, kTwoPi * frequencies_[base + s] * t + phases_[base + s]);
        return g * tap_scale_;
    }

    cd ChannelRealization::response(int k, int symbol, int slot, int rx, int tx) const
    {
        if (slot < 0 || slot >= n_slots_)
            throw std::out_of_range("Slot index out of range.");
        const double t = symbol_time(slot, symbol);
        cd h = 0.0;
        for (int p = 0; p < n_taps(); ++p)
            h += tap_gain(rx, tx, p, t) * std::polar(1.0, -kTwoPi * k * subcarrier_spacing_ * tap_delays_[p]);
        return h;
    }

    CTensor<4> ChannelRealization::tap_gains(int slot, const std::vector<int> &symbols) const
    {
        if (slot < 0 || slot >= n_slots_)
            throw std::out_of_range("Slot index out of range.");
        const int n_sym = static_cast<int>(symbols.size());
        CTensor<4> g(n_rx_, n_tx_, n_taps(), n_sym);
        for (int i = 0; i < n_rx_; ++i)
            for (int j = 0; j < n_tx_; ++j)
                for (int p = 0; p < n_taps(); ++p)
                    for (int l = 0; l < n_sym; ++l)
                        g(i, j, p, l) = tap_gain(i, j, p, symbol_time(slot, symbols[l]));
        return g;
    }

    CTensor<4> ChannelRealization::pilot_response(int slot) const
    {
        const int n_sym = static_cast<int>(pilot_symbols_.size());
        const CTensor<4> g = tap_gains(slot, pilot_symbols_);
        CTensor<4> h(n_tx_, n_groups_, n_sym, n_rx_);
        h.setZero();

        for (int j = 0; j < n_tx_; ++j)
            for (int p = 0; p < n_taps(); ++p)
            {
                // Phase on subcarrier M m + j, stepped along m.
                const double tau = tap_delays_[p];
                const cd step = std::polar(1.0, -kTwoPi * group_size_ * subcarrier_spacing_ * tau);
                cd phase = std::polar(1.0, -kTwoPi * j * subcarrier_spacing_ * tau);
                for (int m = 0; m < n_groups_; ++m)
                {
                    for (int l = 0; l < n_sym; ++l)
                        for (int i = 0; i < n_rx_; ++i)
                            h(j, m, l, i) += g(i, j, p, l) * phase;
                    phase *= step;
                }
            }
        return h;
    }

    ChannelRealization generate_channel(const SimConfig &cfg, int n_slots, std::uint64_t rng_seed,
                                        const ChannelOptions &options)
    {
        if (n_slots <= 0)
            throw std::invalid_argument("Number of slots must be positive.");
        if (options.n_taps < 1 || options.n_sinusoids < 1)
            throw std::invalid_argument("Tap and sinusoid counts must be positive.");

        Rng rng(substream(rng_seed, Stream::channel));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        ChannelRealization ch;
        ch.n_slots_ = n_slots;
        ch.n_rx_ = cfg.n_rx;
        ch.n_tx_ = cfg.n_tx;
        ch.n_sinusoids_ = options.n_sinusoids;
        ch.n_symbols_ = cfg.n_symbols;
        ch.n_groups_ = cfg.n_groups;
        ch.group_size_ = cfg.group_size;
        ch.symbol_duration_ = cfg.symbol_duration();
        ch.subcarrier_spacing_ = cfg.subcarrier_spacing_hz;
        ch.pilot_symbols_ = cfg.pilot_symbols;

        const auto preset = delay_preset(cfg.channel_type);
        const double len = options.length_s ? *options.length_s
                                            : preset.min_len_s + (preset.max_len_s - preset.min_len_s) * unit(rng);
        // Center drawn so the window stays inside half the unambiguous delay range of the comb.
        const double mu_max = std::max(0.0, 1.0 / (2.0 * cfg.group_size * cfg.subcarrier_spacing_hz) - len / 2.0);
        const double mu = options.center_s ? *options.center_s : mu_max * unit(rng);
        const double w = options.doppler_width_hz ? *options.doppler_width_hz : cfg.doppler_width_hz();
        ch.genie_mu_ = mu;
        ch.genie_len_ = len;
        ch.genie_w_ = w;

        ch.tap_delays_.resize(options.n_taps);
        for (auto &tau : ch.tap_delays_)
            tau = mu - len / 2.0 + len * unit(rng);

        ch.tap_scale_ = 1.0 / std::sqrt(static_cast<double>(options.n_taps) * options.n_sinusoids);
        const std::size_t n_params =
            static_cast<std::size_t>(cfg.n_rx) * cfg.n_tx * options.n_taps * options.n_sinusoids;
        ch.frequencies_.resize(n_params);
        ch.phases_.resize(n_params);
        for (std::size_t s = 0; s < n_params; ++s)
        {
            ch.frequencies_[s] = w * (unit(rng) - 0.5);
            ch.phases_[s] = kTwoPi * unit(rng);
        }
        return ch;
    }

    LinkBudget LinkBudget::from_config(const SimConfig &cfg)
    {
        return {cfg.pilot_power(), 1.0, cfg.noise_rho};
    }

    CMatrix LinkBudget::noise_covariance(int n_rx) const
    {
        CMatrix c = CMatrix::Constant(n_rx, n_rx, cd(noise_rho * noise_variance, 0.0));
        c.diagonal().setConstant(noise_variance);
        return c;
    }

    int zero_subcarrier(const SimConfig &cfg, int k)
    {
        const int nz = cfg.n_zero();
        return cfg.group_size * (k / nz) + cfg.n_tx + k % nz;
    }

    PilotObservation transmit_pilots(const SimConfig &cfg, const ChannelRealization &chan, int slot,
                                     std::uint64_t rng_seed)
    {
        return transmit_pilots(cfg, chan, slot, rng_seed, LinkBudget::from_config(cfg));
    }

    PilotObservation transmit_pilots(const SimConfig &cfg, const ChannelRealization &chan, int slot,
                                     std::uint64_t rng_seed, const LinkBudget &budget)
    {
        if (slot < 0 || slot >= chan.n_slots())
            throw std::out_of_range("Slot " + std::to_string(slot) + " outside the channel's " +
                                    std::to_string(chan.n_slots()) + " slots.");
        if (budget.pilot_power < 0.0 || budget.noise_variance < 0.0)
            throw std::invalid_argument("Pilot power and noise variance cannot be negative.");

        const int n_rx = cfg.n_rx, n_tx = cfg.n_tx, n_grp = cfg.n_groups, n_sym = cfg.n_pilot_symbols();
        const int n_noise = n_grp * cfg.n_zero();

        // z = L w with L the Cholesky factor of C_n, w ~ CN(0, I).
        CMatrix chol = CMatrix::Zero(n_rx, n_rx);
        if (budget.noise_variance > 0.0)
            chol = budget.noise_covariance(n_rx).llt().matrixL();

        Rng rng(substream(rng_seed, Stream::pilots, {static_cast<std::uint64_t>(slot)}));
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
        CVector w(n_rx);
        auto draw_noise = [&]() -> CVector {
            for (int i = 0; i < n_rx; ++i)
            {
                const double re = gauss(rng);
                const double im = gauss(rng);
                w(i) = cd(re, im);
            }
            return chol * w;
        };

        PilotObservation obs;
        obs.config = cfg;
        obs.slot_index = slot;

        const double amp = std::sqrt(budget.pilot_power);
        obs.h_tilde = chan.pilot_response(slot) * cd(amp, 0.0);
        for (int j = 0; j < n_tx; ++j)
            for (int m = 0; m < n_grp; ++m)
                for (int l = 0; l < n_sym; ++l)
                {
                    const CVector z = draw_noise();
                    for (int i = 0; i < n_rx; ++i)
                        obs.h_tilde(j, m, l, i) += z(i);
                }

        obs.z_tilde = CTensor<3>(n_noise, n_sym, n_rx);
        for (int k = 0; k < n_noise; ++k)
            for (int l = 0; l < n_sym; ++l)
            {
                const CVector z = draw_noise();
                for (int i = 0; i < n_rx; ++i)
                    obs.z_tilde(k, l, i) = z(i);
            }
        return obs;
    }
} // namespace csiforge
