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

#include "csiforge/pipeline.hpp"

#include <stdexcept>

namespace csiforge
{
    namespace
    {
        template <class Mats>
        CMatrix mean_of(const Mats &mats)
        {
            CMatrix acc = CMatrix::Zero(mats.front().rows(), mats.front().cols());
            for (const auto &m : mats)
                acc += m;
            return acc / static_cast<double>(mats.size());
        }
    } // namespace

    PipelineResult run_pipeline(const PilotObservation &obs, const PipelineOptions &options)
    {
        const SimConfig &cfg = obs.config;
        cfg.validate();
        if (obs.h_tilde.dimension(0) != cfg.n_tx || obs.h_tilde.dimension(1) != cfg.n_groups ||
            obs.h_tilde.dimension(2) != cfg.n_pilot_symbols() || obs.h_tilde.dimension(3) != cfg.n_rx)
            throw std::invalid_argument("Pilot observation shape does not match its configuration.");

        PipelineResult out;
        out.noise = estimate_noise_covariance(obs.z_tilde);
        out.power = estimate_signal_power(obs.h_tilde, out.noise);
        out.delay = estimate_delay_profile(obs.h_tilde, out.noise, cfg, options.delay);
        out.doppler = estimate_doppler(obs.h_tilde, out.noise, cfg, options.doppler_grid);
        out.channel = robust_channel_estimate(obs.h_tilde, out.noise, out.power.value, out.delay, out.doppler);

        const CMatrix cs = whitened_spatial_covariance(out.channel.h_hat, out.noise.covariance);
        std::vector<Codebook> codebooks;
        for (int r = 1; r <= std::min(cfg.n_rx, cfg.n_tx); ++r)
            codebooks.push_back(build_dft_codebook(cfg.n_tx, r));
        out.precoder = select_rank(cs, codebooks, static_cast<int>(codebooks.size()));

        std::vector<CMatrix> channels;
        channels.reserve(static_cast<std::size_t>(cfg.n_groups) * cfg.n_pilot_symbols());
        for (int m = 0; m < cfg.n_groups; ++m)
            for (int l = 0; l < cfg.n_pilot_symbols(); ++l)
                channels.push_back(out.channel.at(m, l));

        FeatureRecord &rec = out.record;
        rec.channel_type = cfg.channel_type;
        rec.n_subcarriers = static_cast<std::uint32_t>(cfg.n_subcarriers());
        rec.config_id = cfg.id();
        rec.slot_index = static_cast<std::uint16_t>(obs.slot_index);
        rec.noise_covariance = out.noise.covariance.cast<cf>();
        rec.freq_correlation = mean_of(out.delay.freq_correlation).cast<cf>();
        rec.time_covariance = mean_of(out.doppler.time_covariance).cast<cf>();
        rec.time_correlation = mean_of(out.doppler.time_correlation).cast<cf>();
        rec.delay_center_s = out.delay.mu_s.mean();
        rec.delay_length_s = out.delay.len_s.mean();
        rec.doppler_width_hz = out.doppler.w_hz.mean();
        rec.precoder = out.precoder.w.cast<cf>();
        rec.rank = static_cast<std::uint8_t>(out.precoder.rank);
        rec.spectral_efficiency =
            spectral_efficiency(channels, out.noise.covariance, out.power.value, out.precoder.w);
        return out;
    }

    CTensor<4> raw_channel_estimate(const CTensor<4> &h_tilde, double p_hat)
    {
        const auto n_tx = h_tilde.dimension(0), n_grp = h_tilde.dimension(1), n_sym = h_tilde.dimension(2),
                   n_rx = h_tilde.dimension(3);
        CTensor<4> out(n_grp, n_sym, n_rx, n_tx);
        const double inv = p_hat > 0.0 ? 1.0 / std::sqrt(p_hat) : 0.0;
        for (Eigen::Index j = 0; j < n_tx; ++j)
            for (Eigen::Index m = 0; m < n_grp; ++m)
                for (Eigen::Index l = 0; l < n_sym; ++l)
                    for (Eigen::Index i = 0; i < n_rx; ++i)
                        out(m, l, i, j) = h_tilde(j, m, l, i) * inv;
        return out;
    }

    double channel_mse(const CTensor<4> &estimate, const CTensor<4> &truth)
    {
        const auto n_tx = truth.dimension(0), n_grp = truth.dimension(1), n_sym = truth.dimension(2),
                   n_rx = truth.dimension(3);
        if (estimate.dimension(0) != n_grp || estimate.dimension(1) != n_sym || estimate.dimension(2) != n_rx ||
            estimate.dimension(3) != n_tx)
            throw std::invalid_argument("Estimate and truth shapes differ.");
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n_tx; ++j)
            for (Eigen::Index m = 0; m < n_grp; ++m)
                for (Eigen::Index l = 0; l < n_sym; ++l)
                    for (Eigen::Index i = 0; i < n_rx; ++i)
                        acc += std::norm(estimate(m, l, i, j) - truth(j, m, l, i));
        return acc / static_cast<double>(truth.size());
    }
} // namespace csiforge
