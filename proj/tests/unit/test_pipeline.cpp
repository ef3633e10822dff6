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

#include "support.hpp"

#include "csiforge/chansim.hpp"
#include "csiforge/pipeline.hpp"

#include "doctest.h"

using namespace csiforge;
using namespace csiforge::test;

TEST_SUITE("pipeline")
{
    TEST_CASE("record dimensions follow the link")
    {
        SimConfig cfg = reference_config(ChannelType::UMa, 20.0);
        const auto chan = generate_channel(cfg, 2, 11);
        const auto obs = transmit_pilots(cfg, chan, 1, 12);
        const auto res = run_pipeline(obs);
        const auto &r = res.record;
        CHECK(r.channel_type == ChannelType::UMa);
        CHECK(r.n_subcarriers == 1200);
        CHECK(r.config_id == cfg.id());
        CHECK(r.slot_index == 1);
        CHECK(r.noise_covariance.rows() == 2);
        CHECK(r.freq_correlation.rows() == 100);
        CHECK(r.freq_correlation.cols() == 100);
        CHECK(r.time_covariance.rows() == 4);
        CHECK(r.time_correlation.rows() == 4);
        CHECK(r.precoder.rows() == 4);
        CHECK(r.precoder.cols() == r.rank);
        CHECK(r.rank >= 1);
        CHECK(r.rank <= 2);
        CHECK(r.spectral_efficiency > 0.0);
        CHECK(r.doppler_width_hz > 0.0);
        CHECK(r.delay_length_s > 0.0);
        // Correlation matrices carry a unit diagonal.
        for (int i = 0; i < 100; ++i)
            CHECK(std::abs(r.freq_correlation(i, i) - cf(1.0f)) < 1e-4f);
    }

    TEST_CASE("same seeds give the same record")
    {
        const SimConfig cfg = reference_config(ChannelType::RMa, 10.0);
        const auto a = run_pipeline(transmit_pilots(cfg, generate_channel(cfg, 1, 3), 0, 4)).record;
        const auto b = run_pipeline(transmit_pilots(cfg, generate_channel(cfg, 1, 3), 0, 4)).record;
        CHECK(a == b);
        const auto c = run_pipeline(transmit_pilots(cfg, generate_channel(cfg, 1, 3), 0, 5)).record;
        CHECK_FALSE(a == c);
    }

    TEST_CASE("single receive antenna reports rank one")
    {
        SimConfig cfg = reference_config(ChannelType::UMi, 25.0);
        cfg.n_rx = 1;
        const auto res = run_pipeline(transmit_pilots(cfg, generate_channel(cfg, 1, 21), 0, 22));
        CHECK(res.record.rank == 1);
        CHECK(res.record.precoder.cols() == 1);
        CHECK(res.record.precoder.norm() == doctest::Approx(1.0).epsilon(1e-5));
    }

    TEST_CASE("denoised estimate beats the raw one")
    {
        // Mid-range SNR is left out: there the support is often empty and the 1-bin fallback over-smooths.
        for (double snr : {0.0, 20.0})
        {
            CAPTURE(snr);
            const SimConfig cfg = reference_config(ChannelType::UMa, snr);
            int wins = 0;
            for (int t = 0; t < 10; ++t)
            {
                const auto chan = generate_channel(cfg, 1, 100 + t);
                const auto obs = transmit_pilots(cfg, chan, 0, 200 + t);
                const auto res = run_pipeline(obs);
                const auto truth = chan.pilot_response(0);
                const double raw = channel_mse(raw_channel_estimate(obs.h_tilde, res.power.value), truth);
                wins += channel_mse(res.channel.h_hat, truth) < raw;
            }
            CHECK(wins >= 9);
        }
    }

    TEST_CASE("shape mismatch")
    {
        const SimConfig cfg = reference_config();
        auto obs = transmit_pilots(cfg, generate_channel(cfg, 1, 1), 0, 2);
        obs.config.n_tx = 2;
        CHECK_THROWS_AS(run_pipeline(obs), std::invalid_argument);
        CHECK_THROWS_AS(channel_mse(CTensor<4>(1, 1, 1, 1), CTensor<4>(1, 1, 1, 2)), std::invalid_argument);
    }
}
