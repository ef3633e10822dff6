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

#include "csiforge/chansim.hpp"
#include "csiforge/estimators.hpp"
#include "csiforge/precoding.hpp"
#include "csiforge/records.hpp"

#include <vector>

namespace csiforge
{
    struct PipelineOptions
    {
        DelayOptions delay;
        std::vector<double> doppler_grid = default_doppler_grid();
    };

    /// Everything the receiver computes for one slot.
    struct PipelineResult
    {
        FeatureRecord record;
        NoiseEstimate noise;
        SignalPower power;
        DelayProfileEstimate delay;
        DopplerEstimate doppler;
        ChannelEstimate channel;
        PrecoderReport precoder;
    };

    /// Runs the estimators in dependency order on one pilot observation and assembles the
    /// feature record. Per-antenna delay/Doppler estimates are averaged over Rx antennas.
    PipelineResult run_pipeline(const PilotObservation &obs, const PipelineOptions &options = {});

    /// Mean squared error per entry between an estimate [B, |S|, N_R, N_T] and the true pilot
    /// channel [N_T, B, |S|, N_R].
    double channel_mse(const CTensor<4> &estimate, const CTensor<4> &truth);

    /// Raw pilot estimate h_tilde / sqrt(P hat), laid out like ChannelEstimate::h_hat.
    CTensor<4> raw_channel_estimate(const CTensor<4> &h_tilde, double p_hat);
} // namespace csiforge
