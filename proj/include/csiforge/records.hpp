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

#include <array>
#include <cstdint>

namespace csiforge
{
    /// Per-slot feature bundle reported by the receiver pipeline.
    ///
    /// Matrices are kept in single precision, which is what shards store, so a record
    /// survives a write/read cycle unchanged.
    struct FeatureRecord
    {
        ChannelType channel_type = ChannelType::UMi;
        std::uint32_t n_subcarriers = 0; // K
        std::uint64_t config_id = 0;
        std::uint16_t slot_index = 0;
        CMatrixF noise_covariance;  // C_n hat [N_R, N_R]
        CMatrixF freq_correlation;  // R_f,robust [B, B]
        CMatrixF time_covariance;   // C_time hat [|S|, |S|]
        CMatrixF time_correlation;  // R_time hat [|S|, |S|]
        double delay_center_s = 0.0;  // mu hat
        double delay_length_s = 0.0;  // l hat
        double doppler_width_hz = 0.0; // w hat
        CMatrixF precoder;          // W hat [N_T, R hat]
        std::uint8_t rank = 1;      // R hat
        double spectral_efficiency = 0.0; // G hat

        bool operator==(const FeatureRecord &) const = default;
    };

    inline constexpr int kSequenceLength = 5;

    struct SequenceRecord
    {
        std::uint64_t run_id = 0;
        std::uint16_t start_slot = 0;
        std::array<FeatureRecord, kSequenceLength> records;

        bool operator==(const SequenceRecord &) const = default;
    };

    /// Ground truth of one sequence, kept out of the model-visible records.
    struct GenieRecord
    {
        std::uint64_t run_id = 0;
        std::uint16_t start_slot = 0;
        double delay_center_s = 0.0;
        double delay_length_s = 0.0;
        double doppler_width_hz = 0.0;
        double snr_db = 0.0;
        double delay_bin_s = 0.0;
        std::array<double, kSequenceLength> raw_mse{};      // |h_tilde / sqrt(P hat) - h|^2 per entry
        std::array<double, kSequenceLength> denoised_mse{}; // |H hat - h|^2 per entry

        bool operator==(const GenieRecord &) const = default;
    };
} // namespace csiforge
