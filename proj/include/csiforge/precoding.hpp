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

#include "csiforge/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace csiforge
{
    /// Candidate precoders of one rank.
    struct Codebook
    {
        int n_tx = 0;
        int rank = 0;
        std::vector<CMatrix> candidates;      // each N_T x R, unit Frobenius norm
        std::vector<std::vector<int>> columns; // DFT column indices per candidate

        std::string id() const { return "dft" + std::to_string(n_tx) + "r" + std::to_string(rank); }
    };

    /// All R-column subsets of the unitary N_T-point DFT matrix, scaled to unit Frobenius norm,
    /// in lexicographic order of the column tuples.
    Codebook build_dft_codebook(int n_tx, int rank);

    /// Mean over (m, l) of H^H C_n^{-1} H, for H hat [B, |S|, N_R, N_T].
    CMatrix whitened_spatial_covariance(const CTensor<4> &h_hat, const CMatrix &noise_covariance);

    /// log det(I_R + W^H C W).
    double precoder_score(const CMatrix &spatial_covariance, const CMatrix &w);

    /// Relative tolerance within which two scores are treated as tied. Ties keep the earlier entry.
    inline constexpr double kScoreTieTolerance = 1e-12;

    inline bool score_beats(double candidate, double incumbent)
    {
        return candidate > incumbent + kScoreTieTolerance * (1.0 + std::abs(incumbent));
    }

    struct PrecoderChoice
    {
        std::size_t index = 0;
        CMatrix w;
        double score = 0.0;
    };

    PrecoderChoice select_precoder(const CMatrix &spatial_covariance, const Codebook &codebook);

    struct PrecoderReport
    {
        CMatrix spatial_covariance;
        int rank = 1;
        CMatrix w;
        double score = 0.0;
        std::string codebook_id;
        std::vector<PrecoderChoice> per_rank; // entry R-1 holds the best rank-R precoder
    };

    /// Best precoder per rank R = 1..n_rx (codebooks[R-1] must have rank R), then the best rank.
    PrecoderReport select_rank(const CMatrix &spatial_covariance, std::span<const Codebook> codebooks, int n_rx);

    /// Mean over the given channel matrices of log det(C_n + P H W W^H H^H), natural log.
    double spectral_efficiency(std::span<const CMatrix> channels, const CMatrix &noise_covariance, double power,
                               const CMatrix &w);
} // namespace csiforge
