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

#include "csiforge/dataset.hpp"
#include "csiforge/records.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace csiforge
{
    enum class TokenKind : std::uint8_t
    {
        scalar,
        vector,
        matrix,
        categorical
    };

    std::string_view to_string(TokenKind k);

    /// Features in emission order within a slot.
    enum class FeatureId : std::uint8_t
    {
        channel_type,
        n_subcarriers,
        noise_covariance,
        freq_correlation,
        time_covariance,
        time_correlation,
        delay_profile, // (mu_hat, len_hat) as one vector token
        doppler_width,
        precoder,
        rank,
        spectral_efficiency
    };
    inline constexpr int kFeatureCount = 11;

    /// Quantities a mask plan may hide. Both delay quantities live in the delay-profile token.
    enum class TargetFeature : std::uint8_t
    {
        mu_hat,
        len_hat,
        w_hat,
        rank,
        precoder
    };
    inline constexpr std::array<TargetFeature, 5> kTargetFeatures{
        TargetFeature::mu_hat, TargetFeature::len_hat, TargetFeature::w_hat, TargetFeature::rank, TargetFeature::precoder};

    std::string_view to_string(TargetFeature t);
    /// Accepts mu_hat, len_hat, w_hat, R_hat, W_hat.
    std::optional<TargetFeature> target_feature_from_string(std::string_view s);
    FeatureId token_feature(TargetFeature t);

    struct PatchSize
    {
        int p1 = 8;
        int p2 = 8;
        bool operator==(const PatchSize &) const = default;
    };

    inline constexpr int kMinPatch = 8;
    inline constexpr int kMaxTokensPerMatrix = 64;

    /// Smallest square power-of-two patch (>= 8) giving at most 64 patches.
    PatchSize choose_patch_size(int d1, int d2);

    struct FeatureSpec
    {
        FeatureId id{};
        std::string name;
        TokenKind kind{};
        int rows = 1; // pad target (matrices, vectors)
        int cols = 1;
        PatchSize patch{};
        bool target = false;

        int padded_rows() const;
        int padded_cols() const;
        int token_count() const;
        int payload_length(int fourier_dim, int n_categories) const;
    };

    struct FourierGrid
    {
        std::vector<double> lambdas;

        /// `dim` outputs from dim/2 wavelengths log-spaced in [lo, hi]; throws on odd `dim`.
        static FourierGrid log_spaced(int dim, double lo, double hi);
        int dim() const { return 2 * static_cast<int>(lambdas.size()); }
    };

    /// [cos(2 pi x / l_i), sin(2 pi x / l_i)] interleaved.
    std::vector<float> fourier_encode(double x, const FourierGrid &grid);

    struct FeatureSchema
    {
        std::vector<FeatureSpec> features; // indexed by FeatureId
        FourierGrid grid;
        int n_categories = 3;

        /// Pad targets at the maxima of the configuration universe.
        static FeatureSchema standard(int fourier_dim = 64, double lambda_min = 1e-3, double lambda_max = 1e3);

        const FeatureSpec &at(FeatureId id) const { return features[static_cast<std::size_t>(id)]; }
        int payload_length(FeatureId id) const { return at(id).payload_length(grid.dim(), n_categories); }
        int tokens_per_slot() const;
        int tokens_per_sequence() const { return tokens_per_slot() * kSequenceLength; }

        json to_json() const;
        std::string digest() const;
    };

    // ---------- Normalization ----------

    /// A record after feature-wise normalization; matrices keep their native dims.
    struct NormalizedRecord
    {
        ChannelType channel_type{};
        double n_subcarriers = 0.0;
        CMatrix noise_covariance;
        CMatrix freq_correlation;
        CMatrix time_covariance;
        CMatrix time_correlation;
        double delay_center = 0.0;
        double delay_length = 0.0;
        double doppler_width = 0.0;
        CMatrix precoder;
        double rank = 0.0;
        double spectral_efficiency = 0.0;
    };

    /// Per-sequence divisors for the covariance features.
    struct SequenceScales
    {
        double noise_covariance = 1.0;
        double time_covariance = 1.0;
    };

    /// Mean |diagonal| over all records of the sequence; 1 when that mean is zero.
    SequenceScales covariance_scales(const SequenceRecord &seq);

    NormalizedRecord normalize_record(const FeatureRecord &rec, const NormStats &stats, const SequenceScales &scales);
    FeatureRecord denormalize_record(const NormalizedRecord &rec, const NormStats &stats, const SequenceScales &scales);

    // ---------- Patches ----------

    struct Patch
    {
        std::vector<float> payload;       // p1*p2 real parts, then p1*p2 imaginary parts
        std::vector<std::uint8_t> pad;    // 1 where the element is padding
        int row = 0;
        int col = 0;
    };

    /// Zero-pads `m` to (rows, cols) rounded up to multiples of the patch and cuts it in raster order.
    std::vector<Patch> patchify(const CMatrix &m, PatchSize p, int rows, int cols);
    inline std::vector<Patch> patchify(const CMatrix &m, PatchSize p) { return patchify(m, p, int(m.rows()), int(m.cols())); }
    /// Reassembles the top-left (rows x cols) region.
    CMatrix depatchify(const std::vector<Patch> &patches, PatchSize p, int rows, int cols);

    // ---------- Token sequences ----------

    struct Token
    {
        FeatureId feature{};
        TokenKind kind{};
        std::uint8_t slot = 0;
        std::uint16_t patch_row = 0;
        std::uint16_t patch_col = 0;
        std::vector<float> payload;
        std::vector<std::uint8_t> pad;
        bool masked = false;
        std::vector<float> target; // original payload, present iff masked
    };

    enum class MaskMode : std::uint8_t
    {
        none,
        pretrain,
        interpolation,
        forecast
    };

    std::string_view to_string(MaskMode m);
    std::optional<MaskMode> mask_mode_from_string(std::string_view s);

    struct TokenSequence
    {
        std::uint64_t sequence_id = 0;
        std::vector<Token> tokens;
        SequenceScales scales;
        MaskMode mode = MaskMode::none;
        std::uint64_t mask_seed = 0;
        /// Target quantity hidden at each slot, if any.
        std::array<std::optional<TargetFeature>, kSequenceLength> masked_targets{};

        int masked_pairs() const;
    };

    /// Sequence id derived from run id and start slot.
    std::uint64_t sequence_id(const SequenceRecord &seq);

    /// Tokens in slot-major, schema, patch-raster order. Throws if a feature exceeds its pad target.
    TokenSequence build_token_sequence(const SequenceRecord &seq, const FeatureSchema &schema, const NormStats &stats);

    /// Pretrain: one target per slot. Interpolation: `feature` at one random slot. Forecast: `feature` at the last slot.
    /// All tokens of a chosen feature are masked together; their payload is zeroed and copied to `target`.
    TokenSequence apply_mask_plan(TokenSequence ts, MaskMode mode, std::uint64_t mask_seed,
                                  std::optional<TargetFeature> feature = std::nullopt);
} // namespace csiforge
