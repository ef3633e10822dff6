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

#include "csiforge/tokenstream.hpp"
#include "csiforge/digest.hpp"
#include "csiforge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csiforge
{
    std::string_view to_string(TokenKind k)
    {
        switch (k)
        {
        case TokenKind::scalar:
            return "scalar";
        case TokenKind::vector:
            return "vector";
        case TokenKind::matrix:
            return "matrix";
        case TokenKind::categorical:
            return "categorical";
        }
        return "?";
    }

    std::string_view to_string(TargetFeature t)
    {
        switch (t)
        {
        case TargetFeature::mu_hat:
            return "mu_hat";
        case TargetFeature::len_hat:
            return "len_hat";
        case TargetFeature::w_hat:
            return "w_hat";
        case TargetFeature::rank:
            return "R_hat";
        case TargetFeature::precoder:
            return "W_hat";
        }
        return "?";
    }

    std::optional<TargetFeature> target_feature_from_string(std::string_view s)
    {
        for (auto t : kTargetFeatures)
            if (to_string(t) == s)
                return t;
        return std::nullopt;
    }

    FeatureId token_feature(TargetFeature t)
    {
        switch (t)
        {
        case TargetFeature::mu_hat:
        case TargetFeature::len_hat:
            return FeatureId::delay_profile;
        case TargetFeature::w_hat:
            return FeatureId::doppler_width;
        case TargetFeature::rank:
            return FeatureId::rank;
        case TargetFeature::precoder:
            return FeatureId::precoder;
        }
        throw std::invalid_argument("unknown target feature");
    }

    PatchSize choose_patch_size(int d1, int d2)
    {
        if (d1 < 1 || d2 < 1)
            throw std::invalid_argument("Matrix dimensions must be positive.");
        int p = kMinPatch;
        auto tiles = [&](int q) { return static_cast<long long>((d1 + q - 1) / q) * ((d2 + q - 1) / q); };
        while (tiles(p) > kMaxTokensPerMatrix)
            p *= 2;
        return {p, p};
    }

    int FeatureSpec::padded_rows() const
    {
        return kind == TokenKind::matrix ? (rows + patch.p1 - 1) / patch.p1 * patch.p1 : rows;
    }

    int FeatureSpec::padded_cols() const
    {
        return kind == TokenKind::matrix ? (cols + patch.p2 - 1) / patch.p2 * patch.p2 : cols;
    }

    int FeatureSpec::token_count() const
    {
        return kind == TokenKind::matrix ? (padded_rows() / patch.p1) * (padded_cols() / patch.p2) : 1;
    }

    int FeatureSpec::payload_length(int fourier_dim, int n_categories) const
    {
        switch (kind)
        {
        case TokenKind::scalar:
            return fourier_dim;
        case TokenKind::vector:
            return rows;
        case TokenKind::matrix:
            return 2 * patch.p1 * patch.p2;
        case TokenKind::categorical:
            return n_categories;
        }
        return 0;
    }

    FourierGrid FourierGrid::log_spaced(int dim, double lo, double hi)
    {
        if (dim < 2 || dim % 2 != 0)
            throw std::invalid_argument("Fourier encoding size must be even and positive.");
        if (!(lo > 0.0 && hi >= lo))
            throw std::invalid_argument("Fourier wavelengths need 0 < min <= max.");
        FourierGrid g;
        const int n = dim / 2;
        g.lambdas.resize(n);
        for (int i = 0; i < n; ++i)
        {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
            g.lambdas[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
        }
        return g;
    }

    std::vector<float> fourier_encode(double x, const FourierGrid &grid)
    {
        std::vector<float> out(grid.lambdas.size() * 2);
        for (std::size_t i = 0; i < grid.lambdas.size(); ++i)
        {
            // Reduce in double first; float32 cannot carry phases of thousands of cycles.
            const double cycles = x / grid.lambdas[i];
            const double phase = kTwoPi * (cycles - std::floor(cycles));
            out[2 * i] = static_cast<float>(std::cos(phase));
            out[2 * i + 1] = static_cast<float>(std::sin(phase));
        }
        return out;
    }

    FeatureSchema FeatureSchema::standard(int fourier_dim, double lambda_min, double lambda_max)
    {
        const int max_rx = std::ranges::max(universe::antennas, {}, &universe::AntennaOption::n_rx).n_rx;
        const int max_tx = std::ranges::max(universe::antennas, {}, &universe::AntennaOption::n_tx).n_tx;
        const int max_b = std::ranges::max(universe::group_counts);
        std::size_t max_s = 0;
        for (const auto &s : universe::pilot_sets)
            max_s = std::max(max_s, s.size());
        const int max_rank = std::min(max_rx, max_tx);

        auto matrix = [](FeatureId id, const char *name, int r, int c, bool target) {
            return FeatureSpec{id, name, TokenKind::matrix, r, c, choose_patch_size(r, c), target};
        };
        auto scalar = [](FeatureId id, const char *name, bool target) {
            return FeatureSpec{id, name, TokenKind::scalar, 1, 1, {}, target};
        };

        FeatureSchema s;
        s.grid = FourierGrid::log_spaced(fourier_dim, lambda_min, lambda_max);
        s.n_categories = static_cast<int>(universe::channel_types.size());
        s.features = {
            FeatureSpec{FeatureId::channel_type, "channel_type", TokenKind::categorical, 1, 1, {}, false},
            scalar(FeatureId::n_subcarriers, "K", false),
            matrix(FeatureId::noise_covariance, "C_n", max_rx, max_rx, false),
            matrix(FeatureId::freq_correlation, "R_f", max_b, max_b, false),
            matrix(FeatureId::time_covariance, "C_time", int(max_s), int(max_s), false),
            matrix(FeatureId::time_correlation, "R_time", int(max_s), int(max_s), false),
            FeatureSpec{FeatureId::delay_profile, "delay_profile", TokenKind::vector, 2, 1, {}, true},
            scalar(FeatureId::doppler_width, "w_hat", true),
            matrix(FeatureId::precoder, "W_hat", max_tx, max_rank, true),
            scalar(FeatureId::rank, "R_hat", true),
            scalar(FeatureId::spectral_efficiency, "G_hat", false),
        };
        return s;
    }

    int FeatureSchema::tokens_per_slot() const
    {
        int n = 0;
        for (const auto &f : features)
            n += f.token_count();
        return n;
    }

    json FeatureSchema::to_json() const
    {
        json feats = json::array();
        for (const auto &f : features)
            feats.push_back({{"id", static_cast<int>(f.id)},
                             {"name", f.name},
                             {"kind", to_string(f.kind)},
                             {"rows", f.rows},
                             {"cols", f.cols},
                             {"patch", {f.patch.p1, f.patch.p2}},
                             {"tokens", f.token_count()},
                             {"payload_length", f.payload_length(grid.dim(), n_categories)},
                             {"target", f.target}});
        json targets = json::array();
        for (auto t : kTargetFeatures)
            targets.push_back({{"name", to_string(t)}, {"feature_id", static_cast<int>(token_feature(t))}});
        return {{"features", feats},
                {"targets", targets},
                {"fourier_lambdas", grid.lambdas},
                {"n_categories", n_categories},
                {"seq_len", kSequenceLength},
                {"tokens_per_slot", tokens_per_slot()}};
    }

    std::string FeatureSchema::digest() const { return sha256_hex(to_json().dump()); }

    // ---------- Normalization ----------

    namespace
    {
        double mean_abs_diagonal(const SequenceRecord &seq, const CMatrixF FeatureRecord::*field)
        {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto &rec : seq.records)
            {
                const CMatrixF &m = rec.*field;
                for (Eigen::Index i = 0; i < std::min(m.rows(), m.cols()); ++i, ++n)
                    sum += std::abs(m(i, i));
            }
            const double mean = n ? sum / static_cast<double>(n) : 0.0;
            return mean > 0.0 && std::isfinite(mean) ? mean : 1.0;
        }

        double standardize(double x, const FeatureStat &s) { return (x - s.mean) / s.std; }
        double unstandardize(double z, const FeatureStat &s) { return z * s.std + s.mean; }

        void check_stats(const NormStats &stats)
        {
            if (stats.n_records == 0)
                throw std::invalid_argument("Normalization statistics are empty.");
            for (auto f : kScalarFeatures)
            {
                const auto &s = stats.at(f);
                if (!std::isfinite(s.mean) || !(s.std > 0.0) || !std::isfinite(s.std))
                    throw std::invalid_argument("Normalization statistics for " + std::string(scalar_feature_name(f)) +
                                                " are missing or invalid.");
            }
        }
    } // namespace

    SequenceScales covariance_scales(const SequenceRecord &seq)
    {
        return {mean_abs_diagonal(seq, &FeatureRecord::noise_covariance),
                mean_abs_diagonal(seq, &FeatureRecord::time_covariance)};
    }

    NormalizedRecord normalize_record(const FeatureRecord &rec, const NormStats &stats, const SequenceScales &scales)
    {
        check_stats(stats);
        NormalizedRecord n;
        n.channel_type = rec.channel_type;
        n.n_subcarriers = standardize(rec.n_subcarriers, stats.at(ScalarFeature::n_subcarriers));
        n.noise_covariance = rec.noise_covariance.cast<cd>() / scales.noise_covariance;
        n.freq_correlation = rec.freq_correlation.cast<cd>();
        n.time_covariance = rec.time_covariance.cast<cd>() / scales.time_covariance;
        n.time_correlation = rec.time_correlation.cast<cd>();
        n.delay_center = standardize(rec.delay_center_s, stats.at(ScalarFeature::delay_center));
        n.delay_length = standardize(rec.delay_length_s, stats.at(ScalarFeature::delay_length));
        n.doppler_width = standardize(rec.doppler_width_hz, stats.at(ScalarFeature::doppler_width));
        n.precoder = rec.precoder.cast<cd>();
        n.rank = standardize(rec.rank, stats.at(ScalarFeature::rank));
        n.spectral_efficiency = standardize(rec.spectral_efficiency, stats.at(ScalarFeature::spectral_efficiency));
        return n;
    }

    FeatureRecord denormalize_record(const NormalizedRecord &n, const NormStats &stats, const SequenceScales &scales)
    {
        check_stats(stats);
        FeatureRecord rec;
        rec.channel_type = n.channel_type;
        rec.n_subcarriers =
            static_cast<std::uint32_t>(std::lround(unstandardize(n.n_subcarriers, stats.at(ScalarFeature::n_subcarriers))));
        rec.noise_covariance = (n.noise_covariance * scales.noise_covariance).cast<cf>();
        rec.freq_correlation = n.freq_correlation.cast<cf>();
        rec.time_covariance = (n.time_covariance * scales.time_covariance).cast<cf>();
        rec.time_correlation = n.time_correlation.cast<cf>();
        rec.delay_center_s = unstandardize(n.delay_center, stats.at(ScalarFeature::delay_center));
        rec.delay_length_s = unstandardize(n.delay_length, stats.at(ScalarFeature::delay_length));
        rec.doppler_width_hz = unstandardize(n.doppler_width, stats.at(ScalarFeature::doppler_width));
        rec.precoder = n.precoder.cast<cf>();
        rec.rank = static_cast<std::uint8_t>(std::lround(unstandardize(n.rank, stats.at(ScalarFeature::rank))));
        rec.spectral_efficiency = unstandardize(n.spectral_efficiency, stats.at(ScalarFeature::spectral_efficiency));
        return rec;
    }

    // ---------- Patches ----------

    std::vector<Patch> patchify(const CMatrix &m, PatchSize p, int rows, int cols)
    {
        if (p.p1 < 1 || p.p2 < 1)
            throw std::invalid_argument("Patch sizes must be positive.");
        if (m.rows() > rows || m.cols() > cols)
            throw std::invalid_argument("Matrix of " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                        " exceeds its pad target " + std::to_string(rows) + "x" + std::to_string(cols));
        const int pr = (rows + p.p1 - 1) / p.p1;
        const int pc = (cols + p.p2 - 1) / p.p2;
        const int area = p.p1 * p.p2;
        std::vector<Patch> out;
        out.reserve(static_cast<std::size_t>(pr) * pc);
        for (int a = 0; a < pr; ++a)
            for (int b = 0; b < pc; ++b)
            {
                Patch patch;
                patch.row = a;
                patch.col = b;
                patch.payload.assign(2 * area, 0.0f);
                patch.pad.assign(2 * area, 1);
                for (int i = 0; i < p.p1; ++i)
                    for (int j = 0; j < p.p2; ++j)
                    {
                        const Eigen::Index r = a * p.p1 + i;
                        const Eigen::Index c = b * p.p2 + j;
                        if (r >= m.rows() || c >= m.cols())
                            continue;
                        const int e = i * p.p2 + j;
                        patch.payload[e] = static_cast<float>(m(r, c).real());
                        patch.payload[area + e] = static_cast<float>(m(r, c).imag());
                        patch.pad[e] = patch.pad[area + e] = 0;
                    }
                out.push_back(std::move(patch));
            }
        return out;
    }

    CMatrix depatchify(const std::vector<Patch> &patches, PatchSize p, int rows, int cols)
    {
        const int area = p.p1 * p.p2;
        CMatrix m = CMatrix::Zero(rows, cols);
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(rows) * cols, 0);
        for (const auto &patch : patches)
        {
            if (static_cast<int>(patch.payload.size()) != 2 * area)
                throw std::invalid_argument("Patch payload does not match the patch size.");
            for (int i = 0; i < p.p1; ++i)
                for (int j = 0; j < p.p2; ++j)
                {
                    const int r = patch.row * p.p1 + i;
                    const int c = patch.col * p.p2 + j;
                    if (r >= rows || c >= cols)
                        continue;
                    const int e = i * p.p2 + j;
                    m(r, c) = cd(patch.payload[e], patch.payload[area + e]);
                    seen[static_cast<std::size_t>(r) * cols + c] = 1;
                }
        }
        if (std::ranges::find(seen, 0) != seen.end())
            throw std::invalid_argument("Patches do not cover the requested region.");
        return m;
    }

    // ---------- Token sequences ----------

    std::string_view to_string(MaskMode m)
    {
        switch (m)
        {
        case MaskMode::none:
            return "none";
        case MaskMode::pretrain:
            return "pretrain";
        case MaskMode::interpolation:
            return "interpolation";
        case MaskMode::forecast:
            return "forecast";
        }
        return "?";
    }

    std::optional<MaskMode> mask_mode_from_string(std::string_view s)
    {
        for (auto m : {MaskMode::none, MaskMode::pretrain, MaskMode::interpolation, MaskMode::forecast})
            if (to_string(m) == s)
                return m;
        return std::nullopt;
    }

    int TokenSequence::masked_pairs() const
    {
        return static_cast<int>(std::ranges::count_if(masked_targets, [](const auto &t) { return t.has_value(); }));
    }

    std::uint64_t sequence_id(const SequenceRecord &seq) { return (seq.run_id << 16) | seq.start_slot; }

    namespace
    {
        void emit_scalar(TokenSequence &ts, FeatureId id, int slot, double value, const FourierGrid &grid)
        {
            Token t;
            t.feature = id;
            t.kind = TokenKind::scalar;
            t.slot = static_cast<std::uint8_t>(slot);
            t.payload = fourier_encode(value, grid);
            t.pad.assign(t.payload.size(), 0);
            ts.tokens.push_back(std::move(t));
        }

        void emit_matrix(TokenSequence &ts, const FeatureSpec &spec, int slot, const CMatrix &m)
        {
            if (m.rows() > spec.rows || m.cols() > spec.cols)
                throw std::invalid_argument(spec.name + " of " + std::to_string(m.rows()) + "x" +
                                            std::to_string(m.cols()) + " exceeds the schema pad target " +
                                            std::to_string(spec.rows) + "x" + std::to_string(spec.cols));
            for (auto &patch : patchify(m, spec.patch, spec.rows, spec.cols))
            {
                Token t;
                t.feature = spec.id;
                t.kind = TokenKind::matrix;
                t.slot = static_cast<std::uint8_t>(slot);
                t.patch_row = static_cast<std::uint16_t>(patch.row);
                t.patch_col = static_cast<std::uint16_t>(patch.col);
                t.payload = std::move(patch.payload);
                t.pad = std::move(patch.pad);
                ts.tokens.push_back(std::move(t));
            }
        }
    } // namespace

    TokenSequence build_token_sequence(const SequenceRecord &seq, const FeatureSchema &schema, const NormStats &stats)
    {
        TokenSequence ts;
        ts.sequence_id = sequence_id(seq);
        ts.scales = covariance_scales(seq);
        ts.tokens.reserve(static_cast<std::size_t>(schema.tokens_per_sequence()));
        for (int slot = 0; slot < kSequenceLength; ++slot)
        {
            const NormalizedRecord n = normalize_record(seq.records[slot], stats, ts.scales);
            for (const auto &spec : schema.features)
            {
                switch (spec.id)
                {
                case FeatureId::channel_type: {
                    const int c = static_cast<int>(n.channel_type);
                    if (c < 0 || c >= schema.n_categories)
                        throw std::invalid_argument("Channel type outside the schema categories.");
                    Token t;
                    t.feature = spec.id;
                    t.kind = TokenKind::categorical;
                    t.slot = static_cast<std::uint8_t>(slot);
                    t.payload.assign(schema.n_categories, 0.0f);
                    t.payload[c] = 1.0f;
                    t.pad.assign(t.payload.size(), 0);
                    ts.tokens.push_back(std::move(t));
                    break;
                }
                case FeatureId::n_subcarriers:
                    emit_scalar(ts, spec.id, slot, n.n_subcarriers, schema.grid);
                    break;
                case FeatureId::noise_covariance:
                    emit_matrix(ts, spec, slot, n.noise_covariance);
                    break;
                case FeatureId::freq_correlation:
                    emit_matrix(ts, spec, slot, n.freq_correlation);
                    break;
                case FeatureId::time_covariance:
                    emit_matrix(ts, spec, slot, n.time_covariance);
                    break;
                case FeatureId::time_correlation:
                    emit_matrix(ts, spec, slot, n.time_correlation);
                    break;
                case FeatureId::delay_profile: {
                    Token t;
                    t.feature = spec.id;
                    t.kind = TokenKind::vector;
                    t.slot = static_cast<std::uint8_t>(slot);
                    t.payload = {static_cast<float>(n.delay_center), static_cast<float>(n.delay_length)};
                    t.pad.assign(2, 0);
                    ts.tokens.push_back(std::move(t));
                    break;
                }
                case FeatureId::doppler_width:
                    emit_scalar(ts, spec.id, slot, n.doppler_width, schema.grid);
                    break;
                case FeatureId::precoder:
                    emit_matrix(ts, spec, slot, n.precoder);
                    break;
                case FeatureId::rank:
                    emit_scalar(ts, spec.id, slot, n.rank, schema.grid);
                    break;
                case FeatureId::spectral_efficiency:
                    emit_scalar(ts, spec.id, slot, n.spectral_efficiency, schema.grid);
                    break;
                }
            }
        }
        return ts;
    }

    TokenSequence apply_mask_plan(TokenSequence ts, MaskMode mode, std::uint64_t mask_seed,
                                  std::optional<TargetFeature> feature)
    {
        if (ts.mode != MaskMode::none)
            throw std::invalid_argument("Token sequence already carries a mask plan.");
        if ((mode == MaskMode::interpolation || mode == MaskMode::forecast) && !feature)
            throw std::invalid_argument("Interpolation and forecast need the evaluated target feature.");

        ts.mode = mode;
        ts.mask_seed = mask_seed;
        Rng rng(substream(mask_seed, Stream::mask, {ts.sequence_id}));
        switch (mode)
        {
        case MaskMode::none:
            return ts;
        case MaskMode::pretrain: {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(kTargetFeatures.size()) - 1);
            for (auto &t : ts.masked_targets)
                t = kTargetFeatures[pick(rng)];
            break;
        }
        case MaskMode::interpolation:
            ts.masked_targets[std::uniform_int_distribution<int>(0, kSequenceLength - 1)(rng)] = *feature;
            break;
        case MaskMode::forecast:
            ts.masked_targets[kSequenceLength - 1] = *feature;
            break;
        }

        for (auto &tok : ts.tokens)
        {
            const auto &target = ts.masked_targets[tok.slot];
            if (!target || token_feature(*target) != tok.feature)
                continue;
            tok.masked = true;
            tok.target = tok.payload;
            std::ranges::fill(tok.payload, 0.0f);
        }
        return ts;
    }
} // namespace csiforge
