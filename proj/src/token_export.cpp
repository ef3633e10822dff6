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

#include "csiforge/token_export.hpp"
#include "csiforge/bytes.hpp"
#include "csiforge/dataset.hpp"
#include "csiforge/shard.hpp"

#include <cstring>

namespace csiforge
{
    json TokenExportSummary::to_json() const
    {
        return {{"sequences", sequences},         {"tokens", tokens},
                {"masked_pairs", masked_pairs},   {"masked_tokens", masked_tokens},
                {"payload_floats", payload_floats}, {"target_floats", target_floats},
                {"schema_digest", schema_digest}};
    }

    namespace
    {
        class BitWriter
        {
          public:
            void push(bool bit)
            {
                if (n_ % 8 == 0)
                    bytes_.push_back(0);
                if (bit)
                    bytes_.back() |= static_cast<std::uint8_t>(1u << (n_ % 8));
                ++n_;
            }
            void align() { n_ = (n_ + 7) / 8 * 8; }
            std::size_t size_bits() const { return n_; }
            std::vector<std::uint8_t> take() { return std::move(bytes_); }

          private:
            std::vector<std::uint8_t> bytes_;
            std::size_t n_ = 0;
        };

        bool get_bit(std::span<const std::uint8_t> bytes, std::size_t i)
        {
            if (i / 8 >= bytes.size())
                throw ShardError(ShardErrorKind::truncated, "masks.bin is shorter than the index requires");
            return (bytes[i / 8] >> (i % 8)) & 1u;
        }
    } // namespace

    TokenExportSummary write_token_export(const std::filesystem::path &dir, const FeatureSchema &schema,
                                          std::span<const TokenSequence> sequences, const json &extra)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw ShardError(ShardErrorKind::io, dir.string() + ": " + ec.message());

        TokenExportSummary sum;
        sum.schema_digest = schema.digest();
        sum.sequences = sequences.size();

        std::vector<int> feature_id, slot, patch_row, patch_col, kind, payload_length, masked;
        std::vector<std::uint64_t> payload_offset;
        std::vector<std::int64_t> target_offset;
        std::vector<std::uint64_t> seq_offsets{0}, seq_ids;
        json seq_meta = json::array();

        ByteWriter payloads;
        std::vector<float> targets;
        BitWriter pad_bits;
        std::uint64_t offset = 0;

        for (const auto &ts : sequences)
        {
            json mt = json::array();
            for (const auto &t : ts.masked_targets)
                mt.push_back(t ? json(to_string(*t)) : json(nullptr));
            seq_meta.push_back({{"mode", to_string(ts.mode)},
                                {"mask_seed", ts.mask_seed},
                                {"masked_targets", mt},
                                {"scales", {{"C_n", ts.scales.noise_covariance}, {"C_time", ts.scales.time_covariance}}}});
            seq_ids.push_back(ts.sequence_id);
            sum.masked_pairs += static_cast<std::uint64_t>(ts.masked_pairs());

            for (const auto &tok : ts.tokens)
            {
                const auto expected = static_cast<std::size_t>(schema.payload_length(tok.feature));
                if (tok.payload.size() != expected || tok.pad.size() != expected)
                    throw std::invalid_argument("Token payload length disagrees with the schema.");
                feature_id.push_back(static_cast<int>(tok.feature));
                slot.push_back(tok.slot);
                patch_row.push_back(tok.patch_row);
                patch_col.push_back(tok.patch_col);
                kind.push_back(static_cast<int>(tok.kind));
                payload_offset.push_back(offset);
                payload_length.push_back(static_cast<int>(expected));
                masked.push_back(tok.masked ? 1 : 0);
                for (float v : tok.payload)
                    payloads.put(v);
                for (auto p : tok.pad)
                    pad_bits.push(p != 0);
                offset += expected;
                if (tok.masked)
                {
                    target_offset.push_back(static_cast<std::int64_t>(targets.size()));
                    targets.insert(targets.end(), tok.target.begin(), tok.target.end());
                    ++sum.masked_tokens;
                }
                else
                    target_offset.push_back(-1);
            }
            sum.tokens += ts.tokens.size();
            seq_offsets.push_back(sum.tokens);
        }
        sum.payload_floats = offset;
        sum.target_floats = targets.size();

        for (float v : targets)
            payloads.put(v);
        pad_bits.align();
        const std::size_t masked_bit_offset = pad_bits.size_bits();
        for (int m : masked)
            pad_bits.push(m != 0);

        json index = {{"version", kTokenExportVersion},
                      {"schema_digest", sum.schema_digest},
                      {"schema", schema.to_json()},
                      {"endianness", "little"},
                      {"dtype", "float32"},
                      {"n_sequences", sum.sequences},
                      {"n_tokens", sum.tokens},
                      {"payload_floats", sum.payload_floats},
                      {"target_floats", sum.target_floats},
                      {"target_base_float", sum.payload_floats},
                      {"masked_bit_offset", masked_bit_offset},
                      {"sequence_offsets", seq_offsets},
                      {"sequence_ids", seq_ids},
                      {"sequences", seq_meta},
                      {"tokens",
                       {{"feature_id", feature_id},
                        {"slot", slot},
                        {"patch_row", patch_row},
                        {"patch_col", patch_col},
                        {"kind", kind},
                        {"payload_offset", payload_offset},
                        {"payload_length", payload_length},
                        {"masked", masked},
                        {"target_offset", target_offset}}},
                      {"extra", extra}};

        const auto token_bytes = payloads.take();
        const auto mask_bytes = pad_bits.take();
        write_file(dir / "tokens.bin", token_bytes);
        write_file(dir / "masks.bin", mask_bytes);
        write_json(dir / "index.json", index);
        return sum;
    }

    TokenExport read_token_export(const std::filesystem::path &dir, const FeatureSchema &schema)
    {
        TokenExport out;
        out.index = read_json(dir / "index.json");
        const json &ix = out.index;
        try
        {
            if (ix.at("version").get<int>() != kTokenExportVersion)
                throw ShardError(ShardErrorKind::bad_version, (dir / "index.json").string() + ": unsupported version");
            if (ix.at("schema_digest").get<std::string>() != schema.digest())
                throw ShardError(ShardErrorKind::invalid_record,
                                 (dir / "index.json").string() + ": schema digest does not match this build");

            const auto token_bytes = read_file(dir / "tokens.bin");
            const auto mask_bytes = read_file(dir / "masks.bin");
            const auto payload_floats = ix.at("payload_floats").get<std::uint64_t>();
            const auto target_floats = ix.at("target_floats").get<std::uint64_t>();
            if (token_bytes.size() != (payload_floats + target_floats) * sizeof(float))
                throw ShardError(ShardErrorKind::truncated, (dir / "tokens.bin").string() + ": size mismatch");
            auto floats_at = [&](std::uint64_t off, std::size_t n) {
                if ((off + n) * sizeof(float) > token_bytes.size())
                    throw ShardError(ShardErrorKind::truncated, (dir / "tokens.bin").string() + ": offset out of range");
                std::vector<float> v(n);
                ByteReader r{std::span<const std::uint8_t>(token_bytes).subspan(off * sizeof(float), n * sizeof(float))};
                for (auto &x : v)
                    x = r.get<float>();
                return v;
            };

            const auto &tk = ix.at("tokens");
            const auto feature_id = tk.at("feature_id").get<std::vector<int>>();
            const auto slot = tk.at("slot").get<std::vector<int>>();
            const auto patch_row = tk.at("patch_row").get<std::vector<int>>();
            const auto patch_col = tk.at("patch_col").get<std::vector<int>>();
            const auto kind = tk.at("kind").get<std::vector<int>>();
            const auto payload_offset = tk.at("payload_offset").get<std::vector<std::uint64_t>>();
            const auto payload_length = tk.at("payload_length").get<std::vector<int>>();
            const auto target_offset = tk.at("target_offset").get<std::vector<std::int64_t>>();
            const auto seq_offsets = ix.at("sequence_offsets").get<std::vector<std::uint64_t>>();
            const auto seq_ids = ix.at("sequence_ids").get<std::vector<std::uint64_t>>();
            const auto masked_base = ix.at("masked_bit_offset").get<std::size_t>();
            const auto &meta = ix.at("sequences");

            for (std::size_t s = 0; s + 1 < seq_offsets.size(); ++s)
            {
                TokenSequence ts;
                ts.sequence_id = seq_ids.at(s);
                ts.mode = mask_mode_from_string(meta.at(s).at("mode").get<std::string>()).value();
                ts.mask_seed = meta.at(s).at("mask_seed").get<std::uint64_t>();
                ts.scales = {meta.at(s).at("scales").at("C_n").get<double>(),
                             meta.at(s).at("scales").at("C_time").get<double>()};
                const auto &mt = meta.at(s).at("masked_targets");
                for (std::size_t q = 0; q < ts.masked_targets.size(); ++q)
                    if (!mt.at(q).is_null())
                        ts.masked_targets[q] = target_feature_from_string(mt.at(q).get<std::string>()).value();

                for (std::uint64_t i = seq_offsets[s]; i < seq_offsets[s + 1]; ++i)
                {
                    Token t;
                    t.feature = static_cast<FeatureId>(feature_id.at(i));
                    t.kind = static_cast<TokenKind>(kind.at(i));
                    t.slot = static_cast<std::uint8_t>(slot.at(i));
                    t.patch_row = static_cast<std::uint16_t>(patch_row.at(i));
                    t.patch_col = static_cast<std::uint16_t>(patch_col.at(i));
                    const auto n = static_cast<std::size_t>(payload_length.at(i));
                    t.payload = floats_at(payload_offset.at(i), n);
                    t.pad.resize(n);
                    for (std::size_t e = 0; e < n; ++e)
                        t.pad[e] = get_bit(mask_bytes, payload_offset[i] + e);
                    t.masked = get_bit(mask_bytes, masked_base + i);
                    if (t.masked)
                        t.target = floats_at(payload_floats + static_cast<std::uint64_t>(target_offset.at(i)), n);
                    ts.tokens.push_back(std::move(t));
                }
                out.sequences.push_back(std::move(ts));
            }
        }
        catch (const json::exception &e)
        {
            throw ShardError(ShardErrorKind::invalid_record, (dir / "index.json").string() + ": " + e.what());
        }
        catch (const std::bad_optional_access &)
        {
            throw ShardError(ShardErrorKind::invalid_record, (dir / "index.json").string() + ": unknown enum name");
        }
        catch (const ByteUnderflow &e)
        {
            throw ShardError(ShardErrorKind::truncated, (dir / "tokens.bin").string() + ": " + e.what());
        }
        return out;
    }

    TokenExportSummary tokenize_dataset(const TokenizeRequest &req)
    {
        if ((req.mode == MaskMode::interpolation || req.mode == MaskMode::forecast) && !req.feature)
            throw std::invalid_argument("Mask mode " + std::string(to_string(req.mode)) + " needs a target feature.");
        if (req.split != "all" && req.split != "train" && req.split != "val" && req.split != "test")
            throw std::invalid_argument("Unknown split " + req.split);

        const auto stats_path = req.stats_path();
        const DatasetManifest m = read_manifest(req.dataset);
        NormStats stats;
        try
        {
            stats = NormStats::from_json(read_json(stats_path));
        }
        catch (const ShardError &)
        {
            throw;
        }
        catch (const std::exception &e)
        {
            throw ShardError(ShardErrorKind::invalid_record, stats_path.string() + ": " + e.what());
        }
        if (stats.digest() != m.norm_stats_digest)
            throw ShardError(ShardErrorKind::invalid_record,
                             stats_path.string() + ": statistics do not match the dataset manifest");

        const std::vector<SequenceRecord> seqs = req.split == "all"
                                                     ? load_all_sequences(req.dataset, m)
                                                     : load_sequences(req.dataset, m, read_split(req.dataset, req.split).refs);
        const FeatureSchema schema = FeatureSchema::standard();
        std::vector<TokenSequence> streams;
        streams.reserve(seqs.size());
        for (const auto &seq : seqs)
            streams.push_back(apply_mask_plan(build_token_sequence(seq, schema, stats), req.mode, req.mask_seed, req.feature));
        return write_token_export(req.out, schema, streams,
                                  {{"manifest_digest", m.digest()},
                                   {"norm_stats_digest", stats.digest()},
                                   {"split", req.split}});
    }
} // namespace csiforge
