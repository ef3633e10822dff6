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

#include "csiforge/tokenstream.hpp"

#include <filesystem>
#include <optional>
#include <span>

namespace csiforge
{
    inline constexpr int kTokenExportVersion = 1;

    struct TokenExportSummary
    {
        std::uint64_t sequences = 0;
        std::uint64_t tokens = 0;
        std::uint64_t masked_pairs = 0; // (slot, target) pairs across all sequences
        std::uint64_t masked_tokens = 0;
        std::uint64_t payload_floats = 0;
        std::uint64_t target_floats = 0;
        std::string schema_digest;

        json to_json() const;
    };

    /// Writes tokens.bin, masks.bin and index.json into `dir`.
    ///
    /// tokens.bin holds every payload back to back (float32 LE), followed by the target
    /// payloads of masked tokens. masks.bin holds one pad bit per payload element, then one
    /// masked bit per token, LSB first, each section starting on a byte boundary.
    TokenExportSummary write_token_export(const std::filesystem::path &dir, const FeatureSchema &schema,
                                          std::span<const TokenSequence> sequences, const json &extra = json::object());

    struct TokenExport
    {
        json index;
        std::vector<TokenSequence> sequences;
    };

    /// Reads an export back; throws ShardError on inconsistent files or a schema digest mismatch.
    TokenExport read_token_export(const std::filesystem::path &dir, const FeatureSchema &schema);

    struct TokenizeRequest
    {
        std::filesystem::path dataset;
        std::filesystem::path stats; // empty: <dataset>/norm_stats.json
        std::string split = "all";   // all, train, val or test
        MaskMode mode = MaskMode::none;
        std::uint64_t mask_seed = 0;
        std::optional<TargetFeature> feature;
        std::filesystem::path out;

        std::filesystem::path stats_path() const { return stats.empty() ? dataset / "norm_stats.json" : stats; }
    };

    /// Tokenizes a dataset split with the standard schema and writes the export.
    /// Statistics whose digest differs from the manifest are rejected with ShardError.
    TokenExportSummary tokenize_dataset(const TokenizeRequest &request);
} // namespace csiforge
