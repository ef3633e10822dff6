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

#include "csiforge/pipeline.hpp"
#include "csiforge/records.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace csiforge
{
    using json = nlohmann::json;

    inline constexpr int kDatasetFormatVersion = 1;

    struct CampaignOptions
    {
        std::uint64_t master_seed = 0;
        int n_configs = 1;
        int snr_draws = 8;
        int slots_per_run = 100;
        int seq_len = kSequenceLength;
        double noise_rho = 0.0;
        PipelineOptions pipeline;
        int threads = 0; // 0: CSI_FORGE_THREADS or hardware concurrency

        void validate() const;
    };

    /// Worker count: explicit value, else CSI_FORGE_THREADS, else hardware concurrency.
    int resolve_threads(int requested);

    /// Seed of run `run_index` of configuration `config_index`.
    std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t config_index, int run_index);

    struct RunOutput
    {
        std::vector<SequenceRecord> sequences;
        std::vector<GenieRecord> genie;
    };

    /// Simulates one run (fresh channel, fresh SNR) and slices it into non-overlapping sequences.
    RunOutput simulate_run(const SimConfig &base, std::uint64_t master_seed, std::uint64_t config_index, int run_index,
                           const CampaignOptions &options);

    struct ShardInfo
    {
        std::string path;       // relative to the dataset directory
        std::string genie_path; // relative to the dataset directory
        std::uint64_t sequences = 0;
        std::uint64_t config_index = 0;
        std::uint64_t config_id = 0;
    };

    struct SplitCounts
    {
        std::uint64_t train = 0;
        std::uint64_t val = 0;
        std::uint64_t test = 0;
    };

    struct DatasetManifest
    {
        int format_version = kDatasetFormatVersion;
        std::uint64_t seed = 0;
        int n_configs = 0;
        int snr_draws = 0;
        int slots_per_run = 0;
        int seq_len = kSequenceLength;
        std::string nfft_rule = "pilots";
        double noise_rho = 0.0;
        std::string universe_hash;
        std::vector<ShardInfo> shards;
        std::uint64_t total_sequences = 0;
        SplitCounts splits;
        std::string norm_stats_digest;
        std::string std_convention = "population";

        json to_json() const;
        static DatasetManifest from_json(const json &j);
        /// SHA-256 of the canonical JSON text.
        std::string digest() const;
    };

    /// Runs every (config, run) pair and writes one feature shard plus one genie sidecar per
    /// configuration under `out_dir/shards`. Returns the manifest without split/stats fields.
    DatasetManifest run_campaign(const CampaignOptions &options, const std::filesystem::path &out_dir);

    struct SequenceRef
    {
        std::uint32_t shard = 0;
        std::uint32_t index = 0;
        auto operator<=>(const SequenceRef &) const = default;
    };

    struct SplitManifest
    {
        std::string name;
        std::vector<SequenceRef> refs;

        json to_json() const;
        static SplitManifest from_json(const json &j);
    };

    /// Random sequence-level partition into train/val/test. Ratios are percentages summing to 100.
    std::array<SplitManifest, 3> split_dataset(const DatasetManifest &manifest, std::array<int, 3> ratios,
                                               std::uint64_t seed);

    std::vector<SequenceRecord> load_sequences(const std::filesystem::path &dataset_dir,
                                               const DatasetManifest &manifest, std::span<const SequenceRef> refs);

    // ---------- Normalization statistics ----------

    enum class ScalarFeature
    {
        n_subcarriers,
        delay_center,
        delay_length,
        doppler_width,
        rank,
        spectral_efficiency,
    };
    inline constexpr std::array<ScalarFeature, 6> kScalarFeatures{
        ScalarFeature::n_subcarriers, ScalarFeature::delay_center, ScalarFeature::delay_length,
        ScalarFeature::doppler_width, ScalarFeature::rank,         ScalarFeature::spectral_efficiency};

    std::string_view scalar_feature_name(ScalarFeature f);
    double scalar_value(const FeatureRecord &rec, ScalarFeature f);

    inline constexpr double kStdFloor = 1e-9;

    struct FeatureStat
    {
        double mean = 0.0;
        double std = 1.0;
    };

    struct NormStats
    {
        std::array<FeatureStat, 6> stats{};
        std::uint64_t n_records = 0;

        const FeatureStat &at(ScalarFeature f) const { return stats[static_cast<std::size_t>(f)]; }
        json to_json() const; // includes the digest
        static NormStats from_json(const json &j);
        std::string digest() const;
    };

    /// Population mean/std of every scalar feature over all records of the split.
    NormStats compute_norm_stats(std::span<const SequenceRecord> train);

    json read_json(const std::filesystem::path &path);
    void write_json(const std::filesystem::path &path, const json &j);

    // ---------- End-to-end generation ----------

    inline constexpr std::array<int, 3> kDefaultSplit{80, 10, 10};

    /// Rejects options and ratios that cannot produce a dataset with a non-empty training split.
    void validate_generation(const CampaignOptions &options, std::array<int, 3> ratios);

    /// Campaign, split and train statistics; writes manifest.json, norm_stats.json and splits/*.json.
    DatasetManifest generate_dataset(const CampaignOptions &options, const std::filesystem::path &out_dir,
                                     std::array<int, 3> ratios = kDefaultSplit);

    DatasetManifest read_manifest(const std::filesystem::path &dataset_dir);
    SplitManifest read_split(const std::filesystem::path &dataset_dir, std::string_view name);

    /// All sequences of the dataset, shard by shard.
    std::vector<SequenceRecord> load_all_sequences(const std::filesystem::path &dataset_dir,
                                                   const DatasetManifest &manifest);

    /// Estimator errors against the genie sidecars, denoising gain and the rank histogram.
    json baseline_report(const std::filesystem::path &dataset_dir, const DatasetManifest &manifest,
                         double high_snr_db = 25.0);
} // namespace csiforge
