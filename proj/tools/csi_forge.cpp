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

// csi_forge: dataset generation, statistics, tokenization, baseline metrics and inspection.
//
// Every subcommand prints one JSON document holding the effective configuration and its
// result. Exit codes: 0 success, 2 usage error, 3 data or format error.

#include "csiforge/dataset.hpp"
#include "csiforge/shard.hpp"
#include "csiforge/token_export.hpp"
#include "csiforge/tokenstream.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace fs = std::filesystem;
using namespace csiforge;

namespace
{
    constexpr int kExitUsage = 2;
    constexpr int kExitData = 3;

    struct UsageError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    void emit(std::string_view command, const json &effective, const json &result)
    {
        std::cout << json{{"command", command}, {"effective_config", effective}, {"result", result}}.dump(2) << '\n';
    }

    std::array<int, 3> parse_ratios(const std::vector<int> &v)
    {
        if (v.size() != 3)
            throw UsageError("--split takes three integers, e.g. 80 10 10");
        return {v[0], v[1], v[2]};
    }

    // ---- gen ----
    struct GenArgs
    {
        int num_configs = 1;
        int snr_draws = 8;
        int slots = 100;
        int seq_len = kSequenceLength;
        std::uint64_t seed = 0;
        std::string out;
        std::string nfft_rule = "pilots";
        double noise_rho = 0.0;
        int threads = 0;
        std::vector<int> split{80, 10, 10};
    };

    int cmd_gen(const GenArgs &a)
    {
        CampaignOptions opt;
        opt.master_seed = a.seed;
        opt.n_configs = a.num_configs;
        opt.snr_draws = a.snr_draws;
        opt.slots_per_run = a.slots;
        opt.seq_len = a.seq_len;
        opt.noise_rho = a.noise_rho;
        opt.threads = a.threads;
        opt.pipeline.delay.rule = a.nfft_rule == "subcarriers" ? NfftRule::subcarriers : NfftRule::pilots;
        const auto ratios = parse_ratios(a.split);
        try
        {
            validate_generation(opt, ratios);
        }
        catch (const std::invalid_argument &e)
        {
            throw UsageError(e.what());
        }

        const json effective = {{"num_configs", a.num_configs}, {"snr_draws", a.snr_draws}, {"slots", a.slots},
                                {"seq_len", a.seq_len},         {"seed", a.seed},           {"out", a.out},
                                {"nfft_rule", a.nfft_rule},     {"noise_rho", a.noise_rho}, {"split", a.split}};
        const DatasetManifest m = generate_dataset(opt, a.out, ratios);
        emit("gen", effective,
             {{"sequences", m.total_sequences},
              {"runs", static_cast<std::uint64_t>(m.n_configs) * m.snr_draws},
              {"splits", {{"train", m.splits.train}, {"val", m.splits.val}, {"test", m.splits.test}}},
              {"manifest_digest", m.digest()},
              {"norm_stats_digest", m.norm_stats_digest}});
        return 0;
    }

    // ---- stats ----
    struct StatsArgs
    {
        std::string dataset;
        std::string split = "train";
        std::string out;
    };

    int cmd_stats(const StatsArgs &a)
    {
        const fs::path dir = a.dataset;
        const DatasetManifest m = read_manifest(dir);
        const SplitManifest split = read_split(dir, a.split);
        if (split.refs.empty())
            throw ShardError(ShardErrorKind::invalid_record, "Split '" + a.split + "' is empty.");
        const NormStats stats = compute_norm_stats(load_sequences(dir, m, split.refs));
        if (!a.out.empty())
            write_json(a.out, stats.to_json());
        json result = stats.to_json();
        result["matches_manifest"] = stats.digest() == m.norm_stats_digest;
        emit("stats", {{"dataset", a.dataset}, {"split", a.split}, {"out", a.out}}, result);
        return 0;
    }

    // ---- tokenize ----
    struct TokenizeArgs
    {
        std::string dataset;
        std::string stats;
        std::string split = "all";
        std::string mode = "pretrain";
        std::string feature;
        std::uint64_t mask_seed = 0;
        std::string out;
    };

    int cmd_tokenize(const TokenizeArgs &a)
    {
        const auto mode = mask_mode_from_string(a.mode);
        if (!mode)
            throw UsageError("--mode must be one of none, pretrain, interpolation, forecast");
        std::optional<TargetFeature> feature;
        if (!a.feature.empty())
        {
            feature = target_feature_from_string(a.feature);
            if (!feature)
                throw UsageError("--feature must name a target feature: mu_hat, len_hat, w_hat, R_hat, W_hat");
        }
        if ((*mode == MaskMode::interpolation || *mode == MaskMode::forecast) && !feature)
            throw UsageError("--mode " + a.mode + " requires --feature");

        TokenizeRequest req;
        req.dataset = a.dataset;
        req.stats = a.stats;
        req.split = a.split;
        req.mode = *mode;
        req.mask_seed = a.mask_seed;
        req.feature = feature;
        req.out = a.out;

        const json effective = {{"dataset", a.dataset},     {"stats", req.stats_path().string()}, {"split", a.split},
                                {"mode", a.mode},           {"feature", a.feature},               {"mask_seed", a.mask_seed},
                                {"out", a.out}};
        const auto summary = tokenize_dataset(req);
        const FeatureSchema schema = FeatureSchema::standard();
        json result = summary.to_json();
        result["tokens_per_sequence"] = schema.tokens_per_sequence();
        result["tokens_per_slot"] = schema.tokens_per_slot();
        result["masks_per_sequence"] =
            summary.sequences ? static_cast<double>(summary.masked_pairs) / static_cast<double>(summary.sequences) : 0.0;
        emit("tokenize", effective, result);
        return 0;
    }

    // ---- baseline ----
    struct BaselineArgs
    {
        std::string dataset;
        double high_snr_db = 25.0;
    };

    int cmd_baseline(const BaselineArgs &a)
    {
        const fs::path dir = a.dataset;
        const DatasetManifest m = read_manifest(dir);
        emit("baseline", {{"dataset", a.dataset}, {"high_snr_db", a.high_snr_db}}, baseline_report(dir, m, a.high_snr_db));
        return 0;
    }

    // ---- inspect ----
    struct InspectArgs
    {
        std::string dataset;
        std::string shard;
        int sequence = -1;
    };

    json matrix_shape(const CMatrixF &m) { return {m.rows(), m.cols()}; }

    json describe_record(const FeatureRecord &r)
    {
        return {{"channel_type", to_string(r.channel_type)},
                {"K", r.n_subcarriers},
                {"config_id", r.config_id},
                {"slot_index", r.slot_index},
                {"C_n", matrix_shape(r.noise_covariance)},
                {"R_f", matrix_shape(r.freq_correlation)},
                {"C_time", matrix_shape(r.time_covariance)},
                {"R_time", matrix_shape(r.time_correlation)},
                {"mu_hat_s", r.delay_center_s},
                {"len_hat_s", r.delay_length_s},
                {"w_hat_hz", r.doppler_width_hz},
                {"W_hat", matrix_shape(r.precoder)},
                {"R_hat", r.rank},
                {"G_hat", r.spectral_efficiency}};
    }

    int cmd_inspect(const InspectArgs &a)
    {
        if (a.dataset.empty() == a.shard.empty())
            throw UsageError("inspect takes exactly one of --dataset or --shard");
        const json effective = {{"dataset", a.dataset}, {"shard", a.shard}, {"sequence", a.sequence}};
        if (!a.dataset.empty())
        {
            const DatasetManifest m = read_manifest(a.dataset);
            json result = m.to_json();
            result["manifest_digest"] = m.digest();
            emit("inspect", effective, result);
            return 0;
        }
        const auto seqs = read_shard(a.shard);
        json result = {{"sequences", seqs.size()}};
        if (a.sequence >= 0)
        {
            if (static_cast<std::size_t>(a.sequence) >= seqs.size())
                throw UsageError("--sequence is past the end of the shard");
            const auto &s = seqs[static_cast<std::size_t>(a.sequence)];
            json recs = json::array();
            for (const auto &r : s.records)
                recs.push_back(describe_record(r));
            result["run_id"] = s.run_id;
            result["start_slot"] = s.start_slot;
            result["records"] = recs;
        }
        emit("inspect", effective, result);
        return 0;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"csi_forge: MIMO-OFDM CSI dataset toolkit"};
    app.require_subcommand(1);

    GenArgs gen;
    auto *g = app.add_subcommand("gen", "Simulate a campaign, split it and compute training statistics");
    g->add_option("--num-configs", gen.num_configs, "Number of sampled configurations")->required();
    g->add_option("--snr-draws", gen.snr_draws, "Runs per configuration, each at a fresh SNR")->capture_default_str();
    g->add_option("--slots", gen.slots, "Slots per run")->capture_default_str();
    g->add_option("--seq-len", gen.seq_len, "Slots per sequence")->capture_default_str();
    g->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--nfft-rule", gen.nfft_rule, "Delay-profile FFT size rule")
        ->check(CLI::IsMember({"pilots", "subcarriers"}))
        ->capture_default_str();
    g->add_option("--noise-rho", gen.noise_rho, "Correlation between receive-antenna noise")->capture_default_str();
    g->add_option("--threads", gen.threads, "Worker threads (0: CSI_FORGE_THREADS or all cores)")->capture_default_str();
    g->add_option("--split", gen.split, "Train/val/test percentages")->expected(3)->capture_default_str();

    StatsArgs st;
    auto *s = app.add_subcommand("stats", "Recompute normalization statistics for a split");
    s->add_option("--dataset", st.dataset, "Dataset directory")->required();
    s->add_option("--split", st.split, "Split name")->check(CLI::IsMember({"train", "val", "test"}))->capture_default_str();
    s->add_option("--out", st.out, "Optional output JSON path");

    TokenizeArgs tk;
    auto *t = app.add_subcommand("tokenize", "Write a token export with a mask plan");
    t->add_option("--dataset", tk.dataset, "Dataset directory")->required();
    t->add_option("--stats", tk.stats, "Normalization statistics (default: <dataset>/norm_stats.json)");
    t->add_option("--split", tk.split, "Split to tokenize")
        ->check(CLI::IsMember({"all", "train", "val", "test"}))
        ->capture_default_str();
    t->add_option("--mode", tk.mode, "none, pretrain, interpolation or forecast")->capture_default_str();
    t->add_option("--feature", tk.feature, "Evaluated target feature for interpolation and forecast");
    t->add_option("--mask-seed", tk.mask_seed, "Mask plan seed")->capture_default_str();
    t->add_option("--out", tk.out, "Output directory")->required();

    BaselineArgs bl;
    auto *b = app.add_subcommand("baseline", "Classical estimator metrics against the genie sidecars");
    b->add_option("--dataset", bl.dataset, "Dataset directory")->required();
    b->add_option("--high-snr", bl.high_snr_db, "SNR threshold of the high-SNR subset in dB")->capture_default_str();

    InspectArgs in;
    auto *i = app.add_subcommand("inspect", "Summarize a dataset manifest or a shard");
    i->add_option("--dataset", in.dataset, "Dataset directory");
    i->add_option("--shard", in.shard, "Shard file");
    i->add_option("--sequence", in.sequence, "Sequence index to describe");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return kExitUsage;
    }

    try
    {
        if (*g)
            return cmd_gen(gen);
        if (*s)
            return cmd_stats(st);
        if (*t)
            return cmd_tokenize(tk);
        if (*b)
            return cmd_baseline(bl);
        return cmd_inspect(in);
    }
    catch (const UsageError &e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    catch (const ShardError &e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
