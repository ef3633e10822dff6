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

#include "csiforge/dataset.hpp"
#include "csiforge/digest.hpp"
#include "csiforge/rng.hpp"
#include "csiforge/shard.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace csiforge
{
    void CampaignOptions::validate() const
    {
        if (n_configs < 1)
            throw std::invalid_argument("Number of configurations must be at least 1.");
        if (snr_draws < 1)
            throw std::invalid_argument("Number of SNR draws must be at least 1.");
        if (seq_len != kSequenceLength)
            throw std::invalid_argument("Sequence length must be " + std::to_string(kSequenceLength) + ".");
        if (slots_per_run < seq_len)
            throw std::invalid_argument("A run needs at least one full sequence of slots.");
        if (slots_per_run > 65535)
            throw std::invalid_argument("Slot indices are stored as 16-bit values.");
        if (!(noise_rho > -1.0 && noise_rho < 1.0))
            throw std::invalid_argument("Noise correlation must lie in (-1, 1).");
    }

    int resolve_threads(int requested)
    {
        if (requested > 0)
            return requested;
        if (const char *env = std::getenv("CSI_FORGE_THREADS"))
        {
            const int n = std::atoi(env);
            if (n > 0)
                return n;
        }
        return std::max(1u, std::thread::hardware_concurrency());
    }

    std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t config_index, int run_index)
    {
        return substream(master_seed, Stream::run, {config_index, static_cast<std::uint64_t>(run_index)});
    }

    RunOutput simulate_run(const SimConfig &base, std::uint64_t master_seed, std::uint64_t config_index, int run_index,
                           const CampaignOptions &options)
    {
        const std::uint64_t seed = run_seed(master_seed, config_index, run_index);
        SimConfig cfg = base;
        Rng snr_rng(substream(seed, Stream::snr));
        cfg.snr_db = std::uniform_real_distribution<double>(universe::snr_min_db, universe::snr_max_db)(snr_rng);
        cfg.seed = seed;
        cfg.noise_rho = options.noise_rho;
        cfg.validate();

        const ChannelRealization chan = generate_channel(cfg, options.slots_per_run, seed);
        const std::uint64_t run_id = config_index * static_cast<std::uint64_t>(options.snr_draws) + run_index;

        RunOutput out;
        const int n_seq = options.slots_per_run / options.seq_len;
        for (int q = 0; q < n_seq; ++q)
        {
            SequenceRecord seq;
            GenieRecord genie;
            seq.run_id = genie.run_id = run_id;
            seq.start_slot = genie.start_slot = static_cast<std::uint16_t>(q * options.seq_len);
            genie.delay_center_s = chan.genie_mu();
            genie.delay_length_s = chan.genie_len();
            genie.doppler_width_hz = chan.genie_w();
            genie.snr_db = cfg.snr_db;
            for (int s = 0; s < options.seq_len; ++s)
            {
                const int slot = q * options.seq_len + s;
                const PilotObservation obs = transmit_pilots(cfg, chan, slot, seed);
                PipelineResult res = run_pipeline(obs, options.pipeline);
                const CTensor<4> truth = chan.pilot_response(slot);
                genie.raw_mse[s] = channel_mse(raw_channel_estimate(obs.h_tilde, res.power.value), truth);
                genie.denoised_mse[s] = channel_mse(res.channel.h_hat, truth);
                genie.delay_bin_s = res.delay.bin_s;
                seq.records[s] = std::move(res.record);
            }
            out.sequences.push_back(std::move(seq));
            out.genie.push_back(genie);
        }
        return out;
    }

    namespace
    {
        // Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
        template <class Fn>
        void parallel_for(int n, int threads, Fn body)
        {
            threads = std::max(1, std::min(threads, n));
            if (threads == 1)
            {
                for (int i = 0; i < n; ++i)
                    body(i);
                return;
            }
            std::atomic<int> next{0};
            std::exception_ptr failure;
            std::mutex failure_mutex;
            {
                std::vector<std::jthread> pool;
                for (int t = 0; t < threads; ++t)
                    pool.emplace_back([&] {
                        for (int i = next++; i < n; i = next++)
                        {
                            try
                            {
                                body(i);
                            }
                            catch (...)
                            {
                                std::lock_guard lock(failure_mutex);
                                if (!failure)
                                    failure = std::current_exception();
                            }
                        }
                    });
            }
            if (failure)
                std::rethrow_exception(failure);
        }

        std::string shard_name(std::uint64_t config_index, const char *suffix)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "shards/shard-%05llu%s", static_cast<unsigned long long>(config_index),
                          suffix);
            return buf;
        }
    } // namespace

    DatasetManifest run_campaign(const CampaignOptions &options, const std::filesystem::path &out_dir)
    {
        options.validate();
        std::error_code ec;
        std::filesystem::create_directories(out_dir / "shards", ec);
        if (ec)
            throw ShardError(ShardErrorKind::io, (out_dir / "shards").string() + ": " + ec.message());

        DatasetManifest manifest;
        manifest.seed = options.master_seed;
        manifest.n_configs = options.n_configs;
        manifest.snr_draws = options.snr_draws;
        manifest.slots_per_run = options.slots_per_run;
        manifest.seq_len = options.seq_len;
        manifest.noise_rho = options.noise_rho;
        manifest.nfft_rule = options.pipeline.delay.rule == NfftRule::pilots ? "pilots" : "subcarriers";
        manifest.universe_hash = sha256_hex(universe::describe());

        const int threads = resolve_threads(options.threads);
        for (int c = 0; c < options.n_configs; ++c)
        {
            const SimConfig base = sample_config(options.master_seed, static_cast<std::uint64_t>(c));
            std::vector<RunOutput> runs(options.snr_draws);
            parallel_for(options.snr_draws, threads, [&](int r) {
                runs[r] = simulate_run(base, options.master_seed, static_cast<std::uint64_t>(c), r, options);
            });

            std::vector<SequenceRecord> sequences;
            std::vector<GenieRecord> genie;
            for (auto &run : runs)
            {
                std::move(run.sequences.begin(), run.sequences.end(), std::back_inserter(sequences));
                std::move(run.genie.begin(), run.genie.end(), std::back_inserter(genie));
            }

            ShardInfo info;
            info.path = shard_name(c, ".csfd");
            info.genie_path = shard_name(c, ".genie.csfd");
            info.sequences = sequences.size();
            info.config_index = static_cast<std::uint64_t>(c);
            info.config_id = base.id();
            write_shard(out_dir / info.path, sequences);
            write_genie(out_dir / info.genie_path, genie);
            manifest.total_sequences += info.sequences;
            manifest.shards.push_back(std::move(info));
        }
        return manifest;
    }

    // ---------- Manifests ----------

    json DatasetManifest::to_json() const
    {
        json shards_j = json::array();
        for (const auto &s : shards)
            shards_j.push_back({{"path", s.path},
                                {"genie_path", s.genie_path},
                                {"sequences", s.sequences},
                                {"config_index", s.config_index},
                                {"config_id", s.config_id}});
        return {{"format_version", format_version},
                {"seed", seed},
                {"n_configs", n_configs},
                {"snr_draws", snr_draws},
                {"slots_per_run", slots_per_run},
                {"seq_len", seq_len},
                {"nfft_rule", nfft_rule},
                {"noise_rho", noise_rho},
                {"universe_hash", universe_hash},
                {"shards", shards_j},
                {"counts", {{"total", total_sequences}, {"train", splits.train}, {"val", splits.val}, {"test", splits.test}}},
                {"norm_stats_digest", norm_stats_digest},
                {"std_convention", std_convention}};
    }

    DatasetManifest DatasetManifest::from_json(const json &j)
    {
        DatasetManifest m;
        m.format_version = j.at("format_version").get<int>();
        if (m.format_version != kDatasetFormatVersion)
            throw std::runtime_error("Unsupported dataset format version " + std::to_string(m.format_version));
        m.seed = j.at("seed").get<std::uint64_t>();
        m.n_configs = j.at("n_configs").get<int>();
        m.snr_draws = j.at("snr_draws").get<int>();
        m.slots_per_run = j.at("slots_per_run").get<int>();
        m.seq_len = j.at("seq_len").get<int>();
        m.nfft_rule = j.at("nfft_rule").get<std::string>();
        m.noise_rho = j.at("noise_rho").get<double>();
        m.universe_hash = j.at("universe_hash").get<std::string>();
        for (const auto &s : j.at("shards"))
            m.shards.push_back({s.at("path").get<std::string>(), s.at("genie_path").get<std::string>(),
                                s.at("sequences").get<std::uint64_t>(), s.at("config_index").get<std::uint64_t>(),
                                s.at("config_id").get<std::uint64_t>()});
        const auto &counts = j.at("counts");
        m.total_sequences = counts.at("total").get<std::uint64_t>();
        m.splits = {counts.at("train").get<std::uint64_t>(), counts.at("val").get<std::uint64_t>(),
                    counts.at("test").get<std::uint64_t>()};
        m.norm_stats_digest = j.at("norm_stats_digest").get<std::string>();
        m.std_convention = j.at("std_convention").get<std::string>();

        std::uint64_t sum = 0;
        for (const auto &s : m.shards)
            sum += s.sequences;
        if (sum != m.total_sequences)
            throw std::runtime_error("Manifest shard counts do not sum to the total.");
        return m;
    }

    std::string DatasetManifest::digest() const { return sha256_hex(to_json().dump()); }

    json SplitManifest::to_json() const
    {
        json refs_j = json::array();
        for (const auto &r : refs)
            refs_j.push_back({r.shard, r.index});
        return {{"split", name}, {"count", refs.size()}, {"sequences", refs_j}};
    }

    SplitManifest SplitManifest::from_json(const json &j)
    {
        SplitManifest s;
        s.name = j.at("split").get<std::string>();
        for (const auto &r : j.at("sequences"))
            s.refs.push_back({r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>()});
        if (j.at("count").get<std::size_t>() != s.refs.size())
            throw std::runtime_error("Split manifest count does not match its sequence list.");
        return s;
    }

    std::array<SplitManifest, 3> split_dataset(const DatasetManifest &manifest, std::array<int, 3> ratios,
                                               std::uint64_t seed)
    {
        if (ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0 || ratios[0] + ratios[1] + ratios[2] != 100)
            throw std::invalid_argument("Split ratios must be non-negative and sum to 100.");
        std::vector<SequenceRef> all;
        for (std::size_t s = 0; s < manifest.shards.size(); ++s)
            for (std::uint64_t q = 0; q < manifest.shards[s].sequences; ++q)
                all.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(q)});
        if (all.empty())
            throw std::invalid_argument("Cannot split an empty dataset.");

        Rng rng(substream(seed, Stream::split));
        std::shuffle(all.begin(), all.end(), rng);

        const std::size_t n = all.size();
        const std::size_t n_train = n * ratios[0] / 100;
        const std::size_t n_val = n * ratios[1] / 100;
        std::array<SplitManifest, 3> out{SplitManifest{"train", {}}, SplitManifest{"val", {}}, SplitManifest{"test", {}}};
        out[0].refs.assign(all.begin(), all.begin() + n_train);
        out[1].refs.assign(all.begin() + n_train, all.begin() + n_train + n_val);
        out[2].refs.assign(all.begin() + n_train + n_val, all.end());
        for (auto &s : out)
            std::sort(s.refs.begin(), s.refs.end());
        return out;
    }

    std::vector<SequenceRecord> load_sequences(const std::filesystem::path &dataset_dir,
                                               const DatasetManifest &manifest, std::span<const SequenceRef> refs)
    {
        std::vector<SequenceRecord> out;
        out.reserve(refs.size());
        std::uint32_t loaded = std::numeric_limits<std::uint32_t>::max();
        std::vector<SequenceRecord> cache;
        for (const auto &r : refs)
        {
            if (r.shard >= manifest.shards.size())
                throw std::out_of_range("Sequence reference names shard " + std::to_string(r.shard) +
                                        " which the manifest does not list.");
            if (r.shard != loaded)
            {
                cache = read_shard(dataset_dir / manifest.shards[r.shard].path);
                loaded = r.shard;
            }
            if (r.index >= cache.size())
                throw std::out_of_range("Sequence index past the end of its shard.");
            out.push_back(cache[r.index]);
        }
        return out;
    }

    // ---------- Normalization statistics ----------

    std::string_view scalar_feature_name(ScalarFeature f)
    {
        switch (f)
        {
        case ScalarFeature::n_subcarriers:
            return "K";
        case ScalarFeature::delay_center:
            return "mu_hat";
        case ScalarFeature::delay_length:
            return "len_hat";
        case ScalarFeature::doppler_width:
            return "w_hat";
        case ScalarFeature::rank:
            return "R_hat";
        case ScalarFeature::spectral_efficiency:
            return "G_hat";
        }
        return "?";
    }

    double scalar_value(const FeatureRecord &rec, ScalarFeature f)
    {
        switch (f)
        {
        case ScalarFeature::n_subcarriers:
            return rec.n_subcarriers;
        case ScalarFeature::delay_center:
            return rec.delay_center_s;
        case ScalarFeature::delay_length:
            return rec.delay_length_s;
        case ScalarFeature::doppler_width:
            return rec.doppler_width_hz;
        case ScalarFeature::rank:
            return rec.rank;
        case ScalarFeature::spectral_efficiency:
            return rec.spectral_efficiency;
        }
        return 0.0;
    }

    NormStats compute_norm_stats(std::span<const SequenceRecord> train)
    {
        if (train.empty())
            throw std::invalid_argument("Normalization statistics need a non-empty training split.");
        NormStats ns;
        ns.n_records = train.size() * kSequenceLength;
        for (auto f : kScalarFeatures)
        {
            double sum = 0.0;
            for (const auto &seq : train)
                for (const auto &rec : seq.records)
                    sum += scalar_value(rec, f);
            const double mean = sum / static_cast<double>(ns.n_records);
            double ss = 0.0;
            for (const auto &seq : train)
                for (const auto &rec : seq.records)
                {
                    const double d = scalar_value(rec, f) - mean;
                    ss += d * d;
                }
            const double sd = std::sqrt(ss / static_cast<double>(ns.n_records));
            ns.stats[static_cast<std::size_t>(f)] = {mean, std::max(sd, kStdFloor)};
        }
        return ns;
    }

    namespace
    {
        json stats_body(const NormStats &ns)
        {
            json features = json::object();
            for (auto f : kScalarFeatures)
                features[std::string(scalar_feature_name(f))] = {{"mean", ns.at(f).mean}, {"std", ns.at(f).std}};
            return {{"features", features}, {"n_records", ns.n_records}, {"std_convention", "population"}};
        }
    } // namespace

    std::string NormStats::digest() const { return sha256_hex(stats_body(*this).dump()); }

    json NormStats::to_json() const
    {
        json j = stats_body(*this);
        j["digest"] = digest();
        return j;
    }

    NormStats NormStats::from_json(const json &j)
    {
        NormStats ns;
        ns.n_records = j.at("n_records").get<std::uint64_t>();
        const auto &features = j.at("features");
        for (auto f : kScalarFeatures)
        {
            const auto name = std::string(scalar_feature_name(f));
            if (!features.contains(name))
                throw std::runtime_error("Normalization statistics lack feature " + name);
            const auto &e = features.at(name);
            ns.stats[static_cast<std::size_t>(f)] = {e.at("mean").get<double>(), e.at("std").get<double>()};
        }
        if (j.contains("digest") && j.at("digest").get<std::string>() != ns.digest())
            throw std::runtime_error("Normalization statistics digest mismatch.");
        return ns;
    }

    json read_json(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ShardError(ShardErrorKind::io, path.string() + ": cannot open for reading");
        try
        {
            return json::parse(in);
        }
        catch (const json::exception &e)
        {
            throw ShardError(ShardErrorKind::invalid_record, path.string() + ": " + e.what());
        }
    }

    void write_json(const std::filesystem::path &path, const json &j)
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out)
            throw ShardError(ShardErrorKind::io, path.string() + ": cannot open for writing");
        out << j.dump(2) << '\n';
        if (!out)
            throw ShardError(ShardErrorKind::io, path.string() + ": write failed");
    }

    // ---------- End-to-end generation ----------

    void validate_generation(const CampaignOptions &options, std::array<int, 3> ratios)
    {
        options.validate();
        if (ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0 || ratios[0] + ratios[1] + ratios[2] != 100)
            throw std::invalid_argument("Split ratios must be non-negative and sum to 100.");
        const std::uint64_t expected = static_cast<std::uint64_t>(options.n_configs) * options.snr_draws *
                                       static_cast<std::uint64_t>(options.slots_per_run / options.seq_len);
        if (expected * static_cast<std::uint64_t>(ratios[0]) / 100 == 0)
            throw std::invalid_argument("Campaign of " + std::to_string(expected) +
                                        " sequences leaves the training split empty.");
    }

    DatasetManifest generate_dataset(const CampaignOptions &options, const std::filesystem::path &out_dir,
                                     std::array<int, 3> ratios)
    {
        validate_generation(options, ratios);
        DatasetManifest manifest = run_campaign(options, out_dir);
        const auto splits = split_dataset(manifest, ratios, options.master_seed);
        manifest.splits = {splits[0].refs.size(), splits[1].refs.size(), splits[2].refs.size()};

        std::error_code ec;
        std::filesystem::create_directories(out_dir / "splits", ec);
        if (ec)
            throw ShardError(ShardErrorKind::io, (out_dir / "splits").string() + ": " + ec.message());
        for (const auto &s : splits)
            write_json(out_dir / "splits" / (s.name + ".json"), s.to_json());

        const auto train = load_sequences(out_dir, manifest, splits[0].refs);
        const NormStats stats = compute_norm_stats(train);
        manifest.norm_stats_digest = stats.digest();
        write_json(out_dir / "norm_stats.json", stats.to_json());
        write_json(out_dir / "manifest.json", manifest.to_json());
        return manifest;
    }

    DatasetManifest read_manifest(const std::filesystem::path &dataset_dir)
    {
        const auto path = dataset_dir / "manifest.json";
        try
        {
            return DatasetManifest::from_json(read_json(path));
        }
        catch (const json::exception &e)
        {
            throw ShardError(ShardErrorKind::invalid_record, path.string() + ": " + e.what());
        }
        catch (const ShardError &)
        {
            throw;
        }
        catch (const std::runtime_error &e)
        {
            throw ShardError(ShardErrorKind::invalid_record, path.string() + ": " + e.what());
        }
    }

    SplitManifest read_split(const std::filesystem::path &dataset_dir, std::string_view name)
    {
        const auto path = dataset_dir / "splits" / (std::string(name) + ".json");
        try
        {
            return SplitManifest::from_json(read_json(path));
        }
        catch (const json::exception &e)
        {
            throw ShardError(ShardErrorKind::invalid_record, path.string() + ": " + e.what());
        }
    }

    std::vector<SequenceRecord> load_all_sequences(const std::filesystem::path &dataset_dir,
                                                   const DatasetManifest &manifest)
    {
        std::vector<SequenceRecord> out;
        for (const auto &shard : manifest.shards)
        {
            auto seqs = read_shard(dataset_dir / shard.path);
            if (seqs.size() != shard.sequences)
                throw ShardError(ShardErrorKind::invalid_record,
                                 shard.path + ": holds " + std::to_string(seqs.size()) +
                                     " sequences but the manifest lists " + std::to_string(shard.sequences));
            std::move(seqs.begin(), seqs.end(), std::back_inserter(out));
        }
        return out;
    }

    namespace
    {
        struct ErrorAccumulator
        {
            double sum_abs = 0.0;
            std::uint64_t n = 0;
            std::uint64_t hits = 0;

            void add(double abs_err, bool hit)
            {
                sum_abs += abs_err;
                ++n;
                hits += hit ? 1 : 0;
            }
            json to_json(const char *hit_name) const
            {
                return {{"mean_abs", n ? sum_abs / static_cast<double>(n) : 0.0},
                        {hit_name, n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0},
                        {"n", n}};
            }
        };

        struct FeatureErrors
        {
            ErrorAccumulator mu_bins, len_bins, w_hz;
        };

        double nearest_grid_point(std::span<const double> grid, double w)
        {
            double best = grid.front();
            for (double g : grid)
                if (std::abs(g - w) < std::abs(best - w))
                    best = g;
            return best;
        }
    } // namespace

    json baseline_report(const std::filesystem::path &dataset_dir, const DatasetManifest &manifest, double high_snr_db)
    {
        if (manifest.total_sequences == 0)
            throw ShardError(ShardErrorKind::invalid_record, "Dataset holds no sequences.");
        const std::vector<double> grid = default_doppler_grid();
        FeatureErrors all, high;
        double raw_sum = 0.0, den_sum = 0.0;
        std::uint64_t improved = 0, slots = 0;
        std::map<int, std::uint64_t> ranks;

        for (const auto &shard : manifest.shards)
        {
            const auto seqs = read_shard(dataset_dir / shard.path);
            if (shard.genie_path.empty() || !std::filesystem::exists(dataset_dir / shard.genie_path))
                throw ShardError(ShardErrorKind::io, shard.path + ": genie sidecar is missing");
            const auto genie = read_genie(dataset_dir / shard.genie_path);
            if (genie.size() != seqs.size())
                throw ShardError(ShardErrorKind::invalid_record, shard.genie_path + ": entry count disagrees with its shard");
            for (std::size_t q = 0; q < seqs.size(); ++q)
            {
                const auto &g = genie[q];
                if (g.run_id != seqs[q].run_id || g.start_slot != seqs[q].start_slot)
                    throw ShardError(ShardErrorKind::invalid_record, shard.genie_path + ": entry does not match its sequence",
                                     static_cast<long>(q));
                const double w_ref = nearest_grid_point(grid, g.doppler_width_hz);
                for (int s = 0; s < kSequenceLength; ++s)
                {
                    const auto &rec = seqs[q].records[s];
                    const double mu_err = std::abs(rec.delay_center_s - g.delay_center_s) / g.delay_bin_s;
                    const double len_err = std::abs(rec.delay_length_s - g.delay_length_s) / g.delay_bin_s;
                    const double w_err = std::abs(rec.doppler_width_hz - g.doppler_width_hz);
                    const bool w_hit = rec.doppler_width_hz == w_ref;
                    for (FeatureErrors *fe : {&all, g.snr_db >= high_snr_db ? &high : nullptr})
                    {
                        if (!fe)
                            continue;
                        fe->mu_bins.add(mu_err, mu_err <= 2.0);
                        fe->len_bins.add(len_err, len_err <= 4.0);
                        fe->w_hz.add(w_err, w_hit);
                    }
                    raw_sum += g.raw_mse[s];
                    den_sum += g.denoised_mse[s];
                    improved += g.denoised_mse[s] < g.raw_mse[s] ? 1 : 0;
                    ++slots;
                    ++ranks[rec.rank];
                }
            }
        }

        auto errors_json = [](const FeatureErrors &fe) {
            return json{{"mu_hat_bins", fe.mu_bins.to_json("within_2_bins")},
                        {"len_hat_bins", fe.len_bins.to_json("within_4_bins")},
                        {"w_hat_hz", fe.w_hz.to_json("nearest_grid_rate")}};
        };
        json hist = json::object();
        for (auto [r, n] : ranks)
            hist[std::to_string(r)] = n;
        const double raw_mean = raw_sum / static_cast<double>(slots);
        const double den_mean = den_sum / static_cast<double>(slots);
        return {{"slots", slots},
                {"sequences", manifest.total_sequences},
                {"high_snr_db", high_snr_db},
                {"estimator_error", errors_json(all)},
                {"estimator_error_high_snr", errors_json(high)},
                {"denoising",
                 {{"raw_mse", raw_mean},
                  {"denoised_mse", den_mean},
                  {"gain_db", den_mean > 0.0 ? 10.0 * std::log10(raw_mean / den_mean) : 0.0},
                  {"improved_fraction", static_cast<double>(improved) / static_cast<double>(slots)}}},
                {"rank_histogram", hist}};
    }
} // namespace csiforge
