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

#include "../support.hpp"

#include "csiforge/bytes.hpp"
#include "csiforge/dataset.hpp"
#include "csiforge/digest.hpp"
#include "csiforge/shard.hpp"

#include "doctest.h"

#include <set>

#include <unistd.h>

using namespace csiforge;
using namespace csiforge::test;
namespace fs = std::filesystem;

namespace
{
    struct TempDir
    {
        fs::path path;
        TempDir()
        {
            static int counter = 0;
            path = fs::temp_directory_path() /
                   ("csiforge-unit-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
            fs::remove_all(path);
            fs::create_directories(path);
        }
        ~TempDir() { fs::remove_all(path); }
    };

    // Byte offset of sequence q's length prefix inside an encoded container.
    std::size_t entry_offset(const std::vector<std::uint8_t> &bytes, std::size_t q)
    {
        std::size_t off = 4 + 2 + 4;
        for (std::size_t i = 0; i < q; ++i)
        {
            ByteReader r{std::span<const std::uint8_t>(bytes).subspan(off, 4)};
            off += 4 + r.get<std::uint32_t>() + 4;
        }
        return off;
    }

    ShardErrorKind decode_error(const std::vector<std::uint8_t> &bytes, long *index = nullptr)
    {
        try
        {
            decode_shard(bytes);
        }
        catch (const ShardError &e)
        {
            if (index)
                *index = e.sequence_index();
            return e.kind();
        }
        FAIL("decode succeeded");
        return ShardErrorKind::io;
    }

    DatasetManifest synthetic_manifest(std::vector<std::uint64_t> counts)
    {
        DatasetManifest m;
        for (std::size_t s = 0; s < counts.size(); ++s)
        {
            m.shards.push_back({"shards/s" + std::to_string(s), "", counts[s], s, s});
            m.total_sequences += counts[s];
        }
        return m;
    }

    SequenceRecord with_scalar(double mu)
    {
        SequenceRecord s;
        for (auto &r : s.records)
            r.delay_center_s = mu;
        return s;
    }
} // namespace

TEST_SUITE("shard")
{
    TEST_CASE("crc32c check value")
    {
        const std::string s = "123456789";
        CHECK(crc32c(std::span(reinterpret_cast<const std::uint8_t *>(s.data()), s.size())) == 0xE3069283u);
    }

    TEST_CASE("sha256 check value")
    {
        CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    TEST_CASE("round trip is exact")
    {
        TestRng rng(1);
        std::vector<SequenceRecord> seqs;
        for (int i = 0; i < 160; ++i)
            seqs.push_back(random_sequence(rng, i, 1 + int(rng() % 4), 4 * (1 + int(rng() % 2)),
                                           25 * (1 + int(rng() % 4)), 2 + int(rng() % 3)));
        const auto bytes = encode_shard(seqs);
        CHECK(bytes[0] == 0x43);
        CHECK(bytes[1] == 0x53);
        CHECK(bytes[2] == 0x46);
        CHECK(bytes[3] == 0x44);
        const auto back = decode_shard(bytes);
        REQUIRE(back.size() == seqs.size());
        for (std::size_t i = 0; i < seqs.size(); ++i)
            CHECK(back[i] == seqs[i]);
        CHECK(encode_shard(back) == bytes);
    }

    TEST_CASE("empty shard")
    {
        const auto bytes = encode_shard({});
        CHECK(bytes.size() == 10);
        CHECK(decode_shard(bytes).empty());
    }

    TEST_CASE("distinct errors")
    {
        TestRng rng(2);
        std::vector<SequenceRecord> seqs{random_sequence(rng, 0, 2, 4, 25, 2), random_sequence(rng, 1, 2, 4, 25, 2),
                                         random_sequence(rng, 2, 2, 4, 25, 2)};
        const auto good = encode_shard(seqs);

        auto bad = good;
        bad[0] = 'X';
        CHECK(decode_error(bad) == ShardErrorKind::bad_magic);

        bad = good;
        bad[4] = 9;
        CHECK(decode_error(bad) == ShardErrorKind::bad_version);

        bad = good;
        bad.resize(good.size() - 7);
        long idx = -1;
        CHECK(decode_error(bad, &idx) == ShardErrorKind::truncated);
        CHECK(idx == 2);

        bad = good;
        bad[entry_offset(good, 1) + 4 + 20] ^= 0x40;
        idx = -1;
        CHECK(decode_error(bad, &idx) == ShardErrorKind::checksum);
        CHECK(idx == 1);

        std::vector<std::uint8_t> genie = encode_genie({});
        CHECK(decode_error(genie) == ShardErrorKind::bad_magic);
    }

    TEST_CASE("genie sidecar round trip")
    {
        std::vector<GenieRecord> g(3);
        for (int i = 0; i < 3; ++i)
        {
            g[i].run_id = i;
            g[i].start_slot = static_cast<std::uint16_t>(5 * i);
            g[i].delay_center_s = 1e-7 * i;
            g[i].raw_mse[2] = 0.5 + i;
        }
        CHECK(decode_genie(encode_genie(g)) == g);
    }

    TEST_CASE("files")
    {
        TempDir dir;
        TestRng rng(3);
        std::vector<SequenceRecord> seqs{random_sequence(rng)};
        write_shard(dir.path / "a.csfd", seqs);
        CHECK(read_shard(dir.path / "a.csfd") == seqs);
        try
        {
            read_shard(dir.path / "missing.csfd");
            FAIL("expected an error");
        }
        catch (const ShardError &e)
        {
            CHECK(e.kind() == ShardErrorKind::io);
            CHECK(std::string(e.what()).find("missing.csfd") != std::string::npos);
        }
    }
}

TEST_SUITE("splits and statistics")
{
    TEST_CASE("80/10/10 of 160")
    {
        const auto m = synthetic_manifest({160});
        const auto s = split_dataset(m, {80, 10, 10}, 7);
        CHECK(s[0].refs.size() == 128);
        CHECK(s[1].refs.size() == 16);
        CHECK(s[2].refs.size() == 16);
    }

    TEST_CASE("partition property")
    {
        const auto m = synthetic_manifest({40, 33, 87});
        const auto s = split_dataset(m, {70, 20, 10}, 3);
        std::set<SequenceRef> all;
        std::size_t total = 0;
        for (const auto &p : s)
        {
            total += p.refs.size();
            all.insert(p.refs.begin(), p.refs.end());
        }
        CHECK(total == 160);
        CHECK(all.size() == 160);
        CHECK(split_dataset(m, {70, 20, 10}, 3)[0].refs == s[0].refs);
        CHECK(split_dataset(m, {70, 20, 10}, 4)[0].refs != s[0].refs);
    }

    TEST_CASE("degenerate ratios and errors")
    {
        const auto m = synthetic_manifest({50});
        const auto s = split_dataset(m, {100, 0, 0}, 1);
        CHECK(s[0].refs.size() == 50);
        CHECK(s[1].refs.empty());
        CHECK(s[2].refs.empty());
        CHECK_THROWS_AS(split_dataset(m, {80, 10, 5}, 1), std::invalid_argument);
        CHECK_THROWS_AS(split_dataset(synthetic_manifest({}), {80, 10, 10}, 1), std::invalid_argument);
    }

    TEST_CASE("split manifest JSON")
    {
        const auto s = split_dataset(synthetic_manifest({10, 10}), {50, 25, 25}, 9);
        const auto back = SplitManifest::from_json(s[0].to_json());
        CHECK(back.name == "train");
        CHECK(back.refs == s[0].refs);
    }

    TEST_CASE("population statistics")
    {
        const std::vector<SequenceRecord> seqs{with_scalar(1e-6), with_scalar(3e-6)};
        const NormStats ns = compute_norm_stats(seqs);
        CHECK(ns.n_records == 10);
        CHECK(ns.at(ScalarFeature::delay_center).mean == doctest::Approx(2e-6));
        CHECK(ns.at(ScalarFeature::delay_center).std == doctest::Approx(1e-6));
        // Every other scalar is constant and floored.
        CHECK(ns.at(ScalarFeature::spectral_efficiency).std == kStdFloor);
        CHECK(compute_norm_stats(seqs).digest() == ns.digest());
        CHECK_THROWS_AS(compute_norm_stats({}), std::invalid_argument);
    }

    TEST_CASE("statistics JSON")
    {
        TestRng rng(4);
        std::vector<SequenceRecord> seqs{random_sequence(rng), random_sequence(rng)};
        const NormStats ns = compute_norm_stats(seqs);
        const NormStats back = NormStats::from_json(ns.to_json());
        CHECK(back.digest() == ns.digest());
        json j = ns.to_json();
        j["features"].erase("w_hat");
        CHECK_THROWS(NormStats::from_json(j));
        j = ns.to_json();
        j["features"]["K"]["mean"] = 1.0;
        CHECK_THROWS(NormStats::from_json(j)); // digest mismatch
    }
}

TEST_SUITE("campaign")
{
    TEST_CASE("small campaign is deterministic and well formed")
    {
        CampaignOptions opt;
        opt.master_seed = 7;
        opt.n_configs = 1;
        opt.snr_draws = 2;
        opt.slots_per_run = 10;
        opt.threads = 2;
        TempDir a, b;
        const auto ma = generate_dataset(opt, a.path);
        opt.threads = 1;
        const auto mb = generate_dataset(opt, b.path);
        CHECK(ma.total_sequences == 4);
        CHECK(ma.digest() == mb.digest());
        CHECK(read_file(a.path / ma.shards[0].path) == read_file(b.path / mb.shards[0].path));
        CHECK(read_file(a.path / ma.shards[0].genie_path) == read_file(b.path / mb.shards[0].genie_path));

        const auto seqs = load_all_sequences(a.path, ma);
        REQUIRE(seqs.size() == 4);
        const SimConfig cfg = sample_config(7, 0);
        std::set<std::uint64_t> runs;
        for (const auto &s : seqs)
        {
            runs.insert(s.run_id);
            for (int q = 0; q < kSequenceLength; ++q)
            {
                const auto &r = s.records[q];
                CHECK(r.config_id == cfg.id());
                CHECK(r.slot_index == s.start_slot + q);
                CHECK(r.n_subcarriers == std::uint32_t(cfg.n_subcarriers()));
                CHECK(r.noise_covariance.rows() == cfg.n_rx);
                CHECK(r.freq_correlation.rows() == cfg.n_groups);
                CHECK(r.time_covariance.rows() == cfg.n_pilot_symbols());
                CHECK(r.precoder.rows() == cfg.n_tx);
                CHECK(r.precoder.cols() == r.rank);
                CHECK(r.rank >= 1);
                CHECK(int(r.rank) <= std::min(cfg.n_rx, cfg.n_tx));
            }
        }
        CHECK(runs == std::set<std::uint64_t>{0, 1});

        const DatasetManifest back = read_manifest(a.path);
        CHECK(back.digest() == ma.digest());
        CHECK(back.std_convention == "population");
        const auto train = read_split(a.path, "train");
        const NormStats ns = compute_norm_stats(load_sequences(a.path, ma, train.refs));
        CHECK(ns.digest() == ma.norm_stats_digest);

        const json report = baseline_report(a.path, ma);
        CHECK(report.at("slots").get<int>() == 20);
        fs::remove(a.path / ma.shards[0].genie_path);
        CHECK_THROWS_AS(baseline_report(a.path, ma), ShardError);
    }

    TEST_CASE("run seeds are distinct")
    {
        std::set<std::uint64_t> seeds;
        for (std::uint64_t c = 0; c < 20; ++c)
            for (int r = 0; r < 8; ++r)
                seeds.insert(run_seed(7, c, r));
        CHECK(seeds.size() == 160);
    }

    TEST_CASE("options validation")
    {
        CampaignOptions opt;
        opt.n_configs = 0;
        CHECK_THROWS_AS(opt.validate(), std::invalid_argument);
        opt.n_configs = 1;
        opt.slots_per_run = 3;
        CHECK_THROWS_AS(opt.validate(), std::invalid_argument);

        opt.slots_per_run = 5;
        opt.snr_draws = 1; // one sequence: floor(0.8) = 0 training sequences
        CHECK_THROWS_AS(validate_generation(opt, kDefaultSplit), std::invalid_argument);
        CHECK_NOTHROW(validate_generation(opt, {100, 0, 0}));
        CHECK_THROWS_AS(validate_generation(opt, {50, 50, 1}), std::invalid_argument);
        opt.snr_draws = 8;
        CHECK_NOTHROW(validate_generation(opt, kDefaultSplit));
    }

    TEST_CASE("missing manifest")
    {
        TempDir d;
        CHECK_THROWS_AS(read_manifest(d.path), ShardError);
    }
}
