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

#include "csiforge/shard.hpp"
#include "csiforge/bytes.hpp"

#include <array>
#include <fstream>
#include <limits>

#include <boost/crc.hpp>

namespace csiforge
{
    std::uint32_t crc32c(std::span<const std::uint8_t> bytes)
    {
        boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
        crc.process_bytes(bytes.data(), bytes.size());
        return crc.checksum();
    }

    namespace
    {
        constexpr std::array<std::uint8_t, 4> kShardMagic{0x43, 0x53, 0x46, 0x44}; // CSFD
        constexpr std::array<std::uint8_t, 4> kGenieMagic{0x43, 0x53, 0x46, 0x47}; // CSFG

        void put_matrix(ByteWriter &w, const CMatrixF &m)
        {
            if (m.rows() > std::numeric_limits<std::uint16_t>::max() || m.cols() > std::numeric_limits<std::uint16_t>::max())
                throw ShardError(ShardErrorKind::invalid_record, "Matrix too large for the shard format.");
            w.put(static_cast<std::uint16_t>(m.rows()));
            w.put(static_cast<std::uint16_t>(m.cols()));
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                {
                    w.put(m(r, c).real());
                    w.put(m(r, c).imag());
                }
        }

        CMatrixF get_matrix(ByteReader &r)
        {
            const auto rows = r.get<std::uint16_t>();
            const auto cols = r.get<std::uint16_t>();
            CMatrixF m(rows, cols);
            for (Eigen::Index a = 0; a < rows; ++a)
                for (Eigen::Index b = 0; b < cols; ++b)
                {
                    const float re = r.get<float>();
                    const float im = r.get<float>();
                    m(a, b) = cf(re, im);
                }
            return m;
        }

        void put_record(ByteWriter &w, const FeatureRecord &rec)
        {
            w.put(static_cast<std::uint8_t>(rec.channel_type));
            w.put(rec.n_subcarriers);
            w.put(rec.config_id);
            w.put(rec.slot_index);
            put_matrix(w, rec.noise_covariance);
            put_matrix(w, rec.freq_correlation);
            put_matrix(w, rec.time_covariance);
            put_matrix(w, rec.time_correlation);
            w.put(rec.delay_center_s);
            w.put(rec.delay_length_s);
            w.put(rec.doppler_width_hz);
            put_matrix(w, rec.precoder);
            w.put(rec.rank);
            w.put(rec.spectral_efficiency);
        }

        FeatureRecord get_record(ByteReader &r)
        {
            FeatureRecord rec;
            const auto type = r.get<std::uint8_t>();
            if (type > 2)
                throw std::invalid_argument("channel type " + std::to_string(type));
            rec.channel_type = static_cast<ChannelType>(type);
            rec.n_subcarriers = r.get<std::uint32_t>();
            rec.config_id = r.get<std::uint64_t>();
            rec.slot_index = r.get<std::uint16_t>();
            rec.noise_covariance = get_matrix(r);
            rec.freq_correlation = get_matrix(r);
            rec.time_covariance = get_matrix(r);
            rec.time_correlation = get_matrix(r);
            rec.delay_center_s = r.get<double>();
            rec.delay_length_s = r.get<double>();
            rec.doppler_width_hz = r.get<double>();
            rec.precoder = get_matrix(r);
            rec.rank = r.get<std::uint8_t>();
            rec.spectral_efficiency = r.get<double>();
            return rec;
        }

        void put_genie(ByteWriter &w, const GenieRecord &g)
        {
            w.put(g.run_id);
            w.put(g.start_slot);
            w.put(g.delay_center_s);
            w.put(g.delay_length_s);
            w.put(g.doppler_width_hz);
            w.put(g.snr_db);
            w.put(g.delay_bin_s);
            for (double v : g.raw_mse)
                w.put(v);
            for (double v : g.denoised_mse)
                w.put(v);
        }

        GenieRecord get_genie(ByteReader &r)
        {
            GenieRecord g;
            g.run_id = r.get<std::uint64_t>();
            g.start_slot = r.get<std::uint16_t>();
            g.delay_center_s = r.get<double>();
            g.delay_length_s = r.get<double>();
            g.doppler_width_hz = r.get<double>();
            g.snr_db = r.get<double>();
            g.delay_bin_s = r.get<double>();
            for (double &v : g.raw_mse)
                v = r.get<double>();
            for (double &v : g.denoised_mse)
                v = r.get<double>();
            return g;
        }

        // Container shared by both file kinds: magic, u16 version, u32 count, then per entry
        // u32 body length, body, u32 CRC-32C of the body.
        template <class T, class PutFn>
        std::vector<std::uint8_t> encode_container(const std::array<std::uint8_t, 4> &magic, std::span<const T> items,
                                                   PutFn put)
        {
            ByteWriter w;
            w.put_bytes(magic);
            w.put(kShardVersion);
            w.put(static_cast<std::uint32_t>(items.size()));
            for (const auto &item : items)
            {
                ByteWriter body;
                put(body, item);
                w.put(static_cast<std::uint32_t>(body.size()));
                w.put_bytes(body.bytes());
                w.put(crc32c(body.bytes()));
            }
            return w.take();
        }

        template <class T, class GetFn>
        std::vector<T> decode_container(const std::array<std::uint8_t, 4> &magic, std::span<const std::uint8_t> bytes,
                                        const std::string &name, GetFn get)
        {
            ByteReader r(bytes);
            std::uint32_t count = 0;
            try
            {
                const auto m = r.get_bytes(4);
                if (!std::equal(m.begin(), m.end(), magic.begin()))
                    throw ShardError(ShardErrorKind::bad_magic, name + ": bad magic bytes");
                const auto version = r.get<std::uint16_t>();
                if (version != kShardVersion)
                    throw ShardError(ShardErrorKind::bad_version,
                                     name + ": unsupported format version " + std::to_string(version));
                count = r.get<std::uint32_t>();
            }
            catch (const ByteUnderflow &)
            {
                throw ShardError(ShardErrorKind::truncated, name + ": truncated header");
            }

            std::vector<T> out;
            out.reserve(std::min<std::size_t>(count, 1u << 16));
            for (std::uint32_t s = 0; s < count; ++s)
            {
                const std::string where = name + ": sequence " + std::to_string(s);
                std::span<const std::uint8_t> body;
                std::uint32_t stored_crc = 0;
                try
                {
                    const auto len = r.get<std::uint32_t>();
                    body = r.get_bytes(len);
                    stored_crc = r.get<std::uint32_t>();
                }
                catch (const ByteUnderflow &)
                {
                    throw ShardError(ShardErrorKind::truncated, where + " is truncated", s);
                }
                if (crc32c(body) != stored_crc)
                    throw ShardError(ShardErrorKind::checksum, where + " failed its CRC-32C check", s);

                ByteReader br(body);
                try
                {
                    out.push_back(get(br));
                }
                catch (const ByteUnderflow &)
                {
                    throw ShardError(ShardErrorKind::truncated, where + " body is shorter than its records", s);
                }
                catch (const std::invalid_argument &e)
                {
                    throw ShardError(ShardErrorKind::invalid_record, where + ": invalid " + e.what(), s);
                }
                if (br.remaining() != 0)
                    throw ShardError(ShardErrorKind::invalid_record, where + " has trailing bytes", s);
            }
            if (r.remaining() != 0)
                throw ShardError(ShardErrorKind::invalid_record, name + ": trailing bytes after the last sequence");
            return out;
        }
    } // namespace

    std::vector<std::uint8_t> encode_shard(std::span<const SequenceRecord> sequences)
    {
        return encode_container(kShardMagic, sequences, [](ByteWriter &w, const SequenceRecord &seq) {
            w.put(seq.run_id);
            w.put(seq.start_slot);
            for (const auto &rec : seq.records)
                put_record(w, rec);
        });
    }

    std::vector<SequenceRecord> decode_shard(std::span<const std::uint8_t> bytes, const std::string &name)
    {
        return decode_container<SequenceRecord>(kShardMagic, bytes, name, [](ByteReader &r) {
            SequenceRecord seq;
            seq.run_id = r.get<std::uint64_t>();
            seq.start_slot = r.get<std::uint16_t>();
            for (auto &rec : seq.records)
                rec = get_record(r);
            return seq;
        });
    }

    std::vector<std::uint8_t> encode_genie(std::span<const GenieRecord> entries)
    {
        return encode_container(kGenieMagic, entries, put_genie);
    }

    std::vector<GenieRecord> decode_genie(std::span<const std::uint8_t> bytes, const std::string &name)
    {
        return decode_container<GenieRecord>(kGenieMagic, bytes, name, get_genie);
    }

    std::vector<std::uint8_t> read_file(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ShardError(ShardErrorKind::io, path.string() + ": cannot open for reading");
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (in.bad())
            throw ShardError(ShardErrorKind::io, path.string() + ": read failed");
        return bytes;
    }

    void write_file(const std::filesystem::path &path, std::span<const std::uint8_t> bytes)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ShardError(ShardErrorKind::io, path.string() + ": cannot open for writing");
        out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw ShardError(ShardErrorKind::io, path.string() + ": write failed");
    }

    void write_shard(const std::filesystem::path &path, std::span<const SequenceRecord> sequences)
    {
        write_file(path, encode_shard(sequences));
    }

    std::vector<SequenceRecord> read_shard(const std::filesystem::path &path)
    {
        return decode_shard(read_file(path), path.string());
    }

    void write_genie(const std::filesystem::path &path, std::span<const GenieRecord> entries)
    {
        write_file(path, encode_genie(entries));
    }

    std::vector<GenieRecord> read_genie(const std::filesystem::path &path)
    {
        return decode_genie(read_file(path), path.string());
    }
} // namespace csiforge
