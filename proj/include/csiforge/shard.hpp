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

#include "csiforge/records.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace csiforge
{
    /// CRC-32C (Castagnoli), as used for per-sequence checksums.
    std::uint32_t crc32c(std::span<const std::uint8_t> bytes);

    enum class ShardErrorKind
    {
        io,
        bad_magic,
        bad_version,
        truncated,
        checksum,
        invalid_record,
    };

    class ShardError : public std::runtime_error
    {
      public:
        ShardError(ShardErrorKind kind, const std::string &what, long sequence_index = -1)
            : std::runtime_error(what), kind_(kind), sequence_index_(sequence_index)
        {
        }
        ShardErrorKind kind() const { return kind_; }
        /// Index of the offending sequence, or -1 for header/file level errors.
        long sequence_index() const { return sequence_index_; }

      private:
        ShardErrorKind kind_;
        long sequence_index_;
    };

    inline constexpr std::uint16_t kShardVersion = 1;

    // "CSFD" feature shards and "CSFG" genie sidecars. Layouts are documented in README.md.
    std::vector<std::uint8_t> encode_shard(std::span<const SequenceRecord> sequences);
    std::vector<SequenceRecord> decode_shard(std::span<const std::uint8_t> bytes, const std::string &name = "<memory>");

    std::vector<std::uint8_t> encode_genie(std::span<const GenieRecord> entries);
    std::vector<GenieRecord> decode_genie(std::span<const std::uint8_t> bytes, const std::string &name = "<memory>");

    void write_shard(const std::filesystem::path &path, std::span<const SequenceRecord> sequences);
    std::vector<SequenceRecord> read_shard(const std::filesystem::path &path);

    void write_genie(const std::filesystem::path &path, std::span<const GenieRecord> entries);
    std::vector<GenieRecord> read_genie(const std::filesystem::path &path);

    /// Whole-file helpers shared by the readers.
    std::vector<std::uint8_t> read_file(const std::filesystem::path &path);
    void write_file(const std::filesystem::path &path, std::span<const std::uint8_t> bytes);
} // namespace csiforge
