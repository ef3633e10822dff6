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

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace csiforge
{
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

    /// Little-endian byte sink.
    class ByteWriter
    {
      public:
        template <class T>
            requires std::is_arithmetic_v<T>
        void put(T value)
        {
            using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                                         std::conditional_t<sizeof(T) == 2, std::uint16_t,
                                                            std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                                               std::uint64_t>>>;
            U bits = std::bit_cast<U>(value);
            for (std::size_t b = 0; b < sizeof(U); ++b)
                buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
        }

        void put_bytes(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

        std::size_t size() const { return buf_.size(); }
        std::vector<std::uint8_t> &bytes() { return buf_; }
        std::vector<std::uint8_t> take() { return std::move(buf_); }

      private:
        std::vector<std::uint8_t> buf_;
    };

    struct ByteUnderflow : std::runtime_error
    {
        ByteUnderflow() : std::runtime_error("Unexpected end of data.") {}
    };

    /// Little-endian byte source over a borrowed buffer. Throws ByteUnderflow past the end.
    class ByteReader
    {
      public:
        explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

        template <class T>
            requires std::is_arithmetic_v<T>
        T get()
        {
            using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                                         std::conditional_t<sizeof(T) == 2, std::uint16_t,
                                                            std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                                               std::uint64_t>>>;
            need(sizeof(U));
            U bits = 0;
            for (std::size_t b = 0; b < sizeof(U); ++b)
                bits |= static_cast<U>(static_cast<U>(bytes_[pos_ + b]) << (8 * b));
            pos_ += sizeof(U);
            return std::bit_cast<T>(bits);
        }

        std::span<const std::uint8_t> get_bytes(std::size_t n)
        {
            need(n);
            auto s = bytes_.subspan(pos_, n);
            pos_ += n;
            return s;
        }

        std::size_t position() const { return pos_; }
        std::size_t remaining() const { return bytes_.size() - pos_; }

      private:
        void need(std::size_t n) const
        {
            if (bytes_.size() - pos_ < n)
                throw ByteUnderflow();
        }

        std::span<const std::uint8_t> bytes_;
        std::size_t pos_ = 0;
    };
} // namespace csiforge
