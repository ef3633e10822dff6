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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace csiforge
{
    /// Lower-case hex SHA-256 of a byte string.
    std::string sha256_hex(std::span<const std::uint8_t> bytes);

    inline std::string sha256_hex(std::string_view text)
    {
        return sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
    }
} // namespace csiforge
