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

#include "csiforge/config.hpp"
#include "csiforge/records.hpp"
#include "csiforge/types.hpp"

#include <random>

namespace csiforge::test
{
    using TestRng = std::mt19937_64;

    inline cd gauss_c(TestRng &rng)
    {
        std::normal_distribution<double> n(0.0, std::sqrt(0.5));
        return {n(rng), n(rng)};
    }

    inline CMatrix random_complex(int rows, int cols, TestRng &rng)
    {
        CMatrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = gauss_c(rng);
        return m;
    }

    /// A A^H / cols plus a small ridge; Hermitian positive definite.
    inline CMatrix random_hpd(int n, TestRng &rng, int cols = 0)
    {
        const CMatrix a = random_complex(n, cols > 0 ? cols : n + 2, rng);
        return a * a.adjoint() / double(a.cols()) + 1e-3 * CMatrix::Identity(n, n);
    }

    /// The reference link of the estimator checks: B=100, M=12, N_T=4, N_R=2, four pilot symbols.
    inline SimConfig reference_config(ChannelType type = ChannelType::UMi, double snr_db = 30.0)
    {
        SimConfig cfg;
        cfg.channel_type = type;
        cfg.carrier_hz = 3.5e9;
        cfg.subcarrier_spacing_hz = 30e3;
        cfg.snr_db = snr_db;
        cfg.speed_kmh = 30.0;
        cfg.n_tx = 4;
        cfg.n_rx = 2;
        cfg.n_groups = 100;
        cfg.group_size = 12;
        cfg.pilot_symbols = {2, 5, 8, 11};
        return cfg;
    }

    inline CMatrixF to_float(const CMatrix &m) { return m.cast<cf>(); }

    /// A record with native dimensions of the given link and random contents.
    inline FeatureRecord random_record(TestRng &rng, int n_rx = 4, int n_tx = 8, int n_groups = 100, int n_pilots = 4,
                                       int rank = 2)
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        FeatureRecord r;
        r.channel_type = static_cast<ChannelType>(rng() % 3);
        r.n_subcarriers = static_cast<std::uint32_t>(n_groups * 12);
        r.config_id = rng();
        r.slot_index = static_cast<std::uint16_t>(rng() % 100);
        r.noise_covariance = to_float(random_hpd(n_rx, rng));
        r.freq_correlation = to_float(random_complex(n_groups, n_groups, rng));
        r.time_covariance = to_float(random_hpd(n_pilots, rng) * 50.0);
        r.time_correlation = to_float(random_complex(n_pilots, n_pilots, rng));
        r.delay_center_s = u(rng) * 1e-6;
        r.delay_length_s = u(rng) * 5e-7;
        r.doppler_width_hz = u(rng) * 600.0;
        CMatrix w = random_complex(n_tx, rank, rng);
        r.precoder = to_float(w / w.norm());
        r.rank = static_cast<std::uint8_t>(rank);
        r.spectral_efficiency = u(rng) * 10.0;
        return r;
    }

    inline SequenceRecord random_sequence(TestRng &rng, std::uint64_t run_id = 0, int n_rx = 4, int n_tx = 8,
                                          int n_groups = 100, int n_pilots = 4)
    {
        SequenceRecord s;
        s.run_id = run_id;
        s.start_slot = static_cast<std::uint16_t>(5 * (rng() % 20));
        const std::uint64_t cid = rng();
        for (int q = 0; q < kSequenceLength; ++q)
        {
            s.records[q] = random_record(rng, n_rx, n_tx, n_groups, n_pilots, 1 + int(rng() % std::min(n_rx, n_tx)));
            s.records[q].config_id = cid;
            s.records[q].slot_index = static_cast<std::uint16_t>(s.start_slot + q);
        }
        return s;
    }
} // namespace csiforge::test
