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
#include "csiforge/types.hpp"

#include <span>
#include <vector>

namespace csiforge
{
    /// Lower clamp applied to powers and diagonal variances that must stay positive.
    inline constexpr double kPowerFloor = 1e-9;

    struct NoiseEstimate
    {
        CMatrix covariance; // C_n hat, Hermitian [N_R, N_R]
        RVector sigma2;     // diagonal of the covariance
    };

    /// Sample covariance of the noise-only samples z_tilde [B N_Z, |S|, N_R].
    NoiseEstimate estimate_noise_covariance(const CTensor<3> &z_tilde);

    struct SignalPower
    {
        double value = kPowerFloor; // max(raw, kPowerFloor)
        double raw = 0.0;
    };

    /// Mean received pilot energy per Rx antenna minus the mean noise variance.
    SignalPower estimate_signal_power(const CTensor<4> &h_tilde, const NoiseEstimate &noise);

    // ---------- Delay profile ----------

    /// How the IDFT length is derived. `pilots` zero-pads the B-point comb CFR to the
    /// next power of two; `subcarriers` uses the next power of two of K = B M.
    enum class NfftRule
    {
        pilots,
        subcarriers,
    };

    struct DelayOptions
    {
        NfftRule rule = NfftRule::pilots;
        int n_fft = 0; // > 0 overrides the rule
    };

    int delay_fft_size(const SimConfig &cfg, const DelayOptions &options);

    /// Inclusive circular window [start, end] of `length` bins (end may be < start on wrap).
    struct CircularWindow
    {
        int start = 0;
        int end = 0;
        int length = 0;
        bool operator==(const CircularWindow &) const = default;
    };

    /// Shortest circular window over [0, n) containing every index of `set`.
    /// Ties go to the smallest start. Throws on an empty set or out-of-range index.
    CircularWindow min_circular_cover(std::span<const int> set, int n);

    /// Rectangular-delay-profile frequency correlation between comb pilots:
    /// [R]_{m1,m2} = exp(-j 2 pi mu d F) sinc(len d F), d = m1 - m2, F = pilot spacing in Hz.
    CMatrix robust_frequency_correlation(double mu_s, double len_s, int n_groups, double pilot_spacing_hz);

    struct DelayProfileEstimate
    {
        int n_fft = 0;
        double bin_s = 0.0;             // 1 / (M f_sc N_FFT)
        RVector mu_s;                   // per Rx antenna, signed delay in [-N_FFT/2, N_FFT/2) bins
        RVector len_s;                  // per Rx antenna
        std::vector<int> start;         // n_start per Rx antenna
        std::vector<int> end;           // n_end per Rx antenna
        RMatrix profile;                // [N_R, N_FFT] noisy delay profile
        std::vector<std::vector<int>> support; // D[i]
        std::vector<CMatrix> freq_correlation; // R_f,robust per Rx antenna, [B, B]
    };

    DelayProfileEstimate estimate_delay_profile(const CTensor<4> &h_tilde, const NoiseEstimate &noise,
                                                const SimConfig &cfg, const DelayOptions &options = {});

    // ---------- Doppler spectrum ----------

    /// log-spaced candidate widths; defaults cover 3 to 90 km/h at 2.6 / 3.5 GHz.
    std::vector<double> default_doppler_grid(int count = 64, double lo_hz = 1.0, double hi_hz = 1200.0);

    /// [R]_{l1,l2} = sinc(w (l1 - l2) T) over the given 1-based symbol numbers.
    RMatrix robust_time_correlation(double w_hz, std::span<const int> symbols, double symbol_duration_s);

    /// Correlation coefficients r_ij = c_ij / sqrt(c_ii c_jj) after flooring the diagonal.
    CMatrix covariance_to_correlation(const CMatrix &c);

    /// Grid point minimizing || R_t,robust(w) - r ||_F^2; ties to the smaller width.
    double fit_doppler_width(const CMatrix &time_correlation, std::span<const double> grid,
                             std::span<const int> symbols, double symbol_duration_s);

    struct DopplerEstimate
    {
        RVector w_hz;                          // per Rx antenna
        std::vector<CMatrix> time_covariance;  // C_time hat
        std::vector<CMatrix> time_correlation; // R_time hat
        std::vector<CMatrix> robust_time;      // R_t,robust(w hat)
    };

    DopplerEstimate estimate_doppler(const CTensor<4> &h_tilde, const NoiseEstimate &noise, const SimConfig &cfg,
                                     std::span<const double> grid);

    // ---------- Robust MMSE ----------

    /// Applies R (R + alpha I)^{-1} for R = R_time (x) R_freq through the eigenbases of the factors.
    class KroneckerWiener
    {
      public:
        KroneckerWiener(const CMatrix &r_time, const CMatrix &r_freq, double alpha);

        /// `x` holds one column per symbol (B x |S|), i.e. the stacked vector in column-major order.
        CMatrix apply(const CMatrix &x) const;

      private:
        CMatrix u_time_, u_freq_;
        RMatrix gain_; // [B, |S|]
        bool identity_ = false;
    };

    struct ChannelEstimate
    {
        CTensor<4> h_hat; // [B, |S|, N_R, N_T]
        double p_hat = 0.0;

        /// H hat[m, l] as an N_R x N_T matrix.
        CMatrix at(int m, int l) const;
    };

    ChannelEstimate robust_channel_estimate(const CTensor<4> &h_tilde, const NoiseEstimate &noise, double p_hat,
                                            const DelayProfileEstimate &delay, const DopplerEstimate &doppler);
} // namespace csiforge
