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

#include "csiforge/estimators.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace csiforge
{
    namespace
    {
        CMatrix hermitian_part(const CMatrix &a) { return 0.5 * (a + a.adjoint()); }
    } // namespace

    NoiseEstimate estimate_noise_covariance(const CTensor<3> &z_tilde)
    {
        const auto n_samples = z_tilde.dimension(0) * z_tilde.dimension(1);
        const int n_rx = static_cast<int>(z_tilde.dimension(2));
        if (n_samples == 0 || n_rx == 0)
            throw std::invalid_argument("Noise covariance needs at least one noise sample.");

        CMatrix c = CMatrix::Zero(n_rx, n_rx);
        CVector z(n_rx);
        for (Eigen::Index k = 0; k < z_tilde.dimension(0); ++k)
            for (Eigen::Index l = 0; l < z_tilde.dimension(1); ++l)
            {
                for (int i = 0; i < n_rx; ++i)
                    z(i) = z_tilde(k, l, i);
                c.noalias() += z * z.adjoint();
            }
        c /= static_cast<double>(n_samples);

        NoiseEstimate est;
        est.covariance = hermitian_part(c);
        est.covariance.diagonal() = est.covariance.diagonal().real().cast<cd>();
        est.sigma2 = est.covariance.diagonal().real();
        return est;
    }

    SignalPower estimate_signal_power(const CTensor<4> &h_tilde, const NoiseEstimate &noise)
    {
        const int n_rx = static_cast<int>(h_tilde.dimension(3));
        if (n_rx != noise.sigma2.size())
            throw std::invalid_argument("Pilot observation and noise estimate disagree on N_R.");
        const auto n = h_tilde.size();
        if (n == 0)
            throw std::invalid_argument("Signal power needs at least one pilot.");

        double energy = 0.0;
        for (Eigen::Index e = 0; e < n; ++e)
            energy += std::norm(h_tilde.data()[e]);
        // n = N_T B |S| N_R, so this is the per-antenna mean of ||h_tilde_j[m, l]||^2 / N_R.
        SignalPower p;
        p.raw = energy / static_cast<double>(n) - noise.sigma2.mean();
        p.value = std::max(p.raw, kPowerFloor);
        return p;
    }

    // ---------- Delay profile ----------

    int delay_fft_size(const SimConfig &cfg, const DelayOptions &options)
    {
        if (options.n_fft > 0)
        {
            if (options.n_fft < cfg.n_groups || (options.n_fft & (options.n_fft - 1)) != 0)
                throw std::invalid_argument("N_FFT must be a power of two no smaller than B.");
            return options.n_fft;
        }
        return options.rule == NfftRule::pilots ? next_pow2(cfg.n_groups) : next_pow2(cfg.n_subcarriers());
    }

    CircularWindow min_circular_cover(std::span<const int> set, int n)
    {
        if (set.empty())
            throw std::invalid_argument("Cannot cover an empty index set.");
        if (n < 1)
            throw std::invalid_argument("Circle size must be positive.");
        std::vector<int> d(set.begin(), set.end());
        for (int v : d)
            if (v < 0 || v >= n)
                throw std::out_of_range("Index outside [0, n).");
        std::sort(d.begin(), d.end());
        d.erase(std::unique(d.begin(), d.end()), d.end());

        // A shortest cover starts at some member and ends at its circular predecessor.
        const std::size_t cnt = d.size();
        CircularWindow best{d[0], d[cnt - 1], d[cnt - 1] - d[0] + 1};
        for (std::size_t s = 1; s < cnt; ++s)
        {
            const int start = d[s];
            const int end = d[s - 1];
            const int length = ((end - start) % n + n) % n + 1;
            if (length < best.length)
                best = {start, end, length};
        }
        return best;
    }

    CMatrix robust_frequency_correlation(double mu_s, double len_s, int n_groups, double pilot_spacing_hz)
    {
        CMatrix r(n_groups, n_groups);
        for (int a = 0; a < n_groups; ++a)
            for (int b = 0; b < n_groups; ++b)
            {
                const double d = static_cast<double>(a - b) * pilot_spacing_hz;
                r(a, b) = std::polar(sinc(len_s * d), -kTwoPi * mu_s * d);
            }
        return r;
    }

    DelayProfileEstimate estimate_delay_profile(const CTensor<4> &h_tilde, const NoiseEstimate &noise,
                                                const SimConfig &cfg, const DelayOptions &options)
    {
        const int n_tx = static_cast<int>(h_tilde.dimension(0));
        const int n_grp = static_cast<int>(h_tilde.dimension(1));
        const int n_sym = static_cast<int>(h_tilde.dimension(2));
        const int n_rx = static_cast<int>(h_tilde.dimension(3));
        if (n_grp != cfg.n_groups || n_rx != noise.sigma2.size())
            throw std::invalid_argument("Pilot observation does not match the configuration.");

        DelayProfileEstimate est;
        est.n_fft = delay_fft_size(cfg, options);
        const int nfft = est.n_fft;
        const double pilot_spacing = cfg.group_size * cfg.subcarrier_spacing_hz;
        est.bin_s = 1.0 / (pilot_spacing * nfft);
        est.profile = RMatrix::Zero(n_rx, nfft);
        est.mu_s.resize(n_rx);
        est.len_s.resize(n_rx);
        est.start.resize(n_rx);
        est.end.resize(n_rx);
        est.support.resize(n_rx);
        est.freq_correlation.resize(n_rx);

        Eigen::FFT<double> fft;
        fft.SetFlag(Eigen::FFT<double>::Unscaled);
        std::vector<cd> cfr(nfft), cir;

        // Scaling by 1/B puts a single on-bin tap at its own power.
        const double scale = 1.0 / n_grp;
        for (int i = 0; i < n_rx; ++i)
        {
            for (int j = 0; j < n_tx; ++j)
                for (int l = 0; l < n_sym; ++l)
                {
                    std::fill(cfr.begin(), cfr.end(), cd(0.0));
                    for (int m = 0; m < n_grp; ++m)
                        cfr[m] = h_tilde(j, m, l, i);
                    fft.inv(cir, cfr);
                    for (int n = 0; n < nfft; ++n)
                        est.profile(i, n) += std::norm(cir[n] * scale);
                }
            est.profile.row(i) /= static_cast<double>(n_tx * n_sym);

            const double threshold = 3.0 * noise.sigma2(i);
            auto &support = est.support[i];
            for (int n = 0; n < nfft; ++n)
                if (est.profile(i, n) > threshold)
                    support.push_back(n);

            CircularWindow win;
            if (support.empty())
            {
                Eigen::Index peak = 0;
                est.profile.row(i).maxCoeff(&peak);
                win = {static_cast<int>(peak), static_cast<int>(peak), 1};
            }
            else
                win = min_circular_cover(support, nfft);

            est.start[i] = win.start;
            est.end[i] = win.end;
            double center = win.start + 0.5 * (win.length - 1);
            center = std::fmod(center, static_cast<double>(nfft));
            if (center >= 0.5 * nfft)
                center -= nfft;
            est.mu_s(i) = center * est.bin_s;
            est.len_s(i) = win.length * est.bin_s;
            est.freq_correlation[i] = robust_frequency_correlation(est.mu_s(i), est.len_s(i), n_grp, pilot_spacing);
        }
        return est;
    }

    // ---------- Doppler spectrum ----------

    std::vector<double> default_doppler_grid(int count, double lo_hz, double hi_hz)
    {
        if (count < 1 || !(lo_hz > 0.0) || !(hi_hz >= lo_hz))
            throw std::invalid_argument("Doppler grid needs count >= 1 and 0 < lo <= hi.");
        std::vector<double> grid(count);
        if (count == 1)
        {
            grid[0] = lo_hz;
            return grid;
        }
        const double step = std::log(hi_hz / lo_hz) / (count - 1);
        for (int q = 0; q < count; ++q)
            grid[q] = lo_hz * std::exp(step * q);
        grid.back() = hi_hz;
        return grid;
    }

    RMatrix robust_time_correlation(double w_hz, std::span<const int> symbols, double symbol_duration_s)
    {
        const auto n = static_cast<Eigen::Index>(symbols.size());
        RMatrix r(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b)
                r(a, b) = sinc(w_hz * (symbols[a] - symbols[b]) * symbol_duration_s);
        return r;
    }

    CMatrix covariance_to_correlation(const CMatrix &c)
    {
        const auto n = c.rows();
        RVector d(n);
        for (Eigen::Index a = 0; a < n; ++a)
            d(a) = std::max(c(a, a).real(), kPowerFloor);
        CMatrix r(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b)
                r(a, b) = a == b ? cd(1.0) : c(a, b) / std::sqrt(d(a) * d(b));
        return hermitian_part(r);
    }

    double fit_doppler_width(const CMatrix &time_correlation, std::span<const double> grid,
                             std::span<const int> symbols, double symbol_duration_s)
    {
        if (grid.empty())
            throw std::invalid_argument("Doppler grid is empty.");
        double best_w = grid[0];
        double best_err = std::numeric_limits<double>::infinity();
        for (double w : grid)
        {
            const RMatrix model = robust_time_correlation(w, symbols, symbol_duration_s);
            const double err = (model.cast<cd>() - time_correlation).squaredNorm();
            if (err < best_err)
            {
                best_err = err;
                best_w = w;
            }
        }
        return best_w;
    }

    DopplerEstimate estimate_doppler(const CTensor<4> &h_tilde, const NoiseEstimate &noise, const SimConfig &cfg,
                                     std::span<const double> grid)
    {
        if (grid.empty())
            throw std::invalid_argument("Doppler grid is empty.");
        if (!std::is_sorted(grid.begin(), grid.end()))
            throw std::invalid_argument("Doppler grid must be sorted ascending.");

        const int n_tx = static_cast<int>(h_tilde.dimension(0));
        const int n_grp = static_cast<int>(h_tilde.dimension(1));
        const int n_sym = static_cast<int>(h_tilde.dimension(2));
        const int n_rx = static_cast<int>(h_tilde.dimension(3));
        if (n_sym != cfg.n_pilot_symbols() || n_rx != noise.sigma2.size())
            throw std::invalid_argument("Pilot observation does not match the configuration.");

        DopplerEstimate est;
        est.w_hz.resize(n_rx);
        const double t_sym = cfg.symbol_duration();
        CVector v(n_sym);
        for (int i = 0; i < n_rx; ++i)
        {
            CMatrix c = CMatrix::Zero(n_sym, n_sym);
            for (int j = 0; j < n_tx; ++j)
                for (int m = 0; m < n_grp; ++m)
                {
                    for (int l = 0; l < n_sym; ++l)
                        v(l) = h_tilde(j, m, l, i);
                    c.noalias() += v * v.adjoint();
                }
            c /= static_cast<double>(n_tx * n_grp);
            c.diagonal().array() -= noise.sigma2(i);
            c = hermitian_part(c);

            CMatrix r = covariance_to_correlation(c);
            const double w = fit_doppler_width(r, grid, cfg.pilot_symbols, t_sym);
            est.w_hz(i) = w;
            est.time_covariance.push_back(std::move(c));
            est.time_correlation.push_back(std::move(r));
            est.robust_time.push_back(robust_time_correlation(w, cfg.pilot_symbols, t_sym).cast<cd>());
        }
        return est;
    }

    // ---------- Robust MMSE ----------

    KroneckerWiener::KroneckerWiener(const CMatrix &r_time, const CMatrix &r_freq, double alpha)
    {
        if (alpha < 0.0)
            throw std::invalid_argument("Noise-to-signal ratio cannot be negative.");
        if (alpha == 0.0)
        {
            identity_ = true;
            return;
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> et(r_time), ef(r_freq);
        if (et.info() != Eigen::Success || ef.info() != Eigen::Success)
            throw std::runtime_error("Eigendecomposition of the correlation factors failed.");
        u_time_ = et.eigenvectors();
        u_freq_ = ef.eigenvectors();
        const RVector lt = et.eigenvalues().cwiseMax(0.0);
        const RVector lf = ef.eigenvalues().cwiseMax(0.0);
        gain_ = lf * lt.transpose();
        gain_ = gain_.array() / (gain_.array() + alpha);
    }

    CMatrix KroneckerWiener::apply(const CMatrix &x) const
    {
        if (identity_)
            return x;
        if (x.rows() != u_freq_.rows() || x.cols() != u_time_.rows())
            throw std::invalid_argument("Input does not match the Kronecker factor sizes.");
        CMatrix y = u_freq_.adjoint() * x * u_time_.conjugate();
        y.array() *= gain_.array().cast<cd>();
        return u_freq_ * y * u_time_.transpose();
    }

    CMatrix ChannelEstimate::at(int m, int l) const
    {
        const int n_rx = static_cast<int>(h_hat.dimension(2));
        const int n_tx = static_cast<int>(h_hat.dimension(3));
        CMatrix h(n_rx, n_tx);
        for (int i = 0; i < n_rx; ++i)
            for (int j = 0; j < n_tx; ++j)
                h(i, j) = h_hat(m, l, i, j);
        return h;
    }

    ChannelEstimate robust_channel_estimate(const CTensor<4> &h_tilde, const NoiseEstimate &noise, double p_hat,
                                            const DelayProfileEstimate &delay, const DopplerEstimate &doppler)
    {
        const int n_tx = static_cast<int>(h_tilde.dimension(0));
        const int n_grp = static_cast<int>(h_tilde.dimension(1));
        const int n_sym = static_cast<int>(h_tilde.dimension(2));
        const int n_rx = static_cast<int>(h_tilde.dimension(3));
        if (static_cast<int>(delay.freq_correlation.size()) != n_rx ||
            static_cast<int>(doppler.robust_time.size()) != n_rx || noise.sigma2.size() != n_rx)
            throw std::invalid_argument("Estimates disagree on the number of Rx antennas.");

        ChannelEstimate est;
        est.p_hat = p_hat;
        est.h_hat = CTensor<4>(n_grp, n_sym, n_rx, n_tx);
        est.h_hat.setZero();
        if (!(p_hat > 0.0))
            return est;

        const double inv_amp = 1.0 / std::sqrt(p_hat);
        CMatrix x(n_grp, n_sym);
        for (int i = 0; i < n_rx; ++i)
        {
            const KroneckerWiener filter(doppler.robust_time[i], delay.freq_correlation[i],
                                         std::max(noise.sigma2(i), 0.0) / p_hat);
            for (int j = 0; j < n_tx; ++j)
            {
                for (int m = 0; m < n_grp; ++m)
                    for (int l = 0; l < n_sym; ++l)
                        x(m, l) = h_tilde(j, m, l, i);
                const CMatrix y = filter.apply(x) * inv_amp;
                for (int m = 0; m < n_grp; ++m)
                    for (int l = 0; l < n_sym; ++l)
                        est.h_hat(m, l, i, j) = y(m, l);
            }
        }
        return est;
    }
} // namespace csiforge
