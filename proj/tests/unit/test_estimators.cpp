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

#include "../oracles.hpp"
#include "../support.hpp"

#include "csiforge/chansim.hpp"
#include "csiforge/estimators.hpp"

#include "doctest.h"

#include <numeric>

using namespace csiforge;
using namespace csiforge::test;

namespace
{
    CTensor<3> noise_tensor(const std::vector<CVector> &samples)
    {
        CTensor<3> z(static_cast<Eigen::Index>(samples.size()), 1, samples.front().size());
        for (std::size_t k = 0; k < samples.size(); ++k)
            for (Eigen::Index i = 0; i < samples[k].size(); ++i)
                z(static_cast<Eigen::Index>(k), 0, i) = samples[k](i);
        return z;
    }
} // namespace

TEST_SUITE("noise and power")
{
    TEST_CASE("zero input gives a zero covariance")
    {
        const auto est = estimate_noise_covariance(noise_tensor({CVector::Zero(2), CVector::Zero(2)}));
        CHECK(est.covariance.norm() == 0.0);
    }

    TEST_CASE("two unit vectors average to half the identity")
    {
        CVector e1 = CVector::Zero(2), e2 = CVector::Zero(2);
        e1(0) = 1.0;
        e2(1) = 1.0;
        const auto est = estimate_noise_covariance(noise_tensor({e1, e2}));
        CHECK((est.covariance - 0.5 * CMatrix::Identity(2, 2)).norm() < 1e-15);
        CHECK(est.sigma2(0) == doctest::Approx(0.5));
    }

    TEST_CASE("empty noise input is rejected")
    {
        CHECK_THROWS(estimate_noise_covariance(CTensor<3>(0, 1, 2)));
    }

    TEST_CASE("signal power arithmetic and clamp")
    {
        NoiseEstimate n;
        n.covariance = CMatrix::Identity(1, 1);
        n.sigma2 = RVector::Ones(1);
        CTensor<4> h(1, 1, 1, 1);
        h(0, 0, 0, 0) = cd(2.0, 0.0);
        auto p = estimate_signal_power(h, n);
        CHECK(p.raw == doctest::Approx(3.0));
        CHECK(p.value == doctest::Approx(3.0));
        h.setZero();
        p = estimate_signal_power(h, n);
        CHECK(p.raw == doctest::Approx(-1.0));
        CHECK(p.value == kPowerFloor);
    }

    TEST_CASE("noiseless power estimate approaches the channel power")
    {
        SimConfig c = reference_config();
        double ratio = 0.0;
        const int runs = 8;
        for (int r = 0; r < runs; ++r)
        {
            const auto ch = generate_channel(c, 1, 300 + r);
            const auto obs = transmit_pilots(c, ch, 0, 1, LinkBudget{1.0, 0.0, 0.0});
            NoiseEstimate n{CMatrix::Zero(2, 2), RVector::Zero(2)};
            ratio += estimate_signal_power(obs.h_tilde, n).value;
        }
        CHECK(std::abs(ratio / runs - 1.0) < 0.03);
    }
}

TEST_SUITE("delay profile")
{
    TEST_CASE("circular cover examples")
    {
        CHECK(min_circular_cover(std::vector<int>{3}, 16) == CircularWindow{3, 3, 1});
        CHECK(min_circular_cover(std::vector<int>{0, 1, 15}, 16) == CircularWindow{15, 1, 3});
        std::vector<int> all(16);
        std::iota(all.begin(), all.end(), 0);
        CHECK(min_circular_cover(all, 16) == CircularWindow{0, 15, 16});
        CHECK(min_circular_cover(std::vector<int>{0, 63}, 64) == CircularWindow{63, 0, 2});
        CHECK_THROWS(min_circular_cover(std::vector<int>{}, 16));
        CHECK_THROWS(min_circular_cover(std::vector<int>{16}, 16));
    }

    TEST_CASE("circular cover matches brute force")
    {
        TestRng rng(5);
        for (int trial = 0; trial < 500; ++trial)
        {
            const int n = 1 + int(rng() % 40);
            const int k = 1 + int(rng() % std::min(n, 6));
            std::vector<int> set;
            for (int i = 0; i < k; ++i)
                set.push_back(int(rng() % n));
            std::ranges::sort(set);
            set.erase(std::unique(set.begin(), set.end()), set.end());
            const auto got = min_circular_cover(set, n);
            const auto want = oracle::brute_force_cover(set, n);
            INFO("n=" << n << " trial " << trial);
            CHECK(got == want);
        }
    }

    TEST_CASE("FFT size rules")
    {
        SimConfig c = reference_config();
        CHECK(delay_fft_size(c, {}) == 128);
        CHECK(delay_fft_size(c, {NfftRule::subcarriers, 0}) == 2048);
        CHECK(delay_fft_size(c, {NfftRule::pilots, 256}) == 256);
        CHECK_THROWS(delay_fft_size(c, {NfftRule::pilots, 64}));
        CHECK_THROWS(delay_fft_size(c, {NfftRule::pilots, 200}));
    }

    TEST_CASE("robust frequency correlation")
    {
        const double f = 360e3;
        const CMatrix r = robust_frequency_correlation(100e-9, 200e-9, 10, f);
        CHECK((r - r.adjoint()).norm() < 1e-12);
        for (int m = 0; m < 10; ++m)
            CHECK(std::abs(r(m, m) - 1.0) < 1e-15);
        const cd want = std::polar(1.0, -kTwoPi * 100e-9 * 3 * f) * sinc(200e-9 * 3 * f);
        CHECK(std::abs(r(5, 2) - want) < 1e-12);
    }

    TEST_CASE("noiseless single tap on a bin")
    {
        SimConfig c = reference_config();
        const int nfft = delay_fft_size(c, {});
        const double bin = 1.0 / (c.group_size * c.subcarrier_spacing_hz * nfft);
        const int n0 = 9;
        // Flat-in-time tap at delay n0 bins, seen identically by every Tx antenna: h[m] = e^{-j2pi m n0 / N}.
        CTensor<4> h(c.n_tx, c.n_groups, c.n_pilot_symbols(), c.n_rx);
        for (int j = 0; j < c.n_tx; ++j)
            for (int m = 0; m < c.n_groups; ++m)
                for (int l = 0; l < c.n_pilot_symbols(); ++l)
                    for (int i = 0; i < c.n_rx; ++i)
                        h(j, m, l, i) = std::polar(1.0, -kTwoPi * m * n0 / nfft);
        NoiseEstimate n{0.1 * CMatrix::Identity(2, 2), RVector::Constant(2, 0.1)};
        const auto est = estimate_delay_profile(h, n, c);
        CHECK(est.n_fft == nfft);
        CHECK(est.bin_s == doctest::Approx(bin));
        for (int i = 0; i < c.n_rx; ++i)
        {
            CHECK(est.profile(i, n0) == doctest::Approx(1.0));
            REQUIRE(est.support[i] == std::vector<int>{n0});
            CHECK(est.start[i] == n0);
            CHECK(est.end[i] == n0);
            CHECK(est.mu_s(i) == doctest::Approx(n0 * bin));
            CHECK(est.len_s(i) == doctest::Approx(bin));
        }
    }

    TEST_CASE("empty support falls back to the strongest bin")
    {
        SimConfig c = reference_config();
        const int nfft = delay_fft_size(c, {});
        const double bin = 1.0 / (c.group_size * c.subcarrier_spacing_hz * nfft);
        CTensor<4> h(c.n_tx, c.n_groups, c.n_pilot_symbols(), c.n_rx);
        for (int j = 0; j < c.n_tx; ++j)
            for (int m = 0; m < c.n_groups; ++m)
                for (int l = 0; l < c.n_pilot_symbols(); ++l)
                    for (int i = 0; i < c.n_rx; ++i)
                        h(j, m, l, i) = std::polar(0.1, -kTwoPi * m * 20.0 / nfft);
        NoiseEstimate n{CMatrix::Identity(2, 2), RVector::Ones(2)};
        const auto est = estimate_delay_profile(h, n, c);
        for (int i = 0; i < c.n_rx; ++i)
        {
            CHECK(est.support[i].empty());
            CHECK(est.mu_s(i) == doctest::Approx(20 * bin));
            CHECK(est.len_s(i) == doctest::Approx(bin));
        }
    }

    TEST_CASE("wrapped support yields a short window and signed center")
    {
        SimConfig c = reference_config();
        const int nfft = delay_fft_size(c, {});
        CTensor<4> h(c.n_tx, c.n_groups, c.n_pilot_symbols(), c.n_rx);
        // Two on-bin taps at bins 0 and N-2: the cover is {N-2, N-1, 0}.
        for (int j = 0; j < c.n_tx; ++j)
            for (int m = 0; m < c.n_groups; ++m)
                for (int l = 0; l < c.n_pilot_symbols(); ++l)
                    for (int i = 0; i < c.n_rx; ++i)
                        h(j, m, l, i) = 1.0 + std::polar(1.0, -kTwoPi * m * (nfft - 2.0) / nfft);
        NoiseEstimate n{0.1 * CMatrix::Identity(2, 2), RVector::Constant(2, 0.1)};
        const auto est = estimate_delay_profile(h, n, c);
        CHECK(est.start[0] == nfft - 2);
        CHECK(est.end[0] == 0);
        CHECK(est.len_s(0) == doctest::Approx(3 * est.bin_s));
        CHECK(est.mu_s(0) == doctest::Approx(-1 * est.bin_s));
    }
}

TEST_SUITE("doppler")
{
    const std::vector<int> symbols{2, 5, 8, 11};
    const double T = 0.5e-3 / 14;

    TEST_CASE("zero width gives the all-ones matrix")
    {
        const RMatrix r = robust_time_correlation(0.0, symbols, T);
        CHECK((r - RMatrix::Ones(4, 4)).norm() == 0.0);
    }

    TEST_CASE("exact grid member is recovered")
    {
        const auto grid = default_doppler_grid();
        REQUIRE(grid.size() == 64);
        CHECK(grid.front() == doctest::Approx(1.0));
        CHECK(grid.back() == doctest::Approx(1200.0));
        for (std::size_t g = 0; g < grid.size(); g += 7)
        {
            const CMatrix r = robust_time_correlation(grid[g], symbols, T).cast<cd>();
            CHECK(fit_doppler_width(r, grid, symbols, T) == grid[g]);
        }
    }

    TEST_CASE("ties go to the smaller width")
    {
        // Both tiny widths reproduce the all-ones matrix exactly.
        const std::vector<double> grid{1e-30, 2e-30, 10.0};
        const CMatrix r = CMatrix::Ones(4, 4);
        CHECK(fit_doppler_width(r, grid, symbols, T) == 1e-30);
    }

    TEST_CASE("covariance to correlation")
    {
        CMatrix c(2, 2);
        c << 4.0, cd(1.0, 1.0), cd(1.0, -1.0), 1.0;
        const CMatrix r = covariance_to_correlation(c);
        CHECK(std::abs(r(0, 0) - 1.0) < 1e-15);
        CHECK(std::abs(r(0, 1) - cd(0.5, 0.5)) < 1e-15);
        c(1, 1) = -1.0; // floored
        CHECK(std::isfinite(covariance_to_correlation(c).norm()));
    }
}

TEST_SUITE("robust mmse")
{
    TEST_CASE("identity factors shrink by half")
    {
        const KroneckerWiener f(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3), 1.0);
        TestRng rng(3);
        const CMatrix x = random_complex(3, 2, rng);
        CHECK((f.apply(x) - 0.5 * x).norm() < 1e-14);
    }

    TEST_CASE("zero regularization is the identity")
    {
        TestRng rng(4);
        const KroneckerWiener f(random_hpd(2, rng, 1), random_hpd(4, rng, 1), 0.0);
        const CMatrix x = random_complex(4, 2, rng);
        CHECK((f.apply(x) - x).norm() == 0.0);
    }

    TEST_CASE("eigen path equals a dense solve")
    {
        TestRng rng(6);
        for (int trial = 0; trial < 50; ++trial)
        {
            const int b = 1 + int(rng() % 8);
            const int s = 1 + int(rng() % 4);
            const CMatrix rt = random_hpd(s, rng);
            const CMatrix rf = random_hpd(b, rng);
            const double alpha = std::pow(10.0, -2.0 + 3.0 * double(rng() % 1000) / 1000.0);
            const CMatrix x = random_complex(b, s, rng);
            const CMatrix want = oracle::dense_wiener(rt, rf, alpha, x);
            const CMatrix got = KroneckerWiener(rt, rf, alpha).apply(x);
            CHECK((got - want).norm() / want.norm() < 1e-6);
            CHECK((got - want).cwiseAbs().maxCoeff() < 1e-8);
        }
    }

    TEST_CASE("non-positive power gives a zero estimate")
    {
        SimConfig c = reference_config();
        c.n_groups = 8;
        const auto ch = generate_channel(c, 1, 1);
        const auto obs = transmit_pilots(c, ch, 0, 1);
        const auto noise = estimate_noise_covariance(obs.z_tilde);
        const auto delay = estimate_delay_profile(obs.h_tilde, noise, c);
        const auto dop = estimate_doppler(obs.h_tilde, noise, c, default_doppler_grid());
        const auto est = robust_channel_estimate(obs.h_tilde, noise, 0.0, delay, dop);
        double mx = 0.0;
        for (Eigen::Index e = 0; e < est.h_hat.size(); ++e)
            mx = std::max(mx, std::abs(est.h_hat.data()[e]));
        CHECK(mx == 0.0);
    }

    TEST_CASE("zero noise returns the scaled observation")
    {
        SimConfig c = reference_config();
        c.n_groups = 8;
        const auto ch = generate_channel(c, 1, 2);
        const auto obs = transmit_pilots(c, ch, 0, 2, LinkBudget{4.0, 0.0, 0.0});
        NoiseEstimate noise{CMatrix::Zero(2, 2), RVector::Zero(2)};
        const double p = 4.0;
        const auto delay = estimate_delay_profile(obs.h_tilde, noise, c);
        const auto dop = estimate_doppler(obs.h_tilde, noise, c, default_doppler_grid());
        const auto est = robust_channel_estimate(obs.h_tilde, noise, p, delay, dop);
        double diff = 0.0;
        for (int j = 0; j < c.n_tx; ++j)
            for (int m = 0; m < c.n_groups; ++m)
                for (int l = 0; l < c.n_pilot_symbols(); ++l)
                    for (int i = 0; i < c.n_rx; ++i)
                        diff = std::max(diff, std::abs(est.h_hat(m, l, i, j) - obs.h_tilde(j, m, l, i) / 2.0));
        CHECK(diff < 1e-15);
    }
}
