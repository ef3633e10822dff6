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

#include "csiforge/precoding.hpp"

#include <cmath>
#include <stdexcept>

namespace csiforge
{
    namespace
    {
        // log det of a Hermitian positive definite matrix.
        double log_det_hpd(const CMatrix &a)
        {
            Eigen::LLT<CMatrix> llt(a);
            if (llt.info() != Eigen::Success)
                throw std::domain_error("Matrix is not positive definite.");
            double s = 0.0;
            for (Eigen::Index k = 0; k < a.rows(); ++k)
                s += std::log(llt.matrixLLT()(k, k).real());
            return 2.0 * s;
        }

        bool next_combination(std::vector<int> &c, int n)
        {
            const int r = static_cast<int>(c.size());
            int k = r - 1;
            while (k >= 0 && c[k] == n - r + k)
                --k;
            if (k < 0)
                return false;
            ++c[k];
            for (int q = k + 1; q < r; ++q)
                c[q] = c[q - 1] + 1;
            return true;
        }
    } // namespace

    Codebook build_dft_codebook(int n_tx, int rank)
    {
        if (n_tx < 1)
            throw std::invalid_argument("Number of Tx antennas must be positive.");
        if (rank < 1 || rank > n_tx)
            throw std::invalid_argument("Rank must lie in [1, N_T].");

        CMatrix dft(n_tx, n_tx);
        for (int a = 0; a < n_tx; ++a)
            for (int b = 0; b < n_tx; ++b)
                dft(a, b) = std::polar(1.0 / std::sqrt(static_cast<double>(n_tx)), -kTwoPi * a * b / n_tx);

        Codebook cb;
        cb.n_tx = n_tx;
        cb.rank = rank;
        std::vector<int> cols(rank);
        for (int q = 0; q < rank; ++q)
            cols[q] = q;
        const double norm = 1.0 / std::sqrt(static_cast<double>(rank));
        do
        {
            CMatrix w(n_tx, rank);
            for (int q = 0; q < rank; ++q)
                w.col(q) = dft.col(cols[q]) * norm;
            cb.candidates.push_back(std::move(w));
            cb.columns.push_back(cols);
        } while (next_combination(cols, n_tx));
        return cb;
    }

    CMatrix whitened_spatial_covariance(const CTensor<4> &h_hat, const CMatrix &noise_covariance)
    {
        const int n_grp = static_cast<int>(h_hat.dimension(0));
        const int n_sym = static_cast<int>(h_hat.dimension(1));
        const int n_rx = static_cast<int>(h_hat.dimension(2));
        const int n_tx = static_cast<int>(h_hat.dimension(3));
        if (noise_covariance.rows() != n_rx || noise_covariance.cols() != n_rx)
            throw std::invalid_argument("Noise covariance does not match N_R.");
        if (n_grp * n_sym == 0)
            throw std::invalid_argument("No channel samples to average.");

        CMatrix cn = noise_covariance;
        const double trace = cn.trace().real();
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(cn, Eigen::EigenvaluesOnly);
        const double lmax = eig.eigenvalues().maxCoeff();
        const double lmin = eig.eigenvalues().minCoeff();
        if (!(lmin > 0.0) || lmax / lmin > 1e12)
            cn.diagonal().array() += 1e-9 * trace / n_rx;

        Eigen::LLT<CMatrix> llt(cn);
        if (llt.info() != Eigen::Success || !(trace > 0.0))
            throw std::domain_error("Noise covariance is singular after regularization.");

        CMatrix cs = CMatrix::Zero(n_tx, n_tx);
        CMatrix h(n_rx, n_tx);
        for (int m = 0; m < n_grp; ++m)
            for (int l = 0; l < n_sym; ++l)
            {
                for (int i = 0; i < n_rx; ++i)
                    for (int j = 0; j < n_tx; ++j)
                        h(i, j) = h_hat(m, l, i, j);
                cs.noalias() += h.adjoint() * llt.solve(h);
            }
        cs /= static_cast<double>(n_grp * n_sym);
        return 0.5 * (cs + cs.adjoint());
    }

    double precoder_score(const CMatrix &spatial_covariance, const CMatrix &w)
    {
        const CMatrix a = CMatrix::Identity(w.cols(), w.cols()) + w.adjoint() * spatial_covariance * w;
        return log_det_hpd(0.5 * (a + a.adjoint()));
    }

    PrecoderChoice select_precoder(const CMatrix &spatial_covariance, const Codebook &codebook)
    {
        if (codebook.candidates.empty())
            throw std::invalid_argument("Codebook is empty.");
        PrecoderChoice best;
        best.score = precoder_score(spatial_covariance, codebook.candidates[0]);
        for (std::size_t c = 1; c < codebook.candidates.size(); ++c)
        {
            const double s = precoder_score(spatial_covariance, codebook.candidates[c]);
            if (score_beats(s, best.score))
            {
                best.score = s;
                best.index = c;
            }
        }
        best.w = codebook.candidates[best.index];
        return best;
    }

    PrecoderReport select_rank(const CMatrix &spatial_covariance, std::span<const Codebook> codebooks, int n_rx)
    {
        if (n_rx < 1)
            throw std::invalid_argument("N_R must be positive.");
        if (static_cast<int>(codebooks.size()) < n_rx)
            throw std::invalid_argument("One codebook per rank 1..N_R is required.");

        PrecoderReport rep;
        rep.spatial_covariance = spatial_covariance;
        for (int r = 1; r <= n_rx; ++r)
        {
            const Codebook &cb = codebooks[r - 1];
            if (cb.rank != r)
                throw std::invalid_argument("Codebooks must be ordered by rank starting at 1.");
            rep.per_rank.push_back(select_precoder(spatial_covariance, cb));
            const auto &choice = rep.per_rank.back();
            if (r == 1 || score_beats(choice.score, rep.score))
            {
                rep.rank = r;
                rep.score = choice.score;
                rep.w = choice.w;
                rep.codebook_id = cb.id();
            }
        }
        return rep;
    }

    double spectral_efficiency(std::span<const CMatrix> channels, const CMatrix &noise_covariance, double power,
                               const CMatrix &w)
    {
        if (channels.empty())
            throw std::invalid_argument("No channel samples to average.");
        double total = 0.0;
        for (const auto &h : channels)
        {
            const CMatrix hw = h * w;
            CMatrix a = noise_covariance + power * hw * hw.adjoint();
            total += log_det_hpd(0.5 * (a + a.adjoint()));
        }
        return total / static_cast<double>(channels.size());
    }
} // namespace csiforge
