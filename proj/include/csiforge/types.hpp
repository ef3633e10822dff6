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

#include <complex>
#include <numbers>

#include <Eigen/Dense>
#include <unsupported/Eigen/CXX11/Tensor>

namespace csiforge
{
    using cd = std::complex<double>;
    using cf = std::complex<float>;

    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RMatrix = Eigen::MatrixXd;
    using RVector = Eigen::VectorXd;
    using CMatrixF = Eigen::MatrixXcf;

    // Row-major so that the last index is contiguous, matching the on-disk layouts.
    template <int Rank>
    using CTensor = Eigen::Tensor<cd, Rank, Eigen::RowMajor>;

    inline constexpr double kPi = std::numbers::pi;
    inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
    inline constexpr double kSpeedOfLight = 299792458.0;

    /// Normalized sinc, sin(pi x) / (pi x), with the removable singularity at 0.
    inline double sinc(double x)
    {
        if (x == 0.0)
            return 1.0;
        const double px = kPi * x;
        return std::sin(px) / px;
    }

    /// Smallest power of two that is >= n (n >= 1).
    inline int next_pow2(int n)
    {
        int p = 1;
        while (p < n)
            p <<= 1;
        return p;
    }
} // namespace csiforge
