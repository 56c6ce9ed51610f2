// SPDX-License-Identifier: Apache-2.0
//
// coupled-mimo: physically consistent MIMO channels for coupled antenna arrays
// Copyright (C) 2026 The coupled-mimo authors
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

#ifndef COUPLED_MIMO_COMMON_HPP
#define COUPLED_MIMO_COMMON_HPP

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cmimo
{
    using cplx = std::complex<double>;
    using cmat = Eigen::MatrixXcd;
    using cvec = Eigen::VectorXcd;
    using rmat = Eigen::MatrixXd;
    using rvec = Eigen::VectorXd;

    inline constexpr double pi = std::numbers::pi;
    inline constexpr double euler_gamma = std::numbers::egamma;

    // Free-space wave impedance in ohms, fixed for reproducibility of impedance values.
    inline constexpr double eta0 = 119.9169832 * pi;

    // Boltzmann constant in J/K.
    inline constexpr double k_boltzmann = 1.380649e-23;

    // Raised when a factorization or linear solve cannot be carried out
    // (matrix singular, not positive definite, materially non-Hermitian).
    class numerical_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Hermitian part (A + A^H) / 2.
    inline cmat hermitian_part(const cmat &A)
    {
        return (A + A.adjoint()) * 0.5;
    }

    // Relative Frobenius distance ||A - B|| / max(||B||, tiny).
    inline double relative_error(const cmat &A, const cmat &B)
    {
        const double ref = B.norm();
        return (A - B).norm() / (ref > 0.0 ? ref : 1.0);
    }

    inline double dbw_to_watt(double dbw) { return std::pow(10.0, dbw / 10.0); }
    inline double watt_to_dbw(double w) { return 10.0 * std::log10(w); }
}

#endif
