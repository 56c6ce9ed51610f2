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

#ifndef COUPLED_MIMO_NUMERICS_HPP
#define COUPLED_MIMO_NUMERICS_HPP

#include "common.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace cmimo
{
    enum class FactorKind
    {
        cholesky_lower,
        principal_psd
    };

    /// A factorization original = root * root^H of a Hermitian matrix.
    struct HermitianFactorization
    {
        cmat original;
        cmat root;
        FactorKind kind;
    };

    // Relative asymmetry ||A - A^H||_F / ||A||_F tolerated before a factorization.
    inline constexpr double hermitian_tolerance = 1e-10;

    /// Returns (A + A^H)/2, or throws numerical_error when A is materially non-Hermitian.
    inline cmat ensure_hermitian(const cmat &A, const char *what)
    {
        if (A.rows() != A.cols())
            throw std::invalid_argument(std::string(what) + ": matrix is not square.");
        const double scale = A.norm();
        if ((A - A.adjoint()).norm() > hermitian_tolerance * (scale > 0.0 ? scale : 1.0))
            throw numerical_error(std::string(what) + ": matrix is not Hermitian.");
        return hermitian_part(A);
    }

    /// Lower-triangular Cholesky factor with real positive diagonal.
    inline HermitianFactorization cholesky_lower(const cmat &A)
    {
        cmat Ah = ensure_hermitian(A, "cholesky_lower");
        Eigen::LLT<cmat> llt(Ah);
        if (llt.info() != Eigen::Success)
            throw numerical_error("cholesky_lower: matrix is not positive definite.");
        cmat L = llt.matrixL();
        for (Eigen::Index i = 0; i < L.rows(); ++i)
            if (!(L(i, i).real() > 0.0))
                throw numerical_error("cholesky_lower: non-positive pivot.");
        return {std::move(Ah), std::move(L), FactorKind::cholesky_lower};
    }

    /// Principal (Hermitian PSD) square root via eigendecomposition. Eigenvalues down to
    /// -1e-9 ||A|| are treated as rounding noise and clipped to zero.
    inline HermitianFactorization principal_psd_sqrt(const cmat &A)
    {
        cmat Ah = ensure_hermitian(A, "principal_psd_sqrt");
        Eigen::SelfAdjointEigenSolver<cmat> eig(Ah);
        if (eig.info() != Eigen::Success)
            throw numerical_error("principal_psd_sqrt: eigendecomposition failed.");
        const double floor = -1e-9 * Ah.norm();
        rvec lam = eig.eigenvalues();
        for (Eigen::Index i = 0; i < lam.size(); ++i)
        {
            if (lam(i) < floor)
                throw numerical_error("principal_psd_sqrt: matrix is not positive semidefinite.");
            lam(i) = std::sqrt(std::max(lam(i), 0.0));
        }
        const cmat &V = eig.eigenvectors();
        cmat root = V * lam.asDiagonal() * V.adjoint();
        return {std::move(Ah), hermitian_part(root), FactorKind::principal_psd};
    }

    /// Waterfilling: maximizes sum log2(1 + g_i p_i) subject to sum p_i = P, p_i >= 0.
    ///
    /// The gains are sorted once; for each candidate active-set size k the water level
    /// (P + sum_{i<k} 1/g_i)/k is formed in closed form and the largest consistent k is kept.
    inline rvec waterfill(const rvec &gains, double P)
    {
        if (!(P >= 0.0) || !std::isfinite(P))
            throw std::invalid_argument("waterfill: power budget must be nonnegative.");
        const Eigen::Index n = gains.size();
        for (Eigen::Index i = 0; i < n; ++i)
            if (!(gains(i) >= 0.0) || !std::isfinite(gains(i)))
                throw std::invalid_argument("waterfill: gains must be finite and nonnegative.");

        std::vector<Eigen::Index> order(n);
        std::iota(order.begin(), order.end(), Eigen::Index(0));
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return gains(a) > gains(b); });
        if (n == 0 || gains(order[0]) <= 0.0)
            throw std::invalid_argument("waterfill: at least one gain must be positive.");

        rvec p = rvec::Zero(n);
        if (P == 0.0)
            return p;

        double inv_sum = 0.0;
        double level = 0.0;
        Eigen::Index active = 0;
        for (Eigen::Index k = 0; k < n; ++k)
        {
            const double g = gains(order[k]);
            if (g <= 0.0)
                break;
            const double candidate = (P + inv_sum + 1.0 / g) / double(k + 1);
            if (candidate <= 1.0 / g)
                break;
            inv_sum += 1.0 / g;
            level = candidate;
            active = k + 1;
        }
        for (Eigen::Index k = 0; k < active; ++k)
            p(order[k]) = std::max(level - 1.0 / gains(order[k]), 0.0);
        return p;
    }

    /// Euclidean projection of v onto {x >= 0, sum x <= P}.
    inline rvec project_capped_simplex(const rvec &v, double P)
    {
        rvec clipped = v.cwiseMax(0.0);
        if (clipped.sum() <= P)
            return clipped;

        // Find tau > 0 with sum max(v - tau, 0) = P.
        std::vector<double> s(v.data(), v.data() + v.size());
        std::sort(s.begin(), s.end(), std::greater<>());
        double cumsum = 0.0;
        double tau = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k)
        {
            cumsum += s[k];
            const double t = (cumsum - P) / double(k + 1);
            if (k + 1 == s.size() || s[k + 1] <= t)
            {
                tau = t;
                break;
            }
        }
        return (v.array() - tau).cwiseMax(0.0).matrix();
    }

    /// Frobenius projection of a Hermitian X onto {S psd, tr(S) <= P}.
    inline cmat project_psd_trace(const cmat &X, double P)
    {
        const cmat Xh = ensure_hermitian(X, "project_psd_trace");
        Eigen::SelfAdjointEigenSolver<cmat> eig(Xh);
        const rvec lam = project_capped_simplex(eig.eigenvalues(), P);
        const cmat &V = eig.eigenvectors();
        return hermitian_part(V * lam.asDiagonal() * V.adjoint());
    }

    /// Projection onto block-diagonal {S_k psd, sum_k tr(S_k) <= P}; off-block entries of X
    /// are discarded. The blocks share one capped-simplex projection of their joint spectrum.
    inline cmat project_block_psd_trace(const cmat &X, const std::vector<int> &blocks, double P)
    {
        const cmat Xh = ensure_hermitian(X, "project_block_psd_trace");
        const Eigen::Index n = Xh.rows();
        std::vector<Eigen::SelfAdjointEigenSolver<cmat>> eigs;
        eigs.reserve(blocks.size());
        rvec lam(n);
        Eigen::Index off = 0;
        for (int b : blocks)
        {
            eigs.emplace_back(Xh.block(off, off, b, b).eval());
            lam.segment(off, b) = eigs.back().eigenvalues();
            off += b;
        }
        if (off != n)
            throw std::invalid_argument("project_block_psd_trace: block sizes do not match the matrix.");

        lam = project_capped_simplex(lam, P);
        cmat S = cmat::Zero(n, n);
        off = 0;
        for (std::size_t k = 0; k < blocks.size(); ++k)
        {
            const int b = blocks[k];
            const cmat &V = eigs[k].eigenvectors();
            S.block(off, off, b, b) = V * lam.segment(off, b).asDiagonal() * V.adjoint();
            off += b;
        }
        return hermitian_part(S);
    }

    /// log2 det(A) for Hermitian positive definite A.
    inline double log2_det_hpd(const cmat &A)
    {
        Eigen::LLT<cmat> llt(hermitian_part(A));
        if (llt.info() != Eigen::Success)
            throw numerical_error("log2_det_hpd: matrix is not positive definite.");
        double s = 0.0;
        const cmat &L = llt.matrixLLT();
        for (Eigen::Index i = 0; i < L.rows(); ++i)
            s += std::log2(L(i, i).real());
        return 2.0 * s;
    }

    /// log2 det(I + A) for A with I + A Hermitian positive definite.
    inline double log2_det_identity_plus(const cmat &A)
    {
        return log2_det_hpd(cmat::Identity(A.rows(), A.cols()) + A);
    }
}

#endif
