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

#ifndef COUPLED_MIMO_CHANNEL_MODEL_HPP
#define COUPLED_MIMO_CHANNEL_MODEL_HPP

#include "common.hpp"
#include "numerics.hpp"

#include <Eigen/LU>
#include <cmath>
#include <numeric>
#include <vector>

namespace cmimo
{
    /// Partitioned reciprocal impedance matrix of a one-way link plus terminations.
    ///
    /// Z12 is never stored; reciprocity makes it Z21^T. In the downlink orientation Z11 is the
    /// base station array, Z22 the (block-diagonal) mobile arrays and user_partition lists the
    /// antenna count of each mobile. transposed() yields the uplink orientation.
    struct ImpedanceSystem
    {
        cmat Z11;                      // N x N, transmit side [ohm]
        cmat Z22;                      // M x M, receive side [ohm]
        cmat Z21;                      // M x N [ohm]
        cplx Z_G;                      // generator impedance [ohm]
        cplx Z_L;                      // load impedance [ohm]
        std::vector<int> user_partition; // antennas per receiving device, sums to M

        Eigen::Index n_tx() const { return Z11.rows(); }
        Eigen::Index n_rx() const { return Z22.rows(); }
        double R_G() const { return Z_G.real(); }
        double R_L() const { return Z_L.real(); }

        void validate() const
        {
            const auto N = Z11.rows(), M = Z22.rows();
            if (N == 0 || M == 0 || Z11.cols() != N || Z22.cols() != M)
                throw std::invalid_argument("ImpedanceSystem: Z11 and Z22 must be non-empty and square.");
            if (Z21.rows() != M || Z21.cols() != N)
                throw std::invalid_argument("ImpedanceSystem: Z21 must be M x N.");
            if (!(Z_G.real() > 0.0) || !(Z_L.real() > 0.0))
                throw std::invalid_argument("ImpedanceSystem: Re(Z_G) and Re(Z_L) must be positive.");
            if (user_partition.empty() ||
                std::accumulate(user_partition.begin(), user_partition.end(), 0) != M ||
                std::any_of(user_partition.begin(), user_partition.end(), [](int m) { return m <= 0; }))
                throw std::invalid_argument("ImpedanceSystem: user_partition must be positive and sum to M.");

            // No coupling between different mobiles.
            const double tol = 1e-12 * Z22.norm();
            Eigen::Index r0 = 0;
            for (int mr : user_partition)
            {
                Eigen::Index c0 = 0;
                for (int mc : user_partition)
                {
                    if (c0 != r0 && Z22.block(r0, c0, mr, mc).norm() > tol)
                        throw std::invalid_argument("ImpedanceSystem: Z22 must be block diagonal per user.");
                    c0 += mc;
                }
                r0 += mr;
            }
        }

        /// Uplink orientation: transmit and receive sides swap, Z21 -> Z21^T, and each side
        /// keeps its own RF-chain impedance (Z_G <-> Z_L). The receiving base station is a
        /// single device.
        ImpedanceSystem transposed() const
        {
            return {Z22, Z11, Z21.transpose(), Z_L, Z_G, {int(Z11.rows())}};
        }
    };

    /// Receiver noise model: LNA voltage/current sources plus thermal antenna noise.
    struct NoiseConfig
    {
        double sigma_u = 0.0;   // [V]
        double sigma_i = 0.0;   // [A]
        cplx rho = 0.0;         // correlation of u_N and i_N
        double T_A = 290.0;     // antenna noise temperature [K]
        double delta_f = 740e3; // noise bandwidth [Hz]

        /// 290 K, 740 kHz, rho = 0, LNA noise resistance 5 ohm and conductance 2 mS.
        static NoiseConfig defaults()
        {
            NoiseConfig n;
            const double kt4 = 4.0 * k_boltzmann * 290.0 * n.delta_f;
            n.sigma_u = std::sqrt(kt4 * 5.0);
            n.sigma_i = std::sqrt(kt4 * 2e-3);
            return n;
        }

        void validate() const
        {
            if (!(sigma_u > 0.0) || !(sigma_i > 0.0) || !(delta_f > 0.0) || !(T_A > 0.0))
                throw std::invalid_argument("NoiseConfig: sigma_u, sigma_i, T_A and delta_f must be positive.");
            if (!(std::abs(rho) <= 1.0))
                throw std::invalid_argument("NoiseConfig: |rho| must not exceed 1.");
        }
    };

    enum class Direction
    {
        downlink,
        uplink
    };

    /// Every matrix of the physically consistent model for one realization and direction.
    /// For the uplink all quantities refer to the transposed system (mobiles transmit).
    struct ChannelBundle
    {
        Direction direction = Direction::downlink;

        cmat D;            // u_L|nf = D u_G
        cmat B;            // power-coupling matrix, Hermitian PSD
        cmat B_root;       // B^{1/2}, B = B^{1/2} B^{H/2}
        cmat B_inv_hroot;  // B^{-H/2}
        cvec B_hat;        // diagonal of the coupling-free power-coupling matrix (real > 0)
        cvec B_hat_root;   // diagonal of B_hat^{1/2}
        cvec B_hat_inv_hroot; // diagonal of B_hat^{-H/2}
        cmat Q;            // [V^2]
        cmat Q_root;       // lower Cholesky factor of Q
        cmat R_eta;        // [W]
        cmat R_eta_root;   // R_eta^{1/2}
        rvec R_eta_hat;    // diag(R_eta) [W]
        double sigma_theta = 0.0; // [sqrt(W)]
        double termination_scale = 1.0; // sqrt(R_G / R_L)
        cplx Z_G, Z_L;
        cmat H;            // information-theoretic channel
        cmat H_hat;        // channel actually used when the coupling is ignored
        cmat H_hat_prime;  // channel the transmitter believes in when ignoring the coupling
        cmat power_mismatch; // B_hat^{-1/2} B B_hat^{-H/2}: true vs. predicted radiated power

        /// R_eta^{-1/2} X by two triangular/LU solves.
        cmat apply_R_eta_inv_root(const cmat &X) const
        {
            return R_eta_root.partialPivLu().solve(X);
        }
    };

    namespace detail
    {
        inline Eigen::PartialPivLU<cmat> checked_lu(const cmat &A, const char *what)
        {
            Eigen::PartialPivLU<cmat> lu(A);
            if (!(lu.rcond() > 1e-14))
                throw numerical_error(std::string(what) + ": matrix is singular.");
            return lu;
        }

        inline cmat real_part(const cmat &A) { return A.real().cast<cplx>(); }

        // X A^{-1} through the factorization of A^T.
        inline cmat solve_right(const cmat &X, const Eigen::PartialPivLU<cmat> &lu_transposed)
        {
            return lu_transposed.solve(X.transpose()).transpose();
        }
    }

    /// D = Z_L (Z22 + Z_L I)^{-1} Z21 (Z11 + Z_G I)^{-1} (unilateral approximation).
    inline cmat compute_D(const ImpedanceSystem &sys)
    {
        const auto N = sys.n_tx(), M = sys.n_rx();
        const auto lu_rx = detail::checked_lu(sys.Z22 + sys.Z_L * cmat::Identity(M, M), "compute_D");
        const auto lu_txt = detail::checked_lu((sys.Z11 + sys.Z_G * cmat::Identity(N, N)).transpose(), "compute_D");
        return sys.Z_L * detail::solve_right(lu_rx.solve(sys.Z21), lu_txt);
    }

    struct PowerCoupling
    {
        cmat B;
        cmat B_root;
        cmat B_inv_hroot; // B^{-H/2} = (Z11 + Z_G I) Re(Z11)^{-1/2} / sqrt(R_G)
    };

    /// B = R_G (Z11 + Z_G I)^{-H} Re(Z11) (Z11 + Z_G I)^{-1} and
    /// B^{1/2} = sqrt(R_G) (Z11 + Z_G I)^{-H} Re(Z11)^{1/2} with the principal root of Re(Z11).
    inline PowerCoupling compute_B(const ImpedanceSystem &sys)
    {
        const auto N = sys.n_tx();
        const cmat A = sys.Z11 + sys.Z_G * cmat::Identity(N, N);
        const auto lu_h = detail::checked_lu(A.adjoint(), "compute_B");
        const auto lu_t = detail::checked_lu(A.transpose(), "compute_B");
        const cmat re = detail::real_part(sys.Z11);
        const cmat S = principal_psd_sqrt(re).root;

        PowerCoupling out;
        out.B = hermitian_part(sys.R_G() * detail::solve_right(lu_h.solve(re), lu_t));
        out.B_root = std::sqrt(sys.R_G()) * lu_h.solve(S);

        Eigen::LLT<cmat> llt_s(S);
        if (llt_s.info() != Eigen::Success)
            throw numerical_error("compute_B: Re(Z11) is singular.");
        out.B_inv_hroot = llt_s.solve(A.adjoint()).adjoint() / std::sqrt(sys.R_G());
        return out;
    }

    struct NoiseCovariance
    {
        cmat Q;
        cmat Q_root; // lower Cholesky
        cmat R_eta;
        cmat R_eta_root;
        double sigma_theta = 0.0;
    };

    /// Q = s_u^2 I + s_i^2 Z22 Z22^* - 2 s_u s_i Re(rho^* Z22) + 4 k_B T_A df Re(Z22),
    /// R_eta = |Z_L|^2/R_L (Z22 + Z_L I)^{-1} Q (Z22 + Z_L I)^{-H},
    /// R_eta^{1/2} = Z_L/sqrt(R_L) (Z22 + Z_L I)^{-1} Q^{1/2}, sigma_theta^2 = tr(R_eta)/M.
    inline NoiseCovariance compute_Q_Reta(const ImpedanceSystem &sys, const NoiseConfig &noise)
    {
        noise.validate();
        const auto M = sys.n_rx();
        const cmat I = cmat::Identity(M, M);
        const cmat &Z = sys.Z22;
        const double su = noise.sigma_u, si = noise.sigma_i;

        NoiseCovariance out;
        cmat Q = su * su * I + si * si * (Z * Z.conjugate()) -
                 2.0 * su * si * detail::real_part(std::conj(noise.rho) * Z) +
                 4.0 * k_boltzmann * noise.T_A * noise.delta_f * detail::real_part(Z);
        auto chol = cholesky_lower(Q);
        out.Q = std::move(chol.original);
        out.Q_root = std::move(chol.root);

        const auto lu = detail::checked_lu(Z + sys.Z_L * I, "compute_Q_Reta");
        const double RL = sys.R_L();
        const cmat Y = lu.solve(out.Q);
        out.R_eta = hermitian_part(std::norm(sys.Z_L) / RL * lu.solve(Y.adjoint()).adjoint());
        out.R_eta_root = sys.Z_L / std::sqrt(RL) * lu.solve(out.Q_root);
        out.sigma_theta = std::sqrt(out.R_eta.trace().real() / double(M));
        return out;
    }

    struct CouplingFreePower
    {
        cvec B_hat;           // diagonal entries
        cvec B_hat_root;      // diagonal of B_hat^{1/2}
        cvec B_hat_inv_hroot; // diagonal of B_hat^{-H/2}
    };

    /// Power coupling predicted when each antenna is measured alone with the others open:
    /// B_hat = R_G (diag(Z11) + Z_G I)^{-H} Re(diag(Z11)) (diag(Z11) + Z_G I)^{-1}.
    inline CouplingFreePower compute_B_hat(const ImpedanceSystem &sys)
    {
        const auto N = sys.n_tx();
        const double RG = sys.R_G();
        CouplingFreePower out{cvec(N), cvec(N), cvec(N)};
        for (Eigen::Index n = 0; n < N; ++n)
        {
            const cplx z = sys.Z11(n, n);
            if (!(z.real() > 0.0))
                throw numerical_error("compute_B_hat: self-impedance must have positive real part.");
            const cplx a = z + sys.Z_G;
            out.B_hat(n) = RG * z.real() / std::norm(a);
            out.B_hat_root(n) = std::sqrt(RG * z.real()) / std::conj(a);
            out.B_hat_inv_hroot(n) = a / std::sqrt(RG * z.real());
        }
        return out;
    }

    /// Builds the complete bundle. For Direction::uplink the system is transposed first and
    /// noise describes the base station receiver.
    inline ChannelBundle compute_H(const ImpedanceSystem &sys_dl, const NoiseConfig &noise, Direction direction)
    {
        const ImpedanceSystem sys = direction == Direction::downlink ? sys_dl : sys_dl.transposed();
        sys.validate();

        ChannelBundle b;
        b.direction = direction;
        b.Z_G = sys.Z_G;
        b.Z_L = sys.Z_L;
        b.termination_scale = std::sqrt(sys.R_G() / sys.R_L());

        b.D = compute_D(sys);
        auto pc = compute_B(sys);
        b.B = std::move(pc.B);
        b.B_root = std::move(pc.B_root);
        b.B_inv_hroot = std::move(pc.B_inv_hroot);

        auto nc = compute_Q_Reta(sys, noise);
        b.Q = std::move(nc.Q);
        b.Q_root = std::move(nc.Q_root);
        b.R_eta = std::move(nc.R_eta);
        b.R_eta_root = std::move(nc.R_eta_root);
        b.sigma_theta = nc.sigma_theta;
        b.R_eta_hat = b.R_eta.diagonal().real();

        auto bh = compute_B_hat(sys);
        b.B_hat = std::move(bh.B_hat);
        b.B_hat_root = std::move(bh.B_hat_root);
        b.B_hat_inv_hroot = std::move(bh.B_hat_inv_hroot);

        const double gain = b.sigma_theta * b.termination_scale;
        const cmat whitened_D = b.apply_R_eta_inv_root(b.D); // R_eta^{-1/2} D
        b.H = gain * whitened_D * b.B_inv_hroot;
        b.H_hat = gain * whitened_D * b.B_hat_inv_hroot.asDiagonal();
        const rvec inv_sqrt_hat = b.R_eta_hat.cwiseSqrt().cwiseInverse();
        b.H_hat_prime = gain * inv_sqrt_hat.asDiagonal() * b.D * b.B_hat_inv_hroot.asDiagonal();

        const cvec c = b.B_hat_inv_hroot;
        b.power_mismatch = hermitian_part(c.conjugate().asDiagonal() * b.B * c.asDiagonal());
        return b;
    }

    struct MismatchedChannels
    {
        cmat H_hat;
        cmat H_hat_prime;
    };

    /// H_hat = sigma R_eta^{-1/2} D B_hat^{-H/2}; H_hat' uses diag(R_eta) in place of R_eta.
    inline MismatchedChannels compute_H_hat(const ImpedanceSystem &sys, const NoiseConfig &noise)
    {
        auto b = compute_H(sys, noise, Direction::downlink);
        return {std::move(b.H_hat), std::move(b.H_hat_prime)};
    }

    /// Physically consistent reciprocity: recovers the downlink channel from the uplink one,
    ///   H = (sigma / sigma_UL) R_eta^{-1/2} B_UL^{*/2} H_UL^T R_eta,UL^{T/2} B^{-H/2}.
    /// The scalar c = (termination_scale / termination_scale_UL) (Z_L / Z_G) is 1 for matched
    /// terminations Z_G = Z_L; it keeps the identity exact otherwise.
    inline cmat recip_transform(const ChannelBundle &ul, const ChannelBundle &dl)
    {
        if (ul.direction != Direction::uplink || dl.direction != Direction::downlink)
            throw std::invalid_argument("recip_transform: expects an uplink and a downlink bundle.");
        if (ul.H.rows() != dl.H.cols() || ul.H.cols() != dl.H.rows())
            throw std::invalid_argument("recip_transform: inconsistent dimensions.");
        const cplx c = (dl.termination_scale / ul.termination_scale) * (dl.Z_L / dl.Z_G);
        const cmat inner = ul.B_root.conjugate() * ul.H.transpose() * ul.R_eta_root.transpose();
        return c * (dl.sigma_theta / ul.sigma_theta) * dl.apply_R_eta_inv_root(inner) * dl.B_inv_hroot;
    }
}

#endif
