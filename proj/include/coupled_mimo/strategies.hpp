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

#ifndef COUPLED_MIMO_STRATEGIES_HPP
#define COUPLED_MIMO_STRATEGIES_HPP

#include "common.hpp"
#include "numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace cmimo
{
    enum class Strategy
    {
        cap,
        recip,
        hyp,
        cap_lin,
        recip_lin,
        hyp_lin
    };

    inline constexpr std::array<Strategy, 6> all_strategies = {Strategy::cap,     Strategy::recip,     Strategy::hyp,
                                                               Strategy::cap_lin, Strategy::recip_lin, Strategy::hyp_lin};

    inline std::string_view to_string(Strategy s)
    {
        switch (s)
        {
        case Strategy::cap: return "cap";
        case Strategy::recip: return "recip";
        case Strategy::hyp: return "hyp";
        case Strategy::cap_lin: return "cap_lin";
        case Strategy::recip_lin: return "recip_lin";
        case Strategy::hyp_lin: return "hyp_lin";
        }
        return "?";
    }

    inline std::optional<Strategy> parse_strategy(std::string_view name)
    {
        for (Strategy s : all_strategies)
            if (to_string(s) == name)
                return s;
        return std::nullopt;
    }

    // A stream is active when its power exceeds this fraction of the budget.
    inline constexpr double active_stream_threshold = 1e-12;

    inline int count_active(const rvec &powers, double P)
    {
        return int((powers.array() > active_stream_threshold * P).count());
    }

    struct RateResult
    {
        Strategy strategy = Strategy::cap;
        double sum_rate = 0.0; // bits per channel use
        std::vector<double> per_user_rates;
        int active_streams = 0;
    };

    struct PrecodingSolution
    {
        std::vector<cmat> precoders;     // per user, N x s_k with unit-norm columns
        std::vector<rvec> stream_powers; // per user [W]
        std::vector<cmat> receive_filters; // per user, m_k x s_k (linear strategies only)
        std::optional<cmat> dual_mac_covariance;      // Xi [W], block diagonal
        std::optional<std::vector<cmat>> bc_covariances; // per-user transmit covariances [W]
        double predicted_power = 0.0;    // [W]
        double true_power = 0.0;         // [W]

        double alpha() const
        {
            return predicted_power > 0.0 ? true_power / predicted_power
                                         : std::numeric_limits<double>::quiet_NaN();
        }

        /// Total transmit covariance sum_k F_k diag(p_k) F_k^H (or the BC covariances).
        cmat transmit_covariance(Eigen::Index N) const
        {
            cmat S = cmat::Zero(N, N);
            if (bc_covariances)
            {
                for (const auto &C : *bc_covariances)
                    S += C;
                return S;
            }
            for (std::size_t k = 0; k < precoders.size(); ++k)
                S += precoders[k] * stream_powers[k].cast<cplx>().asDiagonal() * precoders[k].adjoint();
            return S;
        }
    };

    struct StrategyOutcome
    {
        RateResult rate;
        PrecodingSolution solution;
    };

    /// tr(M R) / P for the power-mismatch kernel M = B_hat^{-1/2} B B_hat^{-H/2}.
    inline double power_ratio(const cmat &power_mismatch, const cmat &covariance, double P)
    {
        return (power_mismatch * covariance).trace().real() / P;
    }

    // ---------------------------------------------------------------- SU-MISO

    namespace detail
    {
        inline void require_nonzero(const cvec &h, const char *what)
        {
            if (!(h.norm() > 0.0))
                throw std::invalid_argument(std::string(what) + ": zero channel.");
        }

        inline void require_power(double P, const char *what)
        {
            if (!(P >= 0.0) || !std::isfinite(P))
                throw std::invalid_argument(std::string(what) + ": power must be nonnegative.");
        }

        inline StrategyOutcome single_stream(Strategy s, const cvec &f, double P, double rate)
        {
            StrategyOutcome out;
            out.rate.strategy = s;
            out.rate.sum_rate = rate;
            out.rate.per_user_rates = {rate};
            out.rate.active_streams = P > 0.0 ? 1 : 0;
            out.solution.precoders = {cmat(f)};
            out.solution.stream_powers = {rvec::Constant(1, P)};
            out.solution.predicted_power = P;
            out.solution.true_power = P;
            return out;
        }
    }

    /// Capacity with matched filter f = h^* / ||h||, where the receiver sees y = h^T x.
    inline StrategyOutcome su_miso_cap(const cvec &h, double P, double sigma_theta)
    {
        detail::require_nonzero(h, "su_miso_cap");
        detail::require_power(P, "su_miso_cap");
        const double rate = std::log2(1.0 + P * h.squaredNorm() / (sigma_theta * sigma_theta));
        return detail::single_stream(Strategy::cap, h.conjugate() / h.norm(), P, rate);
    }

    /// Matched filter built from the uplink channel under ordinary reciprocity,
    /// f = h_UL^* / ||h_UL||, evaluated on the true downlink channel h.
    inline StrategyOutcome su_miso_recip(const cvec &h_true, const cvec &h_ul, double P, double sigma_theta)
    {
        detail::require_nonzero(h_ul, "su_miso_recip");
        detail::require_power(P, "su_miso_recip");
        const cvec f = h_ul.conjugate() / h_ul.norm();
        const double gain = std::norm(h_true.cwiseProduct(f).sum());
        const double rate = std::log2(1.0 + P * gain / (sigma_theta * sigma_theta));
        return detail::single_stream(Strategy::recip, f, P, rate);
    }

    /// Coupling-ignoring transmitter: hypothetical rate for predicted power P and the
    /// true-to-predicted power ratio alpha = f^H M f with f = h_hat^* / ||h_hat||.
    inline StrategyOutcome su_miso_hyp(const cvec &h_hat, const cmat &power_mismatch, double P, double sigma_theta)
    {
        detail::require_nonzero(h_hat, "su_miso_hyp");
        detail::require_power(P, "su_miso_hyp");
        const cvec f = h_hat.conjugate() / h_hat.norm();
        const double rate = std::log2(1.0 + P * h_hat.squaredNorm() / (sigma_theta * sigma_theta));
        auto out = detail::single_stream(Strategy::hyp, f, P, rate);
        out.solution.true_power = P * (f.adjoint() * power_mismatch * f).value().real();
        return out;
    }

    // ---------------------------------------------------------------- SU-MIMO

    namespace detail
    {
        // Eigen-beamforming with waterfilling over the eigenvalues of G (Hermitian PSD).
        inline StrategyOutcome eigen_beamforming(Strategy s, const cmat &G, double P, double sigma_theta)
        {
            Eigen::SelfAdjointEigenSolver<cmat> eig(hermitian_part(G));
            const rvec gains = eig.eigenvalues().cwiseMax(0.0) / (sigma_theta * sigma_theta);
            const rvec p = P > 0.0 && gains.maxCoeff() > 0.0 ? waterfill(gains, P) : rvec::Zero(gains.size());

            StrategyOutcome out;
            out.rate.strategy = s;
            out.rate.active_streams = count_active(p, P);
            out.solution.precoders = {eig.eigenvectors()};
            out.solution.stream_powers = {p};
            out.solution.predicted_power = P;
            out.solution.true_power = P;
            return out;
        }

        inline double mimo_rate(const cmat &H, const cmat &R_x, double sigma_theta)
        {
            return log2_det_identity_plus(H * R_x * H.adjoint() / (sigma_theta * sigma_theta));
        }
    }

    /// Capacity: eigenvectors of H^H H with waterfilled powers.
    inline StrategyOutcome su_mimo_cap(const cmat &H, double P, double sigma_theta)
    {
        detail::require_power(P, "su_mimo_cap");
        auto out = detail::eigen_beamforming(Strategy::cap, H.adjoint() * H, P, sigma_theta);
        const rvec gains = (H * out.solution.precoders[0]).colwise().squaredNorm().transpose() /
                           (sigma_theta * sigma_theta);
        double c = 0.0;
        for (Eigen::Index i = 0; i < gains.size(); ++i)
            c += std::log2(1.0 + gains(i) * out.solution.stream_powers[0](i));
        out.rate.sum_rate = c;
        out.rate.per_user_rates = {c};
        return out;
    }

    /// Ordinary reciprocity: the transmitter optimizes for H_UL^T and transmits over H.
    inline StrategyOutcome su_mimo_recip(const cmat &H_true, const cmat &H_ul, double P, double sigma_theta)
    {
        detail::require_power(P, "su_mimo_recip");
        auto out = detail::eigen_beamforming(Strategy::recip, H_ul.conjugate() * H_ul.transpose(), P, sigma_theta);
        const cmat R_x = out.solution.transmit_covariance(H_true.cols());
        out.rate.sum_rate = detail::mimo_rate(H_true, R_x, sigma_theta);
        out.rate.per_user_rates = {out.rate.sum_rate};
        return out;
    }

    /// Coupling-ignoring transmitter: optimizes for H_hat' with predicted power P, transmits
    /// over H_hat. Reports the hypothetical rate and alpha(P) = tr(M R_xhat) / P.
    inline StrategyOutcome su_mimo_hyp(const cmat &H_hat, const cmat &H_hat_prime, const cmat &power_mismatch,
                                       double P, double sigma_theta)
    {
        detail::require_power(P, "su_mimo_hyp");
        auto out = detail::eigen_beamforming(Strategy::hyp, H_hat_prime.adjoint() * H_hat_prime, P, sigma_theta);
        const cmat R_x = out.solution.transmit_covariance(H_hat.cols());
        out.rate.sum_rate = detail::mimo_rate(H_hat, R_x, sigma_theta);
        out.rate.per_user_rates = {out.rate.sum_rate};
        out.solution.true_power = P > 0.0 ? P * power_ratio(power_mismatch, R_x, P) : 0.0;
        return out;
    }

    // ---------------------------------------------------------------- MU: dual MAC

    struct MacOptions
    {
        int max_iterations = 5000;
        double relative_tolerance = 1e-9;
        double kkt_tolerance = 1e-5;
        double initial_step = 1.0;
        double backtrack = 0.5;
        double sufficient_increase = 1e-4;
        bool record_trace = false;
    };

    struct MacResult
    {
        double sum_capacity = 0.0; // bits per channel use
        cmat Xi;                   // dual-MAC covariance [W]
        int iterations = 0;
        bool converged = false;
        double kkt_residual = 0.0;
        std::vector<double> objective_trace; // per accepted iterate, when requested
    };

    namespace detail
    {
        // log2 det(I + X K) for Hermitian PSD X and K; the determinant is real positive.
        inline double log2_det_ixk(const cmat &X, const cmat &K)
        {
            const auto n = K.rows();
            Eigen::PartialPivLU<cmat> lu(cmat::Identity(n, n) + X * K);
            const cmat &LU = lu.matrixLU();
            double s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                s += std::log2(std::abs(LU(i, i)));
            return s;
        }

        // Gradient of log2 det(I + X K) w.r.t. X in the real Frobenius inner product:
        // K (I + X K)^{-1} / ln 2, restricted to the diagonal blocks.
        inline cmat mac_gradient(const cmat &X, const cmat &K, const std::vector<int> &blocks)
        {
            const auto n = K.rows();
            Eigen::PartialPivLU<cmat> lu(cmat::Identity(n, n) + K * X);
            const cmat G = hermitian_part(lu.solve(K).adjoint()) / std::log(2.0);
            cmat out = cmat::Zero(n, n);
            Eigen::Index off = 0;
            for (int b : blocks)
            {
                out.block(off, off, b, b) = G.block(off, off, b, b);
                off += b;
            }
            return out;
        }

        inline double real_inner(const cmat &A, const cmat &B)
        {
            return (A.array().conjugate() * B.array()).sum().real();
        }
    }

    /// Broadcast-channel sum capacity through the dual MAC,
    ///   max log2 det(I + sigma^-2 H^H Xi H)  s.t.  Xi block diagonal, Xi psd, tr(Xi) <= P,
    /// by projected gradient ascent with Armijo steps along the projection arc. The iterate
    /// is normalized as X = Xi / P, and det(I_N + H^H Xi H / sigma^2) = det(I_M + X K) with
    /// K = P H H^H / sigma^2.
    inline MacResult mac_sum_capacity(const cmat &H, double P, double sigma_theta, const std::vector<int> &blocks,
                                      const MacOptions &opt = {})
    {
        if (!(P > 0.0))
            throw std::invalid_argument("mac_sum_capacity: power must be positive.");
        const auto M = H.rows();
        const cmat K = hermitian_part(H * H.adjoint()) * (P / (sigma_theta * sigma_theta));

        MacResult res;
        cmat X = cmat::Identity(M, M) / double(M);
        double f = detail::log2_det_ixk(X, K);
        if (opt.record_trace)
            res.objective_trace.push_back(f);

        cmat G;
        for (int it = 0; it < opt.max_iterations; ++it)
        {
            G = detail::mac_gradient(X, K, blocks);
            double step = opt.initial_step;
            bool accepted = false;
            cmat X_new;
            double f_new = f;
            for (int bt = 0; bt < 80; ++bt, step *= opt.backtrack)
            {
                X_new = project_block_psd_trace(X + step * G, blocks, 1.0);
                f_new = detail::log2_det_ixk(X_new, K);
                if (f_new - f >= opt.sufficient_increase * detail::real_inner(G, X_new - X) && f_new >= f)
                {
                    accepted = true;
                    break;
                }
            }
            res.iterations = it + 1;
            if (!accepted)
            {
                // No ascent left at machine precision.
                res.converged = true;
                break;
            }
            const double change = (f_new - f) / std::max(std::abs(f_new), 1e-300);
            X = std::move(X_new);
            f = f_new;
            if (opt.record_trace)
                res.objective_trace.push_back(f);
            if (change < opt.relative_tolerance)
            {
                res.converged = true;
                break;
            }
        }

        G = detail::mac_gradient(X, K, blocks);
        res.kkt_residual = (X - project_block_psd_trace(X + G, blocks, 1.0)).norm();
        if (!res.converged)
            res.converged = res.kkt_residual <= opt.kkt_tolerance;
        res.sum_capacity = f;
        res.Xi = X * P;
        return res;
    }

    /// Broadcast covariances achieving the dual-MAC rates with dirty paper coding.
    ///
    /// User k sees BC interference from users j < k and MAC interference from users j > k.
    /// With A_k = I + G_k (sum_{j<k} S_j) G_k^H, B_k = I + sum_{j>k} G_j^H Q_j G_j,
    /// G = H / sigma and A_k^{-1/2} G_k B_k^{-1/2} = U L V^H:
    ///   S_k = B_k^{-1/2} V U^H A_k^{1/2} Q_k A_k^{1/2} U V^H B_k^{-1/2}.
    /// Total power is preserved.
    inline std::vector<cmat> mac_to_bc_covariances(const cmat &H, const cmat &Xi, double sigma_theta,
                                                   const std::vector<int> &blocks)
    {
        const auto N = H.cols();
        const cmat G = H / sigma_theta;
        const std::size_t K = blocks.size();
        std::vector<Eigen::Index> off(K + 1, 0);
        for (std::size_t k = 0; k < K; ++k)
            off[k + 1] = off[k] + blocks[k];

        std::vector<cmat> S(K);
        cmat bc_sum = cmat::Zero(N, N);
        for (std::size_t k = 0; k < K; ++k)
        {
            const cmat Gk = G.middleRows(off[k], blocks[k]);
            const cmat Qk = Xi.block(off[k], off[k], blocks[k], blocks[k]);

            cmat Bk = cmat::Identity(N, N);
            for (std::size_t j = k + 1; j < K; ++j)
            {
                const cmat Gj = G.middleRows(off[j], blocks[j]);
                Bk += Gj.adjoint() * Xi.block(off[j], off[j], blocks[j], blocks[j]) * Gj;
            }
            const cmat Ak = cmat::Identity(blocks[k], blocks[k]) + Gk * bc_sum * Gk.adjoint();
            // Both are Hermitian by construction; cancellation at high SNR can break that in rounding.
            Bk = hermitian_part(Bk);

            const auto Ak_root = principal_psd_sqrt(hermitian_part(Ak)).root;
            const auto Bk_root = principal_psd_sqrt(Bk).root;
            Eigen::LLT<cmat> llt_a(Ak_root), llt_b(Bk_root);
            // A^{-1/2} G_k B^{-1/2}
            const cmat eff = llt_b.solve(llt_a.solve(Gk).adjoint()).adjoint();
            Eigen::JacobiSVD<cmat> svd(eff, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const cmat T = svd.matrixV() * svd.matrixU().adjoint(); // N x m_k
            const cmat inner = T * Ak_root * Qk * Ak_root * T.adjoint();
            // B^{-1/2} inner B^{-1/2}
            S[k] = hermitian_part(llt_b.solve(llt_b.solve(inner).adjoint()).adjoint());
            bc_sum += S[k];
        }
        return S;
    }

    /// Sum capacity of the broadcast channel as a strategy outcome (dual MAC plus the
    /// corresponding BC covariances).
    inline StrategyOutcome dpc_sum_capacity(Strategy s, const cmat &H, double P, double sigma_theta,
                                            const std::vector<int> &blocks, const MacOptions &opt = {})
    {
        auto mac = mac_sum_capacity(H, P, sigma_theta, blocks, opt);
        Eigen::SelfAdjointEigenSolver<cmat> eig(mac.Xi);

        StrategyOutcome out;
        out.rate.strategy = s;
        out.rate.sum_rate = mac.sum_capacity;
        out.rate.active_streams = count_active(eig.eigenvalues(), P);
        out.solution.bc_covariances = mac_to_bc_covariances(H, mac.Xi, sigma_theta, blocks);
        out.solution.dual_mac_covariance = std::move(mac.Xi);
        out.solution.predicted_power = P;
        out.solution.true_power = P;
        return out;
    }

    // ---------------------------------------------------------------- MU: linear ZF

    /// Greedy zero-forcing stream allocation in the spirit of linear successive allocation.
    ///
    /// Each step projects every user's assumed channel onto the orthogonal complement of the
    /// rows selected so far and takes the dominant singular direction with the largest gain.
    /// The receive filter u of that direction defines the effective row u^H H_k. After each
    /// candidate the ZF gains 1 / [(A A^H)^{-1}]_ii of the stacked rows A are waterfilled;
    /// the candidate is kept only if the sum rate increases. Beamformers are the normalized
    /// columns of A^H (A A^H)^{-1}.
    inline PrecodingSolution greedy_zf(const cmat &H_assumed, double P, double sigma_theta,
                                       const std::vector<int> &blocks)
    {
        if (!(P > 0.0))
            throw std::invalid_argument("greedy_zf: power must be positive.");
        const auto N = H_assumed.cols();
        const std::size_t K = blocks.size();
        std::vector<Eigen::Index> off(K + 1, 0);
        for (std::size_t k = 0; k < K; ++k)
            off[k + 1] = off[k] + blocks[k];
        if (off[K] != H_assumed.rows())
            throw std::invalid_argument("greedy_zf: partition does not match the channel.");

        const double noise = sigma_theta * sigma_theta;
        const double scale = std::max(H_assumed.squaredNorm(), 1e-300);

        std::vector<cvec> rows; // selected effective rows (as column vectors a^T)
        std::vector<cvec> filters;
        std::vector<std::size_t> owner;
        cmat proj = cmat::Identity(N, N); // projector onto the complement of span{conj(a_i)}
        rvec powers;
        double best_rate = 0.0;

        const auto zf_gains_of = [&](const std::vector<cvec> &r) {
            cmat A(r.size(), N);
            for (std::size_t i = 0; i < r.size(); ++i)
                A.row(i) = r[i].transpose();
            Eigen::LLT<cmat> llt(hermitian_part(A * A.adjoint()));
            const cmat inv = llt.solve(cmat::Identity(A.rows(), A.rows()));
            rvec g(A.rows());
            for (Eigen::Index i = 0; i < A.rows(); ++i)
                g(i) = 1.0 / inv(i, i).real();
            return g;
        };

        while (Eigen::Index(rows.size()) < std::min<Eigen::Index>(N, H_assumed.rows()))
        {
            double best_gain = 0.0;
            std::size_t best_user = K;
            cvec best_row, best_filter;
            for (std::size_t k = 0; k < K; ++k)
            {
                const cmat Hk = H_assumed.middleRows(off[k], blocks[k]);
                Eigen::JacobiSVD<cmat> svd(Hk * proj, Eigen::ComputeThinU);
                const double s = svd.singularValues()(0);
                if (s * s > best_gain)
                {
                    best_gain = s * s;
                    best_user = k;
                    best_filter = svd.matrixU().col(0);
                    best_row = (best_filter.adjoint() * Hk).transpose();
                }
            }
            if (best_user == K || best_gain <= 1e-12 * scale)
                break;

            auto trial = rows;
            trial.push_back(best_row);
            const rvec g = zf_gains_of(trial);
            const rvec p = waterfill(g / noise, P);
            double rate = 0.0;
            for (Eigen::Index i = 0; i < g.size(); ++i)
                rate += std::log2(1.0 + g(i) * p(i) / noise);
            if (!(rate > best_rate))
                break;

            best_rate = rate;
            rows = std::move(trial);
            owner.push_back(best_user);
            filters.push_back(best_filter);
            powers = p;
            // The row a annihilates x iff x is orthogonal to a^*.
            const cvec q = proj * best_row.conjugate();
            if (q.norm() > 0.0)
                proj -= (q / q.norm()) * (q / q.norm()).adjoint();
        }

        PrecodingSolution sol;
        sol.precoders.assign(K, cmat(N, 0));
        sol.stream_powers.assign(K, rvec(0));
        sol.receive_filters.resize(K);
        for (std::size_t k = 0; k < K; ++k)
            sol.receive_filters[k] = cmat(blocks[k], 0);
        sol.predicted_power = P;
        sol.true_power = P;
        if (rows.empty())
            return sol;

        cmat A(rows.size(), N);
        for (std::size_t i = 0; i < rows.size(); ++i)
            A.row(i) = rows[i].transpose();
        Eigen::LLT<cmat> llt(hermitian_part(A * A.adjoint()));
        cmat T = A.adjoint() * llt.solve(cmat::Identity(A.rows(), A.rows()));
        T.colwise().normalize();

        for (std::size_t k = 0; k < K; ++k)
        {
            std::vector<Eigen::Index> idx;
            for (std::size_t i = 0; i < owner.size(); ++i)
                if (owner[i] == k)
                    idx.push_back(Eigen::Index(i));
            cmat F(N, idx.size()), U(blocks[k], idx.size());
            rvec p(idx.size());
            for (std::size_t j = 0; j < idx.size(); ++j)
            {
                F.col(j) = T.col(idx[j]);
                U.col(j) = filters[idx[j]];
                p(j) = powers(idx[j]);
            }
            sol.receive_filters[k] = std::move(U);
            sol.precoders[k] = std::move(F);
            sol.stream_powers[k] = std::move(p);
        }
        return sol;
    }

    /// Per-user rates with optimum (MMSE-SIC) receivers:
    ///   R_k = log2 det(I + C_k^{-1} H_k S_k H_k^H),  C_k = sigma^2 I + sum_{j != k} H_k S_j H_k^H,
    /// where S_j = F_j diag(p_j) F_j^H and H is the channel actually transmitted over.
    inline RateResult evaluate_bc_rates(Strategy s, const cmat &H_true, const PrecodingSolution &sol,
                                        double sigma_theta, const std::vector<int> &blocks)
    {
        const std::size_t K = blocks.size();
        if (sol.precoders.size() != K || sol.stream_powers.size() != K)
            throw std::invalid_argument("evaluate_bc_rates: solution does not match the partition.");

        std::vector<cmat> S(K);
        for (std::size_t k = 0; k < K; ++k)
            S[k] = sol.precoders[k] * sol.stream_powers[k].cast<cplx>().asDiagonal() * sol.precoders[k].adjoint();

        RateResult r;
        r.strategy = s;
        r.per_user_rates.resize(K);
        Eigen::Index off = 0;
        for (std::size_t k = 0; k < K; ++k)
        {
            const cmat Hk = H_true.middleRows(off, blocks[k]);
            cmat C = sigma_theta * sigma_theta * cmat::Identity(blocks[k], blocks[k]);
            for (std::size_t j = 0; j < K; ++j)
                if (j != k)
                    C += Hk * S[j] * Hk.adjoint();
            const cmat signal = Hk * S[k] * Hk.adjoint();
            const double rate = log2_det_hpd(C + signal) - log2_det_hpd(C);
            r.per_user_rates[k] = std::max(rate, 0.0);
            r.sum_rate += r.per_user_rates[k];
            r.active_streams += count_active(sol.stream_powers[k], sol.predicted_power);
            off += blocks[k];
        }
        return r;
    }
}

#endif
