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

#include <catch_amalgamated.hpp>

#include <coupled_mimo/channel_model.hpp>
#include <coupled_mimo/strategies.hpp>

#include "oracles.hpp"

#include <random>

using Catch::Approx;
using cmimo::cmat;
using cmimo::cplx;
using cmimo::cvec;
using cmimo::rvec;
using cmimo::Strategy;

namespace
{
    cmat eye(Eigen::Index n) { return cmat::Identity(n, n); }

    cmimo::ChannelBundle coupled_bundle(std::mt19937_64 &rng, int N, const std::vector<int> &part)
    {
        return cmimo::compute_H(oracle::random_system(rng, N, part), cmimo::NoiseConfig::defaults(),
                                cmimo::Direction::downlink);
    }

    // Rate of Gaussian signaling through H with transmit covariance R, noise sigma^2 I.
    double log_det_rate(const cmat &H, const cmat &R, double sigma)
    {
        return cmimo::log2_det_identity_plus(H * R * H.adjoint() / (sigma * sigma));
    }
}

// ---------------------------------------------------------------- SU-MISO

TEST_CASE("Strategies - SU-MISO capacity")
{
    cvec h(2);
    h << cplx(1.0, 0.0), cplx(0.0, 1.0);
    // P ||h||^2 / sigma^2 = 1
    auto out = cmimo::su_miso_cap(h, 0.5, 1.0);
    CHECK(out.rate.sum_rate == Approx(1.0).epsilon(1e-14));
    CHECK(out.rate.active_streams == 1);
    CHECK(out.solution.alpha() == 1.0);
    CHECK((out.solution.precoders[0].col(0) - h.conjugate() / h.norm()).norm() < 1e-15);

    CHECK(cmimo::su_miso_cap(h, 0.0, 1.0).rate.sum_rate == 0.0);
    CHECK(cmimo::su_miso_cap(h, 0.0, 1.0).rate.active_streams == 0);
    CHECK_THROWS_AS(cmimo::su_miso_cap(cvec::Zero(3), 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("Strategies - SU-MISO capacity against random precoders")
{
    std::mt19937_64 rng(31);
    const cvec h = oracle::random_complex(2, 1, rng);
    const double P = 1.0 / h.squaredNorm(), sigma = 1.0;
    const double C = cmimo::su_miso_cap(h, P, sigma).rate.sum_rate;
    double best = 0.0;
    for (int i = 0; i < 10000; ++i)
    {
        const cvec f = oracle::random_unit(2, rng);
        const double r = std::log2(1.0 + P * std::norm(h.cwiseProduct(f).sum()) / (sigma * sigma));
        CHECK(r <= C + 1e-12);
        best = std::max(best, r);
    }
    CHECK(C - best < 1e-3);
}

TEST_CASE("Strategies - SU-MISO ordinary reciprocity")
{
    std::mt19937_64 rng(32);
    const cvec h = oracle::random_complex(4, 1, rng);
    const double P = 2.0, sigma = 0.7;
    const double C = cmimo::su_miso_cap(h, P, sigma).rate.sum_rate;

    // Ordinary reciprocity holds: h_UL = h up to a scalar
    CHECK(cmimo::su_miso_recip(h, cplx(0.3, -2.0) * h, P, sigma).rate.sum_rate == Approx(C).epsilon(1e-13));

    // h_UL orthogonal to h
    cvec h_ul = oracle::random_complex(4, 1, rng);
    h_ul -= h * (h.dot(h_ul) / h.squaredNorm());
    CHECK(cmimo::su_miso_recip(h, h_ul, P, sigma).rate.sum_rate < 1e-14);

    for (int i = 0; i < 100; ++i)
    {
        const cvec g = oracle::random_complex(4, 1, rng);
        const auto out = cmimo::su_miso_recip(h, g, P, sigma);
        CHECK(out.rate.sum_rate <= C + 1e-12);
        CHECK(out.solution.alpha() == 1.0);
    }
    CHECK_THROWS_AS(cmimo::su_miso_recip(h, cvec::Zero(4), P, sigma), std::invalid_argument);
}

TEST_CASE("Strategies - SU-MISO hypothetical rate and alpha")
{
    std::mt19937_64 rng(33);
    const auto b = coupled_bundle(rng, 6, {1});
    const cvec h_hat = b.H_hat.transpose();
    const double P = 1e-8;
    const auto out = cmimo::su_miso_hyp(h_hat, b.power_mismatch, P, b.sigma_theta);
    CHECK(out.rate.sum_rate == Approx(std::log2(1.0 + P * h_hat.squaredNorm() / std::pow(b.sigma_theta, 2))));

    // Generator voltages u_G = B_hat^{-H/2} f s: radiated power over predicted power
    const cvec f = h_hat.conjugate() / h_hat.norm();
    const cvec u = b.B_hat_inv_hroot.asDiagonal() * f;
    const double radiated = (u.adjoint() * b.B * u).value().real();
    const double predicted = (u.adjoint() * b.B_hat.asDiagonal() * u).value().real();
    CHECK(out.solution.alpha() == Approx(radiated / predicted).epsilon(1e-12));
    CHECK(out.solution.true_power == Approx(P * radiated / predicted).epsilon(1e-12));

    // Scale invariance of alpha
    CHECK(cmimo::su_miso_hyp(cplx(0.0, 7.0) * h_hat, b.power_mismatch, P, b.sigma_theta).solution.alpha() ==
          Approx(out.solution.alpha()).epsilon(1e-13));

    // No coupling to ignore
    CHECK(cmimo::su_miso_hyp(h_hat, eye(6), P, b.sigma_theta).solution.alpha() == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Strategies - SU-MISO diagonal Z11")
{
    std::mt19937_64 rng(34);
    cmimo::ImpedanceSystem sys;
    const cplx za = cmimo::dipole_self_impedance();
    sys.Z11 = za * eye(5);
    sys.Z22 = za * eye(1);
    sys.Z21 = oracle::random_complex(1, 5, rng, 0.5);
    sys.Z_G = sys.Z_L = za.real();
    sys.user_partition = {1};
    const auto b = cmimo::compute_H(sys, cmimo::NoiseConfig::defaults(), cmimo::Direction::downlink);
    const double P = 1e-7;
    const auto hyp = cmimo::su_miso_hyp(b.H_hat.transpose(), b.power_mismatch, P, b.sigma_theta);
    const auto cap = cmimo::su_miso_cap(b.H.transpose(), P, b.sigma_theta);
    CHECK(hyp.solution.alpha() == Approx(1.0).epsilon(1e-12));
    CHECK(hyp.rate.sum_rate == Approx(cap.rate.sum_rate).epsilon(1e-12));
}

// ---------------------------------------------------------------- SU-MIMO

TEST_CASE("Strategies - SU-MIMO capacity")
{
    std::mt19937_64 rng(35);

    // Rank one reduces to MISO
    const cvec a = oracle::random_complex(3, 1, rng);
    const cvec h = oracle::random_complex(4, 1, rng);
    const cmat H1 = a * h.transpose();
    const auto r1 = cmimo::su_mimo_cap(H1, 2.0, 1.0);
    CHECK(r1.rate.active_streams == 1);
    CHECK(r1.rate.sum_rate == Approx(cmimo::su_miso_cap(h * a.norm(), 2.0, 1.0).rate.sum_rate).epsilon(1e-12));

    // Identity channel: equal split
    const auto id = cmimo::su_mimo_cap(eye(3), 3.0, 1.0);
    CHECK(id.rate.sum_rate == Approx(3.0 * std::log2(2.0)).epsilon(1e-13));
    CHECK(id.rate.active_streams == 3);

    // Random 3 x 2 against a power grid over the eigen-directions
    const cmat H = oracle::random_complex(3, 2, rng);
    const double P = 1.3, sigma = 0.8;
    const auto out = cmimo::su_mimo_cap(H, P, sigma);
    Eigen::SelfAdjointEigenSolver<cmat> eig(H.adjoint() * H);
    const rvec g = eig.eigenvalues() / (sigma * sigma);
    const double grid = oracle::waterfill_grid_rate(g(0), g(1), P, P / 20000.0);
    CHECK(std::abs(out.rate.sum_rate - grid) < 1e-4);
    CHECK(out.rate.sum_rate >= grid - 1e-12);
    CHECK(out.rate.sum_rate ==
          Approx(log_det_rate(H, out.solution.transmit_covariance(2), sigma)).epsilon(1e-12));
    CHECK(out.solution.transmit_covariance(2).trace().real() == Approx(P).epsilon(1e-12));
}

TEST_CASE("Strategies - SU-MIMO active streams grow with power")
{
    std::mt19937_64 rng(36);
    const cmat H = oracle::random_complex(5, 7, rng);
    int last = 0;
    for (double P = 1e-4; P < 1e4; P *= 3.0)
    {
        const int s = cmimo::su_mimo_cap(H, P, 1.0).rate.active_streams;
        CHECK(s >= last);
        last = s;
    }
    CHECK(last == 5);
}

TEST_CASE("Strategies - SU-MIMO ordinary reciprocity")
{
    std::mt19937_64 rng(37);
    const cmat H = oracle::random_complex(3, 5, rng);
    const double P = 0.8, sigma = 0.5;
    const double C = cmimo::su_mimo_cap(H, P, sigma).rate.sum_rate;
    CHECK(cmimo::su_mimo_recip(H, H.transpose(), P, sigma).rate.sum_rate == Approx(C).epsilon(1e-12));

    for (int trial = 0; trial < 5; ++trial)
    {
        auto sys = oracle::random_system(rng, 7, {3});
        const auto dl = cmimo::compute_H(sys, cmimo::NoiseConfig::defaults(), cmimo::Direction::downlink);
        const auto up = cmimo::compute_H(sys, cmimo::NoiseConfig::defaults(), cmimo::Direction::uplink);
        for (double p : {1e-9, 1e-7, 1e-5})
        {
            const double cap = cmimo::su_mimo_cap(dl.H, p, dl.sigma_theta).rate.sum_rate;
            const auto rec = cmimo::su_mimo_recip(dl.H, up.H, p, dl.sigma_theta);
            CHECK(rec.rate.sum_rate <= cap + 1e-9);
            CHECK(rec.solution.alpha() == 1.0);
        }
    }
}

TEST_CASE("Strategies - SU-MIMO reciprocity without coupling")
{
    std::mt19937_64 rng(38);
    cmimo::ImpedanceSystem sys;
    const cplx za = cmimo::dipole_self_impedance();
    sys.Z11 = za * eye(4);
    sys.Z22 = za * eye(3);
    sys.Z21 = oracle::random_complex(3, 4, rng, 0.5);
    sys.Z_G = sys.Z_L = za.real();
    sys.user_partition = {3};
    const auto dl = cmimo::compute_H(sys, cmimo::NoiseConfig::defaults(), cmimo::Direction::downlink);
    const auto ul = cmimo::compute_H(sys, cmimo::NoiseConfig::defaults(), cmimo::Direction::uplink);
    for (double p : {1e-9, 1e-6})
    {
        const double cap = cmimo::su_mimo_cap(dl.H, p, dl.sigma_theta).rate.sum_rate;
        CHECK(cmimo::su_mimo_recip(dl.H, ul.H, p, dl.sigma_theta).rate.sum_rate == Approx(cap).epsilon(1e-10));
    }
}

TEST_CASE("Strategies - SU-MIMO hypothetical rate and alpha")
{
    std::mt19937_64 rng(39);
    const auto b = coupled_bundle(rng, 7, {3});

    // Vanishing power: one stream along the dominant right-singular vector of H_hat'
    {
        const double P = 1e-16;
        const auto out = cmimo::su_mimo_hyp(b.H_hat, b.H_hat_prime, b.power_mismatch, P, b.sigma_theta);
        CHECK(out.rate.active_streams == 1);
        Eigen::JacobiSVD<cmat> svd(b.H_hat_prime, Eigen::ComputeThinV);
        const cvec v = svd.matrixV().col(0);
        const auto miso = cmimo::su_miso_hyp(v.conjugate(), b.power_mismatch, P, b.sigma_theta);
        CHECK(out.solution.alpha() == Approx(miso.solution.alpha()).epsilon(1e-9));
    }

    // Large power: alpha from the generator-voltage covariance
    {
        const double P = 1e-3;
        const auto out = cmimo::su_mimo_hyp(b.H_hat, b.H_hat_prime, b.power_mismatch, P, b.sigma_theta);
        CHECK(out.rate.active_streams == 3);
        const cmat R_x = out.solution.transmit_covariance(7);
        const cmat Bih = b.B_hat_inv_hroot.asDiagonal();
        const cmat R_u = Bih * R_x * Bih.adjoint();
        const double radiated = (b.B * R_u).trace().real();
        const double predicted = (cmat(b.B_hat.asDiagonal()) * R_u).trace().real();
        CHECK(predicted == Approx(P).epsilon(1e-10));
        CHECK(out.solution.alpha() == Approx(radiated / predicted).epsilon(1e-10));
        CHECK(out.rate.sum_rate == Approx(log_det_rate(b.H_hat, R_x, b.sigma_theta)).epsilon(1e-12));
    }
}

TEST_CASE("Strategies - SU-MIMO hyp without coupling")
{
    std::mt19937_64 rng(40);
    cmimo::ImpedanceSystem sys;
    const cplx za = cmimo::dipole_self_impedance();
    sys.Z11 = za * eye(4);
    sys.Z22 = za * eye(2);
    sys.Z21 = oracle::random_complex(2, 4, rng, 0.5);
    sys.Z_G = sys.Z_L = za.real();
    sys.user_partition = {2};
    const auto b = cmimo::compute_H(sys, cmimo::NoiseConfig::defaults(), cmimo::Direction::downlink);
    const double P = 1e-6;
    const auto out = cmimo::su_mimo_hyp(b.H_hat, b.H_hat_prime, b.power_mismatch, P, b.sigma_theta);
    CHECK(out.solution.alpha() == Approx(1.0).epsilon(1e-12));
    CHECK(out.rate.sum_rate == Approx(cmimo::su_mimo_cap(b.H, P, b.sigma_theta).rate.sum_rate).epsilon(1e-10));
}

// ---------------------------------------------------------------- MU: dual MAC

TEST_CASE("Strategies - dual MAC, single user")
{
    std::mt19937_64 rng(41);
    cmimo::MacOptions opt;
    opt.record_trace = true;
    for (int trial = 0; trial < 5; ++trial)
    {
        const cmat H = oracle::random_complex(3, 5, rng);
        const double P = std::pow(10.0, trial - 2.0);
        const auto mac = cmimo::mac_sum_capacity(H, P, 1.0, {3}, opt);
        CHECK(mac.converged);
        CHECK(std::abs(mac.sum_capacity - cmimo::su_mimo_cap(H, P, 1.0).rate.sum_rate) < 1e-6);
        for (std::size_t i = 1; i < mac.objective_trace.size(); ++i)
            CHECK(mac.objective_trace[i] - mac.objective_trace[i - 1] >= -1e-12);
    }
}

TEST_CASE("Strategies - dual MAC against a power grid")
{
    std::mt19937_64 rng(42);
    cmimo::MacOptions opt;
    opt.record_trace = true;
    for (int trial = 0; trial < 10; ++trial)
    {
        const cmat H = oracle::random_complex(2, 4, rng);
        const double P = std::pow(10.0, double(trial % 5) - 2.0);
        const auto mac = cmimo::mac_sum_capacity(H, P, 1.0, {1, 1}, opt);
        double best = 0.0;
        for (int i = 0; i <= 2000; ++i)
        {
            const double p1 = P * i / 2000.0;
            cmat Xi = cmat::Zero(2, 2);
            Xi(0, 0) = p1;
            Xi(1, 1) = P - p1;
            best = std::max(best, cmimo::log2_det_identity_plus(H.adjoint() * Xi * H));
        }
        INFO("P = " << P);
        CHECK(std::abs(mac.sum_capacity - best) < 1e-4);
        CHECK(mac.Xi.trace().real() <= P * (1.0 + 1e-12));
        for (std::size_t i = 1; i < mac.objective_trace.size(); ++i)
            CHECK(mac.objective_trace[i] - mac.objective_trace[i - 1] >= -1e-12);
    }
}

TEST_CASE("Strategies - dual MAC with orthogonal users")
{
    // Orthogonal row spaces separate the problem into a joint waterfilling over all modes.
    std::mt19937_64 rng(43);
    const cmat Q = oracle::random_complex(6, 6, rng).householderQr().householderQ();
    const cmat H1 = oracle::random_complex(2, 2, rng) * Q.leftCols(2).adjoint();
    const cmat H2 = oracle::random_complex(2, 3, rng) * Q.middleCols(2, 3).adjoint();
    cmat H(4, 6);
    H << H1, H2;
    const double P = 2.0, sigma = 0.9;

    Eigen::JacobiSVD<cmat> s1(H1), s2(H2);
    rvec g(4);
    g << s1.singularValues().array().square(), s2.singularValues().array().square();
    g /= sigma * sigma;
    const rvec p = cmimo::waterfill(g, P);
    double ref = 0.0;
    for (int i = 0; i < 4; ++i)
        ref += std::log2(1.0 + g(i) * p(i));

    const auto mac = cmimo::mac_sum_capacity(H, P, sigma, {2, 2});
    CHECK(std::abs(mac.sum_capacity - ref) < 1e-6);
}

TEST_CASE("Strategies - DPC covariances reproduce the MAC rates")
{
    std::mt19937_64 rng(44);
    const cmat H = oracle::random_complex(4, 5, rng);
    const std::vector<int> blocks = {2, 1, 1};
    const double P = 3.0, sigma = 0.6;
    const auto out = cmimo::dpc_sum_capacity(Strategy::cap, H, P, sigma, blocks);
    const auto &S = *out.solution.bc_covariances;

    double total = 0.0;
    cmat sum = cmat::Zero(5, 5);
    for (const auto &s : S)
    {
        total += s.trace().real();
        sum += s;
    }
    CHECK(total == Approx(out.solution.dual_mac_covariance->trace().real()).epsilon(1e-9));

    // Dirty paper coding: user k is interfered by users j < k only
    double rate = 0.0;
    Eigen::Index off = 0;
    cmat before = cmat::Zero(5, 5);
    for (std::size_t k = 0; k < blocks.size(); ++k)
    {
        const cmat Hk = H.middleRows(off, blocks[k]) / sigma;
        const cmat I = eye(blocks[k]);
        rate += cmimo::log2_det_hpd(I + Hk * (before + S[k]) * Hk.adjoint()) -
                cmimo::log2_det_hpd(I + Hk * before * Hk.adjoint());
        before += S[k];
        off += blocks[k];
    }
    CHECK(rate == Approx(out.rate.sum_rate).epsilon(1e-9));
}

// ---------------------------------------------------------------- MU: linear ZF

TEST_CASE("Strategies - greedy ZF with orthogonal users")
{
    std::mt19937_64 rng(45);
    const cmat Q = oracle::random_complex(4, 4, rng).householderQr().householderQ();
    cmat H(2, 4);
    H.row(0) = 1.5 * Q.col(0).transpose();
    H.row(1) = 0.4 * Q.col(1).transpose();
    const double P = 0.3, sigma = 0.5;
    const auto sol = cmimo::greedy_zf(H, P, sigma, {1, 1});

    rvec g(2);
    g << 1.5 * 1.5, 0.4 * 0.4;
    const rvec p = cmimo::waterfill(g / (sigma * sigma), P);
    for (int k = 0; k < 2; ++k)
    {
        REQUIRE(sol.precoders[k].cols() == (p(k) > 0.0 ? 1 : 0));
        if (p(k) == 0.0)
            continue;
        const cvec f = sol.precoders[k].col(0);
        const cvec mf = H.row(k).adjoint() / H.row(k).norm();
        CHECK(std::abs(std::abs(f.dot(mf)) - 1.0) < 1e-12);
        CHECK(sol.stream_powers[k](0) == Approx(p(k)).epsilon(1e-12));
    }
}

TEST_CASE("Strategies - greedy ZF single user")
{
    std::mt19937_64 rng(46);
    const cmat H = oracle::random_complex(3, 5, rng);
    const auto sol = cmimo::greedy_zf(H, 1e-4, 1.0, {3});
    REQUIRE(sol.precoders[0].cols() >= 1);
    Eigen::JacobiSVD<cmat> svd(H, Eigen::ComputeThinV);
    CHECK(std::abs(std::abs(sol.precoders[0].col(0).dot(svd.matrixV().col(0))) - 1.0) < 1e-10);
}

TEST_CASE("Strategies - greedy ZF with colinear users")
{
    std::mt19937_64 rng(47);
    const cvec h = oracle::random_complex(4, 1, rng);
    cmat H(2, 4);
    H.row(0) = h.transpose();
    H.row(1) = cplx(0.5, 0.7) * h.transpose();
    for (double P : {1e-3, 1.0, 1e3, 1e6})
    {
        const auto sol = cmimo::greedy_zf(H, P, 1.0, {1, 1});
        const auto r = cmimo::evaluate_bc_rates(Strategy::cap_lin, H, sol, 1.0, {1, 1});
        CHECK(r.active_streams == 1);
    }
}

TEST_CASE("Strategies - greedy ZF nulls interference on its channel")
{
    std::mt19937_64 rng(48);
    const std::vector<int> blocks = {2, 1, 3};
    const cmat H = oracle::random_complex(6, 8, rng);
    const double P = 100.0, sigma = 1.0;
    const auto sol = cmimo::greedy_zf(H, P, sigma, blocks);

    // Zero inter-stream interference after the receive filters
    std::vector<cvec> rows, beams;
    Eigen::Index off = 0;
    for (std::size_t k = 0; k < blocks.size(); ++k)
    {
        for (Eigen::Index i = 0; i < sol.precoders[k].cols(); ++i)
        {
            rows.push_back((sol.receive_filters[k].col(i).adjoint() * H.middleRows(off, blocks[k])).transpose());
            beams.push_back(sol.precoders[k].col(i));
        }
        off += blocks[k];
    }
    const int streams = int(rows.size());
    for (int i = 0; i < streams; ++i)
    {
        const double direct = std::abs(rows[i].cwiseProduct(beams[i]).sum());
        CHECK(direct > 0.0);
        for (int j = 0; j < streams; ++j)
            if (j != i)
                CHECK(std::abs(rows[i].cwiseProduct(beams[j]).sum()) < 1e-10 * direct);
    }
    CHECK(streams >= 2);
    CHECK(streams <= 6);

    double total = 0.0;
    for (const auto &p : sol.stream_powers)
        total += p.sum();
    CHECK(total == Approx(P).epsilon(1e-9));

    // Linear precoding cannot beat the sum capacity
    const auto r = cmimo::evaluate_bc_rates(Strategy::cap_lin, H, sol, sigma, blocks);
    CHECK(r.sum_rate <= cmimo::mac_sum_capacity(H, P, sigma, blocks).sum_capacity + 1e-9);
}

TEST_CASE("Strategies - BC rate evaluation")
{
    std::mt19937_64 rng(49);
    const double sigma = 0.8, P = 5.0;

    // ZF on the true channel: per-stream waterfilled rates
    const cmat H = oracle::random_complex(3, 5, rng);
    const std::vector<int> single = {1, 1, 1};
    const auto sol = cmimo::greedy_zf(H, P, sigma, single);
    const auto r = cmimo::evaluate_bc_rates(Strategy::cap_lin, H, sol, sigma, single);
    double zf = 0.0;
    for (int k = 0; k < 3; ++k)
        for (Eigen::Index i = 0; i < sol.precoders[k].cols(); ++i)
            zf += std::log2(1.0 + sol.stream_powers[k](i) * std::norm((H.row(k) * sol.precoders[k].col(i)).value()) /
                                      (sigma * sigma));
    CHECK(r.sum_rate == Approx(zf).epsilon(1e-10));

    // Single user reduces to the point-to-point log det
    cmimo::PrecodingSolution one;
    const cmat F = oracle::random_complex(5, 2, rng).householderQr().householderQ() * eye(5).leftCols(2);
    one.precoders = {F};
    one.stream_powers = {rvec::Constant(2, 0.5)};
    one.predicted_power = 1.0;
    const cmat Hs = oracle::random_complex(2, 5, rng);
    const auto rs = cmimo::evaluate_bc_rates(Strategy::cap, Hs, one, sigma, {2});
    CHECK(rs.sum_rate == Approx(log_det_rate(Hs, 0.5 * F * F.adjoint(), sigma)).epsilon(1e-12));
    CHECK(rs.active_streams == 2);
}

TEST_CASE("Strategies - BC rates against sampled mutual information")
{
    // Mismatched ZF precoder on a perturbed 2 x 2 channel. For user k the interference plus
    // noise z ~ CN(0, C) is Gaussian, so I(s; y) = E[log p(y | s) - log p(y)] is sampled.
    std::mt19937_64 rng(50);
    const cmat H = oracle::random_complex(2, 2, rng);
    const cmat H_assumed = H + 0.3 * oracle::random_complex(2, 2, rng);
    const double sigma = 0.5, P = 100.0;
    const std::vector<int> blocks = {1, 1};
    const auto sol = cmimo::greedy_zf(H_assumed, P, sigma, blocks);
    const auto r = cmimo::evaluate_bc_rates(Strategy::recip_lin, H, sol, sigma, blocks);
    REQUIRE(sol.precoders[0].cols() == 1);
    REQUIRE(sol.precoders[1].cols() == 1);

    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const auto cn = [&] { return cplx(n(rng), n(rng)); };
    const int samples = 1000000;
    double sampled = 0.0;
    for (int k = 0; k < 2; ++k)
    {
        const int j = 1 - k;
        const cplx a = (H.row(k) * sol.precoders[k].col(0)).value() * std::sqrt(sol.stream_powers[k](0));
        const cplx b = (H.row(k) * sol.precoders[j].col(0)).value() * std::sqrt(sol.stream_powers[j](0));
        const double c = std::norm(b) + sigma * sigma; // interference plus noise
        const double t = c + std::norm(a);             // total received
        double acc = 0.0;
        for (int s = 0; s < samples; ++s)
        {
            const cplx sk = cn(), z = std::sqrt(c) * cn();
            const cplx y = a * sk + z;
            // log2 CN(y; a s, c) - log2 CN(y; 0, t)
            acc += (-std::norm(y - a * sk) / c + std::norm(y) / t) / std::log(2.0) + std::log2(t / c);
        }
        sampled += acc / samples;
    }
    CHECK(std::abs(sampled - r.sum_rate) < 0.02 * r.sum_rate);
}
