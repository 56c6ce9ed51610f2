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

#ifndef COUPLED_MIMO_MONTECARLO_HPP
#define COUPLED_MIMO_MONTECARLO_HPP

#include "channel_model.hpp"
#include "common.hpp"
#include "em_arrays.hpp"
#include "strategies.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace cmimo
{
    enum class Topology
    {
        su_miso,
        su_mimo,
        mu_miso,
        mu_mimo
    };

    inline std::string_view to_string(Topology t)
    {
        switch (t)
        {
        case Topology::su_miso: return "su_miso";
        case Topology::su_mimo: return "su_mimo";
        case Topology::mu_miso: return "mu_miso";
        case Topology::mu_mimo: return "mu_mimo";
        }
        return "?";
    }

    inline std::optional<Topology> parse_topology(std::string_view s)
    {
        for (Topology t : {Topology::su_miso, Topology::su_mimo, Topology::mu_miso, Topology::mu_mimo})
            if (to_string(t) == s)
                return t;
        return std::nullopt;
    }

    inline bool is_multi_user(Topology t) { return t == Topology::mu_miso || t == Topology::mu_mimo; }

    /// Strategies that make sense for a topology. Single-user links have no separate linear
    /// variants; ordinary reciprocity with dirty paper coding is not simulated.
    inline bool strategy_applies(Topology t, Strategy s)
    {
        if (!is_multi_user(t))
            return s == Strategy::cap || s == Strategy::recip || s == Strategy::hyp;
        return s != Strategy::recip;
    }

    /// |Z21| of two dipoles 1000 wavelengths apart; the default scale of the i.i.d. Z21 entries.
    inline double default_sigma_z() { return std::abs(dipole_mutual_impedance(1000.0)); }

    /// Thrown when too many realizations fail numerically.
    class simulation_aborted : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct Scenario
    {
        Topology topology = Topology::su_miso;
        int N = 1;
        std::vector<int> users = {1}; // antennas per mobile
        double spacing_bs = 0.5;      // [wavelengths]
        double spacing_ue = 0.5;      // [wavelengths]
        double sigma_z = default_sigma_z(); // [ohm]
        std::vector<double> power_grid;     // [W], strictly increasing
        int n_realizations = 1;
        std::uint64_t seed = 0;
        NoiseConfig noise = NoiseConfig::defaults();
        std::vector<Strategy> strategies = {Strategy::cap, Strategy::recip, Strategy::hyp};
        int threads = 1;
        bool keep_records = false;
        std::optional<std::vector<cmat>> external_Z21; // replaces sampling when set

        int M() const { return std::accumulate(users.begin(), users.end(), 0); }

        void validate() const
        {
            if (N < 1)
                throw std::invalid_argument("Scenario: bs_antennas must be at least 1.");
            if (users.empty() || std::any_of(users.begin(), users.end(), [](int m) { return m < 1; }))
                throw std::invalid_argument("Scenario: every user needs at least one antenna.");
            const bool single_antennas = std::all_of(users.begin(), users.end(), [](int m) { return m == 1; });
            switch (topology)
            {
            case Topology::su_miso:
                if (users.size() != 1 || users[0] != 1)
                    throw std::invalid_argument("Scenario: su_miso needs exactly one single-antenna user.");
                break;
            case Topology::su_mimo:
                if (users.size() != 1)
                    throw std::invalid_argument("Scenario: su_mimo needs exactly one user.");
                break;
            case Topology::mu_miso:
                if (users.size() < 2 || !single_antennas)
                    throw std::invalid_argument("Scenario: mu_miso needs at least two single-antenna users.");
                break;
            case Topology::mu_mimo:
                if (users.size() < 2)
                    throw std::invalid_argument("Scenario: mu_mimo needs at least two users.");
                break;
            }
            if (!(spacing_bs > 0.0) || !(spacing_ue > 0.0))
                throw std::invalid_argument("Scenario: antenna spacings must be positive.");
            if (!(sigma_z > 0.0) || !std::isfinite(sigma_z))
                throw std::invalid_argument("Scenario: sigma_z must be positive.");
            if (power_grid.empty())
                throw std::invalid_argument("Scenario: the power grid is empty.");
            for (std::size_t i = 0; i < power_grid.size(); ++i)
            {
                if (!(power_grid[i] > 0.0) || !std::isfinite(power_grid[i]))
                    throw std::invalid_argument("Scenario: powers must be positive.");
                if (i > 0 && !(power_grid[i] > power_grid[i - 1]))
                    throw std::invalid_argument("Scenario: the power grid must be strictly increasing.");
            }
            if (n_realizations < 1)
                throw std::invalid_argument("Scenario: realizations must be at least 1.");
            if (strategies.empty())
                throw std::invalid_argument("Scenario: no strategies requested.");
            for (Strategy s : strategies)
                if (!strategy_applies(topology, s))
                    throw std::invalid_argument("Scenario: strategy " + std::string(to_string(s)) +
                                                " does not apply to " + std::string(to_string(topology)) + ".");
            if (threads < 1)
                throw std::invalid_argument("Scenario: threads must be at least 1.");
            noise.validate();
            if (external_Z21)
            {
                if (external_Z21->empty())
                    throw std::invalid_argument("Scenario: the imported channel file has no realizations.");
                for (const auto &Z : *external_Z21)
                    if (Z.rows() != M() || Z.cols() != N)
                        throw std::invalid_argument("Scenario: imported Z21 has the wrong dimensions.");
            }
        }

        bool requests(Strategy s) const
        {
            return std::find(strategies.begin(), strategies.end(), s) != strategies.end();
        }
    };

    // ---------------------------------------------------------------- random substreams

    namespace detail
    {
        inline std::uint64_t splitmix64(std::uint64_t x)
        {
            x += 0x9e3779b97f4a7c15ULL;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            return x ^ (x >> 31);
        }
    }

    /// Engine for one (seed, realization, attempt) triple; independent of scheduling.
    inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt = 0)
    {
        const std::uint64_t key =
            detail::splitmix64(detail::splitmix64(detail::splitmix64(seed) ^ index) ^ (attempt * 0xd1b54a32d192ed03ULL));
        return std::mt19937_64(key);
    }

    /// M x N matrix of i.i.d. CN(0, sigma_z^2) entries, drawn row by row, real part first.
    inline cmat sample_Z21(Eigen::Index M, Eigen::Index N, double sigma_z, std::mt19937_64 &rng)
    {
        if (!(sigma_z > 0.0))
            throw std::invalid_argument("sample_Z21: sigma_z must be positive.");
        std::normal_distribution<double> n(0.0, sigma_z / std::sqrt(2.0));
        cmat Z(M, N);
        for (Eigen::Index i = 0; i < M; ++i)
            for (Eigen::Index j = 0; j < N; ++j)
            {
                const double re = n(rng);
                const double im = n(rng);
                Z(i, j) = cplx(re, im);
            }
        return Z;
    }

    /// Impedance system of a scenario for a given Z21: UCA at the base station, one UCA per
    /// mobile, matched terminations Z_G = Z_L = Re(Z_A).
    inline ImpedanceSystem build_system(const Scenario &s, cmat Z21)
    {
        ImpedanceSystem sys;
        sys.Z11 = array_impedance_matrix(ArrayGeometry(std::size_t(s.N), s.spacing_bs));
        const int M = s.M();
        sys.Z22 = cmat::Zero(M, M);
        int off = 0;
        for (int m : s.users)
        {
            sys.Z22.block(off, off, m, m) = array_impedance_matrix(ArrayGeometry(std::size_t(m), s.spacing_ue));
            off += m;
        }
        sys.Z21 = std::move(Z21);
        sys.Z_G = sys.Z_L = dipole_self_impedance().real();
        sys.user_partition = s.users;
        return sys;
    }

    // ---------------------------------------------------------------- per-realization work

    inline constexpr std::size_t strategy_count = all_strategies.size();

    inline std::size_t strategy_index(Strategy s) { return std::size_t(s); }

    struct RealizationRecord
    {
        std::size_t index = 0;
        int attempts = 1;
        double sigma_theta = 0.0;
        double reciprocity_gap = 0.0; // ||H - H_UL^T|| / ||H||, NaN when the uplink is not needed
        // [power][strategy]; NaN / -1 for strategies that were not requested
        std::vector<std::array<double, strategy_count>> rates;
        std::vector<std::array<int, strategy_count>> streams;
        std::vector<double> alpha; // [power]; empty without a hyp strategy
        int mac_nonconverged = 0;
    };

    /// Strategy whose power ratio is reported: hyp_lin for multi-user runs that include it,
    /// otherwise hyp.
    inline std::optional<Strategy> alpha_source(const Scenario &s)
    {
        if (is_multi_user(s.topology) && s.requests(Strategy::hyp_lin))
            return Strategy::hyp_lin;
        if (s.requests(Strategy::hyp))
            return Strategy::hyp;
        return std::nullopt;
    }

    /// Evaluates every requested strategy of a scenario on one impedance system.
    inline RealizationRecord evaluate_realization(const Scenario &s, const ImpedanceSystem &sys)
    {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        const bool need_ul = s.requests(Strategy::recip) || s.requests(Strategy::recip_lin);
        const auto dl = compute_H(sys, s.noise, Direction::downlink);
        std::optional<ChannelBundle> ul;
        if (need_ul)
            ul = compute_H(sys, s.noise, Direction::uplink);

        if (!dl.H.allFinite() || (ul && !ul->H.allFinite()))
            throw numerical_error("evaluate_realization: non-finite channel matrix.");

        RealizationRecord rec;
        rec.sigma_theta = dl.sigma_theta;
        rec.reciprocity_gap = ul ? (dl.H - ul->H.transpose()).norm() / dl.H.norm() : nan;
        const std::size_t n_p = s.power_grid.size();
        rec.rates.assign(n_p, {});
        rec.streams.assign(n_p, {});
        for (auto &r : rec.rates)
            r.fill(nan);
        for (auto &r : rec.streams)
            r.fill(-1);
        const auto source = alpha_source(s);
        if (source)
            rec.alpha.assign(n_p, nan);

        const double sigma = dl.sigma_theta;
        const auto store = [&](std::size_t ip, const StrategyOutcome &o) {
            if (!std::isfinite(o.rate.sum_rate))
                throw numerical_error("evaluate_realization: non-finite rate.");
            rec.rates[ip][strategy_index(o.rate.strategy)] = o.rate.sum_rate;
            rec.streams[ip][strategy_index(o.rate.strategy)] = o.rate.active_streams;
            if (source && *source == o.rate.strategy)
                rec.alpha[ip] = o.solution.alpha();
        };

        for (std::size_t ip = 0; ip < n_p; ++ip)
        {
            const double P = s.power_grid[ip];
            for (Strategy st : s.strategies)
            {
                switch (s.topology)
                {
                case Topology::su_miso: {
                    const cvec h = dl.H.transpose();
                    if (st == Strategy::cap)
                        store(ip, su_miso_cap(h, P, sigma));
                    else if (st == Strategy::recip)
                        store(ip, su_miso_recip(h, ul->H.col(0), P, sigma));
                    else
                        store(ip, su_miso_hyp(dl.H_hat.transpose(), dl.power_mismatch, P, sigma));
                    break;
                }
                case Topology::su_mimo: {
                    if (st == Strategy::cap)
                        store(ip, su_mimo_cap(dl.H, P, sigma));
                    else if (st == Strategy::recip)
                        store(ip, su_mimo_recip(dl.H, ul->H, P, sigma));
                    else
                        store(ip, su_mimo_hyp(dl.H_hat, dl.H_hat_prime, dl.power_mismatch, P, sigma));
                    break;
                }
                case Topology::mu_miso:
                case Topology::mu_mimo: {
                    const auto &blocks = s.users;
                    StrategyOutcome o;
                    if (st == Strategy::cap || st == Strategy::hyp)
                    {
                        const cmat &H = st == Strategy::cap ? dl.H : dl.H_hat;
                        auto mac = mac_sum_capacity(H, P, sigma, blocks);
                        if (!mac.converged)
                            ++rec.mac_nonconverged;
                        Eigen::SelfAdjointEigenSolver<cmat> eig(mac.Xi);
                        o.rate.strategy = st;
                        o.rate.sum_rate = mac.sum_capacity;
                        o.rate.active_streams = count_active(eig.eigenvalues(), P);
                        o.solution.predicted_power = P;
                        o.solution.true_power = P;
                        if (st == Strategy::hyp)
                        {
                            const auto S = mac_to_bc_covariances(H, mac.Xi, sigma, blocks);
                            cmat R = cmat::Zero(H.cols(), H.cols());
                            for (const auto &c : S)
                                R += c;
                            o.solution.true_power = P * power_ratio(dl.power_mismatch, R, P);
                        }
                    }
                    else
                    {
                        // Design channel, evaluation channel
                        const cmat H_design = st == Strategy::cap_lin     ? dl.H
                                              : st == Strategy::recip_lin ? cmat(ul->H.transpose())
                                                                          : dl.H_hat_prime;
                        const cmat &H_eval = st == Strategy::hyp_lin ? dl.H_hat : dl.H;
                        o.solution = greedy_zf(H_design, P, sigma, blocks);
                        o.rate = evaluate_bc_rates(st, H_eval, o.solution, sigma, blocks);
                        if (st == Strategy::hyp_lin)
                            o.solution.true_power =
                                P * power_ratio(dl.power_mismatch, o.solution.transmit_covariance(H_eval.cols()), P);
                    }
                    store(ip, o);
                    break;
                }
                }
            }
        }
        return rec;
    }

    // ---------------------------------------------------------------- density estimation

    struct Density
    {
        rvec grid;
        rvec density;
        double bandwidth = 0.0;
    };

    /// Gaussian-kernel density on a uniform grid over [min - 3b, max + 3b] with Silverman's
    /// bandwidth b = 1.06 sd n^{-1/5}.
    inline Density kde(const std::vector<double> &samples, int n_grid = 128)
    {
        if (samples.size() < 2)
            throw std::invalid_argument("kde: at least two samples are required.");
        if (n_grid < 2)
            throw std::invalid_argument("kde: the grid needs at least two points.");
        for (double x : samples)
            if (!std::isfinite(x))
                throw std::invalid_argument("kde: samples must be finite.");
        const double n = double(samples.size());
        const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : samples)
            ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / (n - 1.0));
        const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
        if (!(sd > 0.0) || *lo_it == *hi_it)
            throw std::invalid_argument("kde: degenerate sample, all values are equal.");

        Density d;
        d.bandwidth = 1.06 * sd * std::pow(n, -0.2);
        const double lo = *lo_it - 3.0 * d.bandwidth, hi = *hi_it + 3.0 * d.bandwidth;
        d.grid = rvec::LinSpaced(n_grid, lo, hi);
        d.density = rvec::Zero(n_grid);
        const double norm = 1.0 / (n * d.bandwidth * std::sqrt(2.0 * pi));
        for (int g = 0; g < n_grid; ++g)
        {
            double acc = 0.0;
            for (double x : samples)
            {
                const double z = (d.grid(g) - x) / d.bandwidth;
                acc += std::exp(-0.5 * z * z);
            }
            d.density(g) = acc * norm;
        }
        return d;
    }

    // ---------------------------------------------------------------- scenario driver

    struct ScenarioResult
    {
        std::vector<double> power_grid;
        std::vector<Strategy> strategies;
        std::vector<std::vector<double>> ergodic_rates;      // [strategy][power]
        std::vector<std::vector<double>> active_streams_avg; // [strategy][power]
        std::vector<std::vector<double>> alpha_samples;      // [power][realization]
        std::vector<std::optional<Density>> alpha_density;   // [power]; empty when degenerate
        std::optional<Strategy> alpha_strategy;
        std::vector<double> reciprocity_gap; // [realization], when the uplink was evaluated
        int resampled = 0;                   // realizations drawn again after a failure
        int mac_nonconverged = 0;
        std::vector<RealizationRecord> records; // when Scenario::keep_records

        const std::vector<double> &rates(Strategy s) const
        {
            const auto it = std::find(strategies.begin(), strategies.end(), s);
            if (it == strategies.end())
                throw std::out_of_range("ScenarioResult: strategy was not simulated.");
            return ergodic_rates[std::size_t(it - strategies.begin())];
        }
    };

    namespace detail
    {
        inline RealizationRecord run_one(const Scenario &s, std::size_t index, int max_attempts)
        {
            std::string last_error;
            for (int attempt = 0; attempt < max_attempts; ++attempt)
            {
                cmat Z21;
                if (s.external_Z21)
                    Z21 = (*s.external_Z21)[index];
                else
                {
                    auto rng = substream(s.seed, index, std::uint64_t(attempt));
                    Z21 = sample_Z21(s.M(), s.N, s.sigma_z, rng);
                }
                try
                {
                    auto rec = evaluate_realization(s, build_system(s, std::move(Z21)));
                    rec.index = index;
                    rec.attempts = attempt + 1;
                    return rec;
                }
                catch (const numerical_error &e)
                {
                    last_error = e.what();
                    if (s.external_Z21)
                        break;
                }
            }
            throw simulation_aborted("realization " + std::to_string(index) + " failed: " + last_error);
        }
    }

    /// Runs all realizations (in parallel when threads > 1) and aggregates them in index order,
    /// so results do not depend on the thread count.
    inline ScenarioResult run_scenario(const Scenario &s)
    {
        s.validate();
        const std::size_t n = s.external_Z21 ? s.external_Z21->size() : std::size_t(s.n_realizations);
        // More than 1% failures aborts the run; a single realization may use the whole allowance.
        const int allowance = int(n / 100);
        const int max_attempts = allowance + 1;

        std::vector<RealizationRecord> records(n);
        std::atomic<std::size_t> next{0};
        std::atomic<int> failed_attempts{0};
        std::exception_ptr error;
        std::mutex error_mutex;

        const auto worker = [&] {
            for (;;)
            {
                const std::size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try
                {
                    records[i] = detail::run_one(s, i, max_attempts);
                    if (failed_attempts.fetch_add(records[i].attempts - 1) + records[i].attempts - 1 > allowance)
                        throw simulation_aborted("more than 1% of the realizations failed numerically.");
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        };

        const int threads = std::max(1, std::min<int>(s.threads, int(n)));
        if (threads == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(worker);
            for (auto &t : pool)
                t.join();
        }
        if (error)
            std::rethrow_exception(error);

        ScenarioResult res;
        res.power_grid = s.power_grid;
        res.strategies = s.strategies;
        res.alpha_strategy = alpha_source(s);
        const std::size_t n_p = s.power_grid.size();
        res.ergodic_rates.assign(s.strategies.size(), std::vector<double>(n_p, 0.0));
        res.active_streams_avg.assign(s.strategies.size(), std::vector<double>(n_p, 0.0));
        if (res.alpha_strategy)
            res.alpha_samples.assign(n_p, std::vector<double>(n, 0.0));

        for (std::size_t i = 0; i < n; ++i)
        {
            const auto &rec = records[i];
            res.resampled += rec.attempts - 1;
            res.mac_nonconverged += rec.mac_nonconverged;
            if (!std::isnan(rec.reciprocity_gap))
                res.reciprocity_gap.push_back(rec.reciprocity_gap);
            for (std::size_t k = 0; k < s.strategies.size(); ++k)
            {
                const std::size_t si = strategy_index(s.strategies[k]);
                for (std::size_t ip = 0; ip < n_p; ++ip)
                {
                    res.ergodic_rates[k][ip] += rec.rates[ip][si];
                    res.active_streams_avg[k][ip] += double(rec.streams[ip][si]);
                }
            }
            if (res.alpha_strategy)
                for (std::size_t ip = 0; ip < n_p; ++ip)
                    res.alpha_samples[ip][i] = rec.alpha[ip];
        }
        for (std::size_t k = 0; k < s.strategies.size(); ++k)
            for (std::size_t ip = 0; ip < n_p; ++ip)
            {
                res.ergodic_rates[k][ip] /= double(n);
                res.active_streams_avg[k][ip] /= double(n);
            }

        res.alpha_density.resize(res.alpha_samples.size());
        for (std::size_t ip = 0; ip < res.alpha_samples.size(); ++ip)
        {
            try
            {
                res.alpha_density[ip] = kde(res.alpha_samples[ip]);
            }
            catch (const std::invalid_argument &)
            {
                res.alpha_density[ip].reset();
            }
        }
        if (s.keep_records)
            res.records = std::move(records);
        return res;
    }
}

#endif
