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

#ifndef COUPLED_MIMO_CONFIG_HPP
#define COUPLED_MIMO_CONFIG_HPP

#include "csv.hpp"
#include "montecarlo.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cmimo
{
    enum class Emitter
    {
        rates_csv,
        alpha_csv,
        streams_csv,
        kde_csv,
        per_realization_json
    };

    inline constexpr std::array<Emitter, 5> all_emitters = {Emitter::rates_csv, Emitter::alpha_csv,
                                                            Emitter::streams_csv, Emitter::kde_csv,
                                                            Emitter::per_realization_json};

    inline std::string_view to_string(Emitter e)
    {
        switch (e)
        {
        case Emitter::rates_csv: return "rates_csv";
        case Emitter::alpha_csv: return "alpha_csv";
        case Emitter::streams_csv: return "streams_csv";
        case Emitter::kde_csv: return "kde_csv";
        case Emitter::per_realization_json: return "per_realization_json";
        }
        return "?";
    }

    /// A configuration problem; line is 0 when it concerns the file as a whole.
    class config_error : public std::runtime_error
    {
    public:
        config_error(const std::string &source, int line, const std::string &message)
            : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
              line_(line)
        {
        }
        int line() const { return line_; }

    private:
        int line_;
    };

    struct RunConfig
    {
        Scenario scenario;
        std::vector<double> power_dbw; // as configured; scenario.power_grid holds the watts
        std::filesystem::path output_dir;
        std::vector<Emitter> emit = {Emitter::rates_csv, Emitter::alpha_csv, Emitter::streams_csv, Emitter::kde_csv};
        std::optional<std::filesystem::path> channel_file; // resolved path

        bool emits(Emitter e) const { return std::find(emit.begin(), emit.end(), e) != emit.end(); }
    };

    namespace detail
    {
        struct ConfigEntry
        {
            std::string value;
            int line = 0;
        };

        inline const std::vector<std::string_view> &config_keys()
        {
            static const std::vector<std::string_view> keys = {
                "topology",    "bs_antennas", "users",   "spacing_bs",  "spacing_ue",    "sigma_z",
                "power_dbw",   "realizations", "seed",   "strategies",  "noise.sigma_u", "noise.sigma_i",
                "noise.rho",   "noise.T_A",   "noise.delta_f", "output_dir", "emit",     "threads",
                "channel_file"};
            return keys;
        }

        class ConfigReader
        {
        public:
            ConfigReader(std::string source, std::map<std::string, ConfigEntry> entries)
                : source_(std::move(source)), entries_(std::move(entries))
            {
            }

            bool has(const std::string &key) const { return entries_.count(key) > 0; }

            const ConfigEntry &require(const std::string &key) const
            {
                const auto it = entries_.find(key);
                if (it == entries_.end())
                    throw config_error(source_, 0, "missing required key '" + key + "'");
                return it->second;
            }

            [[noreturn]] void fail(const std::string &key, const std::string &what) const
            {
                const auto it = entries_.find(key);
                throw config_error(source_, it == entries_.end() ? 0 : it->second.line, key + ": " + what);
            }

            double number(const std::string &key) const
            {
                const auto v = parse_double(require(key).value);
                if (!v || !std::isfinite(*v))
                    fail(key, "expected a number, got '" + require(key).value + "'");
                return *v;
            }

            double positive(const std::string &key) const
            {
                const double v = number(key);
                if (!(v > 0.0))
                    fail(key, "must be positive");
                return v;
            }

            std::int64_t integer(const std::string &key) const
            {
                const auto s = trim(require(key).value);
                std::int64_t v = 0;
                const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
                if (r.ec != std::errc() || r.ptr != s.data() + s.size())
                    fail(key, "expected an integer, got '" + std::string(s) + "'");
                return v;
            }

            std::uint64_t unsigned_integer(const std::string &key) const
            {
                const auto s = trim(require(key).value);
                std::uint64_t v = 0;
                const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
                if (r.ec != std::errc() || r.ptr != s.data() + s.size())
                    fail(key, "expected a nonnegative integer, got '" + std::string(s) + "'");
                return v;
            }

            std::vector<std::string> list(const std::string &key) const
            {
                std::vector<std::string> out;
                for (auto part : split(require(key).value, ','))
                {
                    const auto t = trim(part);
                    if (t.empty())
                        fail(key, "empty list element");
                    out.emplace_back(t);
                }
                return out;
            }

            std::string text(const std::string &key) const { return std::string(trim(require(key).value)); }

        private:
            std::string source_;
            std::map<std::string, ConfigEntry> entries_;
        };

        // "start:step:stop" (inclusive) or a comma separated list, in dBW.
        inline std::vector<double> parse_power_grid(const ConfigReader &r)
        {
            const std::string v = r.text("power_dbw");
            std::vector<double> out;
            if (v.find(':') != std::string::npos)
            {
                const auto parts = split(v, ':');
                if (parts.size() != 3)
                    r.fail("power_dbw", "expected start:step:stop");
                const auto a = parse_double(parts[0]), step = parse_double(parts[1]), b = parse_double(parts[2]);
                if (!a || !step || !b || !(*step > 0.0) || !(*b >= *a))
                    r.fail("power_dbw", "expected start:step:stop with step > 0 and stop >= start");
                const auto count = std::size_t(std::floor((*b - *a) / *step + 1e-9)) + 1;
                if (count > 100000)
                    r.fail("power_dbw", "too many power points");
                for (std::size_t i = 0; i < count; ++i)
                    out.push_back(*a + double(i) * *step);
            }
            else
            {
                for (const auto &s : r.list("power_dbw"))
                {
                    const auto x = parse_double(s);
                    if (!x || !std::isfinite(*x))
                        r.fail("power_dbw", "expected a number, got '" + s + "'");
                    out.push_back(*x);
                }
            }
            for (std::size_t i = 1; i < out.size(); ++i)
                if (!(out[i] > out[i - 1]))
                    r.fail("power_dbw", "powers must be strictly increasing");
            return out;
        }
    }

    /// Parses a key = value configuration. Blank lines and text after '#' are ignored.
    /// Relative channel_file paths are resolved against base_dir; output_dir defaults to
    /// default_output_dir when absent.
    inline RunConfig parse_config(std::string_view text, const std::string &source,
                                  const std::filesystem::path &base_dir,
                                  const std::filesystem::path &default_output_dir)
    {
        std::map<std::string, detail::ConfigEntry> entries;
        int line_no = 0;
        for (auto raw : split(text, '\n'))
        {
            ++line_no;
            auto line = raw;
            if (const auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            line = trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw config_error(source, line_no, "expected 'key = value'");
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            const auto &keys = detail::config_keys();
            if (std::find(keys.begin(), keys.end(), key) == keys.end())
                throw config_error(source, line_no, "unknown key '" + key + "'");
            if (value.empty())
                throw config_error(source, line_no, key + ": empty value");
            if (entries.count(key))
                throw config_error(source, line_no,
                                   "duplicate key '" + key + "' (first set on line " +
                                       std::to_string(entries[key].line) + ")");
            entries[key] = {value, line_no};
        }

        const detail::ConfigReader r(source, std::move(entries));
        RunConfig cfg;
        Scenario &s = cfg.scenario;

        const auto topo = parse_topology(r.text("topology"));
        if (!topo)
            r.fail("topology", "expected one of su_miso, su_mimo, mu_miso, mu_mimo");
        s.topology = *topo;

        const auto n = r.integer("bs_antennas");
        if (n < 1 || n > 4096)
            r.fail("bs_antennas", "must be between 1 and 4096");
        s.N = int(n);
        s.spacing_bs = r.positive("spacing_bs");
        cfg.power_dbw = detail::parse_power_grid(r);
        s.power_grid.clear();
        for (double p : cfg.power_dbw)
            s.power_grid.push_back(dbw_to_watt(p));
        s.seed = r.unsigned_integer("seed");

        if (r.has("channel_file"))
        {
            std::filesystem::path p = r.text("channel_file");
            cfg.channel_file = p.is_absolute() ? p : base_dir / p;
            if (r.has("realizations"))
                r.fail("realizations", "must not be set together with channel_file (the file defines the count)");
        }
        else
        {
            const auto real = r.integer("realizations");
            if (real < 1 || real > 100000000)
                r.fail("realizations", "must be between 1 and 1e8");
            s.n_realizations = int(real);
        }

        if (r.has("users"))
        {
            s.users.clear();
            for (const auto &u : r.list("users"))
            {
                int m = 0;
                const auto res = std::from_chars(u.data(), u.data() + u.size(), m);
                if (res.ec != std::errc() || res.ptr != u.data() + u.size() || m < 1)
                    r.fail("users", "expected positive antenna counts, got '" + u + "'");
                s.users.push_back(m);
            }
        }
        else if (s.topology == Topology::su_miso)
            s.users = {1};
        else
            r.require("users");

        if (r.has("spacing_ue"))
            s.spacing_ue = r.positive("spacing_ue");
        if (r.has("sigma_z") && r.text("sigma_z") != "auto")
            s.sigma_z = r.positive("sigma_z");

        if (r.has("strategies"))
        {
            s.strategies.clear();
            std::vector<bool> seen(strategy_count, false);
            for (const auto &name : r.list("strategies"))
            {
                const auto st = parse_strategy(name);
                if (!st)
                    r.fail("strategies", "unknown strategy '" + name + "'");
                if (!strategy_applies(s.topology, *st))
                    r.fail("strategies", "strategy '" + name + "' does not apply to " +
                                             std::string(to_string(s.topology)));
                seen[strategy_index(*st)] = true;
            }
            // Canonical order keeps output columns stable.
            for (Strategy st : all_strategies)
                if (seen[strategy_index(st)])
                    s.strategies.push_back(st);
        }
        else if (is_multi_user(s.topology))
            s.strategies = {Strategy::cap, Strategy::hyp, Strategy::cap_lin, Strategy::recip_lin, Strategy::hyp_lin};
        else
            s.strategies = {Strategy::cap, Strategy::recip, Strategy::hyp};

        if (r.has("noise.sigma_u"))
            s.noise.sigma_u = r.positive("noise.sigma_u");
        if (r.has("noise.sigma_i"))
            s.noise.sigma_i = r.positive("noise.sigma_i");
        if (r.has("noise.T_A"))
            s.noise.T_A = r.positive("noise.T_A");
        if (r.has("noise.delta_f"))
            s.noise.delta_f = r.positive("noise.delta_f");
        if (r.has("noise.rho"))
        {
            const auto parts = r.list("noise.rho");
            const auto re = parse_double(parts[0]);
            const auto im = parts.size() > 1 ? parse_double(parts[1]) : std::optional<double>(0.0);
            if (parts.size() > 2 || !re || !im)
                r.fail("noise.rho", "expected 're' or 're,im'");
            s.noise.rho = cplx(*re, *im);
            if (!(std::abs(s.noise.rho) <= 1.0))
                r.fail("noise.rho", "|rho| must not exceed 1");
        }

        cfg.output_dir = r.has("output_dir") ? std::filesystem::path(r.text("output_dir")) : default_output_dir;

        if (r.has("emit"))
        {
            cfg.emit.clear();
            std::vector<bool> seen(all_emitters.size(), false);
            for (const auto &name : r.list("emit"))
            {
                const auto it = std::find_if(all_emitters.begin(), all_emitters.end(),
                                             [&](Emitter e) { return to_string(e) == name; });
                if (it == all_emitters.end())
                    r.fail("emit", "unknown emitter '" + name + "'");
                seen[std::size_t(it - all_emitters.begin())] = true;
            }
            for (std::size_t i = 0; i < all_emitters.size(); ++i)
                if (seen[i])
                    cfg.emit.push_back(all_emitters[i]);
        }

        const bool has_alpha = alpha_source(s).has_value();
        if (!has_alpha && !r.has("emit"))
            cfg.emit.erase(std::remove_if(cfg.emit.begin(), cfg.emit.end(),
                                          [](Emitter e) { return e == Emitter::alpha_csv || e == Emitter::kde_csv; }),
                           cfg.emit.end());
        if (!has_alpha && (cfg.emits(Emitter::alpha_csv) || cfg.emits(Emitter::kde_csv)))
            r.fail("emit", "alpha_csv and kde_csv need a hyp or hyp_lin strategy");

        if (r.has("threads"))
        {
            const auto t = r.integer("threads");
            if (t < 1 || t > 1024)
                r.fail("threads", "must be between 1 and 1024");
            s.threads = int(t);
        }
        s.keep_records = cfg.emits(Emitter::per_realization_json);

        try
        {
            Scenario probe = s;
            probe.external_Z21.reset();
            probe.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw config_error(source, 0, e.what());
        }
        return cfg;
    }

    inline RunConfig load_config(const std::filesystem::path &path, const std::filesystem::path &default_output_dir)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw config_error(path.string(), 0, "cannot open configuration file");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_config(ss.str(), path.string(), path.parent_path(), default_output_dir);
    }

    /// Fully explicit configuration; parsing it reproduces the same run.
    inline std::string effective_config(const RunConfig &cfg)
    {
        const Scenario &s = cfg.scenario;
        std::ostringstream os;
        const auto join = [](const auto &items, auto fmt) {
            std::string out;
            for (const auto &x : items)
            {
                if (!out.empty())
                    out += ',';
                out += fmt(x);
            }
            return out;
        };
        os << "# effective configuration\n";
        os << "topology = " << to_string(s.topology) << '\n';
        os << "bs_antennas = " << s.N << '\n';
        os << "users = " << join(s.users, [](int m) { return std::to_string(m); }) << '\n';
        os << "spacing_bs = " << format_double(s.spacing_bs) << '\n';
        os << "spacing_ue = " << format_double(s.spacing_ue) << '\n';
        os << "sigma_z = " << format_double(s.sigma_z) << '\n';
        os << "power_dbw = " << join(cfg.power_dbw, [](double p) { return format_double(p); }) << '\n';
        if (cfg.channel_file)
            os << "channel_file = " << std::filesystem::absolute(*cfg.channel_file).string() << '\n';
        else
            os << "realizations = " << s.n_realizations << '\n';
        os << "seed = " << s.seed << '\n';
        os << "strategies = " << join(s.strategies, [](Strategy x) { return std::string(to_string(x)); }) << '\n';
        os << "noise.sigma_u = " << format_double(s.noise.sigma_u) << '\n';
        os << "noise.sigma_i = " << format_double(s.noise.sigma_i) << '\n';
        os << "noise.rho = " << format_double(s.noise.rho.real()) << ',' << format_double(s.noise.rho.imag()) << '\n';
        os << "noise.T_A = " << format_double(s.noise.T_A) << '\n';
        os << "noise.delta_f = " << format_double(s.noise.delta_f) << '\n';
        os << "output_dir = " << cfg.output_dir.string() << '\n';
        os << "emit = " << join(cfg.emit, [](Emitter e) { return std::string(to_string(e)); }) << '\n';
        os << "threads = " << s.threads << '\n';
        return os.str();
    }
}

#endif
