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

#ifndef COUPLED_MIMO_REPORT_HPP
#define COUPLED_MIMO_REPORT_HPP

#include "config.hpp"
#include "csv.hpp"
#include "montecarlo.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace cmimo
{
    /// Column name of a strategy in rates.csv.
    inline std::string rate_column(Strategy s)
    {
        switch (s)
        {
        case Strategy::cap: return "C_erg";
        case Strategy::recip: return "R_erg_recip";
        case Strategy::hyp: return "R_erg_hyp";
        case Strategy::cap_lin: return "R_erg_lin";
        case Strategy::recip_lin: return "R_erg_recip_lin";
        case Strategy::hyp_lin: return "R_erg_hyp_lin";
        }
        return "?";
    }

    inline std::string rates_csv(const RunConfig &cfg, const ScenarioResult &res)
    {
        std::string out = "# units: P_dBW in dBW; rates in bits/use (ergodic mean over realizations)\nP_dBW";
        for (Strategy s : res.strategies)
            out += ',' + rate_column(s);
        out += '\n';
        for (std::size_t ip = 0; ip < res.power_grid.size(); ++ip)
        {
            out += format_double(cfg.power_dbw[ip]);
            for (std::size_t k = 0; k < res.strategies.size(); ++k)
                out += ',' + format_double(res.ergodic_rates[k][ip]);
            out += '\n';
        }
        return out;
    }

    inline std::string streams_csv(const RunConfig &cfg, const ScenarioResult &res)
    {
        std::string out = "# units: P_dBW in dBW; streams as mean count of active streams\nP_dBW";
        for (Strategy s : res.strategies)
            out += ",streams_" + std::string(to_string(s));
        out += '\n';
        for (std::size_t ip = 0; ip < res.power_grid.size(); ++ip)
        {
            out += format_double(cfg.power_dbw[ip]);
            for (std::size_t k = 0; k < res.strategies.size(); ++k)
                out += ',' + format_double(res.active_streams_avg[k][ip]);
            out += '\n';
        }
        return out;
    }

    inline std::string alpha_csv(const RunConfig &cfg, const ScenarioResult &res)
    {
        std::string out = "# units: P_dBW in dBW; alpha = radiated / predicted power (dimensionless)\n"
                          "P_dBW,realization,alpha\n";
        for (std::size_t ip = 0; ip < res.alpha_samples.size(); ++ip)
        {
            const std::string p = format_double(cfg.power_dbw[ip]);
            for (std::size_t i = 0; i < res.alpha_samples[ip].size(); ++i)
                out += p + ',' + std::to_string(i) + ',' + format_double(res.alpha_samples[ip][i]) + '\n';
        }
        return out;
    }

    inline std::string kde_csv(const RunConfig &cfg, const ScenarioResult &res)
    {
        std::string out = "# units: P_dBW in dBW; alpha dimensionless; density per unit alpha\n"
                          "P_dBW,alpha,density\n";
        for (std::size_t ip = 0; ip < res.alpha_density.size(); ++ip)
        {
            if (!res.alpha_density[ip])
                continue;
            const std::string p = format_double(cfg.power_dbw[ip]);
            const auto &d = *res.alpha_density[ip];
            for (Eigen::Index g = 0; g < d.grid.size(); ++g)
                out += p + ',' + format_double(d.grid(g)) + ',' + format_double(d.density(g)) + '\n';
        }
        return out;
    }

    inline std::string kde_csv(const Density &d)
    {
        std::string out = "alpha,density\n";
        for (Eigen::Index g = 0; g < d.grid.size(); ++g)
            out += format_double(d.grid(g)) + ',' + format_double(d.density(g)) + '\n';
        return out;
    }

    inline std::string per_realization_json(const RunConfig &cfg, const ScenarioResult &res)
    {
        using nlohmann::json;
        const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
        const Scenario &s = cfg.scenario;
        json j;
        j["topology"] = std::string(to_string(s.topology));
        j["bs_antennas"] = s.N;
        j["users"] = s.users;
        j["seed"] = s.seed;
        j["power_dbw"] = cfg.power_dbw;
        json strategies = json::array();
        for (Strategy st : res.strategies)
            strategies.push_back(std::string(to_string(st)));
        j["strategies"] = strategies;
        j["alpha_strategy"] = res.alpha_strategy ? json(std::string(to_string(*res.alpha_strategy))) : json(nullptr);
        j["resampled"] = res.resampled;

        json recs = json::array();
        for (const auto &rec : res.records)
        {
            json r;
            r["index"] = rec.index;
            r["attempts"] = rec.attempts;
            r["sigma_theta"] = rec.sigma_theta;
            r["reciprocity_gap"] = num(rec.reciprocity_gap);
            json points = json::array();
            for (std::size_t ip = 0; ip < rec.rates.size(); ++ip)
            {
                json p;
                p["P_dBW"] = cfg.power_dbw[ip];
                json rates = json::object(), streams = json::object();
                for (Strategy st : res.strategies)
                {
                    rates[std::string(to_string(st))] = num(rec.rates[ip][strategy_index(st)]);
                    streams[std::string(to_string(st))] = rec.streams[ip][strategy_index(st)];
                }
                p["rates"] = rates;
                p["streams"] = streams;
                p["alpha"] = rec.alpha.empty() ? json(nullptr) : num(rec.alpha[ip]);
                points.push_back(p);
            }
            r["points"] = points;
            recs.push_back(r);
        }
        j["realizations"] = recs;
        return j.dump(1) + '\n';
    }

    /// One human-readable line per power point.
    inline std::string summary_line(const RunConfig &cfg, const ScenarioResult &res, std::size_t ip)
    {
        std::string out = "P = " + format_fixed(cfg.power_dbw[ip], 2) + " dBW";
        for (std::size_t k = 0; k < res.strategies.size(); ++k)
            out += "  " + rate_column(res.strategies[k]) + " = " + format_fixed(res.ergodic_rates[k][ip], 4);
        if (!res.alpha_samples.empty())
        {
            const auto &a = res.alpha_samples[ip];
            double mean = 0.0;
            for (double x : a)
                mean += x;
            out += "  alpha_mean = " + format_fixed(mean / double(a.size()), 4);
        }
        return out;
    }

    inline void write_text_file(const std::filesystem::path &path, const std::string &content)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + path.string());
        out << content;
        if (!out)
            throw std::runtime_error("failed writing " + path.string());
    }

    /// Writes every requested emitter plus effective.cfg into cfg.output_dir.
    inline std::vector<std::filesystem::path> write_outputs(const RunConfig &cfg, const ScenarioResult &res)
    {
        std::filesystem::create_directories(cfg.output_dir);
        std::vector<std::filesystem::path> written;
        const auto put = [&](const char *name, const std::string &content) {
            const auto p = cfg.output_dir / name;
            write_text_file(p, content);
            written.push_back(p);
        };
        for (Emitter e : cfg.emit)
        {
            switch (e)
            {
            case Emitter::rates_csv: put("rates.csv", rates_csv(cfg, res)); break;
            case Emitter::alpha_csv: put("alpha.csv", alpha_csv(cfg, res)); break;
            case Emitter::streams_csv: put("streams.csv", streams_csv(cfg, res)); break;
            case Emitter::kde_csv: put("kde.csv", kde_csv(cfg, res)); break;
            case Emitter::per_realization_json: put("per_realization.json", per_realization_json(cfg, res)); break;
            }
        }
        put("effective.cfg", effective_config(cfg));
        return written;
    }
}

#endif
