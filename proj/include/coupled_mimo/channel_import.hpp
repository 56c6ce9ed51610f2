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

#ifndef COUPLED_MIMO_CHANNEL_IMPORT_HPP
#define COUPLED_MIMO_CHANNEL_IMPORT_HPP

#include "common.hpp"
#include "config.hpp"
#include "csv.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cmimo
{
    /// Reads externally generated Z21 realizations.
    ///
    /// CSV: each realization starts with a line "realization,<index>,<M>,<N>" followed by M
    /// lines of N "re,im" pairs. Indices must run 0, 1, 2, ... Lines starting with '#' are
    /// ignored.
    inline std::vector<cmat> read_channel_csv(std::string_view text, const std::string &source)
    {
        std::vector<cmat> out;
        const auto lines = split(text, '\n');
        std::size_t i = 0;
        const auto next_line = [&](std::string_view &line) {
            while (i < lines.size())
            {
                line = trim(lines[i++]);
                if (!line.empty() && line.front() != '#')
                    return true;
            }
            return false;
        };

        std::string_view line;
        while (next_line(line))
        {
            const int header_line = int(i);
            const auto f = split(line, ',');
            long idx = -1, M = 0, N = 0;
            const auto as_long = [](std::string_view s, long &v) {
                s = trim(s);
                const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
                return r.ec == std::errc() && r.ptr == s.data() + s.size();
            };
            if (f.size() != 4 || trim(f[0]) != "realization" || !as_long(f[1], idx) || !as_long(f[2], M) ||
                !as_long(f[3], N) || M < 1 || N < 1)
                throw config_error(source, header_line, "expected 'realization,<index>,<M>,<N>'");
            if (idx != long(out.size()))
                throw config_error(source, header_line,
                                   "expected realization index " + std::to_string(out.size()));
            cmat Z(M, N);
            for (long r = 0; r < M; ++r)
            {
                if (!next_line(line))
                    throw config_error(source, int(i), "unexpected end of file inside realization " +
                                                           std::to_string(idx));
                const auto v = split(line, ',');
                if (long(v.size()) != 2 * N)
                    throw config_error(source, int(i), "expected " + std::to_string(2 * N) + " values");
                for (long c = 0; c < N; ++c)
                {
                    const auto re = parse_double(v[2 * c]), im = parse_double(v[2 * c + 1]);
                    if (!re || !im || !std::isfinite(*re) || !std::isfinite(*im))
                        throw config_error(source, int(i), "unparseable number");
                    Z(r, c) = cplx(*re, *im);
                }
            }
            out.push_back(std::move(Z));
        }
        if (out.empty())
            throw config_error(source, 0, "no realizations found");
        return out;
    }

    /// JSON: {"realizations": [{"index": 0, "M": 2, "N": 4, "data": [[re, im], ...]}]} with
    /// data in row-major order.
    inline std::vector<cmat> read_channel_json(std::string_view text, const std::string &source)
    {
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw config_error(source, 0, std::string("invalid JSON: ") + e.what());
        }
        std::vector<cmat> out;
        try
        {
            for (const auto &rec : j.at("realizations"))
            {
                const long idx = rec.at("index").get<long>();
                const long M = rec.at("M").get<long>(), N = rec.at("N").get<long>();
                if (idx != long(out.size()))
                    throw config_error(source, 0, "expected realization index " + std::to_string(out.size()));
                const auto &data = rec.at("data");
                if (M < 1 || N < 1 || long(data.size()) != M * N)
                    throw config_error(source, 0, "realization " + std::to_string(idx) + ": data size mismatch");
                cmat Z(M, N);
                for (long k = 0; k < M * N; ++k)
                {
                    const auto &e = data.at(std::size_t(k));
                    if (e.size() != 2)
                        throw config_error(source, 0, "entries must be [re, im] pairs");
                    Z(k / N, k % N) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
                }
                out.push_back(std::move(Z));
            }
        }
        catch (const nlohmann::json::exception &e)
        {
            throw config_error(source, 0, std::string("malformed channel file: ") + e.what());
        }
        if (out.empty())
            throw config_error(source, 0, "no realizations found");
        return out;
    }

    inline std::vector<cmat> read_channel_file(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw config_error(path.string(), 0, "cannot open channel file");
        std::ostringstream ss;
        ss << in.rdbuf();
        if (path.extension() == ".json")
            return read_channel_json(ss.str(), path.string());
        return read_channel_csv(ss.str(), path.string());
    }

    inline void write_channel_csv(std::ostream &os, const std::vector<cmat> &realizations)
    {
        for (std::size_t k = 0; k < realizations.size(); ++k)
        {
            const cmat &Z = realizations[k];
            os << "realization," << k << ',' << Z.rows() << ',' << Z.cols() << '\n';
            write_complex_csv(os, Z);
        }
    }
}

#endif
