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

#ifndef COUPLED_MIMO_CSV_HPP
#define COUPLED_MIMO_CSV_HPP

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace cmimo
{
    /// Shortest round-trip decimal representation, independent of the C locale.
    inline std::string format_double(double v)
    {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }

    /// Fixed-precision variant for human-facing summaries.
    inline std::string format_fixed(double v, int precision)
    {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
        return std::string(buf, res.ptr);
    }

    inline std::string_view trim(std::string_view s)
    {
        const auto first = s.find_first_not_of(" \t\r\n");
        if (first == std::string_view::npos)
            return {};
        const auto last = s.find_last_not_of(" \t\r\n");
        return s.substr(first, last - first + 1);
    }

    /// Parses a whole field as a double; nullopt when the field is not a number.
    inline std::optional<double> parse_double(std::string_view s)
    {
        s = trim(s);
        if (s.empty())
            return std::nullopt;
        if (s.front() == '+')
            s.remove_prefix(1);
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            return std::nullopt;
        return v;
    }

    inline std::vector<std::string_view> split(std::string_view s, char sep)
    {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (true)
        {
            const auto pos = s.find(sep, start);
            if (pos == std::string_view::npos)
            {
                out.push_back(s.substr(start));
                return out;
            }
            out.push_back(s.substr(start, pos - start));
            start = pos + 1;
        }
    }
}

#endif
