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

#ifndef COUPLED_MIMO_SPECIAL_FUNCTIONS_HPP
#define COUPLED_MIMO_SPECIAL_FUNCTIONS_HPP

#include "common.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace cmimo
{
    namespace detail
    {
        // Power series are used up to this argument, the continued fraction beyond.
        inline constexpr double sici_series_limit = 8.0;

        // Si and Ci from their Maclaurin series. The largest term at x = 8 is about 60,
        // so cancellation costs less than two digits.
        inline std::pair<double, double> sici_series(double x)
        {
            const double x2 = x * x;
            double si = 0.0, ci = 0.0;

            // Si: sum_k (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
            double t = x; // x^(2k+1) / (2k+1)!, signed
            for (int k = 0; k < 200; ++k)
            {
                const double term = t / double(2 * k + 1);
                si += term;
                if (std::abs(term) < 1e-17 * std::abs(si))
                    break;
                t *= -x2 / (double(2 * k + 2) * double(2 * k + 3));
            }

            // Ci - gamma - ln x: sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!)
            t = -x2 / 2.0; // (-1)^k x^(2k) / (2k)!
            for (int k = 1; k < 200; ++k)
            {
                const double term = t / double(2 * k);
                ci += term;
                if (std::abs(term) < 1e-17 * (std::abs(ci) + 1e-300))
                    break;
                t *= -x2 / (double(2 * k + 1) * double(2 * k + 2));
            }
            ci += euler_gamma + std::log(x);
            return {si, ci};
        }

        // E1(ix) by the modified Lentz continued fraction, then
        // Ci(x) = -Re E1(ix), Si(x) = pi/2 + Im E1(ix).
        inline std::pair<double, double> sici_continued_fraction(double x)
        {
            constexpr double tiny = 1e-300;
            constexpr double eps = std::numeric_limits<double>::epsilon();
            cplx b(1.0, x);
            cplx c = 1.0 / tiny;
            cplx d = 1.0 / b;
            cplx h = d;
            for (int i = 2; i < 1000; ++i)
            {
                const double a = -double(i - 1) * double(i - 1);
                b += 2.0;
                d = 1.0 / (a * d + b);
                c = b + a / c;
                const cplx del = c * d;
                h *= del;
                if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps)
                    break;
            }
            h *= cplx(std::cos(x), -std::sin(x));
            return {pi / 2.0 + h.imag(), -h.real()};
        }
    }

    /// Sine integral Si(x) = int_0^x sin(t)/t dt. Odd in x.
    inline double sine_integral(double x)
    {
        if (x < 0.0)
            return -sine_integral(-x);
        if (x == 0.0)
            return 0.0;
        return x <= detail::sici_series_limit ? detail::sici_series(x).first
                                              : detail::sici_continued_fraction(x).first;
    }

    /// Cosine integral Ci(x) = gamma + ln x + int_0^x (cos t - 1)/t dt, defined for x > 0.
    inline double cosine_integral(double x)
    {
        if (!(x > 0.0))
            throw std::domain_error("cosine_integral: argument must be positive.");
        return x <= detail::sici_series_limit ? detail::sici_series(x).second
                                              : detail::sici_continued_fraction(x).second;
    }
}

#endif
