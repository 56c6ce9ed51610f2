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

#ifndef COUPLED_MIMO_EM_ARRAYS_HPP
#define COUPLED_MIMO_EM_ARRAYS_HPP

#include "common.hpp"
#include "csv.hpp"
#include "special_functions.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace cmimo
{
    struct Point2
    {
        double x = 0.0;
        double y = 0.0;
    };

    /// Uniform circular array of parallel lambda/2 dipoles. All lengths are in wavelengths.
    class ArrayGeometry
    {
    public:
        ArrayGeometry(std::size_t n_elements, double spacing_wavelengths)
            : n_(n_elements), spacing_(spacing_wavelengths)
        {
            if (n_elements == 0)
                throw std::invalid_argument("ArrayGeometry: number of elements must be positive.");
            if (!(spacing_wavelengths > 0.0) || !std::isfinite(spacing_wavelengths))
                throw std::invalid_argument("ArrayGeometry: element spacing must be positive.");

            positions_.resize(n_);
            if (n_ == 1)
                return;
            const double r = radius();
            for (std::size_t i = 0; i < n_; ++i)
            {
                const double phi = 2.0 * pi * double(i) / double(n_);
                positions_[i] = {r * std::cos(phi), r * std::sin(phi)};
            }
        }

        std::size_t n_elements() const { return n_; }
        double spacing_wavelengths() const { return spacing_; }
        const std::vector<Point2> &positions() const { return positions_; }

        /// Circle radius d / (2 sin(pi/N)); zero for a single element.
        double radius() const
        {
            return n_ < 2 ? 0.0 : spacing_ / (2.0 * std::sin(pi / double(n_)));
        }

        double distance(std::size_t i, std::size_t j) const
        {
            return std::hypot(positions_[i].x - positions_[j].x, positions_[i].y - positions_[j].y);
        }

    private:
        std::size_t n_;
        double spacing_;
        std::vector<Point2> positions_;
    };

    /// Self-impedance of an infinitely thin lambda/2 dipole with sinusoidal current
    /// (induced-EMF method): eta0/(4 pi) * [gamma + ln(2 pi) - Ci(2 pi) + j Si(2 pi)].
    inline cplx dipole_self_impedance()
    {
        constexpr double two_pi = 2.0 * pi;
        const double scale = eta0 / (4.0 * pi);
        return {scale * (euler_gamma + std::log(two_pi) - cosine_integral(two_pi)),
                scale * sine_integral(two_pi)};
    }

    /// Mutual impedance of two side-by-side parallel lambda/2 dipoles at distance s (in wavelengths).
    ///
    /// With u0 = 2 pi s, u1 = 2 pi (sqrt(s^2 + 1/4) + 1/2), u2 = 2 pi (sqrt(s^2 + 1/4) - 1/2):
    ///   R = eta0/(4 pi) [2 Ci(u0) - Ci(u1) - Ci(u2)]
    ///   X = -eta0/(4 pi) [2 Si(u0) - Si(u1) - Si(u2)]
    /// As s -> 0 this tends to the self-impedance.
    inline cplx dipole_mutual_impedance(double s)
    {
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::domain_error("dipole_mutual_impedance: distance must be positive.");

        const double root = std::sqrt(s * s + 0.25);
        const double u0 = 2.0 * pi * s;
        const double u1 = 2.0 * pi * (root + 0.5);
        const double u2 = 2.0 * pi * (s * s / (root + 0.5)); // root - 1/2 without cancellation

        const double scale = eta0 / (4.0 * pi);
        const double re = scale * (2.0 * cosine_integral(u0) - cosine_integral(u1) - cosine_integral(u2));
        const double im = -scale * (2.0 * sine_integral(u0) - sine_integral(u1) - sine_integral(u2));
        return {re, im};
    }

    /// N x N impedance matrix of the array: Z_A on the diagonal, mutual impedances off it.
    inline cmat array_impedance_matrix(const ArrayGeometry &geom)
    {
        const std::size_t n = geom.n_elements();
        cmat Z(n, n);
        const cplx za = dipole_self_impedance();
        for (std::size_t i = 0; i < n; ++i)
        {
            Z(i, i) = za;
            for (std::size_t j = i + 1; j < n; ++j)
            {
                const double s = geom.distance(i, j);
                if (!(s > 1e-12 * geom.spacing_wavelengths()))
                    throw std::invalid_argument("array_impedance_matrix: elements " + std::to_string(i) +
                                                " and " + std::to_string(j) + " coincide.");
                Z(i, j) = Z(j, i) = dipole_mutual_impedance(s);
            }
        }
        return Z;
    }

    /// Writes a complex matrix as CSV, one matrix row per line, as "re,im" pairs.
    inline void write_complex_csv(std::ostream &os, const cmat &Z)
    {
        std::string line;
        for (Eigen::Index i = 0; i < Z.rows(); ++i)
        {
            line.clear();
            for (Eigen::Index j = 0; j < Z.cols(); ++j)
            {
                if (j > 0)
                    line += ',';
                line += format_double(Z(i, j).real());
                line += ',';
                line += format_double(Z(i, j).imag());
            }
            line += '\n';
            os << line;
        }
    }
}

#endif
