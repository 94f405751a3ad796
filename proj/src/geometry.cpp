// SPDX-License-Identifier: Apache-2.0
//
// nfmb - near-field multi-bounce channel synthesis and scatterer localization
// Copyright (C) 2026 The nfmb authors
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

#include "nfmb/geometry.hpp"
#include "nfmb/errors.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace nfmb
{
    Vec3 normalized(const Vec3 &v)
    {
        const double n = norm(v);
        if (!(n > kCoincidenceTolerance))
            throw DegenerateGeometry("Cannot normalize a zero-length vector.");
        return v / n;
    }

    double angle_between(const Vec3 &a, const Vec3 &b)
    {
        return std::atan2(norm(cross(a, b)), dot(a, b));
    }

    void Pose::validate() const
    {
        if (!is_finite(origin))
            throw std::invalid_argument("Pose origin must be finite.");
        constexpr double tol = 1e-9;
        for (std::size_t i = 0; i < 3; ++i)
        {
            if (!is_finite(basis[i]) || std::abs(norm(basis[i]) - 1.0) > tol)
                throw std::invalid_argument("Pose basis vector " + std::to_string(i) + " is not unit-norm.");
            for (std::size_t j = i + 1; j < 3; ++j)
                if (std::abs(dot(basis[i], basis[j])) > tol)
                    throw std::invalid_argument("Pose basis vectors are not orthogonal.");
        }
        if (dot(cross(basis[0], basis[1]), basis[2]) < 0.0)
            throw std::invalid_argument("Pose basis is not right-handed.");
    }

    Pose Pose::from_lattice_axes(const Vec3 &origin, const Vec3 &u, const Vec3 &v)
    {
        Pose p;
        p.origin = origin;
        p.basis[0] = normalized(u);
        p.basis[1] = normalized(v - p.basis[0] * dot(v, p.basis[0]));
        p.basis[2] = cross(p.basis[0], p.basis[1]);
        return p;
    }

    void ArraySpec::validate() const
    {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("Array must have at least one row and one column.");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw std::invalid_argument("Array spacing must be positive.");
        if (reference_index >= size())
            throw std::invalid_argument("Reference index " + std::to_string(reference_index) +
                                        " exceeds element count " + std::to_string(size()) + ".");
        pose.validate();
    }

    std::size_t default_reference_index(std::size_t rows, std::size_t cols)
    {
        // Squared distance to the centroid in half-spacing units, integer so ties are exact
        std::size_t best = 0;
        long long best_d2 = std::numeric_limits<long long>::max();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
            {
                const long long dr = 2 * (long long)r - ((long long)rows - 1);
                const long long dc = 2 * (long long)c - ((long long)cols - 1);
                const long long d2 = dr * dr + dc * dc;
                if (d2 < best_d2)
                {
                    best_d2 = d2;
                    best = r * cols + c;
                }
            }
        return best;
    }

    ArraySpec make_array(std::size_t rows, std::size_t cols, double spacing, const Pose &pose,
                         std::optional<std::size_t> reference_index)
    {
        ArraySpec a;
        a.rows = rows;
        a.cols = cols;
        a.spacing = spacing;
        a.pose = pose;
        a.reference_index = reference_index.value_or(default_reference_index(rows, cols));
        a.validate();
        return a;
    }

    Vec3 element_position(const ArraySpec &array, std::size_t index)
    {
        const std::size_t r = index / array.cols;
        const std::size_t c = index % array.cols;
        const double u = ((double)c - 0.5 * ((double)array.cols - 1.0)) * array.spacing;
        const double v = ((double)r - 0.5 * ((double)array.rows - 1.0)) * array.spacing;
        return array.pose.origin + array.pose.basis[0] * u + array.pose.basis[1] * v;
    }

    std::vector<Vec3> element_positions(const ArraySpec &array)
    {
        std::vector<Vec3> out(array.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = element_position(array, i);
        return out;
    }

    Vec3 reference_position(const ArraySpec &array)
    {
        return element_position(array, array.reference_index);
    }

    std::vector<Vec3> element_offsets(const ArraySpec &array)
    {
        auto out = element_positions(array);
        const Vec3 ref = out[array.reference_index];
        for (auto &p : out)
            p = p - ref;
        return out;
    }

    double aperture_diameter(const ArraySpec &array)
    {
        const auto pos = element_positions(array);
        double d = 0.0;
        for (std::size_t i = 0; i < pos.size(); ++i)
            for (std::size_t j = i + 1; j < pos.size(); ++j)
                d = std::max(d, distance(pos[i], pos[j]));
        return d;
    }

    double rayleigh_distance(double aperture, double wavelength)
    {
        if (!(wavelength > 0.0))
            throw std::invalid_argument("Wavelength must be positive.");
        if (aperture < 0.0)
            throw std::invalid_argument("Aperture cannot be negative.");
        return 2.0 * aperture * aperture / wavelength;
    }

    PathGeometry path_geometry(const Vec3 &tx_ref, const Vec3 &rx_ref, std::span<const Vec3> hops)
    {
        if (hops.empty())
            throw std::invalid_argument("A path needs at least one interaction point.");

        PathGeometry g;
        g.hops.assign(hops.begin(), hops.end());

        double length = 0.0;
        Vec3 prev = tx_ref;
        for (std::size_t i = 0; i <= hops.size(); ++i)
        {
            const Vec3 &next = i < hops.size() ? hops[i] : rx_ref;
            const double seg = distance(prev, next);
            if (!(seg > kCoincidenceTolerance))
                throw DegenerateGeometry("Path segment " + std::to_string(i) + " has coincident end points.");
            length += seg;
            prev = next;
        }

        g.d_tx = distance(tx_ref, hops.front());
        g.d_rx = distance(rx_ref, hops.back());
        g.omega_tx = (hops.front() - tx_ref) / g.d_tx;
        g.omega_rx = (hops.back() - rx_ref) / g.d_rx;
        g.tau_ref = length / kSpeedOfLight;
        return g;
    }

    static void check_reference(double d_ref, const Vec3 &omega_ref)
    {
        if (!(d_ref > 0.0))
            throw std::invalid_argument("Reference distance must be positive.");
        if (std::abs(norm(omega_ref) - 1.0) > 1e-9)
            throw std::invalid_argument("Reference orientation vector is not unit-norm.");
    }

    double per_element_distance(double d_ref, const Vec3 &omega_ref, const Vec3 &element_offset)
    {
        check_reference(d_ref, omega_ref);
        // The reference element reproduces the reference path exactly
        if (element_offset == Vec3{})
            return d_ref;
        return norm(omega_ref * d_ref - element_offset);
    }

    Vec3 per_element_orientation(double d_ref, const Vec3 &omega_ref, const Vec3 &element_offset)
    {
        check_reference(d_ref, omega_ref);
        if (element_offset == Vec3{})
            return omega_ref;
        const Vec3 v = omega_ref * d_ref - element_offset;
        const double d = norm(v);
        if (!(d > kCoincidenceTolerance))
            throw DegenerateGeometry("Array element coincides with the scatterer.");
        return v / d;
    }

    double per_element_delay(double tau_ref, double dtau_tx, double dtau_rx)
    {
        if (!(tau_ref > 0.0))
            throw std::invalid_argument("Reference delay must be positive.");
        const double tau = tau_ref + dtau_rx + dtau_tx;
        if (!(tau > 0.0))
            throw DegenerateGeometry("Per-element delay is not positive.");
        return tau;
    }

    double sns_amplitude(double tau_ref, double tau_elem)
    {
        if (!(tau_elem > 0.0))
            throw std::invalid_argument("Element delay must be positive.");
        return tau_ref / tau_elem;
    }

    PerElementGeometry per_element_geometry(double d_ref, const Vec3 &omega_ref, const Vec3 &element_offset)
    {
        PerElementGeometry g;
        g.omega_elem = per_element_orientation(d_ref, omega_ref, element_offset);
        g.d_elem = per_element_distance(d_ref, omega_ref, element_offset);
        g.dtau = (g.d_elem - d_ref) / kSpeedOfLight;
        return g;
    }

    ElementPairGeometry element_pair_geometry(const PathGeometry &path, const Vec3 &tx_offset, const Vec3 &rx_offset)
    {
        ElementPairGeometry g;
        g.tx = per_element_geometry(path.d_tx, path.omega_tx, tx_offset);
        g.rx = per_element_geometry(path.d_rx, path.omega_rx, rx_offset);
        g.tau = per_element_delay(path.tau_ref, g.tx.dtau, g.rx.dtau);
        g.dalpha = sns_amplitude(path.tau_ref, g.tau);
        return g;
    }
}
