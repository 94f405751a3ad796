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

#ifndef nfmb_geometry_H
#define nfmb_geometry_H

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace nfmb
{
    inline constexpr double kSpeedOfLight = 299792458.0; // m/s, shared by every module
    inline constexpr double kCoincidenceTolerance = 1e-9; // m, points closer than this are coincident
    inline constexpr double kPi = 3.141592653589793;
    inline constexpr double kTwoPi = 6.283185307179586;

    struct Vec3
    {
        double x = 0.0;
        double y = 0.0;
        double z = 0.0;

        constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
        constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
        constexpr Vec3 operator-() const { return {-x, -y, -z}; }
        constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
        constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
        constexpr Vec3 &operator+=(const Vec3 &o)
        {
            x += o.x, y += o.y, z += o.z;
            return *this;
        }
        friend constexpr Vec3 operator*(double s, const Vec3 &v) { return v * s; }
        friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
    };

    constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
    constexpr Vec3 cross(const Vec3 &a, const Vec3 &b)
    {
        return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
    }
    inline double norm(const Vec3 &v) { return std::hypot(v.x, v.y, v.z); }
    inline double distance(const Vec3 &a, const Vec3 &b) { return norm(a - b); }
    inline bool is_finite(const Vec3 &v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

    // Throws DegenerateGeometry for vectors shorter than kCoincidenceTolerance
    Vec3 normalized(const Vec3 &v);

    // Angle between two non-zero vectors, accurate for tiny angles
    double angle_between(const Vec3 &a, const Vec3 &b);

    // Placement of a planar array: lattice rows run along basis[1], columns along basis[0],
    // basis[2] is the array normal.
    struct Pose
    {
        Vec3 origin;
        std::array<Vec3, 3> basis{Vec3{1.0, 0.0, 0.0}, Vec3{0.0, 1.0, 0.0}, Vec3{0.0, 0.0, 1.0}};

        // Orthonormal and right-handed within 1e-9, finite origin
        void validate() const;

        // Lattice spanned by u (columns) and v (rows); the normal completes a right-handed frame
        static Pose from_lattice_axes(const Vec3 &origin, const Vec3 &u, const Vec3 &v);
    };

    struct ArraySpec
    {
        std::size_t rows = 1;
        std::size_t cols = 1;
        double spacing = 0.005; // m
        Pose pose;
        std::size_t reference_index = 0; // element index = row * cols + col

        std::size_t size() const { return rows * cols; }
        void validate() const;
    };

    // Element nearest the lattice centroid, lowest index on ties
    std::size_t default_reference_index(std::size_t rows, std::size_t cols);

    ArraySpec make_array(std::size_t rows, std::size_t cols, double spacing, const Pose &pose,
                         std::optional<std::size_t> reference_index = std::nullopt);

    // Lattice centered on pose.origin; index = row * cols + col
    std::vector<Vec3> element_positions(const ArraySpec &array);
    Vec3 element_position(const ArraySpec &array, std::size_t index);
    Vec3 reference_position(const ArraySpec &array);

    // Offsets r_elem - r_ref for every element
    std::vector<Vec3> element_offsets(const ArraySpec &array);

    // Largest pairwise element distance
    double aperture_diameter(const ArraySpec &array);

    // 2 D^2 / lambda
    double rayleigh_distance(double aperture, double wavelength);

    inline double wavelength_of(double frequency) { return kSpeedOfLight / frequency; }

    // Reference-path geometry of a polyline tx_ref -> hops... -> rx_ref.
    // omega_tx points from tx_ref toward the first hop, omega_rx from rx_ref toward the last hop,
    // so that d_tx * omega_tx is the first hop relative to the reference Tx antenna.
    struct PathGeometry
    {
        std::vector<Vec3> hops;
        double tau_ref = 0.0; // s
        double d_tx = 0.0;    // m
        double d_rx = 0.0;    // m
        Vec3 omega_tx;
        Vec3 omega_rx;

        std::size_t bounce_order() const { return hops.size(); }
        double length() const { return tau_ref * kSpeedOfLight; }
    };

    PathGeometry path_geometry(const Vec3 &tx_ref, const Vec3 &rx_ref, std::span<const Vec3> hops);

    // || d_ref * omega_ref - offset ||
    double per_element_distance(double d_ref, const Vec3 &omega_ref, const Vec3 &element_offset);

    // (d_ref * omega_ref - offset) / d_elem
    Vec3 per_element_orientation(double d_ref, const Vec3 &omega_ref, const Vec3 &element_offset);

    // tau_ref + dtau_tx + dtau_rx, must stay positive
    double per_element_delay(double tau_ref, double dtau_tx, double dtau_rx);

    // tau_ref / tau_elem
    double sns_amplitude(double tau_ref, double tau_elem);

    // One side (Tx or Rx) of a path as seen from a single element
    struct PerElementGeometry
    {
        double d_elem = 0.0; // m
        Vec3 omega_elem;
        double dtau = 0.0; // (d_elem - d_ref) / c
    };

    PerElementGeometry per_element_geometry(double d_ref, const Vec3 &omega_ref, const Vec3 &element_offset);

    // Full (m, n) view of a path: both sides, total delay and SNS amplitude
    struct ElementPairGeometry
    {
        PerElementGeometry tx;
        PerElementGeometry rx;
        double tau = 0.0;    // tau_{m,n}
        double dalpha = 1.0; // tau_ref / tau_{m,n}
    };

    ElementPairGeometry element_pair_geometry(const PathGeometry &path, const Vec3 &tx_offset, const Vec3 &rx_offset);
}

#endif
