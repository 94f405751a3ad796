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

#ifndef nfmb_scene_H
#define nfmb_scene_H

#include "nfmb/channel.hpp"
#include "nfmb/geometry.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nfmb
{
    inline constexpr double kOcclusionTolerance = 1e-9; // m

    // Rectangle corner + s * edge1 + t * edge2, s, t in [0, 1]
    struct Wall
    {
        Vec3 corner;
        Vec3 edge1;
        Vec3 edge2;
        cplx reflection{0.7, 0.0}; // |.| <= 1

        Vec3 normal() const; // unit normal edge1 x edge2
        void validate() const;

        // Point on the wall plane within the rectangle (tolerance in meters along each edge)
        bool contains(const Vec3 &point_on_plane, double tolerance = kOcclusionTolerance) const;

        // Parameter t in (0, 1) at which segment a -> b crosses the rectangle, or < 0 if it does not
        double segment_hit(const Vec3 &a, const Vec3 &b, double tolerance = kOcclusionTolerance) const;
    };

    struct Scatterer
    {
        Vec3 position;
        cplx sigma{1.0, 0.0}; // complex reflectivity
        double velocity = 0.0; // radial, m/s
    };

    struct Box
    {
        Vec3 min;
        Vec3 max;

        bool contains(const Vec3 &p, double tolerance = 1e-12) const;
        void validate() const;
    };

    struct SceneConfig
    {
        std::vector<Wall> walls;
        std::vector<Scatterer> scatterers;
        ArraySpec tx_array;
        ArraySpec rx_array;
        Box bounds;

        void validate() const;
    };

    struct GroundTruthPath
    {
        PathGeometry geometry;
        PathCoefficients coefficients;
        std::size_t bounce_order = 1;
        std::vector<std::size_t> interactions; // wall or scatterer indices, Tx side first
    };

    // Free-space-like magnitude model: prod |interaction| * (reference_length / total length),
    // paths of three or more bounces additionally scaled by higher_bounce_scale
    struct GainModel
    {
        double reference_length = 1.0; // m
        double higher_bounce_scale = 1.0;
    };

    // Reflection of a point across the wall's plane
    Vec3 mirror_image(const Vec3 &point, const Wall &wall);

    // Specular wall paths up to max_bounce (1..3), ordered by bounce order then wall sequence
    std::vector<GroundTruthPath> image_method_paths(const SceneConfig &scene, std::size_t max_bounce,
                                                    const GainModel &gain = {});

    // Ordered chains of distinct point scatterers up to max_bounce (1..3)
    std::vector<GroundTruthPath> scatterer_chain_paths(const SceneConfig &scene, std::size_t max_bounce,
                                                       const GainModel &gain = {});

    // sum_{j=1..k} n! / (n-j)!
    std::size_t chain_count(std::size_t n_scatterers, std::size_t max_bounce);

    std::vector<SynthPath> to_synth_paths(std::span<const GroundTruthPath> paths);

    // JSON scene files: walls[], scatterers[], tx_array, rx_array, bounds; lengths in meters,
    // vectors as [x, y, z], complex values as {"re": .., "im": ..}
    std::string scene_to_json(const SceneConfig &scene);
    SceneConfig scene_from_json(std::string_view text);
    void save_scene(const std::filesystem::path &path, const SceneConfig &scene);
    SceneConfig load_scene(const std::filesystem::path &path);

    // 4-wall office with three point scatterers and 7x7 half-wavelength arrays at 30 GHz
    SceneConfig demo_office_scene();
}

#endif
