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

#include "nfmb/scene.hpp"
#include "nfmb/detail/json_fields.hpp"
#include "nfmb/errors.hpp"
#include "nfmb/io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nfmb
{
    Vec3 Wall::normal() const
    {
        return normalized(cross(edge1, edge2));
    }

    void Wall::validate() const
    {
        if (!is_finite(corner) || !is_finite(edge1) || !is_finite(edge2))
            throw std::invalid_argument("Wall geometry must be finite.");
        if (!(norm(cross(edge1, edge2)) > kCoincidenceTolerance * std::max(1.0, norm(edge1) * norm(edge2))))
            throw std::invalid_argument("Wall edge vectors are linearly dependent.");
        if (std::abs(reflection) > 1.0 + 1e-12)
            throw std::invalid_argument("Wall reflection coefficient magnitude exceeds 1.");
    }

    bool Wall::contains(const Vec3 &p, double tolerance) const
    {
        // Solve p - corner = s e1 + t e2 in the wall plane (2x2 Gram system)
        const Vec3 d = p - corner;
        const double a = dot(edge1, edge1), b = dot(edge1, edge2), c = dot(edge2, edge2);
        const double r1 = dot(d, edge1), r2 = dot(d, edge2);
        const double det = a * c - b * b;
        const double s = (c * r1 - b * r2) / det;
        const double t = (a * r2 - b * r1) / det;
        const double tol_s = tolerance / std::sqrt(a);
        const double tol_t = tolerance / std::sqrt(c);
        return s >= -tol_s && s <= 1.0 + tol_s && t >= -tol_t && t <= 1.0 + tol_t;
    }

    double Wall::segment_hit(const Vec3 &a, const Vec3 &b, double tolerance) const
    {
        const Vec3 n = normal();
        const double da = dot(a - corner, n);
        const double db = dot(b - corner, n);
        // Endpoints on or within tolerance of the plane do not count as crossings
        if ((da > tolerance && db > tolerance) || (da < -tolerance && db < -tolerance))
            return -1.0;
        if (std::abs(da) <= tolerance || std::abs(db) <= tolerance)
            return -1.0;
        const double t = da / (da - db);
        const Vec3 p = a + (b - a) * t;
        return contains(p, tolerance) ? t : -1.0;
    }

    bool Box::contains(const Vec3 &p, double tolerance) const
    {
        return p.x >= min.x - tolerance && p.x <= max.x + tolerance &&
               p.y >= min.y - tolerance && p.y <= max.y + tolerance &&
               p.z >= min.z - tolerance && p.z <= max.z + tolerance;
    }

    void Box::validate() const
    {
        if (!is_finite(min) || !is_finite(max) || min.x > max.x || min.y > max.y || min.z > max.z)
            throw std::invalid_argument("Bounding box must satisfy min <= max on every axis.");
    }

    void SceneConfig::validate() const
    {
        bounds.validate();
        tx_array.validate();
        rx_array.validate();
        for (const auto &w : walls)
            w.validate();
        for (const auto &p : element_positions(tx_array))
            if (!bounds.contains(p, 1e-9))
                throw std::invalid_argument("Tx array lies outside the scene bounds.");
        for (const auto &p : element_positions(rx_array))
            if (!bounds.contains(p, 1e-9))
                throw std::invalid_argument("Rx array lies outside the scene bounds.");
        for (const auto &s : scatterers)
            if (!is_finite(s.position) || !std::isfinite(s.velocity))
                throw std::invalid_argument("Scatterer parameters must be finite.");
    }

    Vec3 mirror_image(const Vec3 &point, const Wall &wall)
    {
        const Vec3 n = wall.normal();
        return point - n * (2.0 * dot(point - wall.corner, n));
    }

    namespace
    {
        double polyline_length(const Vec3 &tx, const std::vector<Vec3> &hops, const Vec3 &rx)
        {
            double len = distance(tx, hops.front()) + distance(hops.back(), rx);
            for (std::size_t i = 1; i < hops.size(); ++i)
                len += distance(hops[i - 1], hops[i]);
            return len;
        }

        // Next lexicographic sequence over `base` symbols; false when exhausted
        bool next_sequence(std::vector<std::size_t> &seq, std::size_t base)
        {
            for (std::size_t i = seq.size(); i-- > 0;)
            {
                if (++seq[i] < base)
                    return true;
                seq[i] = 0;
            }
            return false;
        }

        // Specular path for one wall sequence, empty optional-like result when invalid
        bool trace_wall_sequence(const SceneConfig &scene, const std::vector<std::size_t> &seq,
                                 const Vec3 &tx, const Vec3 &rx, std::vector<Vec3> &hops)
        {
            const std::size_t k = seq.size();
            for (std::size_t i = 1; i < k; ++i)
                if (seq[i] == seq[i - 1])
                    return false;

            std::vector<Vec3> images(k + 1);
            images[0] = tx;
            for (std::size_t i = 0; i < k; ++i)
                images[i + 1] = mirror_image(images[i], scene.walls[seq[i]]);

            hops.assign(k, Vec3{});
            Vec3 target = rx;
            for (std::size_t i = k; i-- > 0;)
            {
                const Wall &w = scene.walls[seq[i]];
                const Vec3 n = w.normal();
                const Vec3 &img = images[i + 1];
                const double d_img = dot(img - w.corner, n);
                const double d_tgt = dot(target - w.corner, n);
                // Image and target must be on opposite sides of the reflecting plane
                if (!(d_img * d_tgt < 0.0))
                    return false;
                const double t = d_img / (d_img - d_tgt);
                Vec3 hit = img + (target - img) * t;
                hit = hit - n * dot(hit - w.corner, n);
                if (!w.contains(hit))
                    return false;
                hops[i] = hit;
                target = hit;
            }

            // The real source must sit on the reflecting side of the first wall, and each
            // segment must be unobstructed by walls other than the ones at its end points
            std::vector<Vec3> pts;
            pts.reserve(k + 2);
            pts.push_back(tx);
            pts.insert(pts.end(), hops.begin(), hops.end());
            pts.push_back(rx);
            for (std::size_t s = 0; s + 1 < pts.size(); ++s)
            {
                if (!(distance(pts[s], pts[s + 1]) > kCoincidenceTolerance))
                    return false;
                for (std::size_t w = 0; w < scene.walls.size(); ++w)
                {
                    const bool at_start = s > 0 && seq[s - 1] == w;
                    const bool at_end = s < k && seq[s] == w;
                    if (at_start || at_end)
                        continue;
                    if (scene.walls[w].segment_hit(pts[s], pts[s + 1]) >= 0.0)
                        return false;
                }
            }
            return true;
        }

        void check_max_bounce(std::size_t max_bounce)
        {
            if (max_bounce < 1 || max_bounce > 3)
                throw std::invalid_argument("Maximum bounce order must be 1, 2 or 3.");
        }
    }

    std::vector<GroundTruthPath> image_method_paths(const SceneConfig &scene, std::size_t max_bounce, const GainModel &gain)
    {
        check_max_bounce(max_bounce);
        std::vector<GroundTruthPath> out;
        const Vec3 tx = reference_position(scene.tx_array);
        const Vec3 rx = reference_position(scene.rx_array);
        const std::size_t n_walls = scene.walls.size();
        if (n_walls == 0)
            return out;

        for (std::size_t k = 1; k <= max_bounce; ++k)
        {
            std::vector<std::size_t> seq(k, 0);
            std::vector<Vec3> hops;
            do
            {
                if (!trace_wall_sequence(scene, seq, tx, rx, hops))
                    continue;
                GroundTruthPath p;
                p.geometry = path_geometry(tx, rx, hops);
                p.bounce_order = k;
                p.interactions = seq;
                double mag = gain.reference_length / polyline_length(tx, hops, rx);
                double phase = 0.0;
                for (auto w : seq)
                {
                    mag *= std::abs(scene.walls[w].reflection);
                    phase += std::arg(scene.walls[w].reflection);
                }
                if (k >= 3)
                    mag *= gain.higher_bounce_scale;
                p.coefficients = {mag, wrap_phase(phase), 0.0};
                out.push_back(std::move(p));
            } while (next_sequence(seq, n_walls));
        }
        return out;
    }

    std::vector<GroundTruthPath> scatterer_chain_paths(const SceneConfig &scene, std::size_t max_bounce, const GainModel &gain)
    {
        check_max_bounce(max_bounce);
        const auto &sc = scene.scatterers;
        for (std::size_t i = 0; i < sc.size(); ++i)
            for (std::size_t j = i + 1; j < sc.size(); ++j)
                if (!(distance(sc[i].position, sc[j].position) > kCoincidenceTolerance))
                    throw std::invalid_argument("Scatterers " + std::to_string(i) + " and " + std::to_string(j) + " coincide.");

        std::vector<GroundTruthPath> out;
        const Vec3 tx = reference_position(scene.tx_array);
        const Vec3 rx = reference_position(scene.rx_array);
        if (sc.empty())
            return out;

        for (std::size_t k = 1; k <= std::min(max_bounce, sc.size()); ++k)
        {
            std::vector<std::size_t> seq(k, 0);
            do
            {
                bool distinct = true;
                for (std::size_t i = 0; i < k && distinct; ++i)
                    for (std::size_t j = i + 1; j < k; ++j)
                        if (seq[i] == seq[j])
                        {
                            distinct = false;
                            break;
                        }
                if (!distinct)
                    continue;

                std::vector<Vec3> hops(k);
                double mag = 1.0, phase = 0.0, v = 0.0;
                for (std::size_t i = 0; i < k; ++i)
                {
                    const auto &s = sc[seq[i]];
                    hops[i] = s.position;
                    mag *= std::abs(s.sigma);
                    phase += std::arg(s.sigma);
                    v += s.velocity;
                }
                GroundTruthPath p;
                p.geometry = path_geometry(tx, rx, hops);
                p.bounce_order = k;
                p.interactions = seq;
                mag *= gain.reference_length / p.geometry.length();
                if (k >= 3)
                    mag *= gain.higher_bounce_scale;
                p.coefficients = {mag, wrap_phase(phase), v};
                out.push_back(std::move(p));
            } while (next_sequence(seq, sc.size()));
        }
        return out;
    }

    std::size_t chain_count(std::size_t n, std::size_t max_bounce)
    {
        std::size_t total = 0, perm = 1;
        for (std::size_t j = 1; j <= max_bounce && j <= n; ++j)
        {
            perm *= n - j + 1;
            total += perm;
        }
        return total;
    }

    std::vector<SynthPath> to_synth_paths(std::span<const GroundTruthPath> paths)
    {
        std::vector<SynthPath> out;
        out.reserve(paths.size());
        for (const auto &p : paths)
            out.push_back({p.geometry, p.coefficients});
        return out;
    }

    std::string scene_to_json(const SceneConfig &scene)
    {
        using detail::json;
        using detail::to_json;
        json walls = json::array();
        for (const auto &w : scene.walls)
            walls.push_back(json{{"corner", to_json(w.corner)}, {"edge1", to_json(w.edge1)}, {"edge2", to_json(w.edge2)}, {"reflection", to_json(w.reflection)}});
        json scatterers = json::array();
        for (const auto &s : scene.scatterers)
            scatterers.push_back(json{{"position", to_json(s.position)}, {"sigma", to_json(s.sigma)}, {"velocity", s.velocity}});
        json j;
        j["walls"] = walls;
        j["scatterers"] = scatterers;
        j["tx_array"] = to_json(scene.tx_array);
        j["rx_array"] = to_json(scene.rx_array);
        j["bounds"] = json{{"min", to_json(scene.bounds.min)}, {"max", to_json(scene.bounds.max)}};
        return detail::dump(j);
    }

    SceneConfig scene_from_json(std::string_view text)
    {
        using namespace detail;
        const json j = parse_json(text, "scene");
        SceneConfig s;
        try
        {
            const json &walls = require(j, "walls", "");
            if (!walls.is_array())
                throw ParseError("field 'walls' must be an array");
            for (std::size_t i = 0; i < walls.size(); ++i)
            {
                const std::string ctx = "walls[" + std::to_string(i) + "]";
                Wall w;
                w.corner = vec3_from(require(walls[i], "corner", ctx), ctx + ".corner");
                w.edge1 = vec3_from(require(walls[i], "edge1", ctx), ctx + ".edge1");
                w.edge2 = vec3_from(require(walls[i], "edge2", ctx), ctx + ".edge2");
                w.reflection = cplx_from(require(walls[i], "reflection", ctx), ctx + ".reflection");
                s.walls.push_back(w);
            }
            const json &scatterers = require(j, "scatterers", "");
            if (!scatterers.is_array())
                throw ParseError("field 'scatterers' must be an array");
            for (std::size_t i = 0; i < scatterers.size(); ++i)
            {
                const std::string ctx = "scatterers[" + std::to_string(i) + "]";
                Scatterer sc;
                sc.position = vec3_from(require(scatterers[i], "position", ctx), ctx + ".position");
                sc.sigma = cplx_from(require(scatterers[i], "sigma", ctx), ctx + ".sigma");
                sc.velocity = scatterers[i].contains("velocity") ? get_double(scatterers[i], "velocity", ctx) : 0.0;
                s.scatterers.push_back(sc);
            }
            s.tx_array = array_from(require(j, "tx_array", ""), "tx_array");
            s.rx_array = array_from(require(j, "rx_array", ""), "rx_array");
            const json &b = require(j, "bounds", "");
            s.bounds.min = vec3_from(require(b, "min", "bounds"), "bounds.min");
            s.bounds.max = vec3_from(require(b, "max", "bounds"), "bounds.max");
        }
        catch (const ParseError &e)
        {
            throw ParseError(std::string("scene: ") + e.what());
        }
        try
        {
            s.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ParseError(std::string("scene: ") + e.what());
        }
        return s;
    }

    void save_scene(const std::filesystem::path &path, const SceneConfig &scene)
    {
        scene.validate();
        write_file_atomic(path, scene_to_json(scene));
    }

    SceneConfig load_scene(const std::filesystem::path &path)
    {
        return scene_from_json(read_file(path));
    }

    SceneConfig demo_office_scene()
    {
        const double lambda = kSpeedOfLight / 30.0e9;
        const Vec3 into_room_u{-1.0, 0.0, 0.0}, up{0.0, 0.0, 1.0}; // normal u x up = +y, facing the room

        SceneConfig s;
        s.bounds = {{-2.0, -0.5, -1.2}, {2.0, 3.5, 1.2}};
        s.tx_array = make_array(7, 7, lambda / 2.0, Pose::from_lattice_axes({-0.5, 0.0, 0.0}, into_room_u, up));
        s.rx_array = make_array(7, 7, lambda / 2.0, Pose::from_lattice_axes({0.5, 0.0, 0.0}, into_room_u, up));

        const double h = 2.4;
        const cplx gypsum{0.6, 0.0};
        s.walls = {
            {{-2.0, 3.5, -1.2}, {4.0, 0.0, 0.0}, {0.0, 0.0, h}, gypsum},  // back
            {{-2.0, -0.5, -1.2}, {0.0, 4.0, 0.0}, {0.0, 0.0, h}, gypsum}, // left
            {{2.0, -0.5, -1.2}, {0.0, 4.0, 0.0}, {0.0, 0.0, h}, gypsum},  // right
            {{-2.0, -0.5, -1.2}, {4.0, 0.0, 0.0}, {0.0, 0.0, h}, gypsum}, // front, behind the arrays
        };
        s.scatterers = {
            {{-0.8, 1.5, 0.0}, {0.8, 0.0}, 0.0},
            {{0.8, 1.9, 0.0}, std::polar(0.7, 1.0), 0.0},
            {{0.0, 2.7, 0.0}, std::polar(0.6, -0.5), 0.0},
        };
        s.validate();
        return s;
    }
}
