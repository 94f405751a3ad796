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

#include "nfmb/errors.hpp"
#include "nfmb/geometry.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace nfmb;

TEST_CASE("rayleigh_distance examples and quadratic scaling")
{
    CHECK(rayleigh_distance(0.0, 0.01) == 0.0);
    CHECK(rayleigh_distance(0.042426, 0.01) == test::rel(0.359993, 1e-6));
    CHECK(rayleigh_distance(0.01, 0.01) == test::rel(0.02, 1e-14));
    for (double D : {0.003, 0.042426, 1.7})
        CHECK(rayleigh_distance(2 * D, 0.0123) == 4 * rayleigh_distance(D, 0.0123));
    CHECK_THROWS_AS(rayleigh_distance(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rayleigh_distance(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("element_positions lattice")
{
    const Pose origin{};
    SUBCASE("1x1 sits at the pose origin")
    {
        const auto p = element_positions(make_array(1, 1, 0.005, Pose{{0.3, -0.2, 1.0}}));
        REQUIRE(p.size() == 1);
        CHECK(p[0] == Vec3{0.3, -0.2, 1.0});
    }
    SUBCASE("1x2 spans basis 1")
    {
        const auto a = make_array(1, 2, 0.005, origin);
        const auto p = element_positions(a);
        REQUIRE(p.size() == 2);
        CHECK(distance(p[0], p[1]) == test::rel(0.005, 1e-14));
        CHECK(std::abs(p[1].y - p[0].y) < 1e-18);
        CHECK(std::abs(p[1].z - p[0].z) < 1e-18);
    }
    SUBCASE("reference element is self-consistent")
    {
        const auto a = make_array(7, 7, 0.005, origin);
        CHECK(a.reference_index == 24);
        CHECK(element_position(a, a.reference_index) == reference_position(a));
        CHECK(element_positions(a)[a.reference_index] == reference_position(a));
        CHECK(default_reference_index(4, 4) == 5);
        CHECK(default_reference_index(1, 2) == 0);
    }
    SUBCASE("7x7 aperture")
    {
        // Brute-force maximum over all pairs
        auto brute = [](const ArraySpec &a) {
            const auto p = element_positions(a);
            double best = 0.0;
            for (const auto &x : p)
                for (const auto &y : p)
                    best = std::max(best, distance(x, y));
            return best;
        };
        const auto a = make_array(7, 7, 0.005, origin);
        CHECK(aperture_diameter(a) == test::rel(0.0424264, 1e-6));
        CHECK(aperture_diameter(a) == test::rel(brute(a), 1e-14));
        const double half = test::wavelength_30ghz() / 2;
        const auto b = make_array(7, 7, half, origin);
        CHECK(aperture_diameter(b) == test::rel(6 * half * std::sqrt(2.0), 1e-13));
        CHECK(aperture_diameter(make_array(1, 1, 0.005, origin)) == 0.0);
        CHECK(aperture_diameter(make_array(1, 2, 0.0031, origin)) == test::rel(0.0031, 1e-14));
    }
    SUBCASE("invalid arrays")
    {
        CHECK_THROWS_AS(make_array(0, 2, 0.005, origin), std::invalid_argument);
        CHECK_THROWS_AS(make_array(2, 2, 0.0, origin), std::invalid_argument);
        CHECK_THROWS_AS(make_array(2, 2, 0.005, origin, 4), std::invalid_argument);
        Pose skew;
        skew.basis[1] = {1, 1, 0};
        CHECK_THROWS_AS(skew.validate(), std::invalid_argument);
        Pose left;
        left.basis[2] = {0, 0, -1};
        CHECK_THROWS_AS(left.validate(), std::invalid_argument);
    }
}

TEST_CASE("path_geometry examples")
{
    const Vec3 o{0, 0, 0};
    SUBCASE("one bounce")
    {
        const std::vector<Vec3> hops{{1, 0, 0}};
        const auto g = path_geometry(o, {2, 0, 0}, hops);
        CHECK(g.tau_ref == test::rel(2.0 / kSpeedOfLight, 1e-14));
        CHECK(g.d_tx == 1.0);
        CHECK(g.d_rx == 1.0);
        CHECK(g.omega_tx == Vec3{1, 0, 0});
        CHECK(g.omega_rx == Vec3{-1, 0, 0});
        CHECK(g.bounce_order() == 1);
    }
    SUBCASE("two bounces")
    {
        const std::vector<Vec3> hops{{1, 0, 0}, {1, 1, 0}};
        const auto g = path_geometry(o, {0, 1, 0}, hops);
        CHECK(g.tau_ref == test::rel(3.0 / kSpeedOfLight, 1e-14));
        CHECK(g.d_tx == 1.0);
        CHECK(g.d_rx == 1.0);
        CHECK(g.length() == test::rel(3.0, 1e-14));
    }
    SUBCASE("degenerate")
    {
        const std::vector<Vec3> on_tx{{0, 0, 0}};
        CHECK_THROWS_AS(path_geometry(o, {2, 0, 0}, on_tx), DegenerateGeometry);
        const std::vector<Vec3> repeated{{1, 0, 0}, {1, 0, 0}};
        CHECK_THROWS_AS(path_geometry(o, {2, 0, 0}, repeated), DegenerateGeometry);
        CHECK_THROWS_AS(path_geometry(o, {2, 0, 0}, std::vector<Vec3>{}), std::invalid_argument);
    }
}

TEST_CASE("per-element distance, orientation, delay and SNS amplitude")
{
    const Vec3 ex{1, 0, 0};
    CHECK(per_element_distance(2.5, ex, {0, 0, 0}) == 2.5);
    CHECK(per_element_distance(1.0, ex, {0, 0.005, 0}) == test::rel(std::sqrt(1.000025), 1e-14));
    CHECK(per_element_distance(1.0, ex, {1.0, 0, 0}) == 0.0);
    CHECK_THROWS_AS(per_element_distance(1.0, {1, 1, 0}, {0, 0, 0}), std::invalid_argument);

    CHECK(per_element_orientation(2.5, ex, {0, 0, 0}) == ex);
    const Vec3 w = per_element_orientation(1.0, ex, {0, 0.005, 0});
    CHECK(w.x == test::rel(1.0 / std::sqrt(1.000025), 1e-12));
    CHECK(w.y == test::rel(-0.005 / std::sqrt(1.000025), 1e-12));
    CHECK(w.z == 0.0);
    CHECK_THROWS_AS(per_element_orientation(1.0, ex, {1.0, 0, 0}), DegenerateGeometry);

    CHECK(per_element_delay(10e-9, 0.0, 0.0) == 10e-9);
    CHECK(per_element_delay(10e-9, 0.1e-9, -0.05e-9) == test::rel(10.05e-9, 1e-14));
    CHECK_THROWS_AS(per_element_delay(1e-9, -2e-9, 0.0), DegenerateGeometry);
    CHECK_THROWS_AS(per_element_delay(0.0, 0.0, 0.0), std::invalid_argument);

    // Delay built from the 1 m example agrees with the polyline
    const auto pe = per_element_geometry(1.0, ex, {0, 0.005, 0});
    CHECK(pe.dtau == test::rel((std::sqrt(1.000025) - 1.0) / kSpeedOfLight, 1e-9));
    const double tau = per_element_delay(2.0 / kSpeedOfLight, pe.dtau, 0.0);
    CHECK(tau * kSpeedOfLight == test::rel(1.0 + distance({1, 0, 0}, {0, 0.005, 0}), 1e-14));

    CHECK(sns_amplitude(10e-9, 10e-9) == 1.0);
    CHECK(sns_amplitude(10e-9, 20e-9) == 0.5);
    CHECK_THROWS_AS(sns_amplitude(10e-9, 0.0), std::invalid_argument);
    double prev = INFINITY;
    for (double t = 1e-9; t < 50e-9; t += 0.7e-9)
    {
        const double a = sns_amplitude(10e-9, t);
        CHECK(a < prev);
        prev = a;
    }
}

TEST_CASE("consistency triangle against absolute positions")
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i)
    {
        const Vec3 ref{u(rng), u(rng), u(rng)};
        const Vec3 omega = normalized({u(rng), u(rng), u(rng)});
        const double d_ref = 0.1 + 5.0 * (u(rng) + 1.0);
        const Vec3 o{0.05 * u(rng), 0.05 * u(rng), 0.05 * u(rng)};
        const Vec3 scatterer = ref + d_ref * omega;
        const Vec3 element = ref + o;
        CHECK(per_element_distance(d_ref, omega, o) == test::rel(distance(scatterer, element), 1e-12));
        const Vec3 w = per_element_orientation(d_ref, omega, o);
        CHECK(std::abs(norm(w) - 1.0) < 1e-12);
    }
}

TEST_CASE("far-field convergence of orientation vectors")
{
    const Vec3 omega = normalized({0.3, 1.0, -0.2});
    const Vec3 o{0.004, -0.003, 0.002};
    for (double ratio : {1e2, 1e3, 1e4})
    {
        const double d_ref = ratio * norm(o);
        const Vec3 w = per_element_orientation(d_ref, omega, o);
        CHECK(angle_between(w, omega) <= norm(o) / d_ref);
        if (ratio >= 1e4)
            CHECK(angle_between(w, omega) < 1e-4);
    }
}

TEST_CASE("element pair geometry holds the SNS amplitude at the reference")
{
    const std::vector<Vec3> hops{{0.2, 1.4, 0.1}};
    const auto g = path_geometry({-0.5, 0, 0}, {0.5, 0, 0}, hops);
    const auto ref = element_pair_geometry(g, {0, 0, 0}, {0, 0, 0});
    CHECK(ref.dalpha == 1.0);
    CHECK(ref.tau == g.tau_ref);
    const auto off = element_pair_geometry(g, {0.01, 0, 0.01}, {-0.01, 0, 0});
    CHECK(off.dalpha == test::rel(g.tau_ref / off.tau, 1e-14));
    CHECK(std::abs(norm(off.tx.omega_elem) - 1.0) < 1e-12);
    CHECK(std::abs(norm(off.rx.omega_elem) - 1.0) < 1e-12);
}
