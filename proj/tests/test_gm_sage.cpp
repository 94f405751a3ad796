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
#include "nfmb/gm_sage.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace nfmb;

namespace
{
    struct Bench
    {
        SensingSetup setup;
        std::shared_ptr<const PropagationGraph> graph;
        std::unique_ptr<Dictionary> d1, d2;
        Vec3 tx, rx;

        Bench(std::size_t side, const Box &bounds, double resolution)
            : setup(test::desk_setup(side, 32, 4)), graph(test::desk_graph(setup, bounds, resolution))
        {
            d1 = std::make_unique<Dictionary>(graph, 1, setup);
            d2 = std::make_unique<Dictionary>(graph, 2, setup);
            tx = reference_position(setup.tx);
            rx = reference_position(setup.rx);
        }

        ChannelTensor channel(const std::vector<std::pair<std::vector<Vec3>, cplx>> &paths,
                              std::optional<NoiseSpec> noise = std::nullopt) const
        {
            std::vector<SynthPath> sp;
            for (const auto &[hops, a] : paths)
                sp.push_back({path_geometry(tx, rx, hops), {std::abs(a), wrap_phase(std::arg(a)), 0.0}});
            return synthesize_channel(sp, setup, noise);
        }
    };

    std::vector<cplx> noise_vector(std::size_t n, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, std::sqrt(0.5));
        std::vector<cplx> v(n);
        for (auto &x : v)
        {
            const double re = g(rng);
            const double im = g(rng);
            x = {re, im};
        }
        return v;
    }

    // Argmax over atoms built by the scalar oracle, lowest id on ties
    std::size_t oracle_argmax(const Dictionary &d, std::span<const cplx> r)
    {
        std::size_t best = 0;
        double best_e = -1.0;
        for (std::size_t id = 0; id < d.size(); ++id)
        {
            const auto psi = test::unit(test::scalar_signature(d.setup(), d.vertex_positions(id)));
            cplx c = 0.0;
            for (std::size_t i = 0; i < psi.size(); ++i)
                c += std::conj(psi[i]) * r[i];
            if (std::norm(c) > best_e)
                best_e = std::norm(c), best = id;
        }
        return best;
    }

    std::vector<std::vector<std::size_t>> ids_of(const EstimateReport &r)
    {
        std::vector<std::vector<std::size_t>> out;
        for (const auto &p : r.detected)
            out.push_back(p.vertex_ids);
        return out;
    }
}

TEST_CASE("match_atom examples")
{
    Bench b(4, {{-1, 0.5, 0}, {1, 1.5, 0}}, 0.1);
    REQUIRE(b.d1->size() == 231);
    const std::size_t j = 117;
    const auto psi = b.d1->atom(j).signature;

    auto stream = dictionary_stream(b.graph, 1, b.setup);
    const auto m = match_atom(psi, stream);
    CHECK(m.id == j);
    CHECK(std::abs(m.amplitude - cplx(1.0, 0.0)) < 1e-12);
    CHECK(m.energy == test::rel(1.0, 1e-12));

    CVector twice = psi;
    for (auto &x : twice)
        x *= 2.0;
    const auto m2 = match_atom(twice, *b.d1);
    CHECK(m2.id == j);
    CHECK(std::abs(m2.amplitude - cplx(2.0, 0.0)) < 1e-9);
    CHECK(m2.energy == test::rel(4.0, 1e-9));

    const auto z = b.channel({{{b.graph->grid.vertices[42]}, {0.3, -0.1}}});
    CHECK(match_atom(z.data(), *b.d1).id == 42);
    CHECK(oracle_argmax(*b.d1, z.data()) == 42);

    CHECK_THROWS_AS(match_atom(CVector(b.setup.entries()), *b.d1), std::invalid_argument);
    const std::vector<std::size_t> none;
    CHECK_THROWS_AS(match_atom(psi, *b.d1, std::span<const std::size_t>(none)), std::invalid_argument);
}

TEST_CASE("match_atom equals the brute-force oracle on small grids")
{
    Bench b(2, {{-0.6, 0.8, 0}, {0.6, 1.6, 0}}, 0.3);
    REQUIRE(b.d2->size() <= 1000);
    for (std::uint64_t seed = 0; seed < 4; ++seed)
    {
        CVector r = noise_vector(b.setup.entries(), seed);
        if (seed % 2)
        {
            const auto z = b.channel({{{{0.13, 1.02, 0.05}, {-0.41, 1.5, 0.0}}, {2.0, 1.0}}});
            for (std::size_t i = 0; i < r.size(); ++i)
                r[i] = 0.05 * r[i] + z.data()[i];
        }
        for (const Dictionary *d : {b.d1.get(), b.d2.get()})
        {
            auto stream = dictionary_stream(b.graph, d->order(), b.setup);
            const std::size_t oracle = oracle_argmax(*d, r);
            CHECK(match_atom(r, *d).id == oracle);
            CHECK(match_atom(r, stream).id == oracle);
        }
    }
}

TEST_CASE("screened scan equals the exhaustive scan")
{
    Bench b(2, {{-1, 0.5, 0}, {1, 1.7, 0}}, 0.1);
    REQUIRE(b.d2->size() > 20000);
    const auto &w = b.setup.waveform;
    for (std::uint64_t seed = 0; seed < 3; ++seed)
    {
        CVector r = noise_vector(b.setup.entries(), seed + 10);
        if (seed > 0)
        {
            const auto z = b.channel({{{{0.13, 1.02, 0.0}, {-0.41, 1.5, 0.0}}, {3.0, 1.0}}});
            for (std::size_t i = 0; i < r.size(); ++i)
                r[i] = (seed == 1 ? 0.3 : 0.0) * r[i] + z.data()[i];
        }
        const auto f = fold_frames(r, b.setup.rows(), w.P, w.Q);
        MatchResult full;
        for (std::size_t id = 0; id < b.d2->size(); ++id)
        {
            const cplx c = b.d2->correlate(id, f);
            if (id == 0 || std::norm(c) > full.energy)
                full = {id, c, std::norm(c)};
        }
        const auto fast = match_atom(r, *b.d2);
        CHECK(fast.id == full.id);
        CHECK(fast.energy == full.energy);
        CHECK(fast.amplitude == full.amplitude);
    }
}

TEST_CASE("orthogonal projection identity")
{
    Bench b(4, {{-1, 0.5, 0}, {1, 1.5, 0}}, 0.1);
    CVector r = noise_vector(b.setup.entries(), 3);
    const auto z = b.channel({{{{0.21, 1.13, 0.0}}, {1.5, 0.2}}});
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = 0.01 * r[i] + z.data()[i];
    for (int step = 0; step < 5; ++step)
    {
        const double before = squared_norm(r);
        const auto m = match_atom(r, *b.d1);
        const auto psi = b.d1->atom(m.id).signature;
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] -= m.amplitude * psi[i];
        CHECK(squared_norm(r) == test::rel(before - m.energy, 1e-10));
    }
}

TEST_CASE("sage_pass")
{
    Bench b(4, {{-1, 0.5, 0}, {1, 1.5, 0}}, 0.1);
    const EstimatorConfig cfg;

    SUBCASE("zero residual")
    {
        const CVector zero(b.setup.entries());
        const auto out = sage_pass(zero, *b.d1, cfg, 0.0);
        CHECK(out.detected.empty());
        CHECK(out.residual == zero);
    }
    SUBCASE("two separated on-grid paths")
    {
        const auto &V = b.graph->grid.vertices;
        const std::size_t va = b.graph->grid.nearest({-0.6, 0.8, 0}), vb = b.graph->grid.nearest({0.5, 1.3, 0});
        const cplx aa{0.9, 0.4}, ab{-0.3, 0.5};
        const auto z = b.channel({{{V[va]}, aa}, {{V[vb]}, ab}});
        const auto out = sage_pass(z.data(), *b.d1, cfg, 0.0);
        REQUIRE(out.detected.size() == 2);
        for (const auto &p : out.detected)
        {
            REQUIRE((p.vertex_ids[0] == va || p.vertex_ids[0] == vb));
            const auto sp = path_signature(path_geometry(b.tx, b.rx, p.vertices), b.setup);
            // Library amplitudes are against unit atoms; convert the injected coefficient
            const cplx truth = (p.vertex_ids[0] == va ? aa : ab) * std::sqrt(sp.squared_norm());
            CHECK(std::abs(p.amplitude - truth) < 1e-6 * std::abs(truth));
        }
        CHECK(squared_norm(out.residual) < 1e-18 * z.squared_norm());
        for (std::size_t i = 1; i < out.trace.size(); ++i)
            CHECK(out.trace[i] <= out.trace[i - 1] + 1e-9 * out.trace[0]);
    }
}

TEST_CASE("sage_pass on pure noise at the default threshold")
{
    Bench b(4, {{-1, 0.5, 0}, {1, 2.5, 0}}, 0.1);
    REQUIRE(b.d1->size() == 441);
    const EstimatorConfig cfg;
    std::size_t quiet = 0;
    for (std::uint64_t seed = 1000; seed < 1100; ++seed)
    {
        const auto n = noise_vector(b.setup.entries(), seed);
        const bool none = sage_pass(n, *b.d1, cfg, 0.0).detected.empty() && sage_pass(n, *b.d2, cfg, 0.0).detected.empty();
        quiet += none;
    }
    MESSAGE("noise-only runs without detections: " << quiet << "/100");
    CHECK(quiet >= 95);
}

TEST_CASE("gm_sage end to end")
{
    Bench b(4, {{-0.5, 0.8, 0}, {0.5, 1.8, 0}}, 0.1);
    const EstimatorConfig cfg;
    const auto &V = b.graph->grid.vertices;

    SUBCASE("zero channel")
    {
        const auto r = gm_sage(ChannelTensor::zeros_like(b.setup), *b.d1, b.d2.get(), cfg);
        CHECK(r.detected.empty());
        CHECK(r.iterations == 0);
        CHECK(r.residual_trace == std::vector<double>{0.0});
    }
    SUBCASE("single one-bounce path")
    {
        const std::size_t v = b.graph->grid.nearest({0.2, 1.3, 0});
        const auto z = b.channel({{{V[v]}, {0.5, 0.5}}});
        const auto r = gm_sage(z, *b.d1, b.d2.get(), cfg);
        REQUIRE(r.detected.size() == 1);
        CHECK(r.detected[0].bounce_order == 1);
        CHECK(r.detected[0].vertex_ids[0] == v);
        CHECK(std::sqrt(squared_norm(r.residual_channel) / z.squared_norm()) < 1e-9);
    }
    SUBCASE("one-bounce plus two-bounce")
    {
        const std::size_t v = b.graph->grid.nearest({-0.3, 1.1, 0});
        const std::size_t w1 = b.graph->grid.nearest({0.4, 1.7, 0}), w2 = b.graph->grid.nearest({0.1, 1.0, 0});
        const auto z = b.channel({{{V[v]}, {1.0, 0.0}}, {{V[w1], V[w2]}, std::polar(0.8, 0.7)}});
        const auto r = gm_sage(z, *b.d1, b.d2.get(), cfg);
        REQUIRE(r.detected.size() == 2);
        CHECK(r.detected[0].vertex_ids == std::vector<std::size_t>{v});
        CHECK(r.detected[1].vertex_ids == std::vector<std::size_t>{w1, w2});
        CHECK(r.iterations <= 3);
        CHECK(std::sqrt(squared_norm(r.residual_channel) / z.squared_norm()) < 1e-9);
        for (std::size_t i = 1; i < r.residual_trace.size(); ++i)
            CHECK(r.residual_trace[i] <= r.residual_trace[i - 1] * (1.0 + 1e-12));
    }
    SUBCASE("dimension mismatch")
    {
        CHECK_THROWS_AS(gm_sage(ChannelTensor(2, 2, 32, 4), *b.d1, b.d2.get(), cfg), DimensionMismatch);
        CHECK_THROWS_AS(gm_sage(ChannelTensor::zeros_like(b.setup), *b.d2, b.d2.get(), cfg), std::invalid_argument);
    }
}

TEST_CASE("equivariance and determinism")
{
    Bench b(4, {{-0.5, 0.8, 0}, {0.5, 1.8, 0}}, 0.1);
    const EstimatorConfig cfg;
    const auto z = b.channel({{{{-0.27, 1.12, 0}}, {1.0, 0.0}}, {{{0.43, 1.66, 0}, {0.08, 1.04, 0}}, std::polar(0.7, 1.9)}},
                             NoiseSpec{25.0, 4});
    const auto base = gm_sage(z, *b.d1, b.d2.get(), cfg);
    REQUIRE(!base.detected.empty());

    const auto again = gm_sage(z, *b.d1, b.d2.get(), cfg);
    CHECK(estimates_csv(again.detected) == estimates_csv(base.detected));
    CHECK(again.residual_channel == base.residual_channel);

    const cplx rot = std::polar(1.0, 0.9);
    ChannelTensor zr = z;
    zr *= rot;
    const auto rotated = gm_sage(zr, *b.d1, b.d2.get(), cfg);
    CHECK(ids_of(rotated) == ids_of(base));
    for (std::size_t i = 0; i < std::min(rotated.detected.size(), base.detected.size()); ++i)
        CHECK(std::abs(rotated.detected[i].amplitude - rot * base.detected[i].amplitude) < 1e-9 * std::abs(base.detected[i].amplitude));

    ChannelTensor zs = z;
    zs *= cplx(3.5, 0.0);
    const auto scaled = gm_sage(zs, *b.d1, b.d2.get(), cfg);
    CHECK(ids_of(scaled) == ids_of(base));
    for (std::size_t i = 0; i < std::min(scaled.detected.size(), base.detected.size()); ++i)
        CHECK(std::abs(scaled.detected[i].amplitude - 3.5 * base.detected[i].amplitude) < 1e-9 * std::abs(3.5 * base.detected[i].amplitude));
}

TEST_CASE("one-bounce baseline")
{
    Bench b(4, {{-1, 0.5, 0}, {1, 2.5, 0}}, 0.1);
    const EstimatorConfig cfg;
    const auto &V = b.graph->grid.vertices;

    CHECK(one_bounce_baseline(ChannelTensor::zeros_like(b.setup), *b.d1, cfg).detected.empty());

    const std::size_t va = b.graph->grid.nearest({-0.4, 1.2, 0}), vb = b.graph->grid.nearest({0.6, 1.9, 0});
    const auto one = b.channel({{{V[va]}, {1.0, 0.2}}, {{V[vb]}, {0.4, -0.5}}});
    const auto full = gm_sage(one, *b.d1, b.d2.get(), cfg);
    const auto base = one_bounce_baseline(one, *b.d1, cfg, squared_norm(full.residual_channel));
    CHECK(base.baseline);
    std::vector<std::vector<std::size_t>> theta1;
    for (const auto &p : full.detected)
        if (p.bounce_order == 1)
            theta1.push_back(p.vertex_ids);
    INFO("baseline " << estimates_csv(base.detected) << "full " << estimates_csv(full.detected));
    CHECK(ids_of(base) == theta1);

    // Two-bounce-only scene: the one-bounce model must invent scatterers
    const Vec3 s1 = V[b.graph->grid.nearest({0.6, 1.8, 0})], s2 = V[b.graph->grid.nearest({-0.2, 2.2, 0})];
    const auto two = b.channel({{{s1, s2}, {1.0, 0.0}}});
    const auto ghosts = one_bounce_baseline(two, *b.d1, cfg);
    std::size_t far = 0;
    for (const auto &p : ghosts.detected)
        for (const auto &v : p.vertices)
            far += std::min(test::cheb(v, s1), test::cheb(v, s2)) > 0.3 + 1e-9;
    CHECK(far >= 1);
}

TEST_CASE("evaluate")
{
    const std::vector<Vec3> truth{{0, 1, 0}, {1, 2, 0}};
    DetectedPath a;
    a.bounce_order = 1;
    a.vertices = {{0, 1, 0}};
    DetectedPath b2;
    b2.bounce_order = 2;
    b2.vertices = {{1, 2, 0}, {5, 5, 0}};

    const auto perfect = evaluate(std::vector<DetectedPath>{a}, std::vector<Vec3>{truth[0]}, 0.15);
    CHECK(perfect.true_positives == 1);
    CHECK(perfect.ghosts == 0);
    CHECK(perfect.rmse == 0.0);

    const auto empty = evaluate(std::vector<DetectedPath>{}, truth, 0.15);
    CHECK(empty.true_positives == 0);
    CHECK(empty.ghosts == 0);
    CHECK(empty.truths == 2);

    DetectedPath off = a;
    off.vertices = {{0.07, 1, 0}};
    const auto shifted = evaluate(std::vector<DetectedPath>{off}, truth, 0.15);
    CHECK(shifted.true_positives == 1);
    CHECK(shifted.rmse == test::rel(0.07, 1e-12));

    DetectedPath dup = a;
    dup.vertices = {{0.05, 1, 0}};
    const auto mixed = evaluate(std::vector<DetectedPath>{dup, a, b2}, truth, 0.15);
    CHECK(mixed.detections == 4);
    CHECK(mixed.true_positives == 2);
    CHECK(mixed.duplicates == 1);
    CHECK(mixed.ghosts == 1);
    CHECK(mixed.ghost_flags == std::vector<bool>{false, false, false, true});
    CHECK_THROWS_AS(evaluate(std::vector<DetectedPath>{}, truth, 0.0), std::invalid_argument);
}

TEST_CASE("estimates CSV")
{
    DetectedPath a;
    a.bounce_order = 1;
    a.vertex_ids = {3};
    a.vertices = {{0.1, 1.3, 0.0}};
    a.amplitude = {0.25, -1.0 / 3.0};
    a.energy = std::norm(a.amplitude);
    DetectedPath b;
    b.bounce_order = 2;
    b.vertices = {{-0.2, 1.0, 0.1}, {0.3, 2.2, -0.1}};
    b.amplitude = {1e-7, 2.5};
    b.velocity = 0.75;
    b.energy = std::norm(b.amplitude);
    const std::vector<DetectedPath> in{a, b};
    const auto text = estimates_csv(in);
    CHECK(text.rfind("path_id,bounce,x_m,y_m,z_m,x2_m,y2_m,z2_m,amp_re,amp_im,velocity_mps,energy\n", 0) == 0);
    CHECK(text.find("\n0,1,0.1,1.3,0,,,,") != std::string::npos);
    const auto back = parse_estimates_csv(text);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i)
    {
        CHECK(back[i].bounce_order == in[i].bounce_order);
        CHECK(back[i].vertices == in[i].vertices);
        CHECK(back[i].amplitude == in[i].amplitude);
        CHECK(back[i].velocity == in[i].velocity);
        CHECK(back[i].energy == in[i].energy);
    }
    CHECK(parse_estimates_csv(estimates_csv({})).empty());
    CHECK_THROWS_AS(parse_estimates_csv("nope\n"), ParseError);
    std::string bad = text;
    bad.replace(bad.find("0.25"), 4, "x.25");
    try
    {
        parse_estimates_csv(bad);
        FAIL("bad value accepted");
    }
    catch (const ParseError &e)
    {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
}
