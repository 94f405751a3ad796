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

// Monte Carlo calibration of the relative detection threshold.
// For each seed, draws white circular Gaussian noise over the sensing tensor and records
// the largest atom energy over ||noise||^2 for the one- and two-bounce dictionaries.
// The recommended gamma is the requested quantile of the per-seed maximum over both orders.

#include "nfmb/gm_sage.hpp"
#include "nfmb/detail/json_fields.hpp"
#include "nfmb/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <random>

using namespace nfmb;

int main(int argc, char **argv)
{
    CLI::App app{"Noise-only calibration of the detection threshold"};
    std::size_t seeds = 100, array = 4;
    double quantile = 0.95, resolution = 0.1;
    std::string out;
    app.add_option("--seeds", seeds, "Number of noise realizations");
    app.add_option("--array", array, "Square array size per side");
    app.add_option("--resolution", resolution, "Grid resolution (m)");
    app.add_option("--quantile", quantile, "Fraction of seeds that must yield no detection");
    app.add_option("-o,--out", out, "JSON result file");
    CLI11_PARSE(app, argc, argv);

    const double lambda = kSpeedOfLight / 30e9;
    SensingSetup setup;
    setup.tx = make_array(array, array, lambda / 2, Pose::from_lattice_axes({-0.5, 0, 0}, {-1, 0, 0}, {0, 0, 1}));
    setup.rx = make_array(array, array, lambda / 2, Pose::from_lattice_axes({0.5, 0, 0}, {-1, 0, 0}, {0, 0, 1}));
    EdgeConstraints ec;
    ec.tx_ref = reference_position(setup.tx);
    ec.rx_ref = reference_position(setup.rx);
    auto graph = std::make_shared<const PropagationGraph>(build_graph(build_grid({{-1, 0.5, 0}, {1, 2.5, 0}}, resolution), ec));
    const Dictionary d1(graph, 1, setup), d2(graph, 2, setup);

    std::vector<double> r1, r2, both;
    for (std::size_t s = 0; s < seeds; ++s)
    {
        ChannelTensor n = ChannelTensor::zeros_like(setup);
        std::mt19937_64 rng(s);
        std::normal_distribution<double> g(0.0, std::sqrt(0.5));
        for (auto &x : n.data())
        {
            const double re = g(rng);
            const double im = g(rng);
            x = {re, im};
        }
        const double e = n.squared_norm();
        r1.push_back(match_atom(n.data(), d1).energy / e);
        r2.push_back(match_atom(n.data(), d2).energy / e);
        both.push_back(std::max(r1.back(), r2.back()));
        std::cerr << "seed " << s << ": " << r1.back() << " " << r2.back() << "\n";
    }
    auto q = [&](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t k = std::min(v.size() - 1, (std::size_t)std::ceil(quantile * (double)v.size()) - 1);
        return v[k];
    };
    detail::json j;
    j["seeds"] = seeds;
    j["array"] = array;
    j["grid_resolution_m"] = resolution;
    j["atoms_one_bounce"] = d1.size();
    j["atoms_two_bounce"] = d2.size();
    j["quantile"] = quantile;
    j["ratio_quantile_one_bounce"] = q(r1);
    j["ratio_quantile_two_bounce"] = q(r2);
    j["ratio_quantile_both"] = q(both);
    j["ratio_max_both"] = *std::max_element(both.begin(), both.end());
    const std::string text = detail::dump(j);
    std::cout << text;
    if (!out.empty())
        write_file_atomic(out, text);
    return 0;
}
