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

#ifndef nfmb_tests_support_H
#define nfmb_tests_support_H

#include "nfmb/channel.hpp"
#include "nfmb/dictionary.hpp"
#include "nfmb/geometry.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace nfmb::test
{
    // Purely relative tolerance
    inline doctest::Approx rel(double value, double eps) { return doctest::Approx(value).epsilon(eps).scale(0.0); }

    inline double wavelength_30ghz() { return kSpeedOfLight / 30e9; }

    // Square arrays facing +y, Tx at x = -0.5 m and Rx at x = +0.5 m
    inline SensingSetup desk_setup(std::size_t side = 4, std::size_t P = 32, std::size_t Q = 4)
    {
        const double lambda = wavelength_30ghz();
        SensingSetup s;
        s.tx = make_array(side, side, lambda / 2, Pose::from_lattice_axes({-0.5, 0, 0}, {-1, 0, 0}, {0, 0, 1}));
        s.rx = make_array(side, side, lambda / 2, Pose::from_lattice_axes({0.5, 0, 0}, {-1, 0, 0}, {0, 0, 1}));
        s.waveform.P = P;
        s.waveform.Q = Q;
        return s;
    }

    inline std::shared_ptr<const PropagationGraph> desk_graph(const SensingSetup &s, const Box &bounds, double resolution,
                                                              double min_separation = 0.0)
    {
        EdgeConstraints ec;
        ec.tx_ref = reference_position(s.tx);
        ec.rx_ref = reference_position(s.rx);
        ec.min_separation = min_separation;
        return std::make_shared<const PropagationGraph>(build_graph(build_grid(bounds, resolution), ec));
    }

    // Entry-by-entry evaluation of the channel model from absolute element positions.
    // Shares no code with the library beyond element placement.
    inline std::vector<cplx> scalar_signature(const SensingSetup &s, const std::vector<Vec3> &hops, double v = 0.0)
    {
        const auto tx = element_positions(s.tx);
        const auto rx = element_positions(s.rx);
        const Vec3 tr = reference_position(s.tx);
        const Vec3 rr = reference_position(s.rx);
        double inner_len = 0.0;
        for (std::size_t i = 1; i < hops.size(); ++i)
            inner_len += std::sqrt(std::pow(hops[i].x - hops[i - 1].x, 2) + std::pow(hops[i].y - hops[i - 1].y, 2) +
                                   std::pow(hops[i].z - hops[i - 1].z, 2));
        auto dist = [](const Vec3 &a, const Vec3 &b) {
            return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
        };
        const double c = 299792458.0;
        const double tau_ref = (dist(tr, hops.front()) + inner_len + dist(hops.back(), rr)) / c;
        const auto &w = s.waveform;
        std::vector<cplx> out(s.entries());
        for (std::size_t n = 1; n <= rx.size(); ++n)
            for (std::size_t m = 1; m <= tx.size(); ++m)
            {
                const double tau = (dist(tx[m - 1], hops.front()) + inner_len + dist(hops.back(), rx[n - 1])) / c;
                const double amp = tau_ref / tau;
                for (std::size_t q = 1; q <= w.Q; ++q)
                    for (std::size_t p = 1; p <= w.P; ++p)
                    {
                        const double fp = p * w.f_s;
                        const double fd = -(w.f_c + fp) * v / c;
                        const double ph = -2.0 * M_PI * (w.f_c + fp) * tau + 2.0 * M_PI * fd * q * w.T_b;
                        const std::size_t row = (n - 1) * tx.size() + m;
                        const std::size_t col = (q - 1) * w.P + p;
                        out[(row - 1) * w.P * w.Q + (col - 1)] = std::polar(amp, ph);
                    }
            }
        return out;
    }

    inline std::vector<cplx> unit(std::vector<cplx> v)
    {
        double e = 0.0;
        for (auto &x : v)
            e += std::norm(x);
        for (auto &x : v)
            x /= std::sqrt(e);
        return v;
    }

    inline double cheb(const Vec3 &a, const Vec3 &b)
    {
        return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
    }

    // Fresh directory under the system temp path, removed on destruction
    struct TempDir
    {
        std::filesystem::path path;
        explicit TempDir(const std::string &tag)
        {
            std::random_device rd;
            path = std::filesystem::temp_directory_path() / ("nfmb_" + tag + "_" + std::to_string(rd()));
            std::filesystem::create_directories(path);
        }
        ~TempDir()
        {
            std::error_code ec;
            std::filesystem::remove_all(path, ec);
        }
    };
}

#endif
