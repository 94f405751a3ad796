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

#ifndef nfmb_cli_H
#define nfmb_cli_H

#include "nfmb/channel.hpp"
#include "nfmb/dictionary.hpp"
#include "nfmb/gm_sage.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nfmb
{
    inline constexpr int kExitOk = 0;
    inline constexpr int kExitError = 1;
    inline constexpr int kExitDimensionMismatch = 2;

    // One reproducible run. Relative paths in a config file resolve against the file's directory.
    struct RunConfig
    {
        std::filesystem::path scene;
        WaveformSpec waveform;
        std::optional<Box> grid_bounds; // default: scene bounds in x, y at the Tx array height
        double grid_resolution = 0.2;   // m
        double min_separation = 0.0;    // m
        std::optional<double> max_delay; // s
        std::optional<double> min_excess; // m, default: a tenth of the grid resolution
        EstimatorConfig estimator;
        std::optional<double> snr_db;   // null = noiseless
        std::optional<std::uint64_t> seed;
        std::size_t max_bounce = 2;     // scatterer chains synthesized
        std::size_t wall_bounces = 0;   // specular wall paths synthesized (0 = none)
        double match_radius = 0.15;     // m

        std::filesystem::path tensor = "channel.nfmb";
        std::filesystem::path estimates; // empty: the subcommand's default name
        std::filesystem::path report;
        std::filesystem::path metrics = "metrics.json";

        void validate() const;
    };

    RunConfig parse_run_config(std::string_view text, const std::filesystem::path &base_dir = {});

    // Candidate grid for a scene under a run config
    CandidateGrid run_grid(const RunConfig &config, const SceneConfig &scene);

    // Full command line (argv[0] excluded); returns the process exit code
    int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
}

#endif
