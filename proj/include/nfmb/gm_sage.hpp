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

#ifndef nfmb_gm_sage_H
#define nfmb_gm_sage_H

#include "nfmb/channel.hpp"
#include "nfmb/dictionary.hpp"
#include "nfmb/scene.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nfmb
{
    // Relative detection threshold: twice the 95% noise-only quantile recorded in
    // tools/gamma_calibration.json (4x4 arrays, 441-vertex grid), rounded up on a 1-2-5 scale
    inline constexpr double kDefaultGamma = 1e-3;

    struct EstimatorConfig
    {
        std::size_t K_max = 2;          // highest bounce order with a dictionary (1 or 2)
        std::size_t max_paths = 8;      // per order
        std::size_t paths_per_iter = 1; // per-order budget growth per outer iteration
        double gamma = kDefaultGamma;   // match energy / residual energy needed to accept
        std::size_t outer_iters = 12;   // I_max
        double eps = 1e-6;              // relative change of ||h2|| that ends the outer loop
        std::size_t refine_cycles = 2;  // per-path E/M cycles after the greedy sweep
        std::size_t refine_radius = 2;  // lattice steps searched around each detection
        std::size_t coarse_stride = 2;  // sub-lattice scanned in full during refinement
        double noise_floor = 0.0;       // absolute atom energy below which nothing is accepted
        std::size_t baseline_path_factor = 4; // baseline max_paths = factor * max_paths
        std::vector<double> doppler_grid;     // m/s candidates; empty keeps every path static

        void validate() const;
    };

    struct DetectedPath
    {
        std::size_t bounce_order = 1;
        std::vector<std::size_t> vertex_ids;
        std::vector<Vec3> vertices;
        cplx amplitude;
        double velocity = 0.0; // m/s
        double energy = 0.0;   // |amplitude|^2, the energy this path removes from the data
    };

    struct EstimateReport
    {
        std::vector<DetectedPath> detected;
        std::vector<double> residual_trace; // ||z|| first, then the objective after each outer iteration
        CVector residual_channel;           // h2: what no one- or two-bounce atom explains
        std::size_t iterations = 0;
        bool baseline = false;
    };

    struct MatchResult
    {
        std::size_t id = 0;
        cplx amplitude;
        double energy = 0.0;
    };

    // <a, b> = sum conj(a_i) b_i
    cplx inner(std::span<const cplx> a, std::span<const cplx> b);
    double squared_norm(std::span<const cplx> v);

    // Exhaustive argmax of |<psi, r>|^2 over materialized atoms; lowest id wins ties
    MatchResult match_atom(std::span<const cplx> residual, AtomStream &atoms);

    // Same selection through the compact correlator, optionally restricted to `subset` (ascending ids)
    MatchResult match_atom(std::span<const cplx> residual, const Dictionary &dictionary,
                           std::optional<std::span<const std::size_t>> subset = std::nullopt);

    struct SagePassResult
    {
        std::vector<DetectedPath> detected;
        CVector residual;
        std::vector<double> trace; // residual norm after every accept step, non-increasing
        bool saturated = false;    // detection stopped on max_paths rather than on the threshold
    };

    // Starts from `initial` (already-detected paths of this order, cancelled from `residual` first),
    // adds detections up to config.max_paths, then refines every path and re-fits amplitudes jointly
    SagePassResult sage_pass(std::span<const cplx> residual, const Dictionary &dictionary, const EstimatorConfig &config,
                             double noise_floor, std::span<const DetectedPath> initial = {});

    // Unit-norm signature of a detection, including its velocity
    CVector detection_signature(const DetectedPath &path, const SensingSetup &setup);

    // dict2 may be null when config.K_max == 1
    EstimateReport gm_sage(const ChannelTensor &Z, const Dictionary &dict1, const Dictionary *dict2, const EstimatorConfig &config);

    // One-bounce-only model; keeps detecting until the residual energy reaches `target_residual_energy`
    EstimateReport one_bounce_baseline(const ChannelTensor &Z, const Dictionary &dict1, const EstimatorConfig &config,
                                       std::optional<double> target_residual_energy = std::nullopt);

    struct EvaluationMetrics
    {
        std::size_t detections = 0;      // detection points (two per two-bounce path)
        std::size_t truths = 0;
        std::size_t true_positives = 0;
        std::size_t ghosts = 0;          // points with no true scatterer inside the radius
        std::size_t duplicates = 0;      // points near a truth already claimed by a closer point
        double rmse = 0.0;               // over matched pairs, m
        std::vector<bool> ghost_flags;   // per detection point, in report order
    };

    EvaluationMetrics evaluate(std::span<const DetectedPath> detected, std::span<const Vec3> truth, double match_radius);
    EvaluationMetrics evaluate(const EstimateReport &report, std::span<const Scatterer> truth, double match_radius);

    std::string metrics_json(const EvaluationMetrics &metrics, double match_radius);

    // CSV: path_id,bounce,x_m,y_m,z_m,x2_m,y2_m,z2_m,amp_re,amp_im,velocity_mps,energy
    std::string estimates_csv(std::span<const DetectedPath> detected);
    std::vector<DetectedPath> parse_estimates_csv(std::string_view text);

    std::string report_json(const EstimateReport &report, const EstimatorConfig &config);
}

#endif
