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

#include "nfmb/gm_sage.hpp"
#include "nfmb/detail/json_fields.hpp"
#include "nfmb/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace nfmb
{
    void EstimatorConfig::validate() const
    {
        if (K_max != 1 && K_max != 2)
            throw std::invalid_argument("estimator.K_max must be 1 or 2.");
        if (!(gamma > 0.0 && gamma < 1.0))
            throw std::invalid_argument("estimator.gamma must lie in (0, 1).");
        if (outer_iters < 1)
            throw std::invalid_argument("estimator.outer_iters must be at least 1.");
        if (max_paths < 1)
            throw std::invalid_argument("estimator.max_paths must be at least 1.");
        if (paths_per_iter < 1)
            throw std::invalid_argument("estimator.paths_per_iter must be at least 1.");
        if (!(eps >= 0.0) || !std::isfinite(eps))
            throw std::invalid_argument("estimator.eps must be non-negative.");
        if (coarse_stride < 1)
            throw std::invalid_argument("estimator.coarse_stride must be at least 1.");
        if (!(noise_floor >= 0.0) || !std::isfinite(noise_floor))
            throw std::invalid_argument("estimator.noise_floor must be non-negative.");
        if (baseline_path_factor < 1)
            throw std::invalid_argument("estimator.baseline_path_factor must be at least 1.");
        for (double v : doppler_grid)
            if (!std::isfinite(v))
                throw std::invalid_argument("estimator.doppler_grid entries must be finite.");
    }

    cplx inner(std::span<const cplx> a, std::span<const cplx> b)
    {
        if (a.size() != b.size())
            throw DimensionMismatch("Inner product of vectors of different length.");
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
            im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
        }
        return {re, im};
    }

    double squared_norm(std::span<const cplx> v)
    {
        double s = 0.0;
        for (const auto &z : v)
            s += std::norm(z);
        return s;
    }

    namespace
    {
        void axpy(CVector &y, cplx a, std::span<const cplx> x)
        {
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] += a * x[i];
        }

        // Atom sets at least this large go through the interpolated screening stage
        constexpr std::size_t kScreeningThreshold = 4096;
        constexpr double kRoundoffFloor = 1e-20; // relative to the input energy

        // Strictly greater wins, so the first (lowest id) candidate keeps ties
        void consider(MatchResult &best, bool &any, std::size_t id, cplx c)
        {
            const double e = std::norm(c);
            if (!any || e > best.energy)
            {
                best = {id, c, e};
                any = true;
            }
        }

        DetectedPath make_detection(const Dictionary &d, const MatchResult &m)
        {
            DetectedPath p;
            p.bounce_order = d.order();
            p.vertex_ids = d.vertex_ids(m.id);
            p.vertices = d.vertex_positions(m.id);
            p.amplitude = m.amplitude;
            p.energy = m.energy;
            return p;
        }

        // Least-squares amplitudes of `data` over the given unit-norm signatures; returns the residual
        CVector joint_least_squares(std::span<const cplx> data, const std::vector<CVector> &sig, std::vector<cplx> &amps)
        {
            CVector residual(data.begin(), data.end());
            amps.assign(sig.size(), cplx{});
            if (sig.empty())
                return residual;
            const Eigen::Index D = (Eigen::Index)data.size();
            const Eigen::Index K = (Eigen::Index)sig.size();
            Eigen::MatrixXcd A(D, K);
            for (Eigen::Index k = 0; k < K; ++k)
                A.col(k) = Eigen::Map<const Eigen::VectorXcd>(sig[k].data(), D);
            const Eigen::Map<const Eigen::VectorXcd> b(data.data(), D);
            const Eigen::VectorXcd x = A.completeOrthogonalDecomposition().solve(b);
            Eigen::Map<Eigen::VectorXcd> r(residual.data(), D);
            r = b - A * x;
            for (Eigen::Index k = 0; k < K; ++k)
                amps[k] = x[k];
            return residual;
        }

        // Joint amplitudes over every detection; kept only when the residual does not grow
        bool refit(std::span<const cplx> data, const std::vector<CVector> &sig, SagePassResult &out, double &energy)
        {
            std::vector<cplx> amps;
            CVector ls = joint_least_squares(data, sig, amps);
            const double e = squared_norm(ls);
            if (!(e <= energy))
                return false;
            out.residual = std::move(ls);
            for (std::size_t i = 0; i < amps.size(); ++i)
            {
                out.detected[i].amplitude = amps[i];
                out.detected[i].energy = std::norm(amps[i]);
            }
            energy = e;
            return true;
        }

        std::vector<std::size_t> merge_unique(std::vector<std::size_t> a, const std::vector<std::size_t> &b)
        {
            a.insert(a.end(), b.begin(), b.end());
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
            return a;
        }
    }

    MatchResult match_atom(std::span<const cplx> residual, AtomStream &atoms)
    {
        if (!(squared_norm(residual) > 0.0))
            throw std::invalid_argument("match_atom needs a non-zero residual.");
        if (atoms.size() == 0)
            throw std::invalid_argument("match_atom over an empty atom stream.");
        atoms.reset();
        MatchResult best;
        bool any = false;
        std::size_t id = 0;
        while (auto a = atoms.next())
            consider(best, any, id++, inner(a->signature, residual));
        return best;
    }

    MatchResult match_atom(std::span<const cplx> residual, const Dictionary &dictionary,
                           std::optional<std::span<const std::size_t>> subset)
    {
        if (!(squared_norm(residual) > 0.0))
            throw std::invalid_argument("match_atom needs a non-zero residual.");
        const std::size_t count = subset ? subset->size() : dictionary.size();
        if (count == 0)
            throw std::invalid_argument("match_atom over an empty atom set.");
        const auto &w = dictionary.setup().waveform;
        const FoldedResidual f = fold_frames(residual, dictionary.setup().rows(), w.P, w.Q);
        MatchResult best;
        bool any = false;
        if (count < kScreeningThreshold)
        {
            for (std::size_t i = 0; i < count; ++i)
            {
                const std::size_t id = subset ? (*subset)[i] : i;
                consider(best, any, id, dictionary.correlate(id, f));
            }
            return best;
        }

        // Interpolated scores with error bounds; only atoms that can still reach the best
        // guaranteed score are evaluated exactly, so the result equals the exhaustive scan
        const auto table = dictionary.scan_table(f);
        std::vector<double> upper(count);
        double lower = 0.0;
        for (std::size_t i = 0; i < count; ++i)
        {
            const std::size_t id = subset ? (*subset)[i] : i;
            const auto [c, err] = dictionary.screen(id, table);
            const double a = std::abs(c);
            upper[i] = a + err;
            lower = std::max(lower, a - err);
        }
        for (std::size_t i = 0; i < count; ++i)
        {
            if (upper[i] < lower)
                continue;
            const std::size_t id = subset ? (*subset)[i] : i;
            consider(best, any, id, dictionary.correlate(id, f));
        }
        return best;
    }

    CVector detection_signature(const DetectedPath &path, const SensingSetup &setup)
    {
        const auto geom = path_geometry(reference_position(setup.tx), reference_position(setup.rx), path.vertices);
        ChannelTensor s = path_signature(geom, setup, path.velocity);
        const double n = std::sqrt(s.squared_norm());
        if (!(n > 0.0))
            throw DegenerateGeometry("Detection signature has zero energy.");
        s *= cplx(1.0 / n, 0.0);
        return std::move(s.vector());
    }

    SagePassResult sage_pass(std::span<const cplx> input, const Dictionary &dict, const EstimatorConfig &config,
                             double noise_floor, std::span<const DetectedPath> initial)
    {
        config.validate();
        const SensingSetup &setup = dict.setup();
        if (input.size() != setup.entries())
            throw DimensionMismatch("Residual length does not match the dictionary setup.");

        SagePassResult out;
        out.residual.assign(input.begin(), input.end());
        // Below this the residual is rounding error of the cancellations
        noise_floor = std::max(noise_floor, kRoundoffFloor * squared_norm(out.residual));
        std::vector<CVector> sig;
        for (const auto &p : initial)
        {
            if (p.bounce_order != dict.order())
                throw std::invalid_argument("Initial detection has the wrong bounce order.");
            sig.push_back(detection_signature(p, setup));
            axpy(out.residual, -p.amplitude, sig.back());
            out.detected.push_back(p);
        }
        double energy = squared_norm(out.residual);
        out.trace.push_back(std::sqrt(energy));

        // Greedy detection and cancellation
        for (;;)
        {
            if (out.detected.size() >= config.max_paths)
            {
                out.saturated = true;
                break;
            }
            if (!(energy > noise_floor && energy > 0.0))
                break;
            const MatchResult m = match_atom(out.residual, dict);
            if (m.energy < config.gamma * energy || m.energy <= noise_floor)
                break;
            DetectedPath p = make_detection(dict, m);
            sig.push_back(detection_signature(p, setup));
            axpy(out.residual, -m.amplitude, sig.back());
            out.detected.push_back(std::move(p));
            energy = squared_norm(out.residual);
            refit(input, sig, out, energy);
            out.trace.push_back(std::sqrt(energy));
        }
        if (out.detected.empty())
            return out;

        // Per-path expectation / maximization cycles
        // Small dictionaries are searched in full, large ones on the sub-lattice plus each path's neighborhood
        std::vector<std::size_t> coarse;
        if (dict.size() < kScreeningThreshold)
        {
            coarse.resize(dict.size());
            std::iota(coarse.begin(), coarse.end(), std::size_t{0});
        }
        else
            coarse = dict.coarse_subset(config.coarse_stride);
        for (std::size_t cycle = 0; cycle < config.refine_cycles; ++cycle)
        {
            for (std::size_t i = 0; i < out.detected.size(); ++i)
            {
                DetectedPath &p = out.detected[i];
                axpy(out.residual, p.amplitude, sig[i]);

                const auto own = dict.find(p.vertex_ids);
                std::vector<std::size_t> cand = merge_unique(own ? dict.neighborhood(*own, config.refine_radius) : std::vector<std::size_t>{}, coarse);
                // The current hypothesis competes with its static counterpart on the lattice
                const cplx current = inner(sig[i], out.residual);
                MatchResult best{own.value_or(0), current, std::norm(current)};
                if (squared_norm(out.residual) > 0.0)
                {
                    const MatchResult lattice = match_atom(out.residual, dict, std::span<const std::size_t>(cand));
                    if (lattice.energy > best.energy)
                    {
                        best = lattice;
                        p = make_detection(dict, best);
                        sig[i] = detection_signature(p, setup);
                    }
                }
                p.amplitude = best.amplitude;
                p.energy = best.energy;

                for (double v : config.doppler_grid)
                {
                    DetectedPath trial = p;
                    trial.velocity = v;
                    CVector s = detection_signature(trial, setup);
                    const cplx c = inner(s, out.residual);
                    if (std::norm(c) > p.energy)
                    {
                        p.velocity = v;
                        p.amplitude = c;
                        p.energy = std::norm(c);
                        sig[i] = std::move(s);
                    }
                }
                axpy(out.residual, -p.amplitude, sig[i]);
                energy = squared_norm(out.residual);
                out.trace.push_back(std::sqrt(energy));
            }
        }

        // Joint amplitude re-estimate over the detected set
        if (refit(input, sig, out, energy))
            out.trace.push_back(std::sqrt(energy));
        return out;
    }

    namespace
    {
        struct Component
        {
            DetectedPath path;
            CVector sig;
        };

        CVector synthesize(std::size_t D, const std::vector<Component> &set)
        {
            CVector out(D, cplx{});
            for (const auto &c : set)
                axpy(out, c.path.amplitude, c.sig);
            return out;
        }

        CVector subtract(std::span<const cplx> a, std::span<const cplx> b)
        {
            CVector out(a.begin(), a.end());
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] -= b[i];
            return out;
        }

        std::vector<Component> with_signatures(std::vector<DetectedPath> paths, const SensingSetup &setup)
        {
            std::vector<Component> out;
            for (auto &p : paths)
            {
                CVector s = detection_signature(p, setup);
                out.push_back({std::move(p), std::move(s)});
            }
            return out;
        }

        void check_inputs(const ChannelTensor &Z, const Dictionary &dict1, const Dictionary *dict2, const EstimatorConfig &config)
        {
            config.validate();
            Z.check_shape(dict1.setup());
            if (dict1.order() != 1)
                throw std::invalid_argument("First dictionary must hold one-bounce atoms.");
            if (config.K_max >= 2)
            {
                if (!dict2)
                    throw std::invalid_argument("K_max = 2 needs a two-bounce dictionary.");
                if (dict2->order() != 2)
                    throw std::invalid_argument("Second dictionary must hold two-bounce atoms.");
                Z.check_shape(dict2->setup());
            }
        }

        // Floor keeping numerically-zero residuals from producing detections
        double effective_floor(const EstimatorConfig &config, double z_energy)
        {
            return std::max(config.noise_floor, kRoundoffFloor * z_energy);
        }
    }

    EstimateReport gm_sage(const ChannelTensor &Z, const Dictionary &dict1, const Dictionary *dict2, const EstimatorConfig &config)
    {
        check_inputs(Z, dict1, dict2, config);
        const SensingSetup &setup = dict1.setup();
        const std::span<const cplx> z = Z.data();
        const std::size_t D = z.size();
        const double z_energy = squared_norm(z);

        EstimateReport report;
        report.residual_trace.push_back(std::sqrt(z_energy));
        report.residual_channel.assign(z.begin(), z.end());
        if (!(z_energy > 0.0))
            return report;

        const double floor = effective_floor(config, z_energy);
        const double slack = 1e-12 * z_energy;
        const bool two = config.K_max >= 2;

        std::vector<DetectedPath> th1, th2;
        CVector psi1(D, cplx{}), psi2(D, cplx{});
        double prev_h = std::sqrt(z_energy);

        // One order's SAGE pass on its hidden data, warm-started from the current estimates
        auto update = [&](const Dictionary &dict, const EstimatorConfig &step, const CVector &other,
                          std::vector<DetectedPath> &theta, CVector &psi) {
            const CVector hidden = subtract(z, other);
            const double old_res = squared_norm(subtract(hidden, psi));
            SagePassResult pass = sage_pass(hidden, dict, step, floor, theta);
            if (squared_norm(pass.residual) > old_res + slack)
                return false;
            theta = std::move(pass.detected);
            psi = subtract(hidden, pass.residual);
            return pass.saturated && step.max_paths < config.max_paths;
        };

        for (std::size_t it = 1; it <= config.outer_iters; ++it)
        {
            report.iterations = it;
            EstimatorConfig step = config;
            step.max_paths = std::min(config.max_paths, it * config.paths_per_iter);

            // (a) one-bounce parameters with the two-bounce model removed, (b) the converse
            bool budget_bound = update(dict1, step, psi2, th1, psi1);
            if (two)
                budget_bound = update(*dict2, step, psi1, th2, psi2) || budget_bound;

            // (c) joint amplitudes over both orders, then drop paths the threshold would not accept
            std::vector<Component> all = with_signatures(th1, setup);
            for (auto &c : with_signatures(th2, setup))
                all.push_back(std::move(c));
            const CVector before_fit = subtract(subtract(z, psi1), psi2);
            const double bound = report.residual_trace.back() * report.residual_trace.back() + slack;

            auto refit = [&](std::vector<Component> &set) {
                std::vector<CVector> sig;
                for (const auto &c : set)
                    sig.push_back(c.sig);
                std::vector<cplx> amps;
                CVector r = joint_least_squares(z, sig, amps);
                for (std::size_t k = 0; k < set.size(); ++k)
                    set[k].path.amplitude = amps[k], set[k].path.energy = std::norm(amps[k]);
                return r;
            };
            CVector h2 = refit(all);
            if (squared_norm(h2) > squared_norm(before_fit))
            {
                // Numerically worse than the pass amplitudes; keep those
                all = with_signatures(th1, setup);
                for (auto &c : with_signatures(th2, setup))
                    all.push_back(std::move(c));
                h2 = before_fit;
            }

            // A two-bounce path whose own hidden data a one-bounce atom explains at least as well
            // is re-labelled as one-bounce; the swap stands only if the joint residual does not grow
            for (std::size_t k = 0; two && k < all.size(); ++k)
            {
                if (all[k].path.bounce_order != 2)
                    continue;
                CVector hidden = h2;
                axpy(hidden, all[k].path.amplitude, all[k].sig);
                if (!(squared_norm(hidden) > 0.0))
                    continue;
                const double own = std::norm(inner(all[k].sig, hidden));
                const MatchResult m = match_atom(hidden, dict1);
                if (m.energy < own)
                    continue;
                std::vector<Component> trial = all;
                trial[k].path = make_detection(dict1, m);
                trial[k].sig = detection_signature(trial[k].path, setup);
                CVector r = refit(trial);
                if (squared_norm(r) <= squared_norm(h2) + slack)
                {
                    all = std::move(trial);
                    h2 = std::move(r);
                }
            }

            while (!all.empty())
            {
                const double h_energy = squared_norm(h2);
                // Removing a path raises the residual by its marginal energy
                std::size_t weakest = 0;
                double weakest_gain = 0.0;
                for (std::size_t k = 0; k < all.size(); ++k)
                {
                    std::vector<Component> rest;
                    for (std::size_t j = 0; j < all.size(); ++j)
                        if (j != k)
                            rest.push_back(all[j]);
                    const double gain = squared_norm(refit(rest)) - h_energy;
                    if (k == 0 || gain < weakest_gain)
                        weakest = k, weakest_gain = gain;
                }
                const double margin = std::max(0.0, weakest_gain);
                if (margin > std::max(floor, config.gamma * (h_energy + margin)) || h_energy + margin > bound)
                    break;
                all.erase(all.begin() + (std::ptrdiff_t)weakest);
                h2 = refit(all);
            }

            th1.clear();
            th2.clear();
            std::vector<Component> c1, c2;
            for (auto &c : all)
            {
                (c.path.bounce_order == 1 ? th1 : th2).push_back(c.path);
                (c.path.bounce_order == 1 ? c1 : c2).push_back(std::move(c));
            }
            psi1 = synthesize(D, c1);
            psi2 = synthesize(D, c2);
            h2 = subtract(subtract(z, psi1), psi2);

            const double h = std::sqrt(squared_norm(h2));
            report.residual_trace.push_back(h);
            report.residual_channel = std::move(h2);
            const bool settled = std::abs(h - prev_h) <= config.eps * prev_h && !budget_bound;
            if (settled || h * h <= floor)
                break;
            prev_h = h;
        }

        report.detected = th1;
        report.detected.insert(report.detected.end(), th2.begin(), th2.end());
        return report;
    }

    EstimateReport one_bounce_baseline(const ChannelTensor &Z, const Dictionary &dict1, const EstimatorConfig &config,
                                       std::optional<double> target_residual_energy)
    {
        EstimatorConfig c = config;
        c.K_max = 1;
        check_inputs(Z, dict1, nullptr, c);
        c.max_paths = config.max_paths * config.baseline_path_factor;

        const std::span<const cplx> z = Z.data();
        const double z_energy = squared_norm(z);
        EstimateReport report;
        report.baseline = true;
        report.residual_trace.push_back(std::sqrt(z_energy));
        report.residual_channel.assign(z.begin(), z.end());
        if (!(z_energy > 0.0))
            return report;

        double floor = effective_floor(c, z_energy);
        if (target_residual_energy)
            floor = std::max(floor, *target_residual_energy);
        SagePassResult pass = sage_pass(z, dict1, c, floor);
        report.iterations = 1;
        report.detected = std::move(pass.detected);
        report.residual_trace.push_back(std::sqrt(squared_norm(pass.residual)));
        report.residual_channel = std::move(pass.residual);
        return report;
    }

    EvaluationMetrics evaluate(std::span<const DetectedPath> detected, std::span<const Vec3> truth, double match_radius)
    {
        if (!(match_radius > 0.0))
            throw std::invalid_argument("Match radius must be positive.");
        std::vector<Vec3> points;
        for (const auto &p : detected)
            for (const auto &v : p.vertices)
                points.push_back(v);

        EvaluationMetrics m;
        m.detections = points.size();
        m.truths = truth.size();
        m.ghost_flags.assign(points.size(), true);

        std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t t = 0; t < truth.size(); ++t)
            {
                const double d = distance(points[i], truth[t]);
                if (d <= match_radius)
                {
                    pairs.emplace_back(d, i, t);
                    m.ghost_flags[i] = false;
                }
            }
        std::sort(pairs.begin(), pairs.end());
        std::vector<bool> point_used(points.size(), false), truth_used(truth.size(), false);
        double sq = 0.0;
        for (const auto &[d, i, t] : pairs)
        {
            if (point_used[i] || truth_used[t])
                continue;
            point_used[i] = truth_used[t] = true;
            ++m.true_positives;
            sq += d * d;
        }
        for (std::size_t i = 0; i < points.size(); ++i)
        {
            if (m.ghost_flags[i])
                ++m.ghosts;
            else if (!point_used[i])
                ++m.duplicates;
        }
        m.rmse = m.true_positives ? std::sqrt(sq / (double)m.true_positives) : 0.0;
        return m;
    }

    EvaluationMetrics evaluate(const EstimateReport &report, std::span<const Scatterer> truth, double match_radius)
    {
        std::vector<Vec3> pts;
        for (const auto &s : truth)
            pts.push_back(s.position);
        return evaluate(report.detected, pts, match_radius);
    }

    std::string metrics_json(const EvaluationMetrics &m, double match_radius)
    {
        detail::json j;
        j["match_radius_m"] = match_radius;
        j["detections"] = m.detections;
        j["truths"] = m.truths;
        j["true_positives"] = m.true_positives;
        j["ghosts"] = m.ghosts;
        j["duplicates"] = m.duplicates;
        j["rmse_m"] = m.rmse;
        j["ghost_flags"] = m.ghost_flags;
        return detail::dump(j);
    }

    namespace
    {
        void put_number(std::string &out, double v)
        {
            char buf[64];
            auto res = std::to_chars(buf, buf + sizeof buf, v);
            out.append(buf, res.ptr);
        }

        std::vector<std::string_view> split(std::string_view line, char sep)
        {
            std::vector<std::string_view> out;
            std::size_t start = 0;
            for (;;)
            {
                const auto pos = line.find(sep, start);
                out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
                if (pos == std::string_view::npos)
                    return out;
                start = pos + 1;
            }
        }

        double parse_number(std::string_view s, std::size_t row, const char *column)
        {
            double v = 0.0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw ParseError("estimates CSV row " + std::to_string(row) + ": bad value in column '" + column + "'");
            return v;
        }

        constexpr std::string_view kCsvHeader = "path_id,bounce,x_m,y_m,z_m,x2_m,y2_m,z2_m,amp_re,amp_im,velocity_mps,energy";
    }

    std::string estimates_csv(std::span<const DetectedPath> detected)
    {
        std::string out(kCsvHeader);
        out += '\n';
        for (std::size_t i = 0; i < detected.size(); ++i)
        {
            const auto &p = detected[i];
            out += std::to_string(i);
            out += ',';
            out += std::to_string(p.bounce_order);
            for (std::size_t k = 0; k < 2; ++k)
            {
                for (int a = 0; a < 3; ++a)
                {
                    out += ',';
                    if (k < p.vertices.size())
                        put_number(out, a == 0 ? p.vertices[k].x : a == 1 ? p.vertices[k].y : p.vertices[k].z);
                }
            }
            for (double v : {p.amplitude.real(), p.amplitude.imag(), p.velocity, p.energy})
            {
                out += ',';
                put_number(out, v);
            }
            out += '\n';
        }
        return out;
    }

    std::vector<DetectedPath> parse_estimates_csv(std::string_view text)
    {
        std::vector<std::string_view> lines;
        for (auto l : split(text, '\n'))
        {
            if (!l.empty() && l.back() == '\r')
                l.remove_suffix(1);
            lines.push_back(l);
        }
        while (!lines.empty() && lines.back().empty())
            lines.pop_back();
        if (lines.empty() || lines[0] != kCsvHeader)
            throw ParseError("estimates CSV: missing or unexpected header row");

        static const char *names[] = {"path_id", "bounce", "x_m", "y_m", "z_m", "x2_m", "y2_m", "z2_m", "amp_re", "amp_im", "velocity_mps", "energy"};
        std::vector<DetectedPath> out;
        for (std::size_t row = 1; row < lines.size(); ++row)
        {
            const auto f = split(lines[row], ',');
            if (f.size() != 12)
                throw ParseError("estimates CSV row " + std::to_string(row) + ": expected 12 columns, found " + std::to_string(f.size()));
            DetectedPath p;
            const double bounce = parse_number(f[1], row, names[1]);
            if (bounce != 1.0 && bounce != 2.0)
                throw ParseError("estimates CSV row " + std::to_string(row) + ": bounce must be 1 or 2");
            p.bounce_order = (std::size_t)bounce;
            for (std::size_t k = 0; k < p.bounce_order; ++k)
                p.vertices.push_back({parse_number(f[2 + 3 * k], row, names[2 + 3 * k]),
                                      parse_number(f[3 + 3 * k], row, names[3 + 3 * k]),
                                      parse_number(f[4 + 3 * k], row, names[4 + 3 * k])});
            if (p.bounce_order == 1 && !(f[5].empty() && f[6].empty() && f[7].empty()))
                throw ParseError("estimates CSV row " + std::to_string(row) + ": second vertex must be blank for bounce 1");
            p.amplitude = {parse_number(f[8], row, names[8]), parse_number(f[9], row, names[9])};
            p.velocity = parse_number(f[10], row, names[10]);
            p.energy = parse_number(f[11], row, names[11]);
            out.push_back(std::move(p));
        }
        return out;
    }

    std::string report_json(const EstimateReport &report, const EstimatorConfig &config)
    {
        using detail::json;
        json j;
        j["kind"] = report.baseline ? "one_bounce_baseline" : "gm_sage";
        j["iterations"] = report.iterations;
        j["detections"] = report.detected.size();
        j["residual_trace"] = report.residual_trace;
        j["residual_energy"] = squared_norm(report.residual_channel);
        json cfg;
        cfg["K_max"] = config.K_max;
        cfg["max_paths"] = config.max_paths;
        cfg["paths_per_iter"] = config.paths_per_iter;
        cfg["gamma"] = config.gamma;
        cfg["outer_iters"] = config.outer_iters;
        cfg["eps"] = config.eps;
        cfg["refine_cycles"] = config.refine_cycles;
        cfg["refine_radius"] = config.refine_radius;
        cfg["coarse_stride"] = config.coarse_stride;
        cfg["noise_floor"] = config.noise_floor;
        cfg["doppler_grid"] = config.doppler_grid;
        j["estimator"] = cfg;
        return detail::dump(j);
    }
}
