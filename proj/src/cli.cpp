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

#include "nfmb/cli.hpp"
#include "nfmb/detail/json_fields.hpp"
#include "nfmb/errors.hpp"
#include "nfmb/io.hpp"
#include "nfmb/scene.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace nfmb
{
    using detail::json;

    void RunConfig::validate() const
    {
        waveform.validate();
        estimator.validate();
        if (!(grid_resolution > 0.0) || !std::isfinite(grid_resolution))
            throw ParseError("field 'grid.resolution' must be positive");
        if (grid_bounds)
            grid_bounds->validate();
        if (!(min_separation >= 0.0))
            throw ParseError("field 'edges.min_separation' must be non-negative");
        if (max_delay && !(*max_delay > 0.0))
            throw ParseError("field 'edges.max_delay' must be positive");
        if (min_excess && !(*min_excess >= 0.0 && std::isfinite(*min_excess)))
            throw ParseError("field 'edges.min_excess' must be non-negative");
        if (snr_db && !std::isfinite(*snr_db))
            throw ParseError("field 'snr_db' must be finite or null");
        if (snr_db && !seed)
            throw ParseError("field 'seed' is required when snr_db enables noise");
        if (max_bounce < 1 || max_bounce > 3)
            throw ParseError("field 'max_bounce' must be 1, 2 or 3");
        if (wall_bounces > 3)
            throw ParseError("field 'wall_bounces' must be at most 3");
        if (!(match_radius > 0.0))
            throw ParseError("field 'match_radius' must be positive");
    }

    namespace
    {
        std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p)
        {
            std::filesystem::path path(p);
            return path.is_absolute() || base.empty() ? path : base / path;
        }

        std::string get_string(const json &j, const std::string &key, const std::string &ctx)
        {
            const json &v = detail::require(j, key, ctx);
            if (!v.is_string())
                throw ParseError("field '" + detail::join_field(ctx, key) + "' must be a string");
            return v.get<std::string>();
        }

        void read_estimator(const json &j, EstimatorConfig &e)
        {
            const std::string ctx = "estimator";
            if (!j.is_object())
                throw ParseError("field 'estimator' must be an object");
            for (auto it = j.begin(); it != j.end(); ++it)
            {
                const std::string &k = it.key();
                if (k == "K_max")
                    e.K_max = detail::get_count(j, k, ctx);
                else if (k == "max_paths")
                    e.max_paths = detail::get_count(j, k, ctx);
                else if (k == "paths_per_iter")
                    e.paths_per_iter = detail::get_count(j, k, ctx);
                else if (k == "gamma")
                    e.gamma = detail::get_double(j, k, ctx);
                else if (k == "outer_iters")
                    e.outer_iters = detail::get_count(j, k, ctx);
                else if (k == "eps")
                    e.eps = detail::get_double(j, k, ctx);
                else if (k == "refine_cycles")
                    e.refine_cycles = detail::get_count(j, k, ctx);
                else if (k == "refine_radius")
                    e.refine_radius = detail::get_count(j, k, ctx);
                else if (k == "coarse_stride")
                    e.coarse_stride = detail::get_count(j, k, ctx);
                else if (k == "noise_floor")
                    e.noise_floor = detail::get_double(j, k, ctx);
                else if (k == "baseline_path_factor")
                    e.baseline_path_factor = detail::get_count(j, k, ctx);
                else if (k == "doppler_grid")
                {
                    if (!it->is_array())
                        throw ParseError("field 'estimator.doppler_grid' must be an array of numbers");
                    e.doppler_grid.clear();
                    for (const auto &v : *it)
                    {
                        if (!v.is_number())
                            throw ParseError("field 'estimator.doppler_grid' must be an array of numbers");
                        e.doppler_grid.push_back(v.get<double>());
                    }
                }
                else
                    throw ParseError("unknown field 'estimator." + k + "'");
            }
            try
            {
                e.validate();
            }
            catch (const std::invalid_argument &ex)
            {
                throw ParseError(std::string("field ") + ex.what());
            }
        }
    }

    RunConfig parse_run_config(std::string_view text, const std::filesystem::path &base_dir)
    {
        const json j = detail::parse_json(text, "run config");
        if (!j.is_object())
            throw ParseError("run config must be a JSON object");
        RunConfig c;
        for (auto it = j.begin(); it != j.end(); ++it)
        {
            const std::string &k = it.key();
            if (k == "scene")
                c.scene = resolve(base_dir, get_string(j, k, ""));
            else if (k == "waveform")
                c.waveform = detail::waveform_from(*it, "waveform");
            else if (k == "grid")
            {
                if (it->contains("min") || it->contains("max"))
                    c.grid_bounds = Box{detail::vec3_from(detail::require(*it, "min", "grid"), "grid.min"),
                                        detail::vec3_from(detail::require(*it, "max", "grid"), "grid.max")};
                if (it->contains("resolution"))
                    c.grid_resolution = detail::get_double(*it, "resolution", "grid");
            }
            else if (k == "edges")
            {
                if (it->contains("min_separation"))
                    c.min_separation = detail::get_double(*it, "min_separation", "edges");
                if (it->contains("max_delay") && !(*it)["max_delay"].is_null())
                    c.max_delay = detail::get_double(*it, "max_delay", "edges");
                if (it->contains("min_excess") && !(*it)["min_excess"].is_null())
                    c.min_excess = detail::get_double(*it, "min_excess", "edges");
            }
            else if (k == "estimator")
                read_estimator(*it, c.estimator);
            else if (k == "snr_db")
            {
                if (!it->is_null())
                    c.snr_db = detail::get_double(j, k, "");
            }
            else if (k == "seed")
            {
                if (!it->is_null())
                {
                    if (!it->is_number_unsigned())
                        throw ParseError("field 'seed' must be a non-negative integer");
                    c.seed = it->get<std::uint64_t>();
                }
            }
            else if (k == "max_bounce")
                c.max_bounce = detail::get_count(j, k, "");
            else if (k == "wall_bounces")
                c.wall_bounces = detail::get_count(j, k, "");
            else if (k == "match_radius")
                c.match_radius = detail::get_double(j, k, "");
            else if (k == "outputs")
            {
                const json &o = *it;
                if (!o.is_object())
                    throw ParseError("field 'outputs' must be an object");
                for (auto ot = o.begin(); ot != o.end(); ++ot)
                {
                    const auto p = resolve(base_dir, get_string(o, ot.key(), "outputs"));
                    if (ot.key() == "tensor")
                        c.tensor = p;
                    else if (ot.key() == "estimates")
                        c.estimates = p;
                    else if (ot.key() == "report")
                        c.report = p;
                    else if (ot.key() == "metrics")
                        c.metrics = p;
                    else
                        throw ParseError("unknown field 'outputs." + ot.key() + "'");
                }
            }
            else
                throw ParseError("unknown field '" + k + "'");
        }
        c.validate();
        return c;
    }

    CandidateGrid run_grid(const RunConfig &config, const SceneConfig &scene)
    {
        Box b;
        if (config.grid_bounds)
            b = *config.grid_bounds;
        else
        {
            const double z = reference_position(scene.tx_array).z;
            b = {{scene.bounds.min.x, scene.bounds.min.y, z}, {scene.bounds.max.x, scene.bounds.max.y, z}};
        }
        return build_grid(b, config.grid_resolution);
    }

    namespace
    {
        struct Options
        {
            std::string config, scene, tensor, estimates, report, metrics, out;
            std::optional<double> snr_db, resolution, gamma, radius, max_delay, min_sep, min_excess;
            std::optional<std::uint64_t> seed;
            std::optional<std::size_t> max_paths, outer_iters, max_bounce, wall_bounces, k_max;
            bool noiseless = false;
        };

        RunConfig load_config(const Options &o)
        {
            RunConfig c;
            if (!o.config.empty())
            {
                const std::filesystem::path p(o.config);
                c = parse_run_config(read_file(p), p.parent_path());
            }
            if (!o.scene.empty())
                c.scene = o.scene;
            if (!o.tensor.empty())
                c.tensor = o.tensor;
            if (!o.estimates.empty())
                c.estimates = o.estimates;
            if (!o.report.empty())
                c.report = o.report;
            if (!o.metrics.empty())
                c.metrics = o.metrics;
            if (o.snr_db)
                c.snr_db = o.snr_db;
            if (o.noiseless)
                c.snr_db.reset();
            if (o.seed)
                c.seed = o.seed;
            if (o.resolution)
                c.grid_resolution = *o.resolution;
            if (o.gamma)
                c.estimator.gamma = *o.gamma;
            if (o.radius)
                c.match_radius = *o.radius;
            if (o.max_delay)
                c.max_delay = o.max_delay;
            if (o.min_sep)
                c.min_separation = *o.min_sep;
            if (o.min_excess)
                c.min_excess = o.min_excess;
            if (o.max_paths)
                c.estimator.max_paths = *o.max_paths;
            if (o.outer_iters)
                c.estimator.outer_iters = *o.outer_iters;
            if (o.max_bounce)
                c.max_bounce = *o.max_bounce;
            if (o.wall_bounces)
                c.wall_bounces = *o.wall_bounces;
            if (o.k_max)
                c.estimator.K_max = *o.k_max;
            try
            {
                c.validate();
            }
            catch (const std::invalid_argument &e)
            {
                throw ParseError(e.what());
            }
            if (c.scene.empty())
                throw ParseError("missing required field 'scene'");
            return c;
        }

        SensingSetup scene_setup(const SceneConfig &scene, const WaveformSpec &w)
        {
            SensingSetup s;
            s.tx = scene.tx_array;
            s.rx = scene.rx_array;
            s.waveform = w;
            return s;
        }

        int cmd_scene_demo(const Options &o, std::ostream &out)
        {
            const std::filesystem::path path = o.out.empty() ? std::filesystem::path("scene.json") : std::filesystem::path(o.out);
            save_scene(path, demo_office_scene());
            out << "wrote " << path.string() << "\n";
            return kExitOk;
        }

        int cmd_synth(const Options &o, std::ostream &out)
        {
            RunConfig c = load_config(o);
            if (!o.out.empty())
                c.tensor = o.out;
            const SceneConfig scene = load_scene(c.scene);
            const SensingSetup setup = scene_setup(scene, c.waveform);
            setup.validate();

            auto truth = scatterer_chain_paths(scene, c.max_bounce);
            if (c.wall_bounces > 0)
            {
                auto walls = image_method_paths(scene, c.wall_bounces);
                truth.insert(truth.end(), walls.begin(), walls.end());
            }
            const auto paths = to_synth_paths(truth);
            std::optional<NoiseSpec> noise;
            if (c.snr_db)
                noise = NoiseSpec{*c.snr_db, *c.seed};
            ChannelTensor z = synthesize_channel(paths, setup, noise);
            z.meta.tx_id = "tx";
            z.meta.rx_id = "rx";
            save_tensor(c.tensor, z);
            out << "wrote " << c.tensor.string() << " (" << truth.size() << " paths, energy " << z.squared_norm() << ")\n";
            return kExitOk;
        }

        struct Estimation
        {
            RunConfig config;
            SceneConfig scene;
            ChannelTensor z;
            std::shared_ptr<const Dictionary> d1, d2;
        };

        Estimation prepare(const Options &o)
        {
            Estimation e;
            e.config = load_config(o);
            if (!std::filesystem::exists(e.config.tensor))
                throw std::runtime_error("Tensor file '" + e.config.tensor.string() + "' does not exist.");
            e.scene = load_scene(e.config.scene);
            e.z = load_tensor(e.config.tensor);
            // The sidecar describes how the tensor was measured; it outranks the config
            const auto side = sidecar_path(e.config.tensor);
            const WaveformSpec w = std::filesystem::exists(side) ? e.z.meta.waveform : e.config.waveform;
            const SensingSetup setup = scene_setup(e.scene, w);
            e.z.check_shape(setup);

            EdgeConstraints ec;
            ec.min_separation = e.config.min_separation;
            if (e.config.max_delay)
                ec.max_delay = *e.config.max_delay;
            ec.min_excess = e.config.min_excess.value_or(0.1 * e.config.grid_resolution);
            ec.tx_ref = reference_position(setup.tx);
            ec.rx_ref = reference_position(setup.rx);
            CandidateGrid grid = run_grid(e.config, e.scene);
            std::shared_ptr<const PropagationGraph> graph;
            if (e.config.estimator.K_max >= 2)
                graph = std::make_shared<const PropagationGraph>(build_graph(std::move(grid), ec));
            else
                graph = std::make_shared<const PropagationGraph>(PropagationGraph{std::move(grid), {}, ec});
            e.d1 = std::make_shared<const Dictionary>(graph, 1, setup);
            if (e.config.estimator.K_max >= 2)
                e.d2 = std::make_shared<const Dictionary>(graph, 2, setup);
            return e;
        }

        void write_outputs(const EstimateReport &r, const RunConfig &c, std::ostream &out)
        {
            write_file_atomic(c.estimates, estimates_csv(r.detected));
            write_file_atomic(c.report, report_json(r, c.estimator));
            out << "wrote " << c.estimates.string() << " (" << r.detected.size() << " paths, " << r.iterations
                << " iterations)\n";
        }

        int cmd_estimate(const Options &o, std::ostream &out)
        {
            Estimation e = prepare(o);
            if (e.config.estimates.empty())
                e.config.estimates = "estimates.csv";
            if (e.config.report.empty())
                e.config.report = "report.json";
            const EstimateReport r = gm_sage(e.z, *e.d1, e.d2.get(), e.config.estimator);
            write_outputs(r, e.config, out);
            return kExitOk;
        }

        int cmd_baseline(const Options &o, std::ostream &out)
        {
            Estimation e = prepare(o);
            if (e.config.estimates.empty())
                e.config.estimates = "baseline.csv";
            if (e.config.report.empty())
                e.config.report = "baseline_report.json";
            std::optional<double> target;
            if (e.d2)
            {
                const EstimateReport full = gm_sage(e.z, *e.d1, e.d2.get(), e.config.estimator);
                target = squared_norm(full.residual_channel);
            }
            const EstimateReport r = one_bounce_baseline(e.z, *e.d1, e.config.estimator, target);
            write_outputs(r, e.config, out);
            return kExitOk;
        }

        int cmd_evaluate(const Options &o, std::ostream &out)
        {
            RunConfig c = load_config(o);
            if (c.estimates.empty())
                throw ParseError("missing required field 'estimates'");
            const SceneConfig scene = load_scene(c.scene);
            const auto detected = parse_estimates_csv(read_file(c.estimates));
            std::vector<Vec3> truth;
            for (const auto &s : scene.scatterers)
                truth.push_back(s.position);
            const EvaluationMetrics m = evaluate(detected, truth, c.match_radius);
            const std::filesystem::path path = o.out.empty() ? c.metrics : std::filesystem::path(o.out);
            write_file_atomic(path, metrics_json(m, c.match_radius));
            out << "true positives " << m.true_positives << ", ghosts " << m.ghosts << ", rmse " << m.rmse << " m\n";
            return kExitOk;
        }
    }

    int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"Near-field multi-bounce channel synthesis and scatterer localization", "nfmb"};
        app.require_subcommand(1);
        Options o;

        auto common = [&](CLI::App *s) {
            s->add_option("-c,--config", o.config, "Run config JSON");
            s->add_option("--scene", o.scene, "Scene JSON");
            s->add_option("--tensor", o.tensor, "Channel tensor file");
        };
        auto estimator_flags = [&](CLI::App *s) {
            s->add_option("--estimates", o.estimates, "Estimates CSV output");
            s->add_option("--report", o.report, "Report JSON output");
            s->add_option("--resolution", o.resolution, "Grid resolution (m)");
            s->add_option("--gamma", o.gamma, "Relative detection threshold");
            s->add_option("--max-paths", o.max_paths, "Paths per order and pass");
            s->add_option("--outer-iters", o.outer_iters, "Outer iterations");
            s->add_option("--k-max", o.k_max, "Highest bounce order modelled (1 or 2)");
            s->add_option("--max-delay", o.max_delay, "Longest two-bounce delay in the dictionary (s)");
            s->add_option("--min-separation", o.min_sep, "Smallest two-bounce hop (m)");
            s->add_option("--min-excess", o.min_excess, "Smallest extra length of a two-bounce path over its one-bounce shortcuts (m)");
        };

        auto *demo = app.add_subcommand("scene-demo", "Write the demo office scene");
        demo->add_option("-o,--out", o.out, "Scene JSON output")->required();

        auto *synth = app.add_subcommand("synth", "Synthesize a channel tensor from a scene");
        common(synth);
        synth->add_option("-o,--out", o.out, "Tensor output (overrides the config)");
        synth->add_option("--snr-db", o.snr_db, "Per-entry SNR in dB");
        synth->add_flag("--noiseless", o.noiseless, "Disable noise");
        synth->add_option("--seed", o.seed, "Noise seed");
        synth->add_option("--max-bounce", o.max_bounce, "Longest scatterer chain");
        synth->add_option("--wall-bounces", o.wall_bounces, "Longest specular wall path (0 = none)");

        auto *estimate = app.add_subcommand("estimate", "Run the multi-order estimator");
        common(estimate);
        estimator_flags(estimate);

        auto *baseline = app.add_subcommand("baseline", "Run the one-bounce-only baseline");
        common(baseline);
        estimator_flags(baseline);

        auto *eval = app.add_subcommand("evaluate", "Score estimates against the scene scatterers");
        eval->add_option("-c,--config", o.config, "Run config JSON");
        eval->add_option("--scene", o.scene, "Scene JSON");
        eval->add_option("--estimates", o.estimates, "Estimates CSV");
        eval->add_option("--radius", o.radius, "Match radius (m)");
        eval->add_option("-o,--out", o.out, "Metrics JSON output");

        std::vector<std::string> argv{"nfmb"};
        argv.insert(argv.end(), args.begin(), args.end());
        std::vector<const char *> cargv;
        for (const auto &a : argv)
            cargv.push_back(a.c_str());
        try
        {
            app.parse((int)cargv.size(), cargv.data());
        }
        catch (const CLI::CallForHelp &)
        {
            out << app.help();
            return kExitOk;
        }
        catch (const CLI::ParseError &e)
        {
            err << "error: " << e.what() << "\n";
            return kExitError;
        }

        try
        {
            if (demo->parsed())
                return cmd_scene_demo(o, out);
            if (synth->parsed())
                return cmd_synth(o, out);
            if (estimate->parsed())
                return cmd_estimate(o, out);
            if (baseline->parsed())
                return cmd_baseline(o, out);
            return cmd_evaluate(o, out);
        }
        catch (const DimensionMismatch &e)
        {
            err << "error: dimension mismatch: " << e.what() << "\n";
            return kExitDimensionMismatch;
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << "\n";
            return kExitError;
        }
    }
}
