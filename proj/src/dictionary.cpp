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

#include "nfmb/dictionary.hpp"
#include "nfmb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nfmb
{
    namespace
    {
        // Plain product; std::complex operator* guards inf/nan through a library call
        inline cplx mul(cplx a, cplx b)
        {
            return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
        }

        std::size_t axis_count(double lo, double hi, double resolution)
        {
            return (std::size_t)std::floor((hi - lo) / resolution + 1e-9) + 1;
        }
    }

    std::array<std::size_t, 3> CandidateGrid::cell(std::size_t vertex) const
    {
        if (vertex >= size())
            throw std::out_of_range("Grid vertex " + std::to_string(vertex) + " out of range.");
        return {vertex % counts[0], (vertex / counts[0]) % counts[1], vertex / (counts[0] * counts[1])};
    }

    std::size_t CandidateGrid::nearest(const Vec3 &p) const
    {
        const double lo[3] = {bounds.min.x, bounds.min.y, bounds.min.z};
        const double v[3] = {p.x, p.y, p.z};
        std::size_t idx[3];
        for (int a = 0; a < 3; ++a)
        {
            const double k = std::round((v[a] - lo[a]) / resolution);
            idx[a] = k <= 0.0 ? 0 : std::min<std::size_t>((std::size_t)k, counts[a] - 1);
        }
        return index(idx[0], idx[1], idx[2]);
    }

    CandidateGrid build_grid(const Box &bounds, double resolution, std::size_t max_vertices)
    {
        bounds.validate();
        if (!(resolution > 0.0) || !std::isfinite(resolution))
            throw std::invalid_argument("Grid resolution must be positive and finite.");
        CandidateGrid g;
        g.bounds = bounds;
        g.resolution = resolution;
        g.counts = {axis_count(bounds.min.x, bounds.max.x, resolution),
                    axis_count(bounds.min.y, bounds.max.y, resolution),
                    axis_count(bounds.min.z, bounds.max.z, resolution)};
        const double total = (double)g.counts[0] * (double)g.counts[1] * (double)g.counts[2];
        if (total > (double)max_vertices)
            throw CapacityError("Candidate grid would hold " + std::to_string((unsigned long long)total) +
                                " vertices, above the cap of " + std::to_string(max_vertices) + ".");
        g.vertices.reserve((std::size_t)total);
        for (std::size_t iz = 0; iz < g.counts[2]; ++iz)
            for (std::size_t iy = 0; iy < g.counts[1]; ++iy)
                for (std::size_t ix = 0; ix < g.counts[0]; ++ix)
                    g.vertices.push_back({bounds.min.x + (double)ix * resolution,
                                          bounds.min.y + (double)iy * resolution,
                                          bounds.min.z + (double)iz * resolution});
        return g;
    }

    std::optional<std::size_t> PropagationGraph::find_edge(std::size_t v1, std::size_t v2) const
    {
        const std::pair<std::uint32_t, std::uint32_t> key{(std::uint32_t)v1, (std::uint32_t)v2};
        auto it = std::lower_bound(edges.begin(), edges.end(), key);
        if (it == edges.end() || *it != key)
            return std::nullopt;
        return (std::size_t)(it - edges.begin());
    }

    PropagationGraph build_graph(CandidateGrid grid, const EdgeConstraints &constraints, std::size_t max_edges)
    {
        if (!(constraints.min_separation >= 0.0))
            throw std::invalid_argument("Minimum edge separation must be non-negative.");
        if (!(constraints.max_delay > 0.0))
            throw std::invalid_argument("Maximum edge delay must be positive.");
        if (!(constraints.min_excess >= 0.0) || !std::isfinite(constraints.min_excess))
            throw std::invalid_argument("Minimum edge excess length must be non-negative.");
        if (grid.size() > (std::size_t)UINT32_MAX)
            throw CapacityError("Grid too large for edge indexing.");

        PropagationGraph g;
        g.constraints = constraints;
        const auto &V = grid.vertices;
        const bool delay_rule = std::isfinite(constraints.max_delay);
        const double max_length = constraints.max_delay * kSpeedOfLight;
        const bool excess_rule = constraints.min_excess > 0.0;
        std::vector<double> to_tx, to_rx;
        if (delay_rule || excess_rule)
        {
            to_tx.reserve(V.size());
            to_rx.reserve(V.size());
            for (const auto &v : V)
            {
                to_tx.push_back(distance(constraints.tx_ref, v));
                to_rx.push_back(distance(v, constraints.rx_ref));
            }
        }
        for (std::size_t a = 0; a < V.size(); ++a)
        {
            if (delay_rule && to_tx[a] > max_length)
                continue;
            for (std::size_t b = 0; b < V.size(); ++b)
            {
                if (a == b)
                    continue;
                const double sep = distance(V[a], V[b]);
                if (sep < constraints.min_separation || sep <= kCoincidenceTolerance)
                    continue;
                if (delay_rule && (to_tx[a] + sep + to_rx[b]) / kSpeedOfLight > constraints.max_delay)
                    continue;
                // Either vertex on the straight line of the other's one-bounce path
                if (excess_rule && (to_tx[a] + sep - to_tx[b] < constraints.min_excess ||
                                    sep + to_rx[b] - to_rx[a] < constraints.min_excess))
                    continue;
                if (g.edges.size() >= max_edges)
                    throw CapacityError("Propagation graph exceeds the edge cap of " + std::to_string(max_edges) + ".");
                g.edges.emplace_back((std::uint32_t)a, (std::uint32_t)b);
            }
        }
        g.grid = std::move(grid);
        return g;
    }

    DictionaryAtom atom(std::span<const Vec3> vertex_positions, const SensingSetup &setup)
    {
        if (vertex_positions.empty() || vertex_positions.size() > 2)
            throw std::invalid_argument("Dictionary atoms take one or two vertices.");
        if (vertex_positions.size() == 2 && distance(vertex_positions[0], vertex_positions[1]) <= kCoincidenceTolerance)
            throw std::invalid_argument("Two-bounce atom repeats the same vertex (self-loop).");
        const auto path = path_geometry(reference_position(setup.tx), reference_position(setup.rx), vertex_positions);
        ChannelTensor s = path_signature(path, setup, 0.0);
        const double n = std::sqrt(s.squared_norm());
        if (!(n > 0.0))
            throw DegenerateGeometry("Atom signature has zero energy.");
        s *= cplx(1.0 / n, 0.0);
        DictionaryAtom out;
        out.bounce_order = vertex_positions.size();
        out.signature = std::move(s.vector());
        return out;
    }

    FoldedResidual fold_frames(std::span<const cplx> residual, std::size_t rows, std::size_t P, std::size_t Q)
    {
        if (residual.size() != rows * P * Q)
            throw DimensionMismatch("Residual size does not match MN x PQ.");
        FoldedResidual f;
        f.rows = rows;
        f.P = P;
        f.re.assign(rows * P, 0.0);
        f.im.assign(rows * P, 0.0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t q = 0; q < Q; ++q)
                for (std::size_t p = 0; p < P; ++p)
                {
                    const cplx z = residual[r * P * Q + q * P + p];
                    f.re[p * rows + r] += z.real();
                    f.im[p * rows + r] += z.imag();
                }
        return f;
    }

    struct Dictionary::Scratch
    {
        std::vector<double> amp, wr, wi, sr, si;
        std::vector<cplx> base;
    };

    Dictionary::Dictionary(std::shared_ptr<const PropagationGraph> graph, std::size_t order, SensingSetup setup)
        : graph_(std::move(graph)), order_(order), setup_(std::move(setup))
    {
        if (!graph_)
            throw std::invalid_argument("Dictionary needs a propagation graph.");
        if (order_ != 1 && order_ != 2)
            throw std::invalid_argument("Dictionary order must be 1 or 2.");
        setup_.validate();
        M_ = setup_.M();
        N_ = setup_.N();

        const auto &V = graph_->grid.vertices;
        const Vec3 tx_ref = reference_position(setup_.tx);
        const Vec3 rx_ref = reference_position(setup_.rx);
        const auto tx_off = element_offsets(setup_.tx);
        const auto rx_off = element_offsets(setup_.rx);
        const double f0 = setup_.waveform.carrier_phase ? setup_.waveform.f_c : 0.0;
        const double fs = setup_.waveform.f_s;
        const double fc = setup_.waveform.f_c;

        d_tx_ref_.resize(V.size());
        d_rx_ref_.resize(V.size());
        d_tx_.assign(V.size() * M_, 0.0);
        d_rx_.assign(V.size() * N_, 0.0);
        g_tx_.assign(V.size() * M_, 0.0);
        g_rx_.assign(V.size() * N_, 0.0);
        c_tx_.assign(V.size() * M_, cplx{});
        s_tx_.assign(V.size() * M_, cplx{});
        c_rx_.assign(V.size() * N_, cplx{});
        s_rx_.assign(V.size() * N_, cplx{});

        auto fill_side = [&](std::size_t v, const Vec3 &ref, const std::vector<Vec3> &offsets, double &d_ref,
                             double *d, double *gain, cplx *c, cplx *s) {
            const Vec3 rel = V[v] - ref;
            d_ref = norm(rel);
            // Vertices on top of an array keep zero gain; their atoms correlate to zero
            if (!(d_ref > kCoincidenceTolerance))
                return;
            const Vec3 omega = rel / d_ref;
            for (std::size_t i = 0; i < offsets.size(); ++i)
            {
                const double de = per_element_distance(d_ref, omega, offsets[i]);
                if (!(de > kCoincidenceTolerance))
                    continue;
                d[i] = de;
                gain[i] = setup_.pattern.is_isotropic() ? 1.0 : setup_.pattern(fc, per_element_orientation(d_ref, omega, offsets[i]));
                c[i] = std::polar(1.0, kTwoPi * f0 * de / kSpeedOfLight);
                s[i] = std::polar(1.0, kTwoPi * fs * de / kSpeedOfLight);
            }
        };
        for (std::size_t v = 0; v < V.size(); ++v)
        {
            fill_side(v, tx_ref, tx_off, d_tx_ref_[v], &d_tx_[v * M_], &g_tx_[v * M_], &c_tx_[v * M_], &s_tx_[v * M_]);
            fill_side(v, rx_ref, rx_off, d_rx_ref_[v], &d_rx_[v * N_], &g_rx_[v * N_], &c_rx_[v * N_], &s_rx_[v * N_]);
        }

        // Path-length envelope over every element pair with non-zero gain
        double tx_lo = INFINITY, tx_hi = 0.0, rx_lo = INFINITY, rx_hi = 0.0;
        for (std::size_t i = 0; i < d_tx_.size(); ++i)
            if (g_tx_[i] != 0.0)
                tx_lo = std::min(tx_lo, d_tx_[i]), tx_hi = std::max(tx_hi, d_tx_[i]);
        for (std::size_t i = 0; i < d_rx_.size(); ++i)
            if (g_rx_[i] != 0.0)
                rx_lo = std::min(rx_lo, d_rx_[i]), rx_hi = std::max(rx_hi, d_rx_[i]);
        if (std::isfinite(tx_lo) && std::isfinite(rx_lo))
        {
            Vec3 lo = V.front(), hi = V.front();
            for (const auto &p : V)
            {
                lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
                hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
            }
            L_min_ = tx_lo + rx_lo;
            L_max_ = tx_hi + rx_hi + (order_ == 2 ? norm(hi - lo) : 0.0);
        }
    }

    std::size_t Dictionary::size() const
    {
        return order_ == 1 ? graph_->grid.size() : graph_->edges.size();
    }

    std::vector<std::size_t> Dictionary::vertex_ids(std::size_t id) const
    {
        if (id >= size())
            throw std::out_of_range("Atom id " + std::to_string(id) + " out of range.");
        if (order_ == 1)
            return {id};
        const auto &e = graph_->edges[id];
        return {e.first, e.second};
    }

    std::vector<Vec3> Dictionary::vertex_positions(std::size_t id) const
    {
        std::vector<Vec3> out;
        for (auto v : vertex_ids(id))
            out.push_back(graph_->grid.vertices[v]);
        return out;
    }

    std::optional<std::size_t> Dictionary::find(std::span<const std::size_t> ids) const
    {
        if (ids.size() != order_)
            return std::nullopt;
        if (order_ == 1)
            return ids[0] < size() ? std::optional<std::size_t>(ids[0]) : std::nullopt;
        return graph_->find_edge(ids[0], ids[1]);
    }

    DictionaryAtom Dictionary::atom(std::size_t id) const
    {
        const auto pos = vertex_positions(id);
        DictionaryAtom a = nfmb::atom(pos, setup_);
        a.vertex_ids = vertex_ids(id);
        return a;
    }

    cplx Dictionary::correlate_pair(std::size_t v1, std::size_t v2, double mid, const FoldedResidual &r, Scratch &s) const
    {
        const std::size_t MN = M_ * N_;
        const std::size_t P = r.P;
        const double f0 = setup_.waveform.carrier_phase ? setup_.waveform.f_c : 0.0;
        const cplx mid_c = std::polar(1.0, kTwoPi * f0 * mid / kSpeedOfLight);
        const cplx mid_s = std::polar(1.0, kTwoPi * setup_.waveform.f_s * mid / kSpeedOfLight);
        const double L_ref = d_tx_ref_[v1] + mid + d_rx_ref_[v2];

        s.amp.resize(MN);
        s.wr.resize(MN);
        s.wi.resize(MN);
        s.sr.resize(MN);
        s.si.resize(MN);
        s.base.resize(MN);

        const double *dt = &d_tx_[v1 * M_];
        const double *dr = &d_rx_[v2 * N_];
        const double *gt = &g_tx_[v1 * M_];
        const double *gr = &g_rx_[v2 * N_];
        const cplx *ct = &c_tx_[v1 * M_];
        const cplx *st = &s_tx_[v1 * M_];
        const cplx *cr = &c_rx_[v2 * N_];
        const cplx *sr = &s_rx_[v2 * N_];

        double energy = 0.0;
        for (std::size_t n = 0; n < N_; ++n)
        {
            const cplx rc = mul(cr[n], mid_c);
            const cplx rs = mul(sr[n], mid_s);
            for (std::size_t m = 0; m < M_; ++m)
            {
                const std::size_t k = n * M_ + m;
                const double gain = gt[m] * gr[n];
                const double a = gain == 0.0 ? 0.0 : gain * L_ref / (dt[m] + mid + dr[n]);
                const cplx w = mul(st[m], rs);
                s.amp[k] = a;
                s.base[k] = mul(ct[m], rc);
                s.wr[k] = w.real();
                s.wi[k] = w.imag();
                energy += a * a;
            }
        }
        if (!(energy > 0.0))
            return {};

        // Horner over sub-bands: S = sum_p R_p w^p, evaluated for all element pairs at once
        double *__restrict Sr = s.sr.data();
        double *__restrict Si = s.si.data();
        const double *__restrict Wr = s.wr.data();
        const double *__restrict Wi = s.wi.data();
        const double *__restrict Rr = &r.re[(P - 1) * MN];
        const double *__restrict Ri = &r.im[(P - 1) * MN];
        for (std::size_t k = 0; k < MN; ++k)
        {
            Sr[k] = Rr[k];
            Si[k] = Ri[k];
        }
        for (std::size_t pp = P - 1; pp-- > 0;)
        {
            Rr = &r.re[pp * MN];
            Ri = &r.im[pp * MN];
            for (std::size_t k = 0; k < MN; ++k)
            {
                const double xr = Sr[k] * Wr[k] - Si[k] * Wi[k] + Rr[k];
                const double xi = Sr[k] * Wi[k] + Si[k] * Wr[k] + Ri[k];
                Sr[k] = xr;
                Si[k] = xi;
            }
        }
        double acc_r = 0.0, acc_i = 0.0;
        for (std::size_t k = 0; k < MN; ++k)
        {
            const cplx t = mul(mul(cplx(Sr[k], Si[k]), cplx(Wr[k], Wi[k])), s.base[k]) * s.amp[k];
            acc_r += t.real();
            acc_i += t.imag();
        }
        const double norm2 = energy * (double)P * (double)setup_.waveform.Q;
        return cplx(acc_r, acc_i) / std::sqrt(norm2);
    }

    cplx Dictionary::correlate(std::size_t id, const FoldedResidual &residual) const
    {
        if (residual.rows != M_ * N_ || residual.P != setup_.waveform.P)
            throw DimensionMismatch("Folded residual does not match the dictionary setup.");
        thread_local Scratch scratch;
        if (order_ == 1)
        {
            if (id >= size())
                throw std::out_of_range("Atom id out of range.");
            return correlate_pair(id, id, 0.0, residual, scratch);
        }
        const auto &e = graph_->edges.at(id);
        const double mid = distance(graph_->grid.vertices[e.first], graph_->grid.vertices[e.second]);
        return correlate_pair(e.first, e.second, mid, residual, scratch);
    }

    std::tuple<std::size_t, std::size_t, double> Dictionary::atom_vertices(std::size_t id) const
    {
        if (id >= size())
            throw std::out_of_range("Atom id out of range.");
        if (order_ == 1)
            return {id, id, 0.0};
        const auto &e = graph_->edges[id];
        return {e.first, e.second, distance(graph_->grid.vertices[e.first], graph_->grid.vertices[e.second])};
    }

    Dictionary::ScanTable Dictionary::scan_table(const FoldedResidual &r) const
    {
        if (r.rows != M_ * N_ || r.P != setup_.waveform.P)
            throw DimensionMismatch("Folded residual does not match the dictionary setup.");
        const std::size_t MN = r.rows;
        const std::size_t P = r.P;
        const double kappa = kTwoPi * setup_.waveform.f_s / kSpeedOfLight;
        ScanTable t;
        // 128 samples per wavelength of the highest sub-band
        t.h = kTwoPi / (kappa * (double)P) / 128.0;
        t.L0 = L_min_ - t.h;
        t.T = (std::size_t)std::ceil((L_max_ + t.h - t.L0) / t.h) + 2;
        t.g.assign(MN * t.T, cplx{});
        t.err.assign(MN, 0.0);

        // G_k(L) = sum_p R_{p,k} exp(j (p+1) kappa L); |lerp error| <= sqrt(2) h^2 / 8 max|G''|
        std::vector<cplx> w(t.T);
        for (std::size_t i = 0; i < t.T; ++i)
            w[i] = std::polar(1.0, kappa * (t.L0 + (double)i * t.h));
        for (std::size_t k = 0; k < MN; ++k)
        {
            double curv = 0.0;
            for (std::size_t p = 0; p < P; ++p)
            {
                const double kp = kappa * (double)(p + 1);
                curv += std::abs(cplx(r.re[p * MN + k], r.im[p * MN + k])) * kp * kp;
            }
            t.err[k] = std::sqrt(2.0) * t.h * t.h / 8.0 * curv;
            double peak = 0.0;
            for (std::size_t i = 0; i < t.T; ++i)
            {
                cplx acc(r.re[(P - 1) * MN + k], r.im[(P - 1) * MN + k]);
                for (std::size_t pp = P - 1; pp-- > 0;)
                    acc = mul(acc, w[i]) + cplx(r.re[pp * MN + k], r.im[pp * MN + k]);
                t.g[i * MN + k] = mul(acc, w[i]);
                peak = std::max(peak, std::abs(acc));
            }
            // Rounding slack on top of the analytic bound
            t.err[k] += 1e-9 * peak;
        }
        return t;
    }

    std::pair<cplx, double> Dictionary::screen(std::size_t id, const ScanTable &t) const
    {
        const auto [v1, v2, mid] = atom_vertices(id);
        const double f0 = setup_.waveform.carrier_phase ? setup_.waveform.f_c : 0.0;
        const cplx mid_c = std::polar(1.0, kTwoPi * f0 * mid / kSpeedOfLight);
        const double L_ref = d_tx_ref_[v1] + mid + d_rx_ref_[v2];
        const double *dt = &d_tx_[v1 * M_];
        const double *dr = &d_rx_[v2 * N_];
        const double *gt = &g_tx_[v1 * M_];
        const double *gr = &g_rx_[v2 * N_];
        const cplx *ct = &c_tx_[v1 * M_];
        const cplx *cr = &c_rx_[v2 * N_];
        const double inv_h = 1.0 / t.h;

        const std::size_t MN = M_ * N_;
        double energy = 0.0, bound = 0.0;
        double acc_r = 0.0, acc_i = 0.0;
        for (std::size_t n = 0; n < N_; ++n)
        {
            const cplx rc = mul(cr[n], mid_c);
            for (std::size_t m = 0; m < M_; ++m)
            {
                const double gain = gt[m] * gr[n];
                if (gain == 0.0)
                    continue;
                const std::size_t k = n * M_ + m;
                const double L = dt[m] + mid + dr[n];
                const double a = gain * L_ref / L;
                const double x = (L - t.L0) * inv_h;
                const std::size_t i = (std::size_t)x;
                if (!(x >= 0.0) || i + 1 >= t.T)
                    return {cplx{}, INFINITY};
                const double frac = x - (double)i;
                const cplx g0 = t.g[i * MN + k];
                const cplx G = g0 + (t.g[(i + 1) * MN + k] - g0) * frac;
                const cplx v = mul(G, mul(ct[m], rc)) * a;
                acc_r += v.real();
                acc_i += v.imag();
                energy += a * a;
                bound += a * t.err[k];
            }
        }
        if (!(energy > 0.0))
            return {cplx{}, 0.0};
        const double inv = 1.0 / std::sqrt(energy * (double)setup_.waveform.P * (double)setup_.waveform.Q);
        return {cplx(acc_r, acc_i) * inv, bound * inv};
    }

    std::vector<std::size_t> Dictionary::neighborhood(std::size_t id, std::size_t radius) const
    {
        const auto &grid = graph_->grid;
        const auto ids = vertex_ids(id);
        auto near_cells = [&](std::size_t v) {
            const auto c = grid.cell(v);
            std::vector<std::size_t> out;
            std::size_t lo[3], hi[3];
            for (int a = 0; a < 3; ++a)
            {
                lo[a] = c[a] >= radius ? c[a] - radius : 0;
                hi[a] = std::min(c[a] + radius, grid.counts[a] - 1);
            }
            for (std::size_t iz = lo[2]; iz <= hi[2]; ++iz)
                for (std::size_t iy = lo[1]; iy <= hi[1]; ++iy)
                    for (std::size_t ix = lo[0]; ix <= hi[0]; ++ix)
                        out.push_back(grid.index(ix, iy, iz));
            return out;
        };
        std::vector<std::size_t> out;
        if (order_ == 1)
            return near_cells(ids[0]);
        const auto a = near_cells(ids[0]);
        const auto b = near_cells(ids[1]);
        for (auto v1 : a)
            for (auto v2 : b)
                if (auto e = graph_->find_edge(v1, v2))
                    out.push_back(*e);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<std::size_t> Dictionary::coarse_subset(std::size_t stride) const
    {
        if (stride == 0)
            throw std::invalid_argument("Coarse stride must be positive.");
        const auto &grid = graph_->grid;
        auto on_lattice = [&](std::size_t v) {
            const auto c = grid.cell(v);
            return c[0] % stride == 0 && c[1] % stride == 0 && c[2] % stride == 0;
        };
        std::vector<std::size_t> out;
        if (order_ == 1)
        {
            for (std::size_t v = 0; v < grid.size(); ++v)
                if (on_lattice(v))
                    out.push_back(v);
            return out;
        }
        for (std::size_t i = 0; i < graph_->edges.size(); ++i)
            if (on_lattice(graph_->edges[i].first) && on_lattice(graph_->edges[i].second))
                out.push_back(i);
        return out;
    }

    AtomStream::AtomStream(std::shared_ptr<const Dictionary> dictionary) : dict_(std::move(dictionary))
    {
        if (!dict_)
            throw std::invalid_argument("Atom stream needs a dictionary.");
    }

    std::optional<DictionaryAtom> AtomStream::next()
    {
        if (cursor_ >= dict_->size())
            return std::nullopt;
        return dict_->atom(cursor_++);
    }

    std::vector<DictionaryAtom> AtomStream::materialize(std::size_t cap) const
    {
        if (dict_->size() > cap)
            throw CapacityError("Dictionary holds " + std::to_string(dict_->size()) + " atoms, above the materialization cap of " +
                                std::to_string(cap) + ".");
        std::vector<DictionaryAtom> out;
        out.reserve(dict_->size());
        for (std::size_t i = 0; i < dict_->size(); ++i)
            out.push_back(dict_->atom(i));
        return out;
    }

    AtomStream dictionary_stream(std::shared_ptr<const PropagationGraph> graph, std::size_t order, const SensingSetup &setup)
    {
        return AtomStream(std::make_shared<const Dictionary>(std::move(graph), order, setup));
    }
}
