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

#ifndef nfmb_dictionary_H
#define nfmb_dictionary_H

#include "nfmb/channel.hpp"
#include "nfmb/geometry.hpp"
#include "nfmb/scene.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace nfmb
{
    inline constexpr std::size_t kDefaultVertexCap = 1'000'000;
    inline constexpr std::size_t kDefaultEdgeCap = 10'000'000;

    // Lattice of hypothesized scatterer positions, ordered x-fastest, then y, then z
    struct CandidateGrid
    {
        Box bounds;
        double resolution = 0.1; // m, same on every axis
        std::array<std::size_t, 3> counts{1, 1, 1};
        std::vector<Vec3> vertices;

        std::size_t size() const { return vertices.size(); }
        std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const { return ix + counts[0] * (iy + counts[1] * iz); }
        std::array<std::size_t, 3> cell(std::size_t vertex) const;

        // Nearest lattice vertex (clamped to the bounds)
        std::size_t nearest(const Vec3 &p) const;
    };

    CandidateGrid build_grid(const Box &bounds, double resolution, std::size_t max_vertices = kDefaultVertexCap);

    // Admissibility rules for two-bounce edges Tx -> v1 -> v2 -> Rx
    struct EdgeConstraints
    {
        double min_separation = 0.0;                                 // m, |v1 - v2| >= this
        double max_delay = std::numeric_limits<double>::infinity(); // s, polyline delay <= this
        Vec3 tx_ref;                                                 // used by the delay and excess rules
        Vec3 rx_ref;
        double min_excess = 0.0;                                     // m, length over each one-bounce shortcut >= this
    };

    struct PropagationGraph
    {
        CandidateGrid grid;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> edges; // ordered (v1, v2), lexicographic
        EdgeConstraints constraints;

        std::optional<std::size_t> find_edge(std::size_t v1, std::size_t v2) const;
    };

    PropagationGraph build_graph(CandidateGrid grid, const EdgeConstraints &constraints,
                                 std::size_t max_edges = kDefaultEdgeCap);

    struct DictionaryAtom
    {
        std::size_t bounce_order = 1;
        std::vector<std::size_t> vertex_ids;
        CVector signature; // unit norm, row-major vectorization of the MN x PQ signature
    };

    // Static (v = 0) unit-norm atom of the Tx -> vertices -> Rx path; one or two vertices
    DictionaryAtom atom(std::span<const Vec3> vertex_positions, const SensingSetup &setup);

    // Residual summed over frames, planar [p][row] layout consumed by the correlator
    struct FoldedResidual
    {
        std::size_t rows = 0;
        std::size_t P = 0;
        std::vector<double> re;
        std::vector<double> im;
    };

    FoldedResidual fold_frames(std::span<const cplx> residual, std::size_t rows, std::size_t P, std::size_t Q);

    // Order-k atom family over a propagation graph: k = 1 uses every vertex, k = 2 every edge.
    // Atoms are never stored; inner products with a residual are evaluated from per-vertex
    // element distances so a full scan costs O(MN P) per atom.
    class Dictionary
    {
    public:
        Dictionary(std::shared_ptr<const PropagationGraph> graph, std::size_t order, SensingSetup setup);

        std::size_t order() const { return order_; }
        std::size_t size() const;
        const SensingSetup &setup() const { return setup_; }
        const PropagationGraph &graph() const { return *graph_; }
        std::shared_ptr<const PropagationGraph> graph_ptr() const { return graph_; }

        std::vector<std::size_t> vertex_ids(std::size_t id) const;
        std::vector<Vec3> vertex_positions(std::size_t id) const;
        std::optional<std::size_t> find(std::span<const std::size_t> vertex_ids) const;

        // Materialized atom through the forward model
        DictionaryAtom atom(std::size_t id) const;

        // <psi_id, residual> for the unit-norm atom, evaluated from the compact form
        cplx correlate(std::size_t id, const FoldedResidual &residual) const;

        // Per-residual tables of the sub-band sum as a function of path length, for screening
        struct ScanTable
        {
            double L0 = 0.0; // m, first sample
            double h = 0.0;  // m, sample spacing
            std::size_t T = 0;
            std::vector<cplx> g;        // [t][row]
            std::vector<double> err;    // per row, bound on the interpolation error
        };
        ScanTable scan_table(const FoldedResidual &residual) const;

        // Interpolated correlation and a bound on |estimate - correlate(id)|
        std::pair<cplx, double> screen(std::size_t id, const ScanTable &table) const;

        // Atoms whose vertices each lie within `radius` lattice steps (Chebyshev) of the given atom's
        std::vector<std::size_t> neighborhood(std::size_t id, std::size_t radius) const;

        // Atoms whose vertices all sit on the sub-lattice with the given stride
        std::vector<std::size_t> coarse_subset(std::size_t stride) const;

    private:
        struct Scratch;
        cplx correlate_pair(std::size_t v1, std::size_t v2, double mid, const FoldedResidual &r, Scratch &s) const;
        std::tuple<std::size_t, std::size_t, double> atom_vertices(std::size_t id) const;

        std::shared_ptr<const PropagationGraph> graph_;
        std::size_t order_;
        SensingSetup setup_;
        std::size_t M_ = 0, N_ = 0;

        // Per-vertex, per-element tables (vertex-major)
        std::vector<double> d_tx_ref_, d_rx_ref_;
        std::vector<double> d_tx_, d_rx_;      // element distances
        std::vector<double> g_tx_, g_rx_;      // element gains
        std::vector<cplx> c_tx_, c_rx_;        // exp(+j 2 pi f0 d / c), f0 = carrier or 0
        std::vector<cplx> s_tx_, s_rx_;        // exp(+j 2 pi f_s d / c)
        double L_min_ = 0.0, L_max_ = 0.0;     // m, bounds on every element-pair path length
    };

    // Deterministic sequence of materialized atoms over a dictionary
    class AtomStream
    {
    public:
        explicit AtomStream(std::shared_ptr<const Dictionary> dictionary);

        std::optional<DictionaryAtom> next();
        void reset() { cursor_ = 0; }
        std::size_t size() const { return dict_->size(); }
        const Dictionary &dictionary() const { return *dict_; }

        // Every atom at once; CapacityError when the dictionary holds more than `cap` atoms
        std::vector<DictionaryAtom> materialize(std::size_t cap) const;

    private:
        std::shared_ptr<const Dictionary> dict_;
        std::size_t cursor_ = 0;
    };

    AtomStream dictionary_stream(std::shared_ptr<const PropagationGraph> graph, std::size_t order, const SensingSetup &setup);
}

#endif
