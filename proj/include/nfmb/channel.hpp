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

#ifndef nfmb_channel_H
#define nfmb_channel_H

#include "nfmb/geometry.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nfmb
{
    using cplx = std::complex<double>;
    using CVector = std::vector<cplx>;

    // Multi-band, multi-frame sounding waveform. Sub-band p (1-based) sits at f_p = p * f_s
    // relative to the carrier, frame q (1-based) at time q * T_b.
    struct WaveformSpec
    {
        double f_c = 30.0e9; // Carrier frequency in Hz
        double f_s = 10.0e6; // Sub-band width in Hz
        std::size_t P = 32;  // Sub-bands per frame
        double T_b = 1.0e-3; // Frame duration in s
        std::size_t Q = 4;   // Frames per CPI

        // Delay phase evaluated at f_c + f_p (true) or at the sub-band offset f_p only (false)
        bool carrier_phase = true;

        // Doppler evaluated with the column's f_p (false) or with f_p = 0 for every column (true)
        bool narrowband_doppler = false;

        double subband_frequency(std::size_t p) const { return (double)p * f_s; }
        double phase_frequency(std::size_t p) const { return (carrier_phase ? f_c : 0.0) + subband_frequency(p); }
        double wavelength() const { return kSpeedOfLight / f_c; }
        void validate() const;
    };

    // alpha * exp(j phi) with radial velocity v
    struct PathCoefficients
    {
        double alpha = 1.0; // >= 0
        double phi = 0.0;   // rad, wrapped to [0, 2 pi)
        double v = 0.0;     // m/s
    };

    double wrap_phase(double phi);

    // Element gain F(f_c, direction). Default-constructed patterns are isotropic and return exactly 1.
    class AntennaPattern
    {
    public:
        using GainFunction = std::function<double(double f_c, const Vec3 &direction)>;

        AntennaPattern() = default;
        explicit AntennaPattern(GainFunction gain) : gain_(std::move(gain)) {}

        static AntennaPattern isotropic() { return {}; }
        bool is_isotropic() const { return !gain_; }
        double operator()(double f_c, const Vec3 &direction) const { return gain_ ? gain_(f_c, direction) : 1.0; }

    private:
        GainFunction gain_;
    };

    // Everything the forward model needs besides the paths
    struct SensingSetup
    {
        ArraySpec tx;
        ArraySpec rx;
        WaveformSpec waveform;
        AntennaPattern pattern;

        std::size_t M() const { return tx.size(); }
        std::size_t N() const { return rx.size(); }
        std::size_t rows() const { return M() * N(); }
        std::size_t cols() const { return waveform.P * waveform.Q; }
        std::size_t entries() const { return rows() * cols(); }
        void validate() const;
    };

    // 1-based index maps: row (n-1) M + m, column (q-1) P + p
    std::size_t row_of(std::size_t m, std::size_t n, std::size_t M);
    std::size_t col_of(std::size_t p, std::size_t q, std::size_t P);
    std::pair<std::size_t, std::size_t> mn_of_row(std::size_t row, std::size_t M);
    std::pair<std::size_t, std::size_t> pq_of_col(std::size_t col, std::size_t P);

    struct TensorMetadata
    {
        WaveformSpec waveform;
        std::string tx_id = "tx";
        std::string rx_id = "rx";
        std::optional<std::uint64_t> seed;
        std::optional<double> snr_db;
    };

    // MN x PQ complex measurement matrix, stored row-major (0-based storage, 1-based public index map)
    class ChannelTensor
    {
    public:
        ChannelTensor() = default;
        ChannelTensor(std::size_t M, std::size_t N, std::size_t P, std::size_t Q);
        static ChannelTensor zeros_like(const SensingSetup &setup);

        std::size_t M() const { return M_; }
        std::size_t N() const { return N_; }
        std::size_t P() const { return P_; }
        std::size_t Q() const { return Q_; }
        std::size_t rows() const { return M_ * N_; }
        std::size_t cols() const { return P_ * Q_; }
        std::size_t size() const { return data_.size(); }

        // 0-based storage access
        cplx &at(std::size_t row, std::size_t col) { return data_[row * cols() + col]; }
        const cplx &at(std::size_t row, std::size_t col) const { return data_[row * cols() + col]; }

        // 1-based (m, n, p, q) access through row_of / col_of
        cplx &operator()(std::size_t m, std::size_t n, std::size_t p, std::size_t q);
        const cplx &operator()(std::size_t m, std::size_t n, std::size_t p, std::size_t q) const;

        // Row-major vectorization
        std::span<cplx> data() { return data_; }
        std::span<const cplx> data() const { return data_; }
        CVector &vector() { return data_; }
        const CVector &vector() const { return data_; }

        bool same_shape(const ChannelTensor &o) const { return M_ == o.M_ && N_ == o.N_ && P_ == o.P_ && Q_ == o.Q_; }
        void check_shape(const SensingSetup &setup) const;
        double squared_norm() const;

        ChannelTensor &operator+=(const ChannelTensor &o);
        ChannelTensor &operator-=(const ChannelTensor &o);
        ChannelTensor &operator*=(cplx s);

        TensorMetadata meta;

    private:
        std::size_t M_ = 0, N_ = 0, P_ = 0, Q_ = 0;
        CVector data_;
    };

    // -(f_c + f_p) v / c
    double doppler_frequency(double f_c, double f_p, double v);

    // Unit-coefficient contribution of one path (alpha = 1, phi = 0)
    ChannelTensor path_signature(const PathGeometry &path, const SensingSetup &setup, double v = 0.0);

    // Same path under the plane-wave model: orientation fixed at the reference and per-element
    // delays linearized, tau_{m,n} = tau_ref - (omega_tx . o_m + omega_rx . o_n) / c
    ChannelTensor plane_wave_signature(const PathGeometry &path, const SensingSetup &setup, double v = 0.0);

    struct SynthPath
    {
        PathGeometry geometry;
        PathCoefficients coefficients;
    };

    struct NoiseSpec
    {
        double snr_db = 20.0;
        std::uint64_t seed = 0;
    };

    // Circular white Gaussian noise scaled so that ||signal||^2 / E||w||^2 = 10^(snr_db / 10).
    // Returns the per-entry noise variance.
    double add_noise(ChannelTensor &tensor, const NoiseSpec &noise);

    ChannelTensor synthesize_channel(std::span<const SynthPath> paths, const SensingSetup &setup,
                                     const std::optional<NoiseSpec> &noise = std::nullopt);

    // Largest |arg(a_i conj(b_i))| over entries with both moduli non-zero
    double max_phase_deviation(const ChannelTensor &a, const ChannelTensor &b);
}

#endif
