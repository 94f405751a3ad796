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

#include "nfmb/channel.hpp"
#include "nfmb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace nfmb
{
    void WaveformSpec::validate() const
    {
        if (!(f_c > 0.0) || !std::isfinite(f_c))
            throw std::invalid_argument("Carrier frequency must be positive.");
        if (!(f_s > 0.0) || !std::isfinite(f_s))
            throw std::invalid_argument("Sub-band width must be positive.");
        if (!(T_b > 0.0) || !std::isfinite(T_b))
            throw std::invalid_argument("Frame duration must be positive.");
        if (P == 0 || Q == 0)
            throw std::invalid_argument("Sub-band count P and frame count Q must be at least 1.");
    }

    double wrap_phase(double phi)
    {
        double w = std::fmod(phi, kTwoPi);
        if (w < 0.0)
            w += kTwoPi;
        return w >= kTwoPi ? 0.0 : w;
    }

    void SensingSetup::validate() const
    {
        tx.validate();
        rx.validate();
        waveform.validate();
    }

    std::size_t row_of(std::size_t m, std::size_t n, std::size_t M)
    {
        if (M == 0 || m < 1 || m > M || n < 1)
            throw std::invalid_argument("Tx/Rx index out of range.");
        return (n - 1) * M + m;
    }

    std::size_t col_of(std::size_t p, std::size_t q, std::size_t P)
    {
        if (P == 0 || p < 1 || p > P || q < 1)
            throw std::invalid_argument("Sub-band/frame index out of range.");
        return (q - 1) * P + p;
    }

    std::pair<std::size_t, std::size_t> mn_of_row(std::size_t row, std::size_t M)
    {
        if (M == 0 || row < 1)
            throw std::invalid_argument("Row index out of range.");
        return {(row - 1) % M + 1, (row - 1) / M + 1};
    }

    std::pair<std::size_t, std::size_t> pq_of_col(std::size_t col, std::size_t P)
    {
        if (P == 0 || col < 1)
            throw std::invalid_argument("Column index out of range.");
        return {(col - 1) % P + 1, (col - 1) / P + 1};
    }

    ChannelTensor::ChannelTensor(std::size_t M, std::size_t N, std::size_t P, std::size_t Q)
        : M_(M), N_(N), P_(P), Q_(Q), data_(M * N * P * Q, cplx(0.0, 0.0))
    {
        if (M == 0 || N == 0 || P == 0 || Q == 0)
            throw std::invalid_argument("Tensor dimensions must be positive.");
    }

    ChannelTensor ChannelTensor::zeros_like(const SensingSetup &setup)
    {
        ChannelTensor t(setup.M(), setup.N(), setup.waveform.P, setup.waveform.Q);
        t.meta.waveform = setup.waveform;
        return t;
    }

    cplx &ChannelTensor::operator()(std::size_t m, std::size_t n, std::size_t p, std::size_t q)
    {
        if (n > N_ || q > Q_)
            throw std::invalid_argument("Tensor index out of range.");
        return at(row_of(m, n, M_) - 1, col_of(p, q, P_) - 1);
    }

    const cplx &ChannelTensor::operator()(std::size_t m, std::size_t n, std::size_t p, std::size_t q) const
    {
        if (n > N_ || q > Q_)
            throw std::invalid_argument("Tensor index out of range.");
        return at(row_of(m, n, M_) - 1, col_of(p, q, P_) - 1);
    }

    void ChannelTensor::check_shape(const SensingSetup &setup) const
    {
        if (M_ != setup.M() || N_ != setup.N() || P_ != setup.waveform.P || Q_ != setup.waveform.Q)
            throw DimensionMismatch("Tensor is " + std::to_string(M_) + "x" + std::to_string(N_) + "x" +
                                    std::to_string(P_) + "x" + std::to_string(Q_) + " (M x N x P x Q) but the setup expects " +
                                    std::to_string(setup.M()) + "x" + std::to_string(setup.N()) + "x" +
                                    std::to_string(setup.waveform.P) + "x" + std::to_string(setup.waveform.Q) + ".");
    }

    double ChannelTensor::squared_norm() const
    {
        double s = 0.0;
        for (const auto &z : data_)
            s += std::norm(z);
        return s;
    }

    ChannelTensor &ChannelTensor::operator+=(const ChannelTensor &o)
    {
        if (!same_shape(o))
            throw DimensionMismatch("Cannot add tensors of different shape.");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += o.data_[i];
        return *this;
    }

    ChannelTensor &ChannelTensor::operator-=(const ChannelTensor &o)
    {
        if (!same_shape(o))
            throw DimensionMismatch("Cannot subtract tensors of different shape.");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= o.data_[i];
        return *this;
    }

    ChannelTensor &ChannelTensor::operator*=(cplx s)
    {
        for (auto &z : data_)
            z *= s;
        return *this;
    }

    double doppler_frequency(double f_c, double f_p, double v)
    {
        return -(f_c + f_p) * v / kSpeedOfLight;
    }

    namespace
    {
        // Per-(m, n) amplitude and delay, then fill all (p, q) columns of that row
        void fill_row(ChannelTensor &out, std::size_t row, double amplitude, double tau,
                      const WaveformSpec &wf, double v)
        {
            const bool moving = v != 0.0;
            for (std::size_t p = 1; p <= wf.P; ++p)
            {
                const double delay_phase = -kTwoPi * wf.phase_frequency(p) * tau;
                const double f_d = moving ? doppler_frequency(wf.f_c, wf.narrowband_doppler ? 0.0 : wf.subband_frequency(p), v) : 0.0;
                for (std::size_t q = 1; q <= wf.Q; ++q)
                {
                    const double phase = delay_phase + kTwoPi * f_d * (double)q * wf.T_b;
                    out.at(row, (q - 1) * wf.P + (p - 1)) = std::polar(amplitude, phase);
                }
            }
        }
    }

    ChannelTensor path_signature(const PathGeometry &path, const SensingSetup &setup, double v)
    {
        setup.validate();
        ChannelTensor out = ChannelTensor::zeros_like(setup);
        const auto tx_off = element_offsets(setup.tx);
        const auto rx_off = element_offsets(setup.rx);
        const double f_c = setup.waveform.f_c;

        for (std::size_t n = 0; n < rx_off.size(); ++n)
            for (std::size_t m = 0; m < tx_off.size(); ++m)
            {
                const auto g = element_pair_geometry(path, tx_off[m], rx_off[n]);
                const double amplitude = g.dalpha * setup.pattern(f_c, g.rx.omega_elem) * setup.pattern(f_c, g.tx.omega_elem);
                fill_row(out, n * tx_off.size() + m, amplitude, g.tau, setup.waveform, v);
            }
        return out;
    }

    ChannelTensor plane_wave_signature(const PathGeometry &path, const SensingSetup &setup, double v)
    {
        setup.validate();
        ChannelTensor out = ChannelTensor::zeros_like(setup);
        const auto tx_off = element_offsets(setup.tx);
        const auto rx_off = element_offsets(setup.rx);
        const double f_c = setup.waveform.f_c;
        const double gain = setup.pattern(f_c, path.omega_rx) * setup.pattern(f_c, path.omega_tx);

        for (std::size_t n = 0; n < rx_off.size(); ++n)
            for (std::size_t m = 0; m < tx_off.size(); ++m)
            {
                const double tau = path.tau_ref - (dot(path.omega_tx, tx_off[m]) + dot(path.omega_rx, rx_off[n])) / kSpeedOfLight;
                if (!(tau > 0.0))
                    throw DegenerateGeometry("Linearized delay is not positive.");
                fill_row(out, n * tx_off.size() + m, gain * path.tau_ref / tau, tau, setup.waveform, v);
            }
        return out;
    }

    double add_noise(ChannelTensor &tensor, const NoiseSpec &noise)
    {
        if (!std::isfinite(noise.snr_db))
            throw std::invalid_argument("SNR must be finite.");
        const double signal = tensor.squared_norm();
        const double variance = signal / (std::pow(10.0, noise.snr_db / 10.0) * (double)tensor.size());

        std::mt19937_64 rng(noise.seed);
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * variance));
        if (variance > 0.0)
            for (auto &z : tensor.data())
            {
                const double re = gauss(rng);
                const double im = gauss(rng);
                z += cplx(re, im);
            }
        tensor.meta.seed = noise.seed;
        tensor.meta.snr_db = noise.snr_db;
        return variance;
    }

    ChannelTensor synthesize_channel(std::span<const SynthPath> paths, const SensingSetup &setup,
                                     const std::optional<NoiseSpec> &noise)
    {
        setup.validate();
        ChannelTensor z = ChannelTensor::zeros_like(setup);
        for (const auto &path : paths)
        {
            if (!(path.coefficients.alpha >= 0.0) || !std::isfinite(path.coefficients.alpha))
                throw std::invalid_argument("Path magnitude must be finite and non-negative.");
            ChannelTensor s = path_signature(path.geometry, setup, path.coefficients.v);
            s *= std::polar(path.coefficients.alpha, path.coefficients.phi);
            z += s;
        }
        if (noise)
            add_noise(z, *noise);
        return z;
    }

    double max_phase_deviation(const ChannelTensor &a, const ChannelTensor &b)
    {
        if (!a.same_shape(b))
            throw DimensionMismatch("Cannot compare tensors of different shape.");
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            const cplx r = a.data()[i] * std::conj(b.data()[i]);
            if (std::abs(r) > 0.0)
                worst = std::max(worst, std::abs(std::arg(r)));
        }
        return worst;
    }
}
