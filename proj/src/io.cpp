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

#include "nfmb/io.hpp"
#include "nfmb/detail/json_fields.hpp"
#include "nfmb/errors.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace nfmb
{
    std::string read_file(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("Cannot open file '" + path.string() + "'.");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_file_atomic(const std::filesystem::path &path, std::string_view bytes)
    {
        static std::atomic<unsigned> counter{0};
        auto tmp = path;
        tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw std::runtime_error("Cannot write file '" + path.string() + "'.");
            out.write(bytes.data(), (std::streamsize)bytes.size());
            out.flush();
            if (!out)
            {
                std::error_code ec;
                std::filesystem::remove(tmp, ec);
                throw std::runtime_error("Failed writing file '" + path.string() + "'.");
            }
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec)
        {
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("Cannot move temporary file onto '" + path.string() + "'.");
        }
    }

    namespace
    {
        template <typename T>
        void put_le(std::string &out, T value)
        {
            unsigned char b[sizeof(T)];
            std::memcpy(b, &value, sizeof(T));
            if constexpr (std::endian::native == std::endian::big)
                std::reverse(b, b + sizeof(T));
            out.append(reinterpret_cast<const char *>(b), sizeof(T));
        }

        template <typename T>
        T get_le(std::string_view in, std::size_t &pos)
        {
            if (pos + sizeof(T) > in.size())
                throw ParseError("Tensor file is truncated.");
            unsigned char b[sizeof(T)];
            std::memcpy(b, in.data() + pos, sizeof(T));
            if constexpr (std::endian::native == std::endian::big)
                std::reverse(b, b + sizeof(T));
            pos += sizeof(T);
            T value;
            std::memcpy(&value, b, sizeof(T));
            return value;
        }
    }

    std::string encode_tensor(const ChannelTensor &t)
    {
        std::string out = "NFMB";
        out.reserve(24 + 16 * t.size());
        put_le<std::uint32_t>(out, kTensorFormatVersion);
        put_le<std::uint32_t>(out, (std::uint32_t)t.M());
        put_le<std::uint32_t>(out, (std::uint32_t)t.N());
        put_le<std::uint32_t>(out, (std::uint32_t)t.P());
        put_le<std::uint32_t>(out, (std::uint32_t)t.Q());
        for (const auto &z : t.data())
        {
            put_le<double>(out, z.real());
            put_le<double>(out, z.imag());
        }
        return out;
    }

    ChannelTensor decode_tensor(std::string_view bytes)
    {
        if (bytes.size() < 4 || bytes.substr(0, 4) != "NFMB")
            throw ParseError("Not an NFMB tensor file (bad magic bytes).");
        std::size_t pos = 4;
        const auto version = get_le<std::uint32_t>(bytes, pos);
        if (version != kTensorFormatVersion)
            throw ParseError("Unsupported NFMB format version " + std::to_string(version) + ".");
        const auto M = get_le<std::uint32_t>(bytes, pos);
        const auto N = get_le<std::uint32_t>(bytes, pos);
        const auto P = get_le<std::uint32_t>(bytes, pos);
        const auto Q = get_le<std::uint32_t>(bytes, pos);
        if (M == 0 || N == 0 || P == 0 || Q == 0)
            throw ParseError("NFMB tensor has a zero dimension.");
        const std::size_t expected = pos + 16 * (std::size_t)M * N * P * Q;
        if (bytes.size() != expected)
            throw ParseError("NFMB payload size " + std::to_string(bytes.size()) + " does not match header (" +
                             std::to_string(expected) + " bytes expected).");
        ChannelTensor t(M, N, P, Q);
        t.meta.waveform.P = P;
        t.meta.waveform.Q = Q;
        for (auto &z : t.data())
        {
            const double re = get_le<double>(bytes, pos);
            const double im = get_le<double>(bytes, pos);
            z = cplx(re, im);
        }
        return t;
    }

    std::string tensor_sidecar_json(const ChannelTensor &t)
    {
        using detail::json;
        json j;
        j["format"] = "NFMB";
        j["version"] = kTensorFormatVersion;
        j["M"] = t.M();
        j["N"] = t.N();
        j["P"] = t.P();
        j["Q"] = t.Q();
        j["waveform"] = detail::to_json(t.meta.waveform);
        j["tx_id"] = t.meta.tx_id;
        j["rx_id"] = t.meta.rx_id;
        j["seed"] = t.meta.seed ? json(*t.meta.seed) : json(nullptr);
        j["snr_db"] = t.meta.snr_db ? json(*t.meta.snr_db) : json(nullptr);
        return detail::dump(j);
    }

    void apply_tensor_sidecar(ChannelTensor &t, std::string_view text)
    {
        using detail::json;
        const json j = detail::parse_json(text, "tensor sidecar");
        for (const char *key : {"M", "N", "P", "Q"})
        {
            const std::size_t v = detail::get_count(j, key, "");
            const std::size_t actual = key[0] == 'M' ? t.M() : key[0] == 'N' ? t.N() : key[0] == 'P' ? t.P() : t.Q();
            if (v != actual)
                throw DimensionMismatch(std::string("Sidecar dimension ") + key + " disagrees with the tensor file.");
        }
        t.meta.waveform = detail::waveform_from(detail::require(j, "waveform", ""), "waveform");
        if (j.contains("tx_id") && j["tx_id"].is_string())
            t.meta.tx_id = j["tx_id"].get<std::string>();
        if (j.contains("rx_id") && j["rx_id"].is_string())
            t.meta.rx_id = j["rx_id"].get<std::string>();
        t.meta.seed.reset();
        t.meta.snr_db.reset();
        if (j.contains("seed") && !j["seed"].is_null())
            t.meta.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("snr_db") && !j["snr_db"].is_null())
            t.meta.snr_db = detail::get_double(j, "snr_db", "");
    }

    std::filesystem::path sidecar_path(const std::filesystem::path &tensor_path)
    {
        auto p = tensor_path;
        p += ".json";
        return p;
    }

    void save_tensor(const std::filesystem::path &path, const ChannelTensor &tensor)
    {
        write_file_atomic(path, encode_tensor(tensor));
        write_file_atomic(sidecar_path(path), tensor_sidecar_json(tensor));
    }

    ChannelTensor load_tensor(const std::filesystem::path &path)
    {
        ChannelTensor t = decode_tensor(read_file(path));
        const auto side = sidecar_path(path);
        if (std::filesystem::exists(side))
            apply_tensor_sidecar(t, read_file(side));
        return t;
    }
}
