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

#ifndef nfmb_io_H
#define nfmb_io_H

#include "nfmb/channel.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace nfmb
{
    // Whole-file read; missing or unreadable files throw std::runtime_error naming the path
    std::string read_file(const std::filesystem::path &path);

    // Writes to a temporary sibling and renames it over `path`, so readers never see partial files
    void write_file_atomic(const std::filesystem::path &path, std::string_view bytes);

    // Binary tensor format, little-endian:
    //   "NFMB" | u32 version | u32 M | u32 N | u32 P | u32 Q | MN x PQ row-major (re, im) f64 pairs
    inline constexpr std::uint32_t kTensorFormatVersion = 1;

    std::string encode_tensor(const ChannelTensor &tensor);
    ChannelTensor decode_tensor(std::string_view bytes);

    // JSON sidecar: waveform, array ids, seed, snr_db (null when noiseless), dimensions
    std::string tensor_sidecar_json(const ChannelTensor &tensor);
    void apply_tensor_sidecar(ChannelTensor &tensor, std::string_view json_text);

    std::filesystem::path sidecar_path(const std::filesystem::path &tensor_path);

    // Binary file plus "<path>.json" sidecar
    void save_tensor(const std::filesystem::path &path, const ChannelTensor &tensor);

    // Reads the binary file and, when present, its sidecar
    ChannelTensor load_tensor(const std::filesystem::path &path);
}

#endif
