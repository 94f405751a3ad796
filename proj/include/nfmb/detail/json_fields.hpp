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

#ifndef nfmb_detail_json_fields_H
#define nfmb_detail_json_fields_H

// JSON field helpers shared by the scene, tensor-sidecar and run-config readers.
// Every reader goes through require()/get_*() so errors name the offending field.

#include "nfmb/channel.hpp"
#include "nfmb/geometry.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace nfmb::detail
{
    using json = nlohmann::ordered_json;

    // Parse text; syntax errors become ParseError with line and column
    json parse_json(std::string_view text, const std::string &what);

    std::string join_field(const std::string &ctx, const std::string &key);

    const json &require(const json &obj, const std::string &key, const std::string &ctx);
    double get_double(const json &obj, const std::string &key, const std::string &ctx);
    std::size_t get_count(const json &obj, const std::string &key, const std::string &ctx);

    json to_json(const Vec3 &v);
    Vec3 vec3_from(const json &j, const std::string &field);

    json to_json(const cplx &z);
    cplx cplx_from(const json &j, const std::string &field);

    json to_json(const ArraySpec &a);
    ArraySpec array_from(const json &j, const std::string &field);

    json to_json(const WaveformSpec &w);
    // Missing keys keep the values already in `base`
    WaveformSpec waveform_from(const json &j, const std::string &field, WaveformSpec base = {});

    std::string dump(const json &j);
}

#endif
