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

#include "nfmb/detail/json_fields.hpp"
#include "nfmb/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nfmb::detail
{
    json parse_json(std::string_view text, const std::string &what)
    {
        try
        {
            return json::parse(text.begin(), text.end());
        }
        catch (const json::parse_error &e)
        {
            std::size_t line = 1, column = 1;
            const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
            for (std::size_t i = 0; i < stop; ++i)
            {
                if (text[i] == '\n')
                    ++line, column = 1;
                else
                    ++column;
            }
            throw ParseError(what + ": syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + e.what());
        }
    }

    std::string join_field(const std::string &ctx, const std::string &key)
    {
        return ctx.empty() ? key : ctx + "." + key;
    }

    const json &require(const json &obj, const std::string &key, const std::string &ctx)
    {
        if (!obj.is_object())
            throw ParseError("field '" + (ctx.empty() ? std::string("<root>") : ctx) + "' must be an object");
        auto it = obj.find(key);
        if (it == obj.end())
            throw ParseError("missing required field '" + join_field(ctx, key) + "'");
        return *it;
    }

    double get_double(const json &obj, const std::string &key, const std::string &ctx)
    {
        const json &v = require(obj, key, ctx);
        if (!v.is_number())
            throw ParseError("field '" + join_field(ctx, key) + "' must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            throw ParseError("field '" + join_field(ctx, key) + "' must be finite");
        return d;
    }

    std::size_t get_count(const json &obj, const std::string &key, const std::string &ctx)
    {
        const json &v = require(obj, key, ctx);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ParseError("field '" + join_field(ctx, key) + "' must be a non-negative integer");
        return v.get<std::size_t>();
    }

    json to_json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

    Vec3 vec3_from(const json &j, const std::string &field)
    {
        if (!j.is_array() || j.size() != 3)
            throw ParseError("field '" + field + "' must be an array [x, y, z]");
        for (const auto &c : j)
            if (!c.is_number())
                throw ParseError("field '" + field + "' must contain numbers");
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    }

    json to_json(const cplx &z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

    cplx cplx_from(const json &j, const std::string &field)
    {
        if (!j.is_object())
            throw ParseError("field '" + field + "' must be an object {re, im}");
        return {get_double(j, "re", field), get_double(j, "im", field)};
    }

    json to_json(const ArraySpec &a)
    {
        json pose{{"origin", to_json(a.pose.origin)},
                  {"basis", json::array({to_json(a.pose.basis[0]), to_json(a.pose.basis[1]), to_json(a.pose.basis[2])})}};
        return json{{"rows", a.rows}, {"cols", a.cols}, {"spacing", a.spacing}, {"reference_index", a.reference_index}, {"pose", pose}};
    }

    ArraySpec array_from(const json &j, const std::string &field)
    {
        ArraySpec a;
        a.rows = get_count(j, "rows", field);
        a.cols = get_count(j, "cols", field);
        a.spacing = get_double(j, "spacing", field);
        const json &pose = require(j, "pose", field);
        const std::string pf = join_field(field, "pose");
        a.pose.origin = vec3_from(require(pose, "origin", pf), pf + ".origin");
        const json &basis = require(pose, "basis", pf);
        if (!basis.is_array() || basis.size() != 3)
            throw ParseError("field '" + pf + ".basis' must hold three vectors");
        for (std::size_t i = 0; i < 3; ++i)
            a.pose.basis[i] = vec3_from(basis[i], pf + ".basis[" + std::to_string(i) + "]");
        if (j.contains("reference_index"))
            a.reference_index = get_count(j, "reference_index", field);
        else
            a.reference_index = default_reference_index(a.rows, a.cols);
        try
        {
            a.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ParseError("field '" + field + "': " + e.what());
        }
        return a;
    }

    json to_json(const WaveformSpec &w)
    {
        return json{{"f_c", w.f_c}, {"f_s", w.f_s}, {"P", w.P}, {"T_b", w.T_b}, {"Q", w.Q}, {"carrier_phase", w.carrier_phase}, {"narrowband_doppler", w.narrowband_doppler}};
    }

    WaveformSpec waveform_from(const json &j, const std::string &field, WaveformSpec w)
    {
        if (!j.is_object())
            throw ParseError("field '" + field + "' must be an object");
        if (j.contains("f_c"))
            w.f_c = get_double(j, "f_c", field);
        if (j.contains("f_s"))
            w.f_s = get_double(j, "f_s", field);
        if (j.contains("P"))
            w.P = get_count(j, "P", field);
        if (j.contains("T_b"))
            w.T_b = get_double(j, "T_b", field);
        if (j.contains("Q"))
            w.Q = get_count(j, "Q", field);
        if (j.contains("carrier_phase"))
        {
            if (!j["carrier_phase"].is_boolean())
                throw ParseError("field '" + join_field(field, "carrier_phase") + "' must be a boolean");
            w.carrier_phase = j["carrier_phase"].get<bool>();
        }
        if (j.contains("narrowband_doppler"))
        {
            if (!j["narrowband_doppler"].is_boolean())
                throw ParseError("field '" + join_field(field, "narrowband_doppler") + "' must be a boolean");
            w.narrowband_doppler = j["narrowband_doppler"].get<bool>();
        }
        try
        {
            w.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ParseError("field '" + field + "': " + e.what());
        }
        return w;
    }

    std::string dump(const json &j) { return j.dump(2) + "\n"; }
}
