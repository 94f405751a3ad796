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

#ifndef nfmb_errors_H
#define nfmb_errors_H

#include <stdexcept>
#include <string>

namespace nfmb
{
    // Coincident points, element sitting on a scatterer, non-positive delays
    class DegenerateGeometry : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    // Grid, graph or dictionary larger than the configured cap
    class CapacityError : public std::length_error
    {
    public:
        using std::length_error::length_error;
    };

    // Tensor / array / waveform dimensions disagree
    class DimensionMismatch : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Malformed scene, config or estimates file
    class ParseError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}

#endif
