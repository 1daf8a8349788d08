// SPDX-License-Identifier: Apache-2.0
//
// risa-planner: RIS-aware indoor network planning and ray-traced validation
// Copyright (C) 2026 The risa-planner authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace risa
{
    // Malformed or physically inconsistent input (exit code 1 at the CLI).
    class InputError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // The planner cannot produce a plan satisfying the structural constraints (exit code 2).
    class InfeasibleError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}
