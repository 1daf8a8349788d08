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

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace risa
{
    // SplitMix64 finaliser; used to derive independent streams from (seed, index) pairs.
    constexpr std::uint64_t mix64(std::uint64_t z)
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub = 0)
    {
        return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL) ^ mix64(sub + 0x2545f4914f6cdd1dULL));
    }

    // 64-bit Mersenne twister with distribution code kept in-house so that draws do not
    // depend on the standard library's distribution implementations.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        std::uint64_t next() { return engine_(); }

        // Uniform in [0, 1).
        double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        // Uniform integer in [0, n).
        std::uint64_t below(std::uint64_t n)
        {
            const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
            std::uint64_t r;
            do
                r = engine_();
            while (r >= limit);
            return r % n;
        }

        // k distinct indices from [0, n), in draw order.
        std::vector<std::size_t> sample(std::size_t n, std::size_t k)
        {
            std::vector<std::size_t> idx(n);
            for (std::size_t i = 0; i < n; ++i)
                idx[i] = i;
            for (std::size_t i = 0; i < k && i < n; ++i)
                std::swap(idx[i], idx[i + below(n - i)]);
            idx.resize(std::min(k, n));
            return idx;
        }

    private:
        std::mt19937_64 engine_;
    };
}
