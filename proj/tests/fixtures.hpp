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

#include "risa/experiment.hpp"
#include "risa/plan.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <vector>

namespace risa::test
{
    // Desk-scale synthetic configuration: defaults with a small surface.
    inline ExperimentConfig small_config(int test_points, int ris_h = 8, int ris_v = 4)
    {
        ExperimentConfig c;
        c.num_test_points = test_points;
        c.ris_h = ris_h;
        c.ris_v = ris_v;
        return c;
    }

    inline plan::PlanningInstance small_instance(int n, int t, int l, std::uint64_t seed)
    {
        return gen_synthetic(small_config(t), n, l, seed);
    }

    // One BS at the origin looking along +y, surfaces on the wall y = 20 facing -y.
    inline plan::PlanningInstance corridor(const std::vector<double> &site_x, const std::vector<geom::Vec3> &points,
                                           int budget)
    {
        plan::PlanningInstance inst;
        inst.bss.push_back({geom::Frame3::facing({0, 0, 3}, {0, 1, 0}), 2});
        for (double x : site_x)
            inst.css.push_back(geom::Frame3::facing({x, 20, 3}, {0, -1, 0}));
        inst.test_points = points;
        inst.budget = budget;
        inst.ris_geom = {8, 4, 0.5};
        inst.power = 1.0;
        inst.sigma2 = 1e-9;
        return inst;
    }

    // Exhaustive optimum of the binary planning objective min_t c / (dx dy) over every
    // deployment of exactly L sites and every association honouring one BS per site.
    inline double brute_force_optimum(const plan::PlanningInstance &inst)
    {
        const plan::Coefficients k = plan::build_coefficients(inst);
        const std::size_t N = k.N, T = k.T, M = k.M;
        double best = 0.0;
        for (std::uint32_t mask = 0; mask < (1u << N); ++mask)
        {
            if (std::popcount(mask) != inst.budget)
                continue;
            std::vector<std::size_t> choice(T, 0); // index into the (m, n) options of each point
            std::vector<std::vector<plan::Association>> options(T);
            bool feasible = true;
            for (std::size_t t = 0; t < T; ++t)
            {
                for (std::size_t n = 0; n < N; ++n)
                    for (std::size_t m = 0; m < M; ++m)
                        if ((mask >> n & 1u) && k(t, m, n) > 0.0)
                            options[t].push_back({m, n});
                feasible = feasible && !options[t].empty();
            }
            if (!feasible)
                continue;
            for (;;)
            {
                plan::Deployment dep;
                dep.x_star.assign(N, 0);
                for (std::size_t n = 0; n < N; ++n)
                    dep.x_star[n] = (mask >> n) & 1u;
                dep.bs_of_ris.assign(N, -1);
                dep.assoc.assign(T, std::nullopt);
                bool ok = true;
                for (std::size_t t = 0; t < T && ok; ++t)
                {
                    const auto a = options[t][choice[t]];
                    int &owner = dep.bs_of_ris[a.n];
                    ok = owner < 0 || owner == static_cast<int>(a.m);
                    owner = static_cast<int>(a.m);
                    dep.assoc[t] = a;
                }
                if (ok)
                {
                    plan::detail::finalize_spans(inst, dep);
                    best = std::max(best, plan::plan_objective(inst, dep));
                }
                std::size_t t = 0;
                while (t < T && ++choice[t] == options[t].size())
                    choice[t++] = 0;
                if (t == T)
                    break;
            }
        }
        return best;
    }
}
