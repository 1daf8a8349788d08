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
#include "risa/rt.hpp"

#include <algorithm>
#include <thread>
#include <vector>

// Procedural station-like hall used as the ray-traced demonstration scene. It is a stand-in
// with the same ingredients as a real concourse (floor, outer walls, two platform blocks,
// pillar rows and a partial wall) and not a model of any particular building.
namespace risa::station
{
    using geom::Vec3;

    inline constexpr double hall_x = 60.0;
    inline constexpr double hall_y = 30.0;
    inline constexpr double wall_height = 10.0;
    // Partial wall at x in [35, 35.5], y in [0, 22]: the dead zone lies east of it.
    inline constexpr double partition_x = 35.0;
    inline constexpr double partition_end_y = 22.0;
    inline constexpr double partition_height = 6.0;

    struct Scene
    {
        rt::TriangleMesh mesh;
        plan::PlanningInstance instance;
        rt::GridSpec heatmap; // whole hall floor at user height
    };

    inline rt::TriangleMesh hall_mesh()
    {
        rt::TriangleMesh m;
        auto quad = [&](const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d) {
            m.add_triangle(a, b, c);
            m.add_triangle(a, c, d);
        };
        const double X = hall_x, Y = hall_y, H = wall_height;
        quad({0, 0, 0}, {X, 0, 0}, {X, Y, 0}, {0, Y, 0});     // floor
        quad({0, 0, 0}, {0, 0, H}, {X, 0, H}, {X, 0, 0});     // south wall
        quad({0, Y, 0}, {X, Y, 0}, {X, Y, H}, {0, Y, H});     // north wall
        quad({0, 0, 0}, {0, Y, 0}, {0, Y, H}, {0, 0, H});     // west wall
        quad({X, 0, 0}, {X, 0, H}, {X, Y, H}, {X, Y, 0});     // east wall
        m.add_box({8, 2, 0}, {30, 7, 1});                     // platform A
        m.add_box({8, 12, 0}, {30, 17, 1});                   // platform B
        for (double x : {12.0, 20.0, 28.0})                   // pillar rows on the west side
            for (double y : {9.5, 19.5})
                m.add_box({x - 0.3, y - 0.3, 0}, {x + 0.3, y + 0.3, H});
        for (double x : {44.0, 52.0})                         // pillars inside the dead zone
            m.add_box({x - 0.3, 10.7, 0}, {x + 0.3, 11.3, H});
        m.add_box({partition_x, 0, 0}, {partition_x + 0.5, partition_end_y, partition_height});
        return m;
    }

    // Candidate sites at 5.5 m: twelve on the north wall east of the partition, five on the
    // east wall and three on the north wall west of it (which cannot reach the dead zone).
    inline std::vector<geom::Frame3> candidate_sites(double height)
    {
        std::vector<geom::Frame3> out;
        for (double x = 36.0; x <= 58.0 + 1e-9; x += 2.0)
            out.push_back(geom::Frame3::facing({x, hall_y, height}, {0, -1, 0}));
        for (double y = 20.0; y <= 28.0 + 1e-9; y += 2.0)
            out.push_back(geom::Frame3::facing({hall_x, y, height}, {-1, 0, 0}));
        for (double x : {20.0, 26.0, 32.0})
            out.push_back(geom::Frame3::facing({x, hall_y, height}, {0, -1, 0}));
        return out;
    }

    // Test points: a 10 x 5 grid over the dead zone east of the partition.
    inline std::vector<Vec3> dead_zone_points(double height)
    {
        std::vector<Vec3> out;
        for (int iy = 0; iy < 5; ++iy)
            for (int ix = 0; ix < 10; ++ix)
                out.push_back({38.0 + 2.2 * ix, 2.0 + 4.0 * iy, height});
        return out;
    }

    // Line-of-sight masks of an instance over a mesh.
    inline void fill_visibility(plan::PlanningInstance &inst, const rt::TriangleMesh &mesh)
    {
        const std::size_t M = inst.num_bs(), N = inst.num_cs(), T = inst.num_tp();
        inst.bs_cs_visible.assign(M * N, 0);
        inst.cs_tp_visible.assign(N * T, 0);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t n = 0; n < N; ++n)
                inst.bs_cs_visible[m * N + n] = !rt::occluded(mesh, inst.bss[m].frame.origin, inst.css[n].origin);
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t t = 0; t < T; ++t)
                inst.cs_tp_visible[n * T + t] = !rt::occluded(mesh, inst.css[n].origin, inst.test_points[t]);
    }

    inline Scene make_scene(const ExperimentConfig &c, int budget)
    {
        c.validate();
        Scene s;
        s.mesh = hall_mesh();
        auto &inst = s.instance;
        inst.bss.push_back({geom::Frame3::facing({3, 25, c.bs_height_m}, {1, 0, 0}), c.bs_antennas});
        inst.bss.push_back({geom::Frame3::facing({3, 5, c.bs_height_m}, {1, 0, 0}), c.bs_antennas});
        inst.css = candidate_sites(c.cs_height_m);
        inst.test_points = dead_zone_points(c.tp_height_m);
        if (budget < 1 || static_cast<std::size_t>(budget) > inst.css.size())
            throw InputError("station budget must satisfy 1 <= L <= " + std::to_string(inst.css.size()));
        inst.budget = budget;
        inst.ris_geom = c.ris_geometry();
        inst.beta = c.beta;
        inst.power = c.power_w();
        inst.sigma2 = c.noise_w();
        fill_visibility(inst, s.mesh);
        s.heatmap = {0.0, hall_x, 0.0, hall_y, c.tp_height_m, 120, 60};
        return s;
    }

    inline rt::RtOptions rt_options(const ExperimentConfig &c)
    {
        rt::RtOptions o;
        o.max_bounces = c.max_bounces;
        o.phase_draws = c.phase_draws;
        o.reflection_loss_db = c.reflection_loss_db;
        o.beta = c.beta;
        o.frequency_hz = c.frequency_ghz * 1e9;
        o.reference_gain = c.reference_gain;
        o.mu = c.mu;
        o.noise_w = c.noise_w();
        o.power_cap_w = c.power_cap_w();
        o.threads = c.threads > 0 ? c.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        return o;
    }
}
