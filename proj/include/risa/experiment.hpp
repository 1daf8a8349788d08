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

#include "risa/channel.hpp"
#include "risa/errors.hpp"
#include "risa/geom.hpp"
#include "risa/plan.hpp"
#include "risa/random.hpp"
#include "risa/report.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace risa
{
    // Experiment parameters. Physical quantities are stored in the units of the config file
    // (dBm, GHz, dB); conversion to linear watts happens in the accessors.
    struct ExperimentConfig
    {
        // radio
        double power_dbm = 28.0;
        double frequency_ghz = 26.0;
        double noise_dbm = -80.0;
        double beta = 2.0;
        double mu = 0.5;

        // area
        double width_m = 100.0;
        double depth_m = 100.0;
        double bs_height_m = 5.5;
        double cs_height_m = 5.5;
        double tp_height_m = 1.5;

        // network
        int num_bs = 2;
        std::vector<int> num_cs{10, 20, 30};
        int num_test_points = 100;
        int bs_antennas = 2;
        int ris_h = 350;
        int ris_v = 175;
        double ris_spacing = 0.5;

        // sweep
        std::vector<int> budgets{2, 4, 6, 8, 10};
        std::uint64_t first_seed = 1;
        int runs = 1000;
        int baseline_draws = 100;
        bool raytrace = false;
        int threads = 0; // 0: hardware concurrency

        // planner
        double bca_tol = 1e-6;
        int bca_max_outer = 100;
        double inner_tol = 1e-8;
        int inner_max = 50;

        // ray tracer
        int max_bounces = 2;
        int phase_draws = 100;
        double reflection_loss_db = 6.0;
        double power_cap_dbm = -65.0;
        bool reference_gain = true;

        double power_w() const { return dbm_to_watt(power_dbm); }
        double noise_w() const { return dbm_to_watt(noise_dbm); }
        double power_cap_w() const { return dbm_to_watt(power_cap_dbm); }
        channel::ArrayGeometry ris_geometry() const { return {ris_h, ris_v, ris_spacing}; }

        plan::BcaOptions bca_options() const
        {
            plan::BcaOptions o;
            o.tol = bca_tol;
            o.max_outer = bca_max_outer;
            o.inner_tol = inner_tol;
            o.max_inner = inner_max;
            return o;
        }

        void validate() const
        {
            auto finite = [](double v, const char *name) {
                if (!std::isfinite(v))
                    throw InputError(std::string("config: ") + name + " must be finite");
            };
            finite(power_dbm, "radio.power_dbm");
            finite(noise_dbm, "radio.noise_dbm");
            finite(power_cap_dbm, "raytrace.power_cap_dbm");
            finite(reflection_loss_db, "raytrace.reflection_loss_db");
            if (!(frequency_ghz > 0.0) || !std::isfinite(frequency_ghz))
                throw InputError("config: radio.frequency_ghz must be positive");
            if (!(beta > 0.0) || !(mu > 0.0))
                throw InputError("config: radio.beta and radio.mu must be positive");
            if (!(width_m > 0.0) || !(depth_m > 0.0))
                throw InputError("config: area dimensions must be positive");
            if (num_bs < 1 || num_bs > 4)
                throw InputError("config: network.num_bs must be in [1, 4] (one BS per area corner)");
            if (num_test_points < 1)
                throw InputError("config: network.num_test_points must be positive");
            if (bs_antennas < 1 || ris_h < 1 || ris_v < 1 || !(ris_spacing > 0.0))
                throw InputError("config: array sizes and spacing must be positive");
            if (num_cs.empty() || budgets.empty())
                throw InputError("config: network.num_cs and sweep.budgets must be non-empty");
            for (int n : num_cs)
                if (n < 1)
                    throw InputError("config: network.num_cs entries must be positive");
            const int max_n = *std::max_element(num_cs.begin(), num_cs.end());
            for (int l : budgets)
                if (l < 1 || l > max_n)
                    throw InputError("config: sweep.budgets entries must satisfy 1 <= L <= max(num_cs)");
            if (runs < 1 || baseline_draws < 0 || threads < 0)
                throw InputError("config: sweep.runs must be positive, draws and threads non-negative");
            if (!(bca_tol > 0.0) || bca_max_outer < 1 || !(inner_tol > 0.0) || inner_max < 1)
                throw InputError("config: planner tolerances and caps must be positive");
            if (max_bounces < 0 || max_bounces > 2 || phase_draws < 1)
                throw InputError("config: raytrace.max_bounces must be in [0, 2] and phase_draws positive");
        }
    };

    namespace detail
    {
        using nlohmann::json;

        template <class T>
        void take(const json &section, const std::string &path, const char *key, T &out, std::set<std::string> &seen)
        {
            seen.insert(key);
            if (!section.contains(key))
                return;
            try
            {
                out = section.at(key).get<T>();
            }
            catch (const json::exception &)
            {
                throw InputError("config: " + path + "." + key + " has the wrong type");
            }
        }

        inline void reject_unknown(const json &section, const std::string &path, const std::set<std::string> &seen)
        {
            for (auto it = section.begin(); it != section.end(); ++it)
                if (!seen.count(it.key()))
                    throw InputError("config: unknown key '" + (path.empty() ? "" : path + ".") + it.key() + "'");
        }
    }

    inline ExperimentConfig config_from_json(const nlohmann::json &j)
    {
        using detail::take;
        if (!j.is_object())
            throw InputError("config: top level must be an object");
        ExperimentConfig c;
        const std::set<std::string> sections{"radio", "area", "network", "sweep", "planner", "raytrace"};
        detail::reject_unknown(j, "", sections);
        auto section = [&](const char *name) {
            if (!j.contains(name))
                return nlohmann::json::object();
            if (!j.at(name).is_object())
                throw InputError(std::string("config: section '") + name + "' must be an object");
            return j.at(name);
        };
        {
            const auto s = section("radio");
            std::set<std::string> seen;
            take(s, "radio", "power_dbm", c.power_dbm, seen);
            take(s, "radio", "frequency_ghz", c.frequency_ghz, seen);
            take(s, "radio", "noise_dbm", c.noise_dbm, seen);
            take(s, "radio", "beta", c.beta, seen);
            take(s, "radio", "mu", c.mu, seen);
            detail::reject_unknown(s, "radio", seen);
        }
        {
            const auto s = section("area");
            std::set<std::string> seen;
            take(s, "area", "width_m", c.width_m, seen);
            take(s, "area", "depth_m", c.depth_m, seen);
            take(s, "area", "bs_height_m", c.bs_height_m, seen);
            take(s, "area", "cs_height_m", c.cs_height_m, seen);
            take(s, "area", "tp_height_m", c.tp_height_m, seen);
            detail::reject_unknown(s, "area", seen);
        }
        {
            const auto s = section("network");
            std::set<std::string> seen;
            take(s, "network", "num_bs", c.num_bs, seen);
            take(s, "network", "num_cs", c.num_cs, seen);
            take(s, "network", "num_test_points", c.num_test_points, seen);
            take(s, "network", "bs_antennas", c.bs_antennas, seen);
            take(s, "network", "ris_h", c.ris_h, seen);
            take(s, "network", "ris_v", c.ris_v, seen);
            take(s, "network", "ris_spacing", c.ris_spacing, seen);
            detail::reject_unknown(s, "network", seen);
        }
        {
            const auto s = section("sweep");
            std::set<std::string> seen;
            take(s, "sweep", "budgets", c.budgets, seen);
            take(s, "sweep", "first_seed", c.first_seed, seen);
            take(s, "sweep", "runs", c.runs, seen);
            take(s, "sweep", "baseline_draws", c.baseline_draws, seen);
            take(s, "sweep", "raytrace", c.raytrace, seen);
            take(s, "sweep", "threads", c.threads, seen);
            detail::reject_unknown(s, "sweep", seen);
        }
        {
            const auto s = section("planner");
            std::set<std::string> seen;
            take(s, "planner", "bca_tol", c.bca_tol, seen);
            take(s, "planner", "bca_max_outer", c.bca_max_outer, seen);
            take(s, "planner", "inner_tol", c.inner_tol, seen);
            take(s, "planner", "inner_max", c.inner_max, seen);
            detail::reject_unknown(s, "planner", seen);
        }
        {
            const auto s = section("raytrace");
            std::set<std::string> seen;
            take(s, "raytrace", "max_bounces", c.max_bounces, seen);
            take(s, "raytrace", "phase_draws", c.phase_draws, seen);
            take(s, "raytrace", "reflection_loss_db", c.reflection_loss_db, seen);
            take(s, "raytrace", "power_cap_dbm", c.power_cap_dbm, seen);
            take(s, "raytrace", "reference_gain", c.reference_gain, seen);
            detail::reject_unknown(s, "raytrace", seen);
        }
        c.validate();
        return c;
    }

    inline nlohmann::json config_to_json(const ExperimentConfig &c)
    {
        return {
            {"radio",
             {{"power_dbm", c.power_dbm},
              {"frequency_ghz", c.frequency_ghz},
              {"noise_dbm", c.noise_dbm},
              {"beta", c.beta},
              {"mu", c.mu}}},
            {"area",
             {{"width_m", c.width_m},
              {"depth_m", c.depth_m},
              {"bs_height_m", c.bs_height_m},
              {"cs_height_m", c.cs_height_m},
              {"tp_height_m", c.tp_height_m}}},
            {"network",
             {{"num_bs", c.num_bs},
              {"num_cs", c.num_cs},
              {"num_test_points", c.num_test_points},
              {"bs_antennas", c.bs_antennas},
              {"ris_h", c.ris_h},
              {"ris_v", c.ris_v},
              {"ris_spacing", c.ris_spacing}}},
            {"sweep",
             {{"budgets", c.budgets},
              {"first_seed", c.first_seed},
              {"runs", c.runs},
              {"baseline_draws", c.baseline_draws},
              {"raytrace", c.raytrace},
              {"threads", c.threads}}},
            {"planner",
             {{"bca_tol", c.bca_tol},
              {"bca_max_outer", c.bca_max_outer},
              {"inner_tol", c.inner_tol},
              {"inner_max", c.inner_max}}},
            {"raytrace",
             {{"max_bounces", c.max_bounces},
              {"phase_draws", c.phase_draws},
              {"reflection_loss_db", c.reflection_loss_db},
              {"power_cap_dbm", c.power_cap_dbm},
              {"reference_gain", c.reference_gain}}},
        };
    }

    inline ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw InputError("cannot open config file '" + path + "'");
        nlohmann::json j;
        try
        {
            in >> j;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw InputError("config '" + path + "' is not valid JSON: " + e.what());
        }
        return config_from_json(j);
    }

    // Synthetic scenario: BSs in the area corners facing the centroid, test points uniform on
    // the user plane, candidate sites uniform along the perimeter walls with horizontal
    // normals pointing into the area.
    inline plan::PlanningInstance gen_synthetic(const ExperimentConfig &c, int num_cs, int budget, std::uint64_t seed)
    {
        c.validate();
        if (num_cs < 1 || budget < 1 || budget > num_cs)
            throw InputError("synthetic instance needs 1 <= L <= N");
        plan::PlanningInstance inst;
        const geom::Vec3 centroid{0.5 * c.width_m, 0.5 * c.depth_m, c.tp_height_m};
        const geom::Vec3 corners[4] = {{0, 0, c.bs_height_m},
                                      {c.width_m, c.depth_m, c.bs_height_m},
                                      {c.width_m, 0, c.bs_height_m},
                                      {0, c.depth_m, c.bs_height_m}};
        for (int m = 0; m < c.num_bs; ++m)
        {
            const geom::Vec3 &o = corners[m];
            const geom::Vec3 look{centroid.x - o.x, centroid.y - o.y, 0.0};
            inst.bss.push_back({geom::Frame3::facing(o, look), c.bs_antennas});
        }

        Rng tp_rng(stream_seed(seed, 1));
        for (int t = 0; t < c.num_test_points; ++t)
        {
            const double x = tp_rng.uniform(0.0, c.width_m);
            const double y = tp_rng.uniform(0.0, c.depth_m);
            inst.test_points.push_back({x, y, c.tp_height_m});
        }

        Rng cs_rng(stream_seed(seed, 2));
        const double perimeter = 2.0 * (c.width_m + c.depth_m);
        for (int n = 0; n < num_cs; ++n)
        {
            double s = cs_rng.uniform(0.0, perimeter);
            geom::Vec3 pos, normal;
            if (s < c.width_m)
                pos = {s, 0, c.cs_height_m}, normal = {0, 1, 0};
            else if ((s -= c.width_m) < c.depth_m)
                pos = {c.width_m, s, c.cs_height_m}, normal = {-1, 0, 0};
            else if ((s -= c.depth_m) < c.width_m)
                pos = {c.width_m - s, c.depth_m, c.cs_height_m}, normal = {0, -1, 0};
            else
            {
                s -= c.width_m;
                pos = {0, c.depth_m - s, c.cs_height_m}, normal = {1, 0, 0};
            }
            inst.css.push_back(geom::Frame3::facing(pos, normal));
        }

        inst.budget = budget;
        inst.ris_geom = c.ris_geometry();
        inst.beta = c.beta;
        inst.power = c.power_w();
        inst.sigma2 = c.noise_w();
        return inst;
    }
}
