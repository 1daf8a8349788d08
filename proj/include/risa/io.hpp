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

#include "risa/errors.hpp"
#include "risa/plan.hpp"
#include "risa/report.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

// JSON shapes of planning instances, deployments and coverage reports. All quantities are
// linear SI units (metres, watts).
namespace risa::io
{
    using nlohmann::json;

    namespace detail
    {
        inline void only_keys(const json &j, const std::string &what, std::initializer_list<const char *> keys)
        {
            if (!j.is_object())
                throw InputError(what + " must be an object");
            std::set<std::string> allowed(keys.begin(), keys.end());
            for (auto it = j.begin(); it != j.end(); ++it)
                if (!allowed.count(it.key()))
                    throw InputError(what + ": unknown key '" + it.key() + "'");
        }

        template <class T>
        T get(const json &j, const std::string &what, const char *key)
        {
            if (!j.contains(key))
                throw InputError(what + ": missing key '" + key + "'");
            try
            {
                return j.at(key).get<T>();
            }
            catch (const json::exception &)
            {
                throw InputError(what + "." + key + " has the wrong type");
            }
        }

        inline json vec(const geom::Vec3 &v) { return json::array({v.x, v.y, v.z}); }

        inline geom::Vec3 vec(const json &j, const std::string &what)
        {
            std::vector<double> v;
            try
            {
                v = j.get<std::vector<double>>();
            }
            catch (const json::exception &)
            {
                throw InputError(what + " must be an array of three numbers");
            }
            if (v.size() != 3 || !std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
                throw InputError(what + " must be an array of three finite numbers");
            return {v[0], v[1], v[2]};
        }

        inline json frame(const geom::Frame3 &f)
        {
            return {{"origin", vec(f.origin)}, {"axis_x", vec(f.axis_x)}, {"axis_y", vec(f.axis_y)}, {"axis_z", vec(f.axis_z)}};
        }

        // Either the full axis triple or just `normal` (axis_y then follows the vertical).
        inline geom::Frame3 frame(const json &j, const std::string &what)
        {
            if (j.contains("normal"))
            {
                only_keys(j, what, {"origin", "normal"});
                return geom::Frame3::facing(vec(j.at("origin"), what + ".origin"), vec(j.at("normal"), what + ".normal"));
            }
            only_keys(j, what, {"origin", "axis_x", "axis_y", "axis_z"});
            geom::Frame3 f;
            for (const char *k : {"origin", "axis_x", "axis_y", "axis_z"})
                if (!j.contains(k))
                    throw InputError(what + ": missing key '" + k + "'");
            f.origin = vec(j.at("origin"), what + ".origin");
            f.axis_x = vec(j.at("axis_x"), what + ".axis_x");
            f.axis_y = vec(j.at("axis_y"), what + ".axis_y");
            f.axis_z = vec(j.at("axis_z"), what + ".axis_z");
            if (!f.valid(1e-6))
                throw InputError(what + " axes are not orthonormal and right-handed");
            return f;
        }

        inline json range(const channel::Range &r) { return json::array({r.lo, r.hi}); }

        inline channel::Range range(const json &j, const std::string &what)
        {
            std::vector<double> v;
            try
            {
                v = j.get<std::vector<double>>();
            }
            catch (const json::exception &)
            {
                throw InputError(what + " must be [lo, hi]");
            }
            if (v.size() != 2 || !(v[0] <= v[1]))
                throw InputError(what + " must be [lo, hi] with lo <= hi");
            return {v[0], v[1]};
        }
    }

    inline json instance_to_json(const plan::PlanningInstance &inst)
    {
        json bss = json::array(), css = json::array(), tps = json::array();
        for (const auto &b : inst.bss)
        {
            json e = detail::frame(b.frame);
            e["n_b"] = b.n_b;
            bss.push_back(std::move(e));
        }
        for (const auto &f : inst.css)
            css.push_back(detail::frame(f));
        for (const auto &u : inst.test_points)
            tps.push_back(detail::vec(u));
        json j = {{"base_stations", bss},
                  {"candidate_sites", css},
                  {"test_points", tps},
                  {"budget", inst.budget},
                  {"ris", {{"n_h", inst.ris_geom.n_h}, {"n_v", inst.ris_geom.n_v}, {"spacing", inst.ris_geom.delta}}},
                  {"beta", inst.beta},
                  {"power_w", inst.power},
                  {"noise_w", inst.sigma2}};
        if (!inst.bs_cs_visible.empty())
            j["bs_cs_visible"] = inst.bs_cs_visible;
        if (!inst.cs_tp_visible.empty())
            j["cs_tp_visible"] = inst.cs_tp_visible;
        return j;
    }

    inline plan::PlanningInstance instance_from_json(const json &j)
    {
        using detail::get;
        const std::string w = "instance";
        detail::only_keys(j, w, {"base_stations", "candidate_sites", "test_points", "budget", "ris", "beta", "power_w",
                                 "noise_w", "bs_cs_visible", "cs_tp_visible"});
        plan::PlanningInstance inst;
        const auto bss = get<json>(j, w, "base_stations");
        if (!bss.is_array())
            throw InputError("instance.base_stations must be an array");
        for (std::size_t m = 0; m < bss.size(); ++m)
        {
            const std::string p = w + ".base_stations[" + std::to_string(m) + "]";
            json f = bss[m];
            if (!f.is_object())
                throw InputError(p + " must be an object");
            const int n_b = f.contains("n_b") ? get<int>(f, p, "n_b") : 1;
            f.erase("n_b");
            inst.bss.push_back({detail::frame(f, p), n_b});
        }
        const auto css = get<json>(j, w, "candidate_sites");
        if (!css.is_array())
            throw InputError("instance.candidate_sites must be an array");
        for (std::size_t n = 0; n < css.size(); ++n)
            inst.css.push_back(detail::frame(css[n], w + ".candidate_sites[" + std::to_string(n) + "]"));
        const auto tps = get<json>(j, w, "test_points");
        if (!tps.is_array())
            throw InputError("instance.test_points must be an array");
        for (std::size_t t = 0; t < tps.size(); ++t)
            inst.test_points.push_back(detail::vec(tps[t], w + ".test_points[" + std::to_string(t) + "]"));
        inst.budget = get<int>(j, w, "budget");
        const auto ris = get<json>(j, w, "ris");
        detail::only_keys(ris, "instance.ris", {"n_h", "n_v", "spacing"});
        inst.ris_geom = {get<int>(ris, "instance.ris", "n_h"), get<int>(ris, "instance.ris", "n_v"),
                         get<double>(ris, "instance.ris", "spacing")};
        inst.beta = get<double>(j, w, "beta");
        inst.power = get<double>(j, w, "power_w");
        inst.sigma2 = get<double>(j, w, "noise_w");
        if (j.contains("bs_cs_visible"))
            inst.bs_cs_visible = get<std::vector<std::uint8_t>>(j, w, "bs_cs_visible");
        if (j.contains("cs_tp_visible"))
            inst.cs_tp_visible = get<std::vector<std::uint8_t>>(j, w, "cs_tp_visible");
        plan::validate(inst);
        return inst;
    }

    inline json config_to_json(const channel::RisConfig &c)
    {
        if (c.separable())
            return {{"phase_x", c.phase_x}, {"phase_y", c.phase_y}};
        return {{"phases", c.phases}, {"amplitudes", c.amplitudes}};
    }

    inline channel::RisConfig ris_config_from_json(const json &j, const channel::ArrayGeometry &g, const std::string &what)
    {
        channel::RisConfig c;
        if (j.contains("phase_x"))
        {
            detail::only_keys(j, what, {"phase_x", "phase_y"});
            c.phase_x = detail::get<std::vector<double>>(j, what, "phase_x");
            c.phase_y = detail::get<std::vector<double>>(j, what, "phase_y");
            if (c.phase_x.size() != static_cast<std::size_t>(g.n_h) || c.phase_y.size() != static_cast<std::size_t>(g.n_v))
                throw InputError(what + ": separable phases must have n_h and n_v entries");
            c.phases.resize(static_cast<std::size_t>(g.n_elements()));
            c.amplitudes.assign(c.phases.size(), 1.0);
            for (int p = 0; p < g.n_v; ++p)
                for (int q = 0; q < g.n_h; ++q)
                    c.phases[static_cast<std::size_t>(p * g.n_h + q)] =
                        channel::wrap_phase(c.phase_x[static_cast<std::size_t>(q)] + c.phase_y[static_cast<std::size_t>(p)]);
        }
        else
        {
            detail::only_keys(j, what, {"phases", "amplitudes"});
            c.phases = detail::get<std::vector<double>>(j, what, "phases");
            c.amplitudes = detail::get<std::vector<double>>(j, what, "amplitudes");
            if (c.phases.size() != static_cast<std::size_t>(g.n_elements()))
                throw InputError(what + ": one phase per element expected");
        }
        c.validate();
        return c;
    }

    // Deployed sites with their BS, spans, frequency ranges and phases; per-point association
    // (null for an uncovered point).
    inline json deployment_to_json(const plan::Deployment &dep)
    {
        json sites = json::array(), assoc = json::array();
        for (std::size_t n : dep.deployed())
        {
            json s = {{"site", n}, {"bs", dep.bs_of_ris[n]}, {"dx", dep.dx[n]}, {"dy", dep.dy[n]}};
            if (n < dep.omega_range.size())
                s["omega"] = detail::range(dep.omega_range[n]), s["psi"] = detail::range(dep.psi_range[n]);
            if (dep.configs.count(n))
                s["config"] = config_to_json(dep.configs.at(n));
            sites.push_back(std::move(s));
        }
        for (const auto &a : dep.assoc)
            assoc.push_back(a ? json{{"bs", a->m}, {"site", a->n}} : json(nullptr));
        return {{"num_sites", dep.x_star.size()}, {"deployed", dep.deployed()}, {"sites", sites}, {"association", assoc}};
    }

    inline plan::Deployment deployment_from_json(const json &j, const plan::PlanningInstance &inst)
    {
        using detail::get;
        const std::string w = "deployment";
        detail::only_keys(j, w, {"num_sites", "deployed", "sites", "association"});
        const auto N = get<std::size_t>(j, w, "num_sites");
        if (N != inst.num_cs())
            throw InputError("deployment has " + std::to_string(N) + " sites but the instance has " + std::to_string(inst.num_cs()));
        const auto &g = inst.ris_geom;
        plan::Deployment dep;
        dep.x_star.assign(N, 0);
        dep.bs_of_ris.assign(N, -1);
        dep.dx.assign(N, g.min_span_x());
        dep.dy.assign(N, g.min_span_y());
        dep.omega_range.assign(N, {});
        dep.psi_range.assign(N, {});
        for (std::size_t n : get<std::vector<std::size_t>>(j, w, "deployed"))
        {
            if (n >= N)
                throw InputError("deployment.deployed: site " + std::to_string(n) + " out of range");
            dep.x_star[n] = 1;
        }
        const auto sites = get<json>(j, w, "sites");
        for (std::size_t i = 0; i < sites.size(); ++i)
        {
            const std::string p = w + ".sites[" + std::to_string(i) + "]";
            const json &s = sites[i];
            detail::only_keys(s, p, {"site", "bs", "dx", "dy", "omega", "psi", "config"});
            const auto n = get<std::size_t>(s, p, "site");
            if (n >= N || !dep.x_star[n])
                throw InputError(p + ": site is not deployed");
            dep.bs_of_ris[n] = get<int>(s, p, "bs");
            if (dep.bs_of_ris[n] < -1 || dep.bs_of_ris[n] >= static_cast<int>(inst.num_bs()))
                throw InputError(p + ".bs out of range");
            dep.dx[n] = get<double>(s, p, "dx");
            dep.dy[n] = get<double>(s, p, "dy");
            if (s.contains("omega"))
                dep.omega_range[n] = detail::range(s.at("omega"), p + ".omega");
            if (s.contains("psi"))
                dep.psi_range[n] = detail::range(s.at("psi"), p + ".psi");
            if (s.contains("config"))
                dep.configs[n] = ris_config_from_json(s.at("config"), g, p + ".config");
        }
        const auto assoc = get<json>(j, w, "association");
        if (!assoc.is_array() || assoc.size() != inst.num_tp())
            throw InputError("deployment.association must have one entry per test point");
        dep.assoc.assign(inst.num_tp(), std::nullopt);
        for (std::size_t t = 0; t < assoc.size(); ++t)
        {
            if (assoc[t].is_null())
                continue;
            const std::string p = w + ".association[" + std::to_string(t) + "]";
            detail::only_keys(assoc[t], p, {"bs", "site"});
            dep.assoc[t] = plan::Association{get<std::size_t>(assoc[t], p, "bs"), get<std::size_t>(assoc[t], p, "site")};
        }
        const auto bad = plan::check_deployment(inst, dep);
        for (const auto &b : bad)
            if (b.find("uncovered") == std::string::npos && b.find("budget") == std::string::npos)
                throw InputError("deployment is inconsistent with the instance: " + b);
        return dep;
    }

    // Ray-traced reports associate points with base stations only, so they omit serving_site.
    inline json report_to_json(const CoverageReport &rep, bool with_site = true)
    {
        json pts = json::array();
        for (const auto &p : rep.points)
        {
            json j{{"position", detail::vec(p.position)},
                   {"power_dbm", watt_to_dbm(p.power)},
                   {"snr_db", linear_to_db(p.snr)},
                   {"serving_bs", p.serving_bs}};
            if (with_site)
                j["serving_site"] = p.serving_ris;
            pts.push_back(std::move(j));
        }
        return {{"min_snr_db", linear_to_db(rep.min_snr)},
                {"mean_snr_db", linear_to_db(rep.mean_snr)},
                {"jfi", rep.jfi},
                {"points", pts}};
    }

    inline json read_json_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw InputError("cannot open '" + path + "'");
        try
        {
            return json::parse(in);
        }
        catch (const json::exception &e)
        {
            throw InputError("'" + path + "' is not valid JSON: " + e.what());
        }
    }

    inline void write_text_file(const std::string &path, const std::string &text)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw InputError("cannot write '" + path + "'");
        out << text;
        if (!out)
            throw std::runtime_error("write to '" + path + "' failed");
    }
}
