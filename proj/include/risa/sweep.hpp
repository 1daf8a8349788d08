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
#include "risa/io.hpp"
#include "risa/plan.hpp"
#include "risa/rt.hpp"
#include "risa/station.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

// Monte Carlo harness: plan every (N, L, seed) synthetic instance, evaluate it in the model
// and optionally by ray tracing, and aggregate per (N, L).
namespace risa::sweep
{
    // Floor of the synthetic area; the only surface of the synthetic scene.
    inline rt::TriangleMesh synthetic_mesh(const ExperimentConfig &c)
    {
        rt::TriangleMesh m;
        m.add_triangle({0, 0, 0}, {c.width_m, 0, 0}, {c.width_m, c.depth_m, 0});
        m.add_triangle({0, 0, 0}, {c.width_m, c.depth_m, 0}, {0, c.depth_m, 0});
        return m;
    }

    inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    struct Row
    {
        int n = 0, l = 0;
        std::uint64_t seed = 0;
        double min_snr_model_db = nan;
        double min_snr_rt_db = nan; // NaN when ray tracing is off
        double jfi = nan;           // ray-traced powers when traced, model powers otherwise
        int bca_iterations = 0;
        std::string error;          // empty on success

        // Not part of the results table: wall time varies between runs.
        double runtime_ms = 0.0;
        std::string warning;

        auto key() const { return std::tuple(n, l, seed); }
    };

    struct Aggregate
    {
        int n = 0, l = 0;
        int runs = 0, failed = 0;
        double mean_model_db = nan, std_model_db = nan;
        double mean_rt_db = nan, std_rt_db = nan;
        double mean_jfi = nan;
        double meets_threshold = nan; // share of successful runs at or above the threshold
    };

    inline Row run_one(const ExperimentConfig &c, int n, int l, std::uint64_t seed)
    {
        Row r;
        r.n = n;
        r.l = l;
        r.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        try
        {
            const plan::PlanningInstance inst = gen_synthetic(c, n, l, seed);
            const plan::PlanResult res = plan::risa(inst, c.bca_options());
            r.bca_iterations = res.relaxed.outer_iterations;
            r.warning = res.relaxed.warning;
            const CoverageReport model = plan::evaluate_plan_model(inst, res.deployment);
            r.min_snr_model_db = linear_to_db(model.min_snr);
            r.jfi = model.jfi;
            if (c.raytrace)
            {
                const rt::TriangleMesh mesh = synthetic_mesh(c);
                rt::RtOptions opt = station::rt_options(c);
                opt.threads = 1;
                const rt::Evaluator ev(mesh, inst, opt);
                const CoverageReport traced = ev.evaluate(res.deployment, seed);
                r.min_snr_rt_db = linear_to_db(traced.min_snr);
                r.jfi = traced.jfi;
            }
        }
        catch (const std::exception &e)
        {
            r.error = e.what();
            r.min_snr_model_db = r.min_snr_rt_db = r.jfi = nan;
        }
        r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }

    inline int resolve_threads(int requested)
    {
        if (requested > 0)
            return requested;
        return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }

    // Every (N, L <= N, seed) run, canonically sorted by (N, L, seed) whatever the thread count.
    inline std::vector<Row> run_sweep(const ExperimentConfig &c)
    {
        c.validate();
        std::vector<std::tuple<int, int, std::uint64_t>> jobs;
        for (int n : c.num_cs)
            for (int l : c.budgets)
                if (l <= n)
                    for (int s = 0; s < c.runs; ++s)
                        jobs.emplace_back(n, l, c.first_seed + static_cast<std::uint64_t>(s));
        std::vector<Row> rows(jobs.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();)
                rows[i] = run_one(c, std::get<0>(jobs[i]), std::get<1>(jobs[i]), std::get<2>(jobs[i]));
        };
        const int threads = std::min<int>(resolve_threads(c.threads), static_cast<int>(std::max<std::size_t>(1, jobs.size())));
        if (threads <= 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(worker);
            for (auto &t : pool)
                t.join();
        }
        std::sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) { return a.key() < b.key(); });
        return rows;
    }

    namespace detail
    {
        inline std::string num(double v, int precision = 6)
        {
            if (std::isnan(v))
                return "nan";
            if (std::isinf(v))
                return v < 0 ? "-inf" : "inf";
            std::ostringstream os;
            os << std::fixed << std::setprecision(precision) << v;
            return os.str();
        }

        // CSV field: quoted when it contains a delimiter, quote or newline.
        inline std::string field(const std::string &s)
        {
            if (s.find_first_of(",\"\n\r") == std::string::npos)
                return s;
            std::string out = "\"";
            for (char ch : s)
                out += ch == '"' ? std::string("\"\"") : std::string(1, ch == '\n' || ch == '\r' ? ' ' : ch);
            return out + "\"";
        }

        inline void mean_std(const std::vector<double> &v, double &mean, double &sd)
        {
            if (v.empty())
                return;
            double s = 0.0;
            for (double x : v)
                s += x;
            mean = s / static_cast<double>(v.size());
            double q = 0.0;
            for (double x : v)
                q += (x - mean) * (x - mean);
            sd = v.size() > 1 ? std::sqrt(q / static_cast<double>(v.size() - 1)) : 0.0;
        }
    }

    inline const char *csv_header = "N,L,seed,min_snr_model_dB,min_snr_rt_dB,jfi,bca_iterations,error";

    inline void write_rows_csv(std::ostream &os, const std::vector<Row> &rows)
    {
        os << csv_header << '\n';
        for (const auto &r : rows)
            os << r.n << ',' << r.l << ',' << r.seed << ',' << detail::num(r.min_snr_model_db) << ','
               << detail::num(r.min_snr_rt_db) << ',' << detail::num(r.jfi) << ',' << r.bca_iterations << ','
               << detail::field(r.error) << '\n';
    }

    inline nlohmann::json rows_to_json(const std::vector<Row> &rows)
    {
        auto val = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(detail::num(v)); };
        nlohmann::json out = nlohmann::json::array();
        for (const auto &r : rows)
            out.push_back({{"N", r.n},
                           {"L", r.l},
                           {"seed", r.seed},
                           {"min_snr_model_dB", val(r.min_snr_model_db)},
                           {"min_snr_rt_dB", val(r.min_snr_rt_db)},
                           {"jfi", val(r.jfi)},
                           {"bca_iterations", r.bca_iterations},
                           {"error", r.error}});
        return out;
    }

    // Per (N, L): means and sample standard deviations of the per-run dB values over the
    // successful runs (a run with -inf dB counts and drags the mean to -inf).
    inline std::vector<Aggregate> aggregate(const std::vector<Row> &rows, std::optional<double> threshold_db = {})
    {
        std::map<std::pair<int, int>, std::vector<const Row *>> groups;
        for (const auto &r : rows)
            groups[{r.n, r.l}].push_back(&r);
        std::vector<Aggregate> out;
        for (const auto &[key, rs] : groups)
        {
            Aggregate a;
            a.n = key.first;
            a.l = key.second;
            a.runs = static_cast<int>(rs.size());
            std::vector<double> model, traced, fair;
            int meets = 0;
            for (const Row *r : rs)
            {
                if (!r->error.empty())
                {
                    ++a.failed;
                    continue;
                }
                model.push_back(r->min_snr_model_db);
                if (!std::isnan(r->min_snr_rt_db))
                    traced.push_back(r->min_snr_rt_db);
                fair.push_back(r->jfi);
                const double judged = std::isnan(r->min_snr_rt_db) ? r->min_snr_model_db : r->min_snr_rt_db;
                if (threshold_db && judged >= *threshold_db)
                    ++meets;
            }
            detail::mean_std(model, a.mean_model_db, a.std_model_db);
            detail::mean_std(traced, a.mean_rt_db, a.std_rt_db);
            double ignore = 0.0;
            detail::mean_std(fair, a.mean_jfi, ignore);
            if (threshold_db && !model.empty())
                a.meets_threshold = static_cast<double>(meets) / static_cast<double>(model.size());
            out.push_back(a);
        }
        return out;
    }

    inline void write_aggregate_csv(std::ostream &os, const std::vector<Aggregate> &agg)
    {
        os << "N,L,runs,failed,mean_min_snr_model_dB,std_min_snr_model_dB,mean_min_snr_rt_dB,std_min_snr_rt_dB,"
              "mean_jfi,share_meeting_threshold\n";
        for (const auto &a : agg)
            os << a.n << ',' << a.l << ',' << a.runs << ',' << a.failed << ',' << detail::num(a.mean_model_db) << ','
               << detail::num(a.std_model_db) << ',' << detail::num(a.mean_rt_db) << ',' << detail::num(a.std_rt_db)
               << ',' << detail::num(a.mean_jfi) << ',' << detail::num(a.meets_threshold) << '\n';
    }

    // Tolerances, per-run iteration counts, wall times and warnings.
    inline nlohmann::json run_log(const ExperimentConfig &c, const std::vector<Row> &rows, double wall_ms)
    {
        nlohmann::json runs = nlohmann::json::array();
        for (const auto &r : rows)
        {
            nlohmann::json e = {{"N", r.n}, {"L", r.l}, {"seed", r.seed}, {"bca_iterations", r.bca_iterations},
                                {"runtime_ms", r.runtime_ms}};
            if (!r.warning.empty())
                e["warning"] = r.warning;
            if (!r.error.empty())
                e["error"] = r.error;
            runs.push_back(std::move(e));
        }
        return {{"config", config_to_json(c)},
                {"tolerances",
                 {{"bca_tol", c.bca_tol}, {"bca_max_outer", c.bca_max_outer}, {"inner_tol", c.inner_tol}, {"inner_max", c.inner_max}}},
                {"threads", resolve_threads(c.threads)},
                {"wall_ms", wall_ms},
                {"runs", runs}};
    }
}
