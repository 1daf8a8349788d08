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

#include "risa/experiment.hpp"
#include "risa/io.hpp"
#include "risa/plan.hpp"
#include "risa/rt.hpp"
#include "risa/station.hpp"
#include "risa/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace risa;

namespace
{
    enum Exit
    {
        ok = 0,
        invalid_input = 1,
        infeasible = 2,
        internal = 3
    };

    struct Common
    {
        std::string config;
        std::uint64_t seed = 1;
        std::string out_dir;
        std::string format = "csv";
        std::optional<double> snr_threshold_db;
    };

    ExperimentConfig load(const Common &o) { return o.config.empty() ? ExperimentConfig{} : load_config(o.config); }

    fs::path out_path(const Common &o, const std::string &name)
    {
        if (o.out_dir.empty())
            throw InputError("--out-dir is required");
        fs::create_directories(o.out_dir);
        return fs::path(o.out_dir) / name;
    }

    void write(const fs::path &p, const std::string &text) { io::write_text_file(p.string(), text); }

    std::string dump(const json &j) { return j.dump(2) + "\n"; }

    std::string report_csv(const CoverageReport &rep, bool with_site)
    {
        std::ostringstream os;
        os << "t,x,y,z,power_dBm,snr_dB,serving_bs" << (with_site ? ",serving_site\n" : "\n");
        for (std::size_t t = 0; t < rep.points.size(); ++t)
        {
            const auto &p = rep.points[t];
            os << t << ',' << std::fixed << std::setprecision(3) << p.position.x << ',' << p.position.y << ','
               << p.position.z << ',' << rt::format_db(watt_to_dbm(p.power)) << ',' << rt::format_db(linear_to_db(p.snr))
               << ',' << p.serving_bs;
            if (with_site)
                os << ',' << p.serving_ris;
            os << '\n';
        }
        return os.str();
    }

    void write_report(const Common &o, const std::string &stem, const CoverageReport &rep, bool with_site)
    {
        if (o.format == "json")
            write(out_path(o, stem + ".json"), dump(io::report_to_json(rep, with_site)));
        else
            write(out_path(o, stem + ".csv"), report_csv(rep, with_site));
    }

    std::size_t below(const CoverageReport &rep, double threshold_db)
    {
        std::size_t n = 0;
        for (const auto &p : rep.points)
            n += linear_to_db(p.snr) < threshold_db;
        return n;
    }

    plan::PlanningInstance read_instance(const std::string &path, std::optional<int> budget)
    {
        json j = io::read_json_file(path);
        if (budget && j.is_object())
            j["budget"] = *budget;
        return io::instance_from_json(j);
    }

    // Whole-scene grid at user height: mesh footprint (or test-point box) with ~1 m cells.
    rt::GridSpec default_grid(const rt::TriangleMesh &mesh, const plan::PlanningInstance &inst)
    {
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300, z = 0.0;
        auto take = [&](const geom::Vec3 &v) {
            x0 = std::min(x0, v.x), x1 = std::max(x1, v.x), y0 = std::min(y0, v.y), y1 = std::max(y1, v.y);
        };
        if (mesh.empty())
            for (const auto &u : inst.test_points)
                take(u);
        else
            for (const auto &v : mesh.vertices())
                take(v);
        for (const auto &u : inst.test_points)
            z += u.z / static_cast<double>(inst.num_tp());
        auto cells = [](double span) { return std::clamp(static_cast<int>(std::lround(span)), 1, 400); };
        return {x0, x1, y0, y1, z, cells(x1 - x0), cells(y1 - y0)};
    }

    rt::GridSpec parse_grid(const std::string &s)
    {
        std::vector<double> v;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ','))
        {
            try
            {
                std::size_t used = 0;
                v.push_back(std::stod(tok, &used));
                if (used != tok.size())
                    throw std::invalid_argument(tok);
            }
            catch (const std::exception &)
            {
                throw InputError("--grid expects x0,x1,y0,y1,z,nx,ny");
            }
        }
        if (v.size() != 7)
            throw InputError("--grid expects x0,x1,y0,y1,z,nx,ny");
        rt::GridSpec g{v[0], v[1], v[2], v[3], v[4], static_cast<int>(v[5]), static_cast<int>(v[6])};
        g.validate();
        return g;
    }

    int genscene(const Common &o, const std::string &scene, std::optional<int> num_cs, std::optional<int> budget)
    {
        const ExperimentConfig c = load(o);
        plan::PlanningInstance inst;
        rt::TriangleMesh mesh;
        if (scene == "station")
        {
            auto s = station::make_scene(c, budget.value_or(2));
            inst = std::move(s.instance);
            mesh = std::move(s.mesh);
        }
        else
        {
            const int n = num_cs.value_or(c.num_cs.front());
            int l = budget.value_or(0);
            if (!budget)
                for (int b : c.budgets)
                    if (b <= n)
                    {
                        l = b;
                        break;
                    }
            inst = gen_synthetic(c, n, l, o.seed);
            mesh = sweep::synthetic_mesh(c);
        }
        write(out_path(o, "instance.json"), dump(io::instance_to_json(inst)));
        std::ostringstream obj;
        rt::write_mesh(obj, mesh);
        write(out_path(o, "scene.obj"), obj.str());
        return ok;
    }

    int plan_cmd(const Common &o, const std::string &instance, std::optional<int> budget, const std::string &repair)
    {
        const ExperimentConfig c = load(o);
        const auto inst = read_instance(instance, budget);
        plan::RoundingOptions ro;
        ro.repair_greedy = repair == "greedy";
        const auto t0 = std::chrono::steady_clock::now();
        const plan::PlanResult r = plan::risa(inst, c.bca_options(), ro);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const CoverageReport rep = plan::evaluate_plan_model(inst, r.deployment);
        write(out_path(o, "deployment.json"), dump(io::deployment_to_json(r.deployment)));
        write_report(o, "model_report", rep, true);
        json log = {{"outer_iterations", r.relaxed.outer_iterations},
                    {"converged", r.relaxed.converged},
                    {"objective_trace", r.relaxed.trace},
                    {"relaxed_x", r.relaxed.x},
                    {"runtime_ms", ms},
                    {"tolerances", {{"bca_tol", c.bca_tol}, {"bca_max_outer", c.bca_max_outer}, {"inner_tol", c.inner_tol}, {"inner_max", c.inner_max}}}};
        if (!r.relaxed.warning.empty())
            log["warning"] = r.relaxed.warning;
        write(out_path(o, "run_log.json"), dump(log));
        std::cout << "min SNR (model) " << rt::format_db(linear_to_db(rep.min_snr)) << " dB, JFI " << rep.jfi << '\n';
        return ok;
    }

    int baseline_cmd(const Common &o, const std::string &instance, std::optional<int> budget, int draws)
    {
        const auto inst = read_instance(instance, budget);
        if (draws < 1)
            throw InputError("--draws must be positive");
        std::ostringstream csv;
        csv << "draw,seed,min_snr_model_dB,jfi,uncovered\n";
        json rows = json::array();
        for (int d = 0; d < draws; ++d)
        {
            const std::uint64_t seed = stream_seed(o.seed, static_cast<std::uint64_t>(d));
            const plan::Deployment dep = plan::random_baseline(inst, static_cast<std::size_t>(inst.budget), seed);
            const CoverageReport rep = plan::evaluate_plan_model(inst, dep);
            if (d == 0)
                write(out_path(o, "deployment.json"), dump(io::deployment_to_json(dep)));
            csv << d << ',' << seed << ',' << rt::format_db(linear_to_db(rep.min_snr)) << ',' << std::setprecision(6)
                << std::fixed << rep.jfi << ',' << dep.uncovered() << '\n';
            rows.push_back({{"draw", d}, {"seed", seed}, {"min_snr_model_dB", rt::format_db(linear_to_db(rep.min_snr))},
                            {"jfi", rep.jfi}, {"uncovered", dep.uncovered()}});
        }
        if (o.format == "json")
            write(out_path(o, "baseline.json"), dump(rows));
        else
            write(out_path(o, "baseline.csv"), csv.str());
        return ok;
    }

    int raytrace_cmd(const Common &o, const std::string &instance, const std::string &mesh_path,
                     const std::string &deployment, const std::string &grid)
    {
        const ExperimentConfig c = load(o);
        const auto inst = read_instance(instance, std::nullopt);
        const auto mesh = rt::load_mesh_file(mesh_path);
        const auto dep = io::deployment_from_json(io::read_json_file(deployment), inst);
        const rt::RtOptions opt = station::rt_options(c);
        const rt::GridSpec g = grid.empty() ? default_grid(mesh, inst) : parse_grid(grid);
        const auto sources = rt::deployment_sources(mesh, inst, dep, opt, o.seed);
        const CoverageReport map = rt::coverage_heatmap(mesh, sources, static_cast<int>(inst.num_bs()), g, opt, o.seed);
        std::ostringstream csv, pgm;
        rt::write_heatmap_csv(csv, map);
        rt::write_heatmap_pgm(pgm, map, g);
        write(out_path(o, "heatmap.csv"), csv.str());
        write(out_path(o, "heatmap.pgm"), pgm.str());
        const rt::Evaluator ev(mesh, inst, opt);
        write_report(o, "rt_report", ev.evaluate(dep, o.seed), false);
        return ok;
    }

    int sweep_cmd(const Common &o, std::optional<int> threads, std::optional<int> runs)
    {
        ExperimentConfig c = load(o);
        if (threads)
            c.threads = *threads;
        if (runs)
            c.runs = *runs;
        c.validate();
        const auto t0 = std::chrono::steady_clock::now();
        const auto rows = sweep::run_sweep(c);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (o.format == "json")
            write(out_path(o, "results.json"), dump(sweep::rows_to_json(rows)));
        else
        {
            std::ostringstream csv;
            sweep::write_rows_csv(csv, rows);
            write(out_path(o, "results.csv"), csv.str());
        }
        std::ostringstream agg;
        sweep::write_aggregate_csv(agg, sweep::aggregate(rows, o.snr_threshold_db));
        write(out_path(o, "summary.csv"), agg.str());
        write(out_path(o, "run_log.json"), dump(sweep::run_log(c, rows, ms)));
        std::size_t failed = 0;
        for (const auto &r : rows)
            failed += !r.error.empty();
        std::cout << rows.size() << " runs, " << failed << " failed\n";
        return ok;
    }

    int evaluate_cmd(const Common &o, const std::string &instance, const std::string &deployment, const std::string &mesh_path)
    {
        const ExperimentConfig c = load(o);
        const auto inst = read_instance(instance, std::nullopt);
        const auto dep = io::deployment_from_json(io::read_json_file(deployment), inst);
        std::vector<std::pair<std::string, CoverageReport>> reports{{"model", plan::evaluate_plan_model(inst, dep)}};
        if (!mesh_path.empty())
        {
            const auto mesh = rt::load_mesh_file(mesh_path);
            const rt::Evaluator ev(mesh, inst, station::rt_options(c));
            reports.emplace_back("raytrace", ev.evaluate(dep, o.seed));
        }
        std::ostringstream out;
        json j = json::object();
        out << "domain,min_snr_dB,mean_snr_dB,jfi,uncovered" << (o.snr_threshold_db ? ",below_threshold" : "") << '\n';
        for (const auto &[name, rep] : reports)
        {
            out << name << ',' << rt::format_db(linear_to_db(rep.min_snr)) << ',' << rt::format_db(linear_to_db(rep.mean_snr))
                << ',' << std::fixed << std::setprecision(6) << rep.jfi << ',' << dep.uncovered();
            json e = {{"min_snr_dB", rt::format_db(linear_to_db(rep.min_snr))},
                      {"mean_snr_dB", rt::format_db(linear_to_db(rep.mean_snr))},
                      {"jfi", rep.jfi},
                      {"uncovered", dep.uncovered()}};
            if (o.snr_threshold_db)
            {
                out << ',' << below(rep, *o.snr_threshold_db);
                e["below_threshold"] = below(rep, *o.snr_threshold_db);
                e["threshold_dB"] = *o.snr_threshold_db;
            }
            out << '\n';
            j[name] = e;
        }
        const std::string text = o.format == "json" ? dump(j) : out.str();
        if (o.out_dir.empty())
            std::cout << text;
        else
            write(out_path(o, o.format == "json" ? "metrics.json" : "metrics.csv"), text);
        return ok;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"RIS-aware network planning: synthetic scenes, planning, baselines, ray tracing and sweeps"};
    app.require_subcommand(1);
    Common o;
    auto common = [&](CLI::App *sub, bool out_required) {
        sub->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Seed");
        auto *od = sub->add_option("--out-dir", o.out_dir, "Output directory");
        if (out_required)
            od->required();
        sub->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--snr-threshold-db", o.snr_threshold_db, "Receiver sensitivity line (dB) to report against");
    };

    std::string scene = "synthetic", instance, mesh, deployment, repair, grid;
    std::optional<int> num_cs, budget, threads, runs;
    int draws = 100;

    auto *gen = app.add_subcommand("genscene", "Write a scene: instance JSON and OBJ mesh");
    common(gen, true);
    gen->add_option("--scene", scene, "synthetic or station")->check(CLI::IsMember({"synthetic", "station"}));
    gen->add_option("--num-cs", num_cs, "Candidate sites (synthetic)");
    gen->add_option("--budget", budget, "Surfaces to deploy");

    auto *pl = app.add_subcommand("plan", "Plan an instance");
    common(pl, true);
    pl->add_option("--instance", instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    pl->add_option("--budget", budget, "Override the instance budget");
    pl->add_option("--repair", repair, "Retry rounding with a site serving the uncovered point pinned")->check(CLI::IsMember({"greedy"}));

    auto *bl = app.add_subcommand("baseline", "Random deployment policy");
    common(bl, true);
    bl->add_option("--instance", instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    bl->add_option("--budget", budget, "Override the instance budget");
    bl->add_option("--draws", draws, "Random deployments to draw");

    auto *rtc = app.add_subcommand("raytrace", "Heatmap of a deployment over a mesh");
    common(rtc, true);
    rtc->add_option("--instance", instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    rtc->add_option("--mesh", mesh, "Scene OBJ")->required()->check(CLI::ExistingFile);
    rtc->add_option("--deployment", deployment, "Deployment JSON")->required()->check(CLI::ExistingFile);
    rtc->add_option("--grid", grid, "x0,x1,y0,y1,z,nx,ny");

    auto *sw = app.add_subcommand("sweep", "Monte Carlo sweep over N, L and seeds");
    common(sw, true);
    sw->add_option("--threads", threads, "Worker threads (0: all cores)");
    sw->add_option("--runs", runs, "Seeds per (N, L)");

    auto *ev = app.add_subcommand("evaluate", "Metrics of a deployment (model, and ray traced with --mesh)");
    common(ev, false);
    ev->add_option("--instance", instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    ev->add_option("--deployment", deployment, "Deployment JSON")->required()->check(CLI::ExistingFile);
    ev->add_option("--mesh", mesh, "Scene OBJ")->check(CLI::ExistingFile);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? ok : invalid_input;
    }

    try
    {
        if (*gen)
            return genscene(o, scene, num_cs, budget);
        if (*pl)
            return plan_cmd(o, instance, budget, repair);
        if (*bl)
            return baseline_cmd(o, instance, budget, draws);
        if (*rtc)
            return raytrace_cmd(o, instance, mesh, deployment, grid);
        if (*sw)
            return sweep_cmd(o, threads, runs);
        if (*ev)
            return evaluate_cmd(o, instance, deployment, mesh);
    }
    catch (const InputError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return invalid_input;
    }
    catch (const InfeasibleError &e)
    {
        std::cerr << "infeasible: " << e.what() << '\n';
        return infeasible;
    }
    catch (const std::exception &e)
    {
        std::cerr << "internal error: " << e.what() << '\n';
        return internal;
    }
    return internal;
}
