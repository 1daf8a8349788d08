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

#include "risa/plan.hpp"
#include "risa/rt.hpp"
#include "rt_oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace risa::rt;
using risa::InputError;
using risa::Rng;
using risa::geom::Frame3;
using risa::geom::Vec3;
namespace geom = risa::geom;
namespace channel = risa::channel;
namespace plan = risa::plan;
using risa::oracle::plane_then_inside;
using risa::oracle::random_point;
using risa::oracle::random_scene;
using risa::oracle::segment_blocked;

namespace
{
    std::vector<double> lengths(const std::vector<PropagationPath> &ps)
    {
        std::vector<double> out;
        for (const auto &p : ps)
            out.push_back(p.length);
        std::sort(out.begin(), out.end());
        return out;
    }

    RadiatingSource isotropic_bs(const Vec3 &at, double power)
    {
        RadiatingSource s;
        s.frame = Frame3::facing(at, {1, 0, 0});
        s.isotropic = true;
        s.power = power;
        return s;
    }
}

TEST(Mesh, LoadsObjSubset)
{
    std::istringstream one("# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1 2 3\n");
    const TriangleMesh m = load_mesh(one);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_NEAR(m.normal(0).z, 1.0, 1e-15);

    std::istringstream empty("");
    EXPECT_TRUE(load_mesh(empty).empty());

    std::istringstream slashes("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2//2 3\n");
    EXPECT_EQ(load_mesh(slashes).size(), 1u);
}

TEST(Mesh, ErrorsCarryLineNumbers)
{
    auto message = [](const std::string &text) {
        std::istringstream in(text);
        try
        {
            load_mesh(in);
        }
        catch (const InputError &e)
        {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").find("line 4"), std::string::npos);
    EXPECT_NE(message("v 0 0\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n").find("zero-area"), std::string::npos);
    EXPECT_NE(message("v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 x\n").find("line 5"), std::string::npos);
    EXPECT_NE(message("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3 4\n").find("triangular"), std::string::npos);
}

TEST(Mesh, WriteThenLoadRoundTrips)
{
    TriangleMesh m;
    m.add_box({0, 0, 0}, {1, 2, 3});
    std::stringstream ss;
    write_mesh(ss, m);
    const TriangleMesh back = load_mesh(ss);
    ASSERT_EQ(back.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (int k = 0; k < 3; ++k)
            EXPECT_EQ(geom::distance(back.corner(i, k), m.corner(i, k)), 0.0);
    EXPECT_EQ(m.planes().size(), 6u);
}

TEST(RayTriangle, Examples)
{
    const Vec3 a{-1, -1, 0}, b{1, -1, 0}, c{0, 1, 0};
    const auto hit = ray_triangle({0, 0, -1}, {0, 0, 1}, a, b, c);
    ASSERT_TRUE(hit);
    EXPECT_DOUBLE_EQ(*hit, 1.0);
    EXPECT_FALSE(ray_triangle({0, 0, -1}, {1, 0, 0}, a, b, c));
    EXPECT_FALSE(ray_triangle({0, 0, 1}, {0, 0, 1}, a, b, c));
    EXPECT_TRUE(ray_triangle({-1, -1, -1}, {0, 0, 1}, a, b, c)); // vertex hit, edges inclusive
}

TEST(RayTriangle, MatchesPlaneThenInsideOracle)
{
    Rng rng(17);
    int hits = 0;
    for (int i = 0; i < 1000; ++i)
    {
        const Vec3 a = random_point(rng, -1, 1), b = random_point(rng, -1, 1), c = random_point(rng, -1, 1);
        const Vec3 o = random_point(rng, -3, 3);
        const double u = rng.uniform(), v = rng.uniform() * (1 - u);
        const Vec3 toward = a + (b - a) * u + (c - a) * v + random_point(rng, -0.3, 0.3) - o;
        const Vec3 d = geom::normalized(toward);
        const auto got = ray_triangle(o, d, a, b, c);
        const auto want = plane_then_inside(o, d, a, b, c);
        ASSERT_EQ(got.has_value(), want.has_value()) << "ray " << i;
        if (got)
        {
            ++hits;
            EXPECT_NEAR(*got, *want, 1e-9 * std::max(1.0, *want));
        }
    }
    EXPECT_GT(hits, 300);
}

TEST(Paths, EmptyMeshHasOnlyTheDirectPath)
{
    const TriangleMesh mesh;
    const auto ps = find_paths(mesh, {0, 0, 0}, {3, 4, 0}, 2);
    ASSERT_EQ(ps.size(), 1u);
    EXPECT_DOUBLE_EQ(ps[0].length, 5.0);
    EXPECT_EQ(ps[0].bounces(), 0u);
}

TEST(Paths, FloorReflection)
{
    TriangleMesh mesh;
    mesh.add_triangle({-10, -10, 0}, {10, -10, 0}, {10, 10, 0});
    mesh.add_triangle({-10, -10, 0}, {10, 10, 0}, {-10, 10, 0});
    const auto ps = find_paths(mesh, {0, 0, 1}, {2, 0, 1}, 2);
    ASSERT_EQ(ps.size(), 2u);
    EXPECT_DOUBLE_EQ(ps[0].length, 2.0);
    EXPECT_NEAR(ps[1].length, 2.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(geom::distance(ps[1].points[0], {1, 0, 0}), 0.0, 1e-12);
    EXPECT_EQ(find_paths(mesh, {0, 0, 1}, {2, 0, 1}, 0).size(), 1u);
    EXPECT_THROW(find_paths(mesh, {0, 0, 1}, {2, 0, 1}, 3), InputError);
}

// Closed shoebox census: 1 direct, 6 single bounces, both orders for each of the 3 pairs
// of opposite walls, and one order for each of the 12 pairs of adjacent walls. Mirroring
// across two perpendicular walls commutes, so the image is shared and only the order in
// which the line to it crosses the walls is realisable: 25 paths.
TEST(Paths, BoxSceneMatchesHandEnumeration)
{
    const Vec3 hi{10, 8, 4};
    TriangleMesh mesh;
    mesh.add_box({0, 0, 0}, hi);
    const Vec3 src{2, 3, 1.5}, dst{7, 6, 2.5};

    // wall w: axis w / 2, at 0 (even w) or at hi (odd w)
    auto mirror = [&](Vec3 p, int w) {
        const int axis = w / 2;
        double *c = axis == 0 ? &p.x : axis == 1 ? &p.y : &p.z;
        const double at = w % 2 == 0 ? 0.0 : (axis == 0 ? hi.x : axis == 1 ? hi.y : hi.z);
        *c = 2 * at - *c;
        return p;
    };
    std::vector<double> expected{geom::distance(src, dst)};
    for (int i = 0; i < 6; ++i)
        expected.push_back(geom::distance(mirror(src, i), dst));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (i != j && (i / 2 == j / 2 || i < j))
                expected.push_back(geom::distance(mirror(mirror(src, i), j), dst));
    std::sort(expected.begin(), expected.end());

    const auto ps = find_paths(mesh, src, dst, 2);
    ASSERT_EQ(ps.size(), 25u);
    ASSERT_EQ(expected.size(), 25u);
    const auto got = lengths(ps);
    for (std::size_t i = 0; i < got.size(); ++i)
        EXPECT_NEAR(got[i], expected[i], 1e-9);
    for (std::size_t i = 1; i < ps.size(); ++i)
        EXPECT_LE(ps[i - 1].bounces(), ps[i].bounces());
}

TEST(Paths, ReciprocityAndValidityOnFuzzedScenes)
{
    Rng rng(2024);
    std::size_t total = 0;
    for (int scene = 0; scene < 50; ++scene)
    {
        const TriangleMesh mesh = random_scene(rng);
        const Vec3 a = random_point(rng, -8, 8) + Vec3{0, 0, 9}, b = random_point(rng, -8, 8) + Vec3{0, 0, 9};
        const auto fwd = find_paths(mesh, a, b, 2), back = find_paths(mesh, b, a, 2);
        const auto lf = lengths(fwd), lb = lengths(back);
        ASSERT_EQ(lf.size(), lb.size()) << "scene " << scene;
        for (std::size_t i = 0; i < lf.size(); ++i)
            EXPECT_NEAR(lf[i], lb[i], 1e-9) << "scene " << scene;
        for (const auto &p : fwd)
        {
            std::vector<Vec3> pts{a};
            pts.insert(pts.end(), p.points.begin(), p.points.end());
            pts.push_back(b);
            double len = 0.0;
            for (std::size_t s = 0; s + 1 < pts.size(); ++s)
            {
                EXPECT_FALSE(segment_blocked(mesh, pts[s], pts[s + 1])) << "scene " << scene;
                len += geom::distance(pts[s], pts[s + 1]);
            }
            EXPECT_NEAR(len, p.length, 1e-9 * len);
        }
        total += fwd.size();
    }
    EXPECT_GT(total, 100u);
}

TEST(Pattern, ElementGain)
{
    EXPECT_DOUBLE_EQ(element_gain(0.0, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(element_gain(std::numbers::pi / 2, 0.5), 0.0);
    EXPECT_NEAR(element_gain(std::numbers::pi / 3, 0.5), 0.5, 1e-15);
    EXPECT_EQ(element_gain(2.0, 0.5), 0.0);
    EXPECT_THROW(element_gain(0.0, 0.0), InputError);
}

TEST(Pattern, RisBeampattern)
{
    RadiatingSource s;
    s.kind = SourceKind::ris;
    s.frame = Frame3::facing({0, 0, 0}, {0, 0, 1});
    s.geom = {1, 1, 0.5};
    s.config = channel::steering_config(s.geom, 0.0, 0.0);
    EXPECT_NEAR(ris_beampattern_gain(s, {0, 0, 1}), 1.0, 1e-15);
    EXPECT_EQ(ris_beampattern_gain(s, {0, 0, -1}), 0.0);

    s.geom = {16, 8, 0.5};
    const Vec3 dir = geom::normalized({0.3, -0.2, 0.8});
    const auto sf = geom::direction_frequencies(s.frame, dir);
    s.config = channel::steering_config(s.geom, sf.omega, sf.psi);
    const double expected = 128.0 * element_gain(angle_from(s.frame, dir), 0.5);
    EXPECT_NEAR(ris_beampattern_gain(s, dir), expected, 1e-9 * expected);

    s.config = channel::steering_config(s.geom, 0.0, 0.0);
    EXPECT_NEAR(ris_beampattern_gain(s, {0, 0, 1}), 128.0, 1e-9);
}

TEST(Pattern, BroadenedMeanWithin3dBOfModel)
{
    RadiatingSource s;
    s.kind = SourceKind::ris;
    s.frame = Frame3::facing({0, 0, 0}, {0, 0, 1});
    s.frame = Frame3{};
    s.geom = {32, 32, 0.5};
    const double nr = s.geom.n_elements();
    for (double k : {1.0, 2.0, 4.0})
    {
        const double dx = k * s.geom.min_span_x(), dy = k * s.geom.min_span_y();
        const channel::Range om{0.1 - dx / 2, 0.1 + dx / 2}, ps{-0.05 - dy / 2, -0.05 + dy / 2};
        s.config = channel::broadening_config(s.geom, om, ps);
        double sum = 0.0;
        for (int i = 0; i < 50; ++i)
            for (int j = 0; j < 50; ++j)
            {
                const double o = om.lo + (i + 0.5) * dx / 50, p = ps.lo + (j + 0.5) * dy / 50;
                const Vec3 dir{o, p, std::sqrt(1 - o * o - p * p)};
                sum += ris_beampattern_gain(s, dir) * nr / element_gain(angle_from(s.frame, dir), s.mu);
            }
        const double ratio_db = 10 * std::log10(sum / 2500 / channel::broadened_gain_g1(s.geom, dx, dy));
        EXPECT_LT(std::abs(ratio_db), 3.0) << "span factor " << k;
    }
}

TEST(Power, RandomPhaseCombination)
{
    const std::vector<double> one{3e-9};
    for (std::uint64_t seed : {1u, 2u, 99u})
        for (int draws : {1, 7, 100})
            EXPECT_EQ(received_power(one, draws, seed), 3e-9);
    EXPECT_EQ(received_power(std::vector<double>{}, 10, 1), 0.0);
    const std::vector<double> two{1e-9, 1e-9};
    EXPECT_NEAR(received_power(two, 1000, 5), 2e-9, 0.03 * 2e-9);
    EXPECT_EQ(received_power(two, 100, 5), received_power(two, 100, 5));
    EXPECT_THROW(received_power(two, 0, 5), InputError);
}

TEST(Power, ImpingingPower)
{
    EXPECT_EQ(ris_impinging_power(std::vector<double>{2.0}, 4, 10, 1), 8.0);
    EXPECT_EQ(ris_impinging_power(std::vector<double>{}, 4, 10, 1), 0.0);
    EXPECT_NEAR(ris_impinging_power(std::vector<double>{1.0, 1.0}, 4, 1000, 3), 8.0, 0.03 * 8.0);
}

TEST(Power, Association)
{
    EXPECT_EQ(associate(std::vector<double>{1e-9, 2e-9}), 1);
    EXPECT_EQ(associate(std::vector<double>{1e-9, 1e-9}), 0);
    EXPECT_EQ(associate(std::vector<double>{0.0}), 0);
    EXPECT_THROW(associate(std::vector<double>{}), InputError);
}

TEST(Power, FreeSpaceFollowsDistanceLaw)
{
    RtOptions opt;
    opt.reference_gain = false;
    opt.beta = 2.0;
    const TriangleMesh mesh;
    const std::vector<RadiatingSource> src{isotropic_bs({0, 0, 0}, 2.0)};
    const Vec3 dir = geom::normalized({1, 2, -0.5});
    for (double d : {1.0, 3.0, 10.0, 250.0})
    {
        const PointPower pp = point_power(mesh, src, 1, dir * d, opt, 1);
        EXPECT_NEAR(pp.per_bs[0], 2.0 / (d * d), 1e-9 * 2.0 / (d * d));
    }
}

TEST(Power, ReflectionLossScalesEachBounce)
{
    TriangleMesh box;
    box.add_box({0, 0, 0}, {10, 8, 4});
    const RadiatingSource src = isotropic_bs({2, 3, 1.5}, 1.0);
    const Vec3 dst{7, 6, 2.5};
    const auto paths = find_paths(box, src.frame.origin, dst, 2);
    RtOptions lossless;
    lossless.reflection_loss_db = 0.0;
    for (double loss_db : {3.0, 6.0, 10.0, 20.0})
    {
        RtOptions opt;
        opt.reflection_loss_db = loss_db;
        double total = 0.0, total_lossless = 0.0;
        for (const auto &p : paths)
        {
            const double ref = path_power(src, dst, p, lossless);
            const double got = path_power(src, dst, p, opt);
            EXPECT_NEAR(got, ref * std::pow(10.0, -loss_db * static_cast<double>(p.bounces()) / 10.0), 1e-12 * ref);
            total += got;
            total_lossless += ref;
        }
        // The direct path alone bounds the lossy total from below.
        EXPECT_LT(total, total_lossless);
        EXPECT_GT(total, path_power(src, dst, paths.front(), opt));
    }
}

TEST(Power, PathPowerBelowEirpAtClosestApproach)
{
    Rng rng(8);
    RtOptions opt;
    for (int scene = 0; scene < 10; ++scene)
    {
        const TriangleMesh mesh = random_scene(rng);
        RadiatingSource s;
        s.frame = Frame3::facing(random_point(rng, -5, 5) + Vec3{0, 0, 9}, random_point(rng, -1, 1));
        s.n_b = 4;
        s.power = 1.0;
        const Vec3 dst = random_point(rng, -5, 5) + Vec3{0, 0, 9};
        for (const auto &p : find_paths(mesh, s.frame.origin, dst, 2))
        {
            const Vec3 first = p.points.empty() ? dst : p.points.front();
            const double bound = eirp(s, first - s.frame.origin) * channel::pathgain(geom::distance(s.frame.origin, dst), opt.beta) *
                                 opt.hop_gain();
            EXPECT_LE(path_power(s, dst, p, opt), bound * (1 + 1e-12));
        }
    }
}

TEST(Power, BsBeamPeaksAtTarget)
{
    RadiatingSource s;
    s.frame = Frame3{};
    s.n_b = 4;
    s.power = 1.0;
    s.isotropic = true;
    const Vec3 target{3, 0, 4};
    s.precoder = bs_beam_toward(s.frame, s.n_b, s.bs_spacing, target);
    EXPECT_NEAR(eirp(s, target), 4.0, 1e-12);
    EXPECT_LT(eirp(s, {-3, 0, 4}), 4.0);
    s.precoder.clear();
    EXPECT_NEAR(eirp(s, {0, 0, 1}), 4.0, 1e-12);
}

namespace
{
    // BS behind a blocking wall from the region x in [15, 25], y in [-10, -2]; one candidate
    // site at y = 10 sees both.
    struct BlockedScene
    {
        TriangleMesh mesh;
        plan::PlanningInstance inst;
        GridSpec grid{15, 25, -10, -2, 1.5, 5, 4};

        BlockedScene()
        {
            mesh.add_box({10, -20, 0}, {11, 0, 6});
            inst.bss.push_back({Frame3::facing({0, 0, 3}, {1, 0, 0}), 2});
            inst.css.push_back(Frame3::facing({20, 10, 3}, {0, -1, 0}));
            for (int iy = 0; iy < grid.ny; ++iy)
                for (int ix = 0; ix < grid.nx; ++ix)
                    inst.test_points.push_back(grid.cell(ix, iy));
            inst.budget = 1;
            inst.ris_geom = {16, 8, 0.5};
            inst.power = 0.63;
            inst.sigma2 = 1e-11;
        }
    };
}

TEST(Heatmap, SingleCellEqualsPointPower)
{
    const BlockedScene sc;
    RtOptions opt;
    const auto dep = plan::random_baseline(sc.inst, 1, 1);
    const auto sources = deployment_sources(sc.mesh, sc.inst, dep, opt, 3);
    const GridSpec one{20, 22, -6, -4, 1.5, 1, 1};
    const auto rep = coverage_heatmap(sc.mesh, sources, 1, one, opt, 11);
    const PointPower pp = point_power(sc.mesh, sources, 1, one.cell(0, 0), opt, risa::stream_seed(11, 0));
    EXPECT_EQ(rep.points[0].power, pp.per_bs[0]);
    EXPECT_EQ(rep.points[0].snr, pp.per_bs[0] / opt.noise_w);
}

TEST(Heatmap, RisLiftsBlockedRegion)
{
    const BlockedScene sc;
    RtOptions opt;
    opt.max_bounces = 0;
    std::vector<RadiatingSource> bs_only{RadiatingSource{}};
    bs_only[0].frame = sc.inst.bss[0].frame;
    bs_only[0].n_b = 2;
    bs_only[0].power = sc.inst.power;
    const auto without = coverage_heatmap(sc.mesh, bs_only, 1, sc.grid, opt, 1);

    const auto dep = plan::random_baseline(sc.inst, 1, 1);
    const auto with_ris = coverage_heatmap(sc.mesh, deployment_sources(sc.mesh, sc.inst, dep, opt, 1), 1, sc.grid, opt, 1);
    EXPECT_EQ(without.min_snr, 0.0);
    EXPECT_GT(with_ris.min_snr, without.min_snr);
}

TEST(Heatmap, DeterministicAndThreadIndependent)
{
    const BlockedScene sc;
    RtOptions serial;
    RtOptions parallel = serial;
    parallel.threads = 4;
    const auto dep = plan::random_baseline(sc.inst, 1, 1);
    const auto sources = deployment_sources(sc.mesh, sc.inst, dep, serial, 1);
    const auto a = coverage_heatmap(sc.mesh, sources, 1, sc.grid, serial, 5);
    const auto b = coverage_heatmap(sc.mesh, sources, 1, sc.grid, parallel, 5);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i)
        EXPECT_EQ(a.points[i].power, b.points[i].power);

    std::ostringstream ca, cb;
    write_heatmap_csv(ca, a);
    write_heatmap_csv(cb, b);
    EXPECT_EQ(ca.str(), cb.str());
}

TEST(Evaluator, CachedPathsMatchOnTheFlyTracing)
{
    const BlockedScene sc;
    RtOptions opt;
    opt.threads = 2;
    const Evaluator ev(sc.mesh, sc.inst, opt);
    const auto dep = plan::random_baseline(sc.inst, 1, 1);
    const auto rep = ev.evaluate(dep, 9);
    const auto sources = deployment_sources(sc.mesh, sc.inst, dep, opt, 9);
    for (std::size_t t = 0; t < sc.inst.num_tp(); ++t)
    {
        const PointPower pp = point_power(sc.mesh, sources, 1, sc.inst.test_points[t], opt, risa::stream_seed(9, t));
        EXPECT_EQ(rep.points[t].power, pp.per_bs[0]);
    }
}

TEST(Output, PgmMappingAndHeader)
{
    EXPECT_EQ(pgm_level(0.0), 0);
    EXPECT_EQ(pgm_level(risa::dbm_to_watt(-130)), 0);
    EXPECT_EQ(pgm_level(risa::dbm_to_watt(-120)), 0);
    EXPECT_EQ(pgm_level(risa::dbm_to_watt(-65)), 255);
    EXPECT_EQ(pgm_level(risa::dbm_to_watt(-40)), 255);
    EXPECT_EQ(pgm_level(risa::dbm_to_watt(-92.5)), 128);

    risa::CoverageReport rep;
    rep.points.resize(6);
    const GridSpec g{0, 3, 0, 2, 1.5, 3, 2};
    std::ostringstream os;
    write_heatmap_pgm(os, rep, g);
    EXPECT_EQ(os.str().substr(0, 11), "P5\n3 2\n255\n");
    EXPECT_EQ(os.str().size(), 11u + 6u);

    std::ostringstream csv;
    write_heatmap_csv(csv, rep);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "x,y,power_dBm,snr_dB,serving_bs");
}
