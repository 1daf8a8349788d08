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

#include "risa/channel.hpp"
#include "risa/random.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <numbers>

using namespace risa;
using namespace risa::channel;
using geom::Frame3;
using geom::Vec3;

namespace
{
    constexpr double kTol = 1e-12;

    void expect_near(cplx a, cplx b, double tol = kTol)
    {
        EXPECT_NEAR(a.real(), b.real(), tol);
        EXPECT_NEAR(a.imag(), b.imag(), tol);
    }

    ComplexMatrix random_matrix(Rng &rng, std::size_t r, std::size_t c)
    {
        ComplexMatrix m(r, c);
        for (auto &e : m.data)
            e = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        return m;
    }
}

TEST(ArrayResponse, Examples)
{
    const auto one = pla_response({1, 1, 0.5}, 0.3, -0.2);
    ASSERT_EQ(one.size(), 1u);
    expect_near(one[0], 1.0);
    const auto endfire = pla_response({2, 1, 0.5}, 1.0, 0.0);
    expect_near(endfire[1], -1.0);
    for (const auto &e : pla_response({2, 2, 0.5}, 0.0, 0.0))
        expect_near(e, 1.0);
    expect_near(ula_response(2, 0.5, 1.0)[1], -1.0);
    expect_near(ula_response(2, 0.5, 0.0)[1], 1.0);
    EXPECT_EQ(ula_response(1, 0.5, 0.3).size(), 1u);
}

TEST(ArrayResponse, IndexConventionAndUnitModulus)
{
    const ArrayGeometry g{3, 2, 0.5};
    const auto b = pla_response(g, 0.2, 0.7);
    ASSERT_EQ(b.size(), 6u);
    // element (p = 1, q = 2) sits at index 1 * 3 + 2
    EXPECT_NEAR(std::arg(b[5]), std::arg(std::polar(1.0, two_pi * 0.5 * (0.7 + 2 * 0.2))), 1e-12);
    for (const auto &e : b)
        EXPECT_NEAR(std::abs(e), 1.0, kTol);
}

TEST(PathGain, Values)
{
    EXPECT_DOUBLE_EQ(pathgain(1, 2), 1.0);
    EXPECT_DOUBLE_EQ(pathgain(10, 2), 0.01);
    EXPECT_NEAR(pathgain(100, 2), 1e-4, 1e-20);
    EXPECT_THROW(pathgain(0, 2), InputError);
}

TEST(Channels, RisUeExamples)
{
    const Frame3 f;
    expect_near(ris_ue_channel(f, {1, 1, 0.5}, {0, 0, 1}, 2)[0], 1.0);
    expect_near(ris_ue_channel(f, {1, 1, 0.5}, {0, 0, 10}, 2)[0], 0.1);
    const auto h = ris_ue_channel(f, {2, 1, 0.5}, {3, 0, 0}, 2);
    expect_near(h[1], -1.0 / 3.0);
    EXPECT_THROW(ris_ue_channel(f, {1, 1, 0.5}, {0, 0, -1}, 2), InputError);
    EXPECT_THROW(ris_ue_channel(f, {1, 1, 0.5}, f.origin, 2), InputError);
}

TEST(Channels, BsRisRankOne)
{
    const Frame3 ris;
    const Frame3 bs = Frame3::facing({4, 1, 10}, {-0.4, -0.1, -1});
    expect_near(bs_ris_channel(Frame3::facing({0, 0, 10}, {0, 0, -1}), 1, ris, {1, 1, 0.5}, 2)(0, 0), 0.1);
    const ComplexMatrix G = bs_ris_channel(bs, 4, ris, {4, 3, 0.5}, 2);
    Eigen::MatrixXcd E(G.rows, G.cols);
    for (std::size_t r = 0; r < G.rows; ++r)
        for (std::size_t c = 0; c < G.cols; ++c)
            E(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = G(r, c);
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(E);
    const auto s = svd.singularValues();
    EXPECT_GT(s(0) / std::max(s(1), 1e-300), 1e12);
    EXPECT_THROW(bs_ris_channel(Frame3::facing({0, 0, -3}, {0, 0, 1}), 2, ris, {2, 2, 0.5}, 2), InputError);
}

TEST(Mrt, Examples)
{
    ComplexMatrix g1(1, 2);
    g1(0, 0) = 1.0, g1(0, 1) = 1.0;
    const auto w = mrt_precoder(g1, 2.0);
    expect_near(w[0], 1.0, 1e-12);
    expect_near(w[1], 1.0, 1e-12);
    ComplexMatrix g2(1, 2);
    g2(0, 0) = 1.0;
    const auto w2 = mrt_precoder(g2, 1.0);
    EXPECT_NEAR(std::abs(w2[0]), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(w2[1]), 0.0, 1e-12);
    EXPECT_THROW(mrt_precoder(ComplexMatrix(2, 2), 1.0), InputError);
}

TEST(Mrt, MatchesSvdOracle)
{
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial)
    {
        const std::size_t r = 1 + rng.below(6), c = 1 + rng.below(4);
        const ComplexMatrix G = random_matrix(rng, r, c);
        const double P = rng.uniform(0.1, 5.0);
        const auto w = mrt_precoder(G, P);
        Eigen::MatrixXcd E(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j)
                E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = G(i, j);
        const double smax = Eigen::JacobiSVD<Eigen::MatrixXcd>(E).singularValues()(0);
        EXPECT_NEAR(vector_norm(w) * vector_norm(w), P, 1e-9);
        EXPECT_NEAR(vector_norm(G.apply(w)), std::sqrt(P) * smax, 1e-8 * (1 + smax));
    }
}

TEST(Snr, Examples)
{
    ComplexMatrix G(1, 1);
    G(0, 0) = 1.0;
    const ComplexVector h{1.0}, w{1.0}, w2{2.0};
    const RisConfig phi = RisConfig::uniform(1);
    EXPECT_DOUBLE_EQ(snr(h, phi, G, w, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(snr(h, phi, G, w2, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(snr(h, RisConfig::uniform(1, 0.0), G, w, 1.0), 0.0);
    EXPECT_THROW(snr(h, phi, G, ComplexVector{1.0, 1.0}, 1.0), InputError);
}

TEST(Snr, GlobalPhaseInvariance)
{
    Rng rng(3);
    const ArrayGeometry g{4, 2, 0.5};
    const Frame3 ris;
    const auto G = bs_ris_channel(Frame3::facing({2, 0, 8}, {-0.2, 0, -1}), 2, ris, g, 2);
    const auto h = ris_ue_channel(ris, g, {-3, 1, 6}, 2);
    auto w = mrt_precoder(G, 1.0);
    RisConfig cfg = RisConfig::uniform(8);
    for (auto &p : cfg.phases)
        p = rng.uniform(0, two_pi);
    const double base = snr(h, cfg, G, w, 1e-9);
    for (auto &e : w)
        e *= std::polar(1.0, 1.234);
    EXPECT_NEAR(snr(h, cfg, G, w, 1e-9), base, 1e-9 * base);
    for (auto &p : cfg.phases)
        p = wrap_phase(p + 0.77);
    EXPECT_NEAR(snr(h, cfg, G, w, 1e-9), base, 1e-9 * base);
}

TEST(Sinr, Examples)
{
    ComplexMatrix G(1, 1);
    G(0, 0) = 1.0;
    const ReflectedLink serving{{1.0}, RisConfig::uniform(1), G, {1.0}};
    const ReflectedLink dark{{1.0}, RisConfig::uniform(1, 0.0), G, {1.0}};
    const std::vector<ReflectedLink> s{serving};
    EXPECT_DOUBLE_EQ(sinr(s, {}, 1.0), snr(serving.h, serving.phi, G, serving.w, 1.0));
    const std::vector<std::vector<ReflectedLink>> one{{serving}}, off{{dark}};
    EXPECT_DOUBLE_EQ(sinr(s, one, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(sinr(s, off, 1.0), 1.0);
}

TEST(G1, Examples)
{
    const ArrayGeometry g{10, 10, 0.5};
    EXPECT_NEAR(broadened_gain_g1(g, 0.2, 0.2), 1e4, 1e-8);
    EXPECT_NEAR(broadened_gain_g1(g, 2, 2), 100, 1e-10);
    EXPECT_NEAR(broadened_gain_g1(g, 1, 0.5) / broadened_gain_g1(g, 2, 0.5), 2.0, 1e-12);
    EXPECT_THROW(broadened_gain_g1(g, 0.1, 0.2), InputError);
    const ArrayGeometry h{7, 3, 0.5};
    EXPECT_DOUBLE_EQ(broadened_gain_g1(h, h.min_span_x(), h.min_span_y()), 49.0 * 9.0);
}

TEST(Spans, Examples)
{
    const ArrayGeometry g{10, 4, 0.5};
    const Frame3 f;
    const std::vector<Vec3> one{{1, 2, 3}};
    const auto [dx, dy] = spans_for_subarea(f, g, one);
    EXPECT_DOUBLE_EQ(dx, 0.2);
    EXPECT_DOUBLE_EQ(dy, 0.5);
    const std::vector<Vec3> pair{{1, 0, 1}, {-1, 0, 1}};
    EXPECT_NEAR(spans_for_subarea(f, g, pair).first, std::numbers::sqrt2, 1e-12);
    const std::vector<Vec3> ray{{0, 0, 1}, {0, 0, 7}};
    EXPECT_DOUBLE_EQ(spans_for_subarea(f, g, ray).second, 0.5);
    EXPECT_THROW(spans_for_subarea(f, g, std::vector<Vec3>{}), InputError);
}

TEST(Broadening, TilingArithmetic)
{
    const ArrayGeometry g{32, 32, 0.5};
    const double m = g.min_span_x();
    EXPECT_EQ(subarray_tiling(g, m, m), (std::pair{1, 1}));
    EXPECT_EQ(subarray_tiling(g, 2 * m, m), (std::pair{2, 1}));
    const auto cfg = broadening_config(g, {0.1, 0.1 + m}, {-0.3, -0.3 + m});
    // a single tile is a plain linear phase toward the center
    const auto steer = broadening_config(g, {0.1, 0.1 + m}, {-0.3, -0.3 + m});
    EXPECT_EQ(cfg.phases, steer.phases);
    for (double a : cfg.amplitudes)
        EXPECT_EQ(a, 1.0);
    EXPECT_NEAR(array_pattern(g, cfg, 0.1 + 0.5 * m, -0.3 + 0.5 * m), 1024.0 * 1024.0, 1e-6);
    EXPECT_THROW(broadening_config(g, {0, 0.01}, {0, m}), InputError);
    EXPECT_THROW(broadening_config(g, {0.99, 1.2}, {0, m}), InputError);
}

TEST(Broadening, SeparableMatchesDensePattern)
{
    const ArrayGeometry g{8, 6, 0.5};
    RisConfig cfg = broadening_config(g, {-0.4, 0.3}, {0.0, 0.5});
    RisConfig dense = cfg;
    dense.phase_x.clear();
    dense.phase_y.clear();
    for (double o : {-0.5, -0.1, 0.2, 0.7})
        for (double p : {-0.3, 0.1, 0.4})
            EXPECT_NEAR(array_pattern(g, cfg, o, p), array_pattern(g, dense, o, p), 1e-8);
}

TEST(Broadening, MeanGainTracksG1)
{
    const ArrayGeometry g{32, 32, 0.5};
    for (double mult : {1.0, 2.0, 4.0})
    {
        const double span = mult * g.min_span_x();
        const Range r{-0.5 * span + 0.1, 0.5 * span + 0.1};
        const auto cfg = broadening_config(g, r, r);
        double sum = 0.0;
        const int n = 50;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                sum += array_pattern(g, cfg, r.lo + (i + 0.5) * span / n, r.lo + (j + 0.5) * span / n);
        const double mean = sum / (n * n);
        const double g1 = broadened_gain_g1(g, span, span);
        EXPECT_LT(std::abs(10 * std::log10(mean / g1)), 3.0) << "span multiple " << mult;
    }
}

TEST(Broadening, PeakCoherentGain)
{
    const ArrayGeometry g{8, 8, 0.5};
    const Frame3 ris;
    const Vec3 bs_pos{0, 0, 20}, user{0, 0, 5};
    const auto G = bs_ris_channel(Frame3::facing(bs_pos, {1, 0, 0}, {0, 0, 1}), 2, ris, g, 0.0);
    const auto w = mrt_precoder(G, 1.0);
    const auto h = ris_ue_channel(ris, g, user, 0.0);
    // BS and user on boresight: the zero-phase config is the steering config.
    const auto cfg = steering_config(g, 0.0, 0.0);
    const double gain = snr(h, cfg, G, w, 1.0);
    EXPECT_NEAR(10 * std::log10(gain / (64.0 * 64.0 * 2.0)), 0.0, 0.1);
}
