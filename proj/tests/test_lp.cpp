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

#include "oracles.hpp"
#include "risa/lp.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace risa;
using namespace risa::lp;

TEST(Simplex, TextbookMaximum)
{
    // max 3a + 5b; a <= 4; 2b <= 12; 3a + 2b <= 18 -> 36 at (2, 6)
    LinearProgram p;
    p.add_variable(0, inf, 3);
    p.add_variable(0, inf, 5);
    p.add_le({{0, 1}}, 4);
    p.add_le({{1, 2}}, 12);
    p.add_le({{0, 3}, {1, 2}}, 18);
    const auto s = solve(p);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_NEAR(s.objective, 36, 1e-9);
    EXPECT_NEAR(s.v[0], 2, 1e-9);
    EXPECT_NEAR(s.v[1], 6, 1e-9);
}

TEST(Simplex, InfeasibleAndUnbounded)
{
    LinearProgram p;
    p.add_variable(0, inf, 1);
    p.add_le({{0, 1}}, -1);
    EXPECT_EQ(solve(p).status, Status::infeasible);

    LinearProgram q;
    q.add_variable(0, inf, 1);
    q.add_variable(0, inf, 0);
    q.add_le({{0, 1}, {1, -1}}, 1);
    EXPECT_EQ(solve(q).status, Status::unbounded);
}

TEST(Simplex, EqualityAndFreeVariables)
{
    // max x - y with x + y = 2, x free, -3 <= y <= 1 -> x = 5, y = -3 -> 8
    LinearProgram p;
    p.add_variable(-inf, inf, 1);
    p.add_variable(-3, 1, -1);
    p.add_eq({{0, 1}, {1, 1}}, 2);
    const auto s = solve(p);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_NEAR(s.objective, 8, 1e-9);
    EXPECT_LE(s.max_violation, 1e-9);
}

TEST(Simplex, UpperBoundedOnly)
{
    LinearProgram p;
    p.add_variable(-inf, 3, 2);
    const auto s = solve(p);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_NEAR(s.v[0], 3, 1e-12);
}

TEST(Simplex, DegenerateCycleCandidate)
{
    // Beale's cycling example; Dantzig without safeguards cycles.
    LinearProgram p;
    p.add_variable(0, inf, 0.75);
    p.add_variable(0, inf, -150);
    p.add_variable(0, inf, 0.02);
    p.add_variable(0, inf, -6);
    p.add_le({{0, 0.25}, {1, -60}, {2, -0.04}, {3, 9}}, 0);
    p.add_le({{0, 0.5}, {1, -90}, {2, -0.02}, {3, 3}}, 0);
    p.add_le({{2, 1}}, 1);
    const auto s = solve(p);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_NEAR(s.objective, 0.05, 1e-9);
}

TEST(Simplex, MatchesVertexEnumeration)
{
    Rng rng(2024);
    int optimal = 0;
    for (int i = 0; i < 300; ++i)
    {
        const LinearProgram p = oracle::random_small_lp(rng);
        const auto ref = oracle::vertex_enumeration(p);
        const auto s = solve(p);
        if (!ref)
        {
            EXPECT_EQ(s.status, Status::infeasible) << "case " << i;
            continue;
        }
        ASSERT_EQ(s.status, Status::optimal) << "case " << i;
        EXPECT_NEAR(s.objective, *ref, 1e-6 * (1 + std::abs(*ref))) << "case " << i;
        EXPECT_LE(s.max_violation, 1e-7) << "case " << i;
        ++optimal;
    }
    EXPECT_GT(optimal, 100);
}

TEST(Simplex, TieBreakOnOptimalFace)
{
    // max a + b on a + b <= 1; the tie-break prefers b.
    LinearProgram p;
    p.add_variable(0, 1, 1);
    p.add_variable(0, 1, 1);
    p.add_le({{0, 1}, {1, 1}}, 1);
    p.tie_break = {0.0, 1.0};
    const auto s = solve(p);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_NEAR(s.objective, 1.0, 1e-12);
    EXPECT_NEAR(s.v[1], 1.0, 1e-12);
    p.tie_break = {1.0, 0.0};
    EXPECT_NEAR(solve(p).v[0], 1.0, 1e-12);
}

TEST(Simplex, TieBreakMatchesLexicographicEnumeration)
{
    Rng rng(77);
    for (int i = 0; i < 300; ++i)
    {
        LinearProgram p = oracle::random_small_lp(rng);
        // coarse costs make ties common
        for (double &c : p.objective)
            c = std::round(c / 2.0);
        p.tie_break.resize(p.num_variables());
        for (double &c : p.tie_break)
            c = rng.uniform(-1.0, 1.0);
        const auto ref = oracle::vertex_enumeration_lex(p);
        const auto s = solve(p);
        if (!ref)
        {
            EXPECT_EQ(s.status, Status::infeasible) << "case " << i;
            continue;
        }
        ASSERT_EQ(s.status, Status::optimal) << "case " << i;
        EXPECT_NEAR(s.objective, ref->primary, 1e-6 * (1 + std::abs(ref->primary))) << "case " << i;
        double tie = 0.0;
        for (std::size_t j = 0; j < s.v.size(); ++j)
            tie += p.tie_break[j] * s.v[j];
        EXPECT_NEAR(tie, ref->secondary, 1e-6 * (1 + std::abs(ref->secondary)))
            << "case " << i;
    }
}

TEST(Simplex, BoundFlipsOnly)
{
    // No rows: every variable goes to the bound its cost prefers.
    LinearProgram p;
    p.add_variable(-2, 3, 1);
    p.add_variable(-2, 3, -1);
    p.add_variable(1, 1, 5);
    const auto s = solve(p);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_EQ(s.v, (std::vector<double>{3, -2, 1}));
}

TEST(Simplex, Deterministic)
{
    Rng rng(5);
    const LinearProgram p = oracle::random_small_lp(rng);
    const auto a = solve(p), b = solve(p);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.pivots, b.pivots);
}

TEST(Simplex, RejectsMalformed)
{
    LinearProgram p;
    p.add_variable(1, 0, 1);
    EXPECT_THROW(solve(p), InputError);
    LinearProgram q;
    q.add_variable();
    q.add_le({{3, 1}}, 1);
    EXPECT_THROW(solve(q), InputError);
}

TEST(MaxMin, EpigraphOfTwoLines)
{
    // max_v min(v, 2 - v) on [0, 2] -> 1 at v = 1
    LinearProgram p;
    p.add_variable(0, 2);
    const auto lifted = maxmin_epigraph({{{{0, 1.0}}, 0.0}, {{{0, -1.0}}, 2.0}}, p);
    ASSERT_EQ(lifted.num_variables(), 2u);
    const auto s = solve(lifted);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_NEAR(s.v[1], 1.0, 1e-12);
    EXPECT_NEAR(s.v[0], 1.0, 1e-12);
}

TEST(LpText, RoundTrip)
{
    Rng rng(9);
    for (int i = 0; i < 20; ++i)
    {
        LinearProgram p = oracle::random_small_lp(rng);
        p.upper[0] = inf;
        std::stringstream ss;
        write_lp(ss, p);
        const LinearProgram q = read_lp(ss);
        const auto a = solve(p), b = solve(q);
        EXPECT_EQ(a.status, b.status);
        if (a.status == Status::optimal)
        {
            EXPECT_NEAR(a.objective, b.objective, 1e-9);
        }
    }
    std::stringstream bad("vars 1\nmax 1 2\n");
    EXPECT_THROW(read_lp(bad), InputError);
}
