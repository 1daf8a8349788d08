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
#include "risa/lp.hpp"
#include "risa/random.hpp"
#include "risa/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace risa::plan
{
    using geom::Frame3;
    using geom::Vec3;

    struct BaseStation
    {
        Frame3 frame; // ULA along axis_x, boresight along axis_z
        int n_b = 2;
    };

    struct PlanningInstance
    {
        std::vector<BaseStation> bss;
        std::vector<Frame3> css; // candidate RIS sites
        std::vector<Vec3> test_points;
        int budget = 1; // number of RISs to deploy
        channel::ArrayGeometry ris_geom;
        double beta = 2.0;
        double power = 1.0;  // BS transmit power (W)
        double sigma2 = 1.0; // noise power (W)

        // Optional line-of-sight masks, empty meaning "all visible".
        // bs_cs_visible[m * N + n], cs_tp_visible[n * T + t].
        std::vector<std::uint8_t> bs_cs_visible;
        std::vector<std::uint8_t> cs_tp_visible;

        std::size_t num_bs() const { return bss.size(); }
        std::size_t num_cs() const { return css.size(); }
        std::size_t num_tp() const { return test_points.size(); }

        bool bs_sees_cs(std::size_t m, std::size_t n) const
        {
            return bs_cs_visible.empty() || bs_cs_visible[m * num_cs() + n] != 0;
        }
        bool cs_sees_tp(std::size_t n, std::size_t t) const
        {
            return cs_tp_visible.empty() || cs_tp_visible[n * num_tp() + t] != 0;
        }
    };

    // c[t][m][n] = d_mn^-beta d_n(u_t)^-beta where the BS-RIS-point chain is feasible, else 0.
    struct Coefficients
    {
        std::size_t T = 0, M = 0, N = 0;
        std::vector<double> c;

        double operator()(std::size_t t, std::size_t m, std::size_t n) const { return c[(t * M + m) * N + n]; }
        double &operator()(std::size_t t, std::size_t m, std::size_t n) { return c[(t * M + m) * N + n]; }

        bool servable(std::size_t t, std::size_t n) const
        {
            for (std::size_t m = 0; m < M; ++m)
                if ((*this)(t, m, n) > 0.0)
                    return true;
            return false;
        }

        // BS with the largest coefficient for (t, n); lowest index on ties.
        std::size_t best_bs(std::size_t t, std::size_t n) const
        {
            std::size_t best = 0;
            for (std::size_t m = 1; m < M; ++m)
                if ((*this)(t, m, n) > (*this)(t, best, n))
                    best = m;
            return best;
        }
    };

    inline Coefficients build_coefficients(const PlanningInstance &inst)
    {
        Coefficients k;
        k.T = inst.num_tp();
        k.M = inst.num_bs();
        k.N = inst.num_cs();
        k.c.assign(k.T * k.M * k.N, 0.0);
        for (std::size_t n = 0; n < k.N; ++n)
        {
            const Frame3 &ris = inst.css[n];
            for (std::size_t m = 0; m < k.M; ++m)
            {
                const Vec3 &b = inst.bss[m].frame.origin;
                if (!geom::fronting(ris, b) || !inst.bs_sees_cs(m, n))
                    continue;
                const double g_bs = channel::pathgain(geom::distance(b, ris.origin), inst.beta);
                for (std::size_t t = 0; t < k.T; ++t)
                {
                    const Vec3 &u = inst.test_points[t];
                    if (!geom::fronting(ris, u) || !inst.cs_sees_tp(n, t))
                        continue;
                    k(t, m, n) = g_bs * channel::pathgain(geom::distance(u, ris.origin), inst.beta);
                }
            }
        }
        return k;
    }

    inline void validate(const PlanningInstance &inst)
    {
        if (inst.bss.empty())
            throw InputError("instance needs at least one base station");
        if (inst.css.empty())
            throw InputError("instance needs at least one candidate site");
        if (inst.test_points.empty())
            throw InputError("instance needs at least one test point");
        if (inst.budget < 1 || static_cast<std::size_t>(inst.budget) > inst.css.size())
            throw InputError("budget L must satisfy 1 <= L <= N");
        inst.ris_geom.validate();
        if (!(inst.beta > 0.0) || !(inst.power > 0.0) || !(inst.sigma2 > 0.0) || !std::isfinite(inst.power) ||
            !std::isfinite(inst.sigma2))
            throw InputError("beta, power and noise must be positive and finite");
        for (const auto &b : inst.bss)
        {
            if (!b.frame.valid())
                throw InputError("base station frame is not orthonormal and right-handed");
            if (b.n_b < 1)
                throw InputError("base station needs at least one antenna");
        }
        for (const auto &f : inst.css)
            if (!f.valid())
                throw InputError("candidate site frame is not orthonormal and right-handed");
        if (!inst.bs_cs_visible.empty() && inst.bs_cs_visible.size() != inst.num_bs() * inst.num_cs())
            throw InputError("BS-CS visibility mask has the wrong size");
        if (!inst.cs_tp_visible.empty() && inst.cs_tp_visible.size() != inst.num_cs() * inst.num_tp())
            throw InputError("CS-test point visibility mask has the wrong size");
        for (const auto &cs : inst.css)
        {
            for (const auto &u : inst.test_points)
                if (geom::distance(cs.origin, u) == 0.0)
                    throw InputError("test point coincides with a candidate site");
            for (const auto &b : inst.bss)
                if (geom::distance(cs.origin, b.frame.origin) == 0.0)
                    throw InputError("base station coincides with a candidate site");
        }
        const Coefficients k = build_coefficients(inst);
        for (std::size_t t = 0; t < k.T; ++t)
        {
            bool ok = false;
            for (std::size_t n = 0; n < k.N && !ok; ++n)
                ok = k.servable(t, n);
            if (!ok)
                throw InfeasibleError("test point " + std::to_string(t) +
                                      " is not fronted by any candidate site that is itself fronted by a base station");
        }
    }

    // Spatial frequencies of every test point at every candidate site, plus the widest
    // frequency gap from each point to any other point the site can serve.
    struct SpatialTable
    {
        std::size_t T = 0, N = 0;
        std::vector<double> omega, psi;     // [t * N + n]
        std::vector<double> width_x, width_y; // max_k |omega_t - omega_k| over servable k

        std::size_t idx(std::size_t t, std::size_t n) const { return t * N + n; }
    };

    inline SpatialTable build_spatial_table(const PlanningInstance &inst, const Coefficients &k)
    {
        SpatialTable s;
        s.T = k.T;
        s.N = k.N;
        s.omega.assign(s.T * s.N, 0.0);
        s.psi.assign(s.T * s.N, 0.0);
        s.width_x.assign(s.T * s.N, 0.0);
        s.width_y.assign(s.T * s.N, 0.0);
        for (std::size_t n = 0; n < s.N; ++n)
        {
            std::vector<std::size_t> served;
            for (std::size_t t = 0; t < s.T; ++t)
            {
                const auto sf = geom::spatial_frequencies(inst.css[n], inst.test_points[t]);
                s.omega[s.idx(t, n)] = sf.omega;
                s.psi[s.idx(t, n)] = sf.psi;
                if (k.servable(t, n))
                    served.push_back(t);
            }
            for (std::size_t t : served)
            {
                double wx = 0.0, wy = 0.0;
                for (std::size_t q : served)
                {
                    wx = std::max(wx, std::abs(s.omega[s.idx(t, n)] - s.omega[s.idx(q, n)]));
                    wy = std::max(wy, std::abs(s.psi[s.idx(t, n)] - s.psi[s.idx(q, n)]));
                }
                s.width_x[s.idx(t, n)] = wx;
                s.width_y[s.idx(t, n)] = wy;
            }
        }
        return s;
    }

    // Relaxed iterate of the planning problem. y is stored densely as [t][m][n].
    struct RelaxedSolution
    {
        std::size_t T = 0, M = 0, N = 0;
        std::vector<double> x;
        std::vector<double> y;
        std::vector<double> dx, dy;
        std::vector<double> zx, zy;
        std::vector<double> trace; // objective after every outer iteration
        int outer_iterations = 0;
        bool converged = false;
        std::string warning;

        double y_at(std::size_t t, std::size_t m, std::size_t n) const { return y[(t * M + m) * N + n]; }

        // sum_m y[t][m][n]
        double served_share(std::size_t t, std::size_t n) const
        {
            double s = 0.0;
            for (std::size_t m = 0; m < M; ++m)
                s += y_at(t, m, n);
            return s;
        }
    };

    // min_t sum_{m,n} y c / (dx dy)
    inline double relaxed_objective(const Coefficients &k, std::span<const double> y, std::span<const double> dx,
                                    std::span<const double> dy)
    {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < k.T; ++t)
        {
            double s = 0.0;
            for (std::size_t m = 0; m < k.M; ++m)
                for (std::size_t n = 0; n < k.N; ++n)
                {
                    const double yv = y[(t * k.M + m) * k.N + n];
                    if (yv != 0.0)
                        s += yv * k(t, m, n) / (dx[n] * dy[n]);
                }
            worst = std::min(worst, s);
        }
        return worst;
    }

    struct XyBlock
    {
        std::vector<double> x;
        std::vector<double> y; // [t][m][n]
        double objective = 0.0;
        std::size_t pivots = 0;
    };

    struct XyOptions
    {
        // Second stage: among max-min optimal (x, y) maximise the total utility, each point's
        // coefficients normalised by its best one so no single point dominates.
        bool lexicographic = true;
        // Carry the span constraints for the current dx, dy (off for the plain relaxation bound).
        bool span_constraints = true;
    };

    namespace detail
    {
        inline void require_deltas(const PlanningInstance &inst, std::span<const double> dx, std::span<const double> dy)
        {
            if (dx.size() != inst.num_cs() || dy.size() != inst.num_cs())
                throw InputError("span vectors must have one entry per candidate site");
            const auto &g = inst.ris_geom;
            for (std::size_t n = 0; n < dx.size(); ++n)
                if (dx[n] < g.min_span_x() * (1 - 1e-9) || dy[n] < g.min_span_y() * (1 - 1e-9))
                    throw InputError("span under minimum beamwidth");
        }
    }

    // Joint (x, y) block with spans fixed: the max-min LP over
    //   sum_{m,n} y_tmn = 1,  sum_m y_tmn <= x_n,  sum_n x_n = L,  0 <= x <= 1,
    //   sum_m y_tmn * width(t, n) <= delta_n  (both axes),
    // and y_tmn = 0 wherever c_tmn = 0. For each (t, n) only the BS with the largest
    // coefficient gets a variable: every other BS shares the same constraints with a
    // smaller objective coefficient, so dropping it leaves the optimum unchanged.
    inline XyBlock solve_xy_block(const PlanningInstance &inst, const Coefficients &k, const SpatialTable &sp,
                                  std::span<const double> dx, std::span<const double> dy, const XyOptions &opt = {})
    {
        detail::require_deltas(inst, dx, dy);
        const std::size_t T = k.T, M = k.M, N = k.N;

        lp::LinearProgram prog;
        std::vector<std::size_t> xvar(N);
        for (std::size_t n = 0; n < N; ++n)
            xvar[n] = prog.add_variable(0.0, 1.0);

        struct YVar
        {
            std::size_t t, m, n, var;
            double gain; // c / (dx dy), scaled
        };
        std::vector<YVar> yv;
        double gmax = 0.0;
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t n = 0; n < N; ++n)
                if (k.servable(t, n))
                    gmax = std::max(gmax, k(t, k.best_bs(t, n), n) / (dx[n] * dy[n]));
        if (!(gmax > 0.0))
            throw InfeasibleError("no feasible BS-RIS-test point link in the instance");

        std::vector<std::vector<std::size_t>> by_point(T);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t n = 0; n < N; ++n)
            {
                if (!k.servable(t, n))
                    continue;
                double cap = lp::inf;
                if (opt.span_constraints)
                {
                    const double wx = sp.width_x[sp.idx(t, n)], wy = sp.width_y[sp.idx(t, n)];
                    if (wx > 0.0)
                        cap = std::min(cap, dx[n] / wx);
                    if (wy > 0.0)
                        cap = std::min(cap, dy[n] / wy);
                    if (cap >= 1.0)
                        cap = lp::inf;
                }
                const std::size_t m = k.best_bs(t, n);
                const std::size_t var = prog.add_variable(0.0, cap);
                yv.push_back({t, m, n, var, k(t, m, n) / (dx[n] * dy[n]) / gmax});
                by_point[t].push_back(yv.size() - 1);
            }

        for (const auto &v : yv)
            prog.add_le({{v.var, 1.0}, {xvar[v.n], -1.0}}, 0.0);
        for (std::size_t t = 0; t < T; ++t)
        {
            lp::Terms row;
            for (std::size_t i : by_point[t])
                row.emplace_back(yv[i].var, 1.0);
            prog.add_eq(std::move(row), 1.0);
        }
        {
            lp::Terms row;
            for (std::size_t n = 0; n < N; ++n)
                row.emplace_back(xvar[n], 1.0);
            prog.add_eq(std::move(row), static_cast<double>(inst.budget));
        }

        std::vector<lp::LinearTerm> terms(T);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i : by_point[t])
                terms[t].coeffs.emplace_back(yv[i].var, yv[i].gain);

        lp::LinearProgram lifted = lp::maxmin_epigraph(terms, prog);
        if (opt.lexicographic)
        {
            lifted.tie_break.assign(lifted.num_variables(), 0.0);
            std::vector<double> best(T, 0.0);
            for (const auto &v : yv)
                best[v.t] = std::max(best[v.t], v.gain);
            for (const auto &v : yv)
                lifted.tie_break[v.var] = v.gain / best[v.t];
        }
        const lp::LpSolution sol = lp::solve(lifted);
        if (sol.status != lp::Status::optimal)
            throw InfeasibleError(std::string("relaxed (x, y) block is ") + lp::to_string(sol.status) +
                                  ": coverage (each test point served once) and budget (sum x = L) cannot hold together");

        XyBlock out;
        out.pivots = sol.pivots;
        out.x.resize(N);
        for (std::size_t n = 0; n < N; ++n)
            out.x[n] = std::clamp(sol.v[xvar[n]], 0.0, 1.0);
        out.y.assign(T * M * N, 0.0);
        for (const auto &v : yv)
            out.y[(v.t * M + v.m) * N + v.n] = std::max(0.0, sol.v[v.var]);
        out.objective = relaxed_objective(k, out.y, dx, dy);
        return out;
    }

    // Maximiser of 2 z - z^2 delta, elementwise.
    inline std::vector<double> qt_z_update(std::span<const double> delta)
    {
        std::vector<double> z(delta.size());
        for (std::size_t i = 0; i < delta.size(); ++i)
        {
            if (!(delta[i] > 0.0))
                throw InputError("quadratic transform needs positive spans");
            z[i] = 1.0 / delta[i];
        }
        return z;
    }

    enum class Axis
    {
        x,
        y
    };

    // Span block along one axis with y and z fixed:
    //   max_delta min_t sum_n w_tn (2 z_n - z_n^2 delta_n),   w_tn = sum_m y_tmn c_tmn / other_n,
    //   s.t. delta_n >= sum_m y_tmn width(t, n)  and  delta_n >= minimum beamwidth.
    // Solved as a max-min LP whose objective carries an extra -eps * sum(delta): every term is
    // nonincreasing in every delta_n, so the lower-bound point is optimal for both parts and the
    // tie among max-min optima (deltas of non-bottleneck sites) is resolved toward it.
    inline std::vector<double> solve_delta_block(const PlanningInstance &inst, const Coefficients &k,
                                                 const SpatialTable &sp, std::span<const double> y,
                                                 std::span<const double> z, Axis axis, std::span<const double> other)
    {
        const std::size_t T = k.T, M = k.M, N = k.N;
        if (z.size() != N || other.size() != N || y.size() != T * M * N)
            throw InputError("span block: dimension mismatch");
        const double floor = axis == Axis::x ? inst.ris_geom.min_span_x() : inst.ris_geom.min_span_y();
        const auto &width = axis == Axis::x ? sp.width_x : sp.width_y;

        lp::LinearProgram prog;
        for (std::size_t n = 0; n < N; ++n)
            prog.add_variable(floor, lp::inf);

        std::vector<double> w(T * N, 0.0);
        double wmax = 0.0;
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t n = 0; n < N; ++n)
            {
                double share = 0.0, acc = 0.0;
                for (std::size_t m = 0; m < M; ++m)
                {
                    const double yv = y[(t * M + m) * N + n];
                    share += yv;
                    acc += yv * k(t, m, n);
                }
                w[t * N + n] = acc / other[n];
                wmax = std::max(wmax, w[t * N + n]);
                const double need = share * width[sp.idx(t, n)];
                if (need > floor)
                    prog.add_ge({{n, 1.0}}, need);
            }
        if (wmax == 0.0)
            wmax = 1.0;

        std::vector<lp::LinearTerm> terms(T);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t n = 0; n < N; ++n)
            {
                const double a = w[t * N + n] / wmax;
                if (a == 0.0)
                    continue;
                terms[t].coeffs.emplace_back(n, -a * z[n] * z[n]);
                terms[t].constant += 2.0 * a * z[n];
            }

        lp::LinearProgram lifted = lp::maxmin_epigraph(terms, prog);
        constexpr double eps = 1e-7;
        for (std::size_t n = 0; n < N; ++n)
            lifted.objective[n] = -eps;
        const lp::LpSolution sol = lp::solve(lifted);
        if (sol.status != lp::Status::optimal)
            throw std::runtime_error(std::string("span block LP is ") + lp::to_string(sol.status));
        std::vector<double> delta(sol.v.begin(), sol.v.begin() + static_cast<long>(N));
        for (auto &d : delta)
            d = std::max(d, floor);
        return delta;
    }

    struct BcaOptions
    {
        double tol = 1e-6;       // relative outer objective change
        int max_outer = 100;
        double inner_tol = 1e-8; // relative change of the ratio objective in the span loops
        int max_inner = 50;
        double initial_span = 2.0;
    };

    namespace detail
    {
        // Ratio objective of the span subproblem: min_t sum w_tn / delta_n.
        inline double span_objective(const Coefficients &k, std::span<const double> y, std::span<const double> delta,
                                     std::span<const double> other)
        {
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < k.T; ++t)
            {
                double s = 0.0;
                for (std::size_t m = 0; m < k.M; ++m)
                    for (std::size_t n = 0; n < k.N; ++n)
                        s += y[(t * k.M + m) * k.N + n] * k(t, m, n) / (other[n] * delta[n]);
                worst = std::min(worst, s);
            }
            return worst;
        }

        inline bool close(double a, double b, double tol)
        {
            return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)) || a == b;
        }

        // Inner loop: z update then span solve, until the ratio objective settles.
        inline std::vector<double> span_loop(const PlanningInstance &inst, const Coefficients &k, const SpatialTable &sp,
                                             std::span<const double> y, std::vector<double> delta, Axis axis,
                                             std::span<const double> other, const BcaOptions &opt, std::vector<double> &z)
        {
            double prev = span_objective(k, y, delta, other);
            for (int it = 0; it < opt.max_inner; ++it)
            {
                z = qt_z_update(delta);
                std::vector<double> next = solve_delta_block(inst, k, sp, y, z, axis, other);
                const double obj = span_objective(k, y, next, other);
                if (obj >= prev)
                    delta = std::move(next);
                if (close(obj, prev, opt.inner_tol) || obj < prev)
                    break;
                prev = obj;
            }
            z = qt_z_update(delta);
            return delta;
        }
    }

    // Block coordinate ascent over {(x, y), dx, dy} on the relaxed planning problem.
    inline RelaxedSolution bca(const PlanningInstance &inst, const BcaOptions &opt = {})
    {
        validate(inst);
        if (!(opt.tol > 0.0))
            throw InputError("BCA tolerance must be positive");
        const Coefficients k = build_coefficients(inst);
        const SpatialTable sp = build_spatial_table(inst, k);
        const std::size_t N = k.N;

        RelaxedSolution s;
        s.T = k.T;
        s.M = k.M;
        s.N = k.N;
        const double init_x = std::max(opt.initial_span, inst.ris_geom.min_span_x());
        const double init_y = std::max(opt.initial_span, inst.ris_geom.min_span_y());
        s.dx.assign(N, init_x);
        s.dy.assign(N, init_y);

        double prev = -std::numeric_limits<double>::infinity();
        bool have = false;
        for (int outer = 1; outer <= opt.max_outer; ++outer)
        {
            s.outer_iterations = outer;
            XyBlock xy = solve_xy_block(inst, k, sp, s.dx, s.dy);
            // Keep the previous block when the LP returns a numerically worse point.
            if (!have || xy.objective >= relaxed_objective(k, s.y, s.dx, s.dy))
            {
                s.x = std::move(xy.x);
                s.y = std::move(xy.y);
                have = true;
            }
            s.dx = detail::span_loop(inst, k, sp, s.y, s.dx, Axis::x, s.dy, opt, s.zx);
            s.dy = detail::span_loop(inst, k, sp, s.y, s.dy, Axis::y, s.dx, opt, s.zy);

            const double obj = relaxed_objective(k, s.y, s.dx, s.dy);
            s.trace.push_back(obj);
            if (outer > 1 && detail::close(obj, prev, opt.tol))
            {
                s.converged = true;
                break;
            }
            prev = obj;
        }
        if (!s.converged)
            s.warning = "BCA reached the outer iteration cap without meeting the tolerance";
        return s;
    }

    struct Association
    {
        std::size_t m = 0;
        std::size_t n = 0;
        bool operator==(const Association &) const = default;
    };

    struct Deployment
    {
        std::vector<std::uint8_t> x_star;             // per candidate site
        std::vector<std::optional<Association>> assoc; // per test point
        std::vector<double> dx, dy;                    // per candidate site (meaningful where deployed)
        std::vector<channel::Range> omega_range, psi_range;
        std::map<std::size_t, channel::RisConfig> configs; // per deployed site
        std::vector<int> bs_of_ris;                    // per candidate site, -1 if none

        std::vector<std::size_t> deployed() const
        {
            std::vector<std::size_t> out;
            for (std::size_t n = 0; n < x_star.size(); ++n)
                if (x_star[n])
                    out.push_back(n);
            return out;
        }

        std::size_t uncovered() const
        {
            return static_cast<std::size_t>(std::count_if(assoc.begin(), assoc.end(), [](const auto &a) { return !a; }));
        }
    };

    namespace detail
    {
        // Spans, frequency ranges and broadening configs of every deployed site from its
        // served points. Idle sites get the minimum spans and a boresight beam.
        inline void finalize_spans(const PlanningInstance &inst, Deployment &dep)
        {
            const std::size_t N = inst.num_cs();
            const auto &g = inst.ris_geom;
            dep.dx.assign(N, g.min_span_x());
            dep.dy.assign(N, g.min_span_y());
            dep.omega_range.assign(N, {});
            dep.psi_range.assign(N, {});
            dep.configs.clear();
            std::vector<std::vector<Vec3>> served(N);
            for (std::size_t t = 0; t < dep.assoc.size(); ++t)
                if (dep.assoc[t])
                    served[dep.assoc[t]->n].push_back(inst.test_points[t]);
            for (std::size_t n = 0; n < N; ++n)
            {
                if (!dep.x_star[n])
                    continue;
                channel::Range om{-0.5 * g.min_span_x(), 0.5 * g.min_span_x()};
                channel::Range ps{-0.5 * g.min_span_y(), 0.5 * g.min_span_y()};
                if (!served[n].empty())
                {
                    const auto sub = channel::subarea_for_points(inst.css[n], g, served[n]);
                    dep.dx[n] = sub.dx;
                    dep.dy[n] = sub.dy;
                    om = channel::widen_to(sub.omega, g.min_span_x());
                    ps = channel::widen_to(sub.psi, g.min_span_y());
                }
                dep.omega_range[n] = om;
                dep.psi_range[n] = ps;
                dep.configs[n] = channel::broadening_config(g, om, ps);
            }
        }

        // Strongest (nearest) BS that can feed site n, or -1.
        inline int strongest_bs(const PlanningInstance &inst, std::size_t n)
        {
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < inst.num_bs(); ++m)
            {
                const Vec3 &b = inst.bss[m].frame.origin;
                if (!geom::fronting(inst.css[n], b) || !inst.bs_sees_cs(m, n))
                    continue;
                const double d = geom::distance(b, inst.css[n].origin);
                if (d < best_d)
                    best_d = d, best = static_cast<int>(m);
            }
            return best;
        }
    }

    struct RoundingOptions
    {
        // On an uncovered point, retry with a site that can serve it pinned into the
        // deployment and the uncovered points visited first.
        bool repair_greedy = false;
    };

    // Top-L deployment, then greedy association in test-point order: each point takes the
    // activated (m, n) with the largest relaxed y_tmn, respecting that a RIS, once claimed by a
    // BS, serves only that BS. Spans grow with every association; ties in y go to the larger
    // model gain c / (dx dy) under the grown spans, then lower n, then lower m.
    inline Deployment round_solution(const PlanningInstance &inst, const RelaxedSolution &relaxed,
                                      const RoundingOptions &opt = {})
    {
        const Coefficients k = build_coefficients(inst);
        const std::size_t T = k.T, M = k.M, N = k.N;
        if (relaxed.x.size() != N || relaxed.y.size() != T * M * N)
            throw InputError("relaxed solution does not match the instance");
        const auto L = static_cast<std::size_t>(inst.budget);

        Deployment dep;
        std::vector<std::size_t> order(N);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return relaxed.x[a] > relaxed.x[b]; });
        // Sites pinned by the repair pass come first, then the largest relaxed x.
        std::vector<std::size_t> pinned;
        auto select_sites = [&] {
            dep.x_star.assign(N, 0);
            for (std::size_t n : pinned)
                dep.x_star[n] = 1;
            for (std::size_t i = 0, used = pinned.size(); used < L; ++i)
                if (!dep.x_star[order[i]])
                    dep.x_star[order[i]] = 1, ++used;
        };
        select_sites();

        std::vector<std::size_t> visit(T);
        std::iota(visit.begin(), visit.end(), 0);

        std::vector<geom::SpatialFrequency> freq(T * N);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t n = 0; n < N; ++n)
                if (k.servable(t, n))
                    freq[t * N + n] = geom::spatial_frequencies(inst.css[n], inst.test_points[t]);
        const double min_x = inst.ris_geom.min_span_x(), min_y = inst.ris_geom.min_span_y();

        for (std::size_t attempt = 0;; ++attempt)
        {
            dep.assoc.assign(T, std::nullopt);
            dep.bs_of_ris.assign(N, -1);
            std::vector<channel::Range> om(N, {lp::inf, -lp::inf}), ps(N, {lp::inf, -lp::inf});
            std::vector<std::size_t> missing;
            for (std::size_t t : visit)
            {
                std::optional<Association> best;
                double by = -1.0, bg = -1.0;
                for (std::size_t n = 0; n < N; ++n)
                {
                    if (!dep.x_star[n])
                        continue;
                    const auto f = freq[t * N + n];
                    const double dx = std::max(std::max(om[n].hi, f.omega) - std::min(om[n].lo, f.omega), min_x);
                    const double dy = std::max(std::max(ps[n].hi, f.psi) - std::min(ps[n].lo, f.psi), min_y);
                    for (std::size_t m = 0; m < M; ++m)
                    {
                        const double c = k(t, m, n);
                        if (c <= 0.0)
                            continue;
                        if (dep.bs_of_ris[n] >= 0 && static_cast<std::size_t>(dep.bs_of_ris[n]) != m)
                            continue;
                        const double yv = relaxed.y_at(t, m, n);
                        const double gain = c / (dx * dy);
                        if (!best || yv > by || (yv == by && gain > bg))
                            best = Association{m, n}, by = yv, bg = gain;
                    }
                }
                if (!best)
                {
                    missing.push_back(t);
                    continue;
                }
                dep.assoc[t] = best;
                dep.bs_of_ris[best->n] = static_cast<int>(best->m);
                const auto f = freq[t * N + best->n];
                auto &o = om[best->n];
                auto &p = ps[best->n];
                o = {std::min(o.lo, f.omega), std::max(o.hi, f.omega)};
                p = {std::min(p.lo, f.psi), std::max(p.hi, f.psi)};
            }
            if (missing.empty())
                break;
            const auto fail = [&] {
                return InfeasibleError("uncovered test point after rounding: " + std::to_string(missing.front()));
            };
            if (!opt.repair_greedy || attempt >= T)
                throw fail();
            // Prioritise the first uncovered point: pin the largest-x site able to serve it
            // and visit the uncovered points first, keeping the relative order of the rest.
            std::optional<std::size_t> site;
            for (std::size_t n : order)
                if (!dep.x_star[n] && k.servable(missing.front(), n))
                {
                    site = n;
                    break;
                }
            if (!site || pinned.size() >= L)
                throw fail();
            pinned.push_back(*site);
            select_sites();
            std::vector<std::size_t> next = missing;
            for (std::size_t t : visit)
                if (std::find(missing.begin(), missing.end(), t) == missing.end())
                    next.push_back(t);
            visit = std::move(next);
        }

        for (std::size_t n = 0; n < N; ++n)
            if (dep.x_star[n] && dep.bs_of_ris[n] < 0)
                dep.bs_of_ris[n] = detail::strongest_bs(inst, n);
        detail::finalize_spans(inst, dep);
        return dep;
    }

    // Model-domain SNR P g1(dx, dy) / (g2 sigma2) per test point; uncovered points get 0.
    inline CoverageReport evaluate_plan_model(const PlanningInstance &inst, const Deployment &dep)
    {
        const Coefficients k = build_coefficients(inst);
        CoverageReport rep;
        rep.points.resize(k.T);
        for (std::size_t t = 0; t < k.T; ++t)
        {
            PointResult &p = rep.points[t];
            p.position = inst.test_points[t];
            if (!dep.assoc[t])
                continue;
            const auto [m, n] = *dep.assoc[t];
            const double g1 = channel::broadened_gain_g1(inst.ris_geom, dep.dx[n], dep.dy[n]);
            p.power = inst.power * g1 * k(t, m, n);
            p.snr = p.power / inst.sigma2;
            p.serving_bs = static_cast<int>(m);
            p.serving_ris = static_cast<int>(n);
        }
        rep.summarize();
        return rep;
    }

    // The planning objective min_t c / (dx dy) of a binary plan (0 if a point is uncovered).
    inline double plan_objective(const PlanningInstance &inst, const Deployment &dep)
    {
        const Coefficients k = build_coefficients(inst);
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < k.T; ++t)
        {
            if (!dep.assoc[t])
                return 0.0;
            const auto [m, n] = *dep.assoc[t];
            worst = std::min(worst, k(t, m, n) / (dep.dx[n] * dep.dy[n]));
        }
        return worst;
    }

    // Optimum of the continuous (x, y) relaxation with the spans fixed at the plan's values
    // (minimum spans at idle sites). The binary plan is feasible for it, so its objective is a
    // valid upper bound on plan_objective.
    inline double relaxation_bound(const PlanningInstance &inst, const Deployment &dep)
    {
        const Coefficients k = build_coefficients(inst);
        const SpatialTable sp = build_spatial_table(inst, k);
        XyOptions opt;
        opt.lexicographic = false;
        opt.span_constraints = false;
        return solve_xy_block(inst, k, sp, dep.dx, dep.dy, opt).objective;
    }

    // Binary-plan invariants; returns human-readable violations (empty when sound).
    inline std::vector<std::string> check_deployment(const PlanningInstance &inst, const Deployment &dep)
    {
        std::vector<std::string> bad;
        const Coefficients k = build_coefficients(inst);
        const std::size_t N = k.N;
        if (dep.x_star.size() != N || dep.assoc.size() != k.T)
            return {"deployment shape does not match the instance"};
        const auto count = std::count(dep.x_star.begin(), dep.x_star.end(), 1);
        if (count != inst.budget)
            bad.push_back("budget: " + std::to_string(count) + " sites deployed, expected " + std::to_string(inst.budget));
        for (std::size_t t = 0; t < k.T; ++t)
        {
            if (!dep.assoc[t])
            {
                bad.push_back("test point " + std::to_string(t) + " uncovered");
                continue;
            }
            const auto [m, n] = *dep.assoc[t];
            if (n >= N || m >= k.M)
            {
                bad.push_back("test point " + std::to_string(t) + " associated out of range");
                continue;
            }
            if (!dep.x_star[n])
                bad.push_back("test point " + std::to_string(t) + " served by an undeployed site");
            if (k(t, m, n) <= 0.0)
                bad.push_back("test point " + std::to_string(t) + " violates fronting/visibility");
            if (dep.bs_of_ris[n] != static_cast<int>(m))
                bad.push_back("site " + std::to_string(n) + " serves test point " + std::to_string(t) +
                              " for a BS other than its own");
        }
        for (std::size_t n = 0; n < N; ++n)
        {
            if (!dep.x_star[n])
                continue;
            if (dep.dx[n] < inst.ris_geom.min_span_x() * (1 - 1e-9) || dep.dy[n] < inst.ris_geom.min_span_y() * (1 - 1e-9))
                bad.push_back("site " + std::to_string(n) + " span under minimum beamwidth");
            if (!dep.configs.count(n))
                bad.push_back("site " + std::to_string(n) + " has no configuration");
        }
        return bad;
    }

    // Uniformly random L-subset; every point goes to the nearest deployed site that can serve
    // it through that site's strongest BS. Points nobody can serve stay uncovered.
    inline Deployment random_baseline(const PlanningInstance &inst, std::size_t L, std::uint64_t seed)
    {
        const std::size_t N = inst.num_cs();
        if (L < 1 || L > N)
            throw InputError("baseline budget must satisfy 1 <= L <= N");
        const Coefficients k = build_coefficients(inst);
        Rng rng(stream_seed(seed, 0x62617365ULL));
        Deployment dep;
        dep.x_star.assign(N, 0);
        for (std::size_t n : rng.sample(N, L))
            dep.x_star[n] = 1;
        dep.bs_of_ris.assign(N, -1);
        for (std::size_t n = 0; n < N; ++n)
            if (dep.x_star[n])
                dep.bs_of_ris[n] = detail::strongest_bs(inst, n);

        dep.assoc.assign(k.T, std::nullopt);
        for (std::size_t t = 0; t < k.T; ++t)
        {
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t n = 0; n < N; ++n)
            {
                if (!dep.x_star[n] || dep.bs_of_ris[n] < 0)
                    continue;
                const auto m = static_cast<std::size_t>(dep.bs_of_ris[n]);
                if (k(t, m, n) <= 0.0)
                    continue;
                const double d = geom::distance(inst.test_points[t], inst.css[n].origin);
                if (d < best_d)
                    best_d = d, dep.assoc[t] = Association{m, n};
            }
        }
        detail::finalize_spans(inst, dep);
        return dep;
    }

    struct PlanResult
    {
        RelaxedSolution relaxed;
        Deployment deployment;
    };

    // Full planner: relaxed BCA followed by rounding.
    inline PlanResult risa(const PlanningInstance &inst, const BcaOptions &bca_opt = {}, const RoundingOptions &round_opt = {})
    {
        PlanResult r;
        r.relaxed = bca(inst, bca_opt);
        r.deployment = round_solution(inst, r.relaxed, round_opt);
        return r;
    }
}
