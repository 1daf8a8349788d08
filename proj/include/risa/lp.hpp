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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Dense two-phase simplex for small and medium LPs:
//
//     maximize c^T v   s.t.   A v <= b,   E v = f,   lo <= v <= hi
//
// Rows are given as sparse term lists; the solver works on a dense tableau.
namespace risa::lp
{
    inline constexpr double inf = std::numeric_limits<double>::infinity();

    using Terms = std::vector<std::pair<std::size_t, double>>; // (variable index, coefficient)

    struct Row
    {
        Terms terms;
        double rhs = 0.0;
    };

    enum class Status
    {
        optimal,
        infeasible,
        unbounded
    };

    inline const char *to_string(Status s)
    {
        switch (s)
        {
        case Status::optimal:
            return "optimal";
        case Status::infeasible:
            return "infeasible";
        case Status::unbounded:
            return "unbounded";
        }
        return "?";
    }

    struct LinearProgram
    {
        std::vector<double> objective; // one entry per variable
        std::vector<double> lower;
        std::vector<double> upper;
        std::vector<Row> le; // terms . v <= rhs
        std::vector<Row> eq; // terms . v == rhs
        // Optional second objective, maximised over the set of optimal solutions.
        std::vector<double> tie_break;

        std::size_t num_variables() const { return objective.size(); }

        std::size_t add_variable(double lo = 0.0, double hi = inf, double cost = 0.0)
        {
            objective.push_back(cost);
            if (!tie_break.empty())
                tie_break.push_back(0.0);
            lower.push_back(lo);
            upper.push_back(hi);
            return objective.size() - 1;
        }

        void add_le(Terms t, double rhs) { le.push_back({std::move(t), rhs}); }
        void add_ge(Terms t, double rhs)
        {
            for (auto &[i, a] : t)
                a = -a;
            le.push_back({std::move(t), -rhs});
        }
        void add_eq(Terms t, double rhs) { eq.push_back({std::move(t), rhs}); }

        void validate() const
        {
            const std::size_t n = num_variables();
            if (lower.size() != n || upper.size() != n)
                throw InputError("LP: bounds arrays do not match the variable count");
            if (!tie_break.empty() && tie_break.size() != n)
                throw InputError("LP: tie-break objective does not match the variable count");
            for (double c : tie_break)
                if (!std::isfinite(c))
                    throw InputError("LP: non-finite tie-break coefficient");
            for (std::size_t i = 0; i < n; ++i)
            {
                if (!std::isfinite(objective[i]) || std::isnan(lower[i]) || std::isnan(upper[i]))
                    throw InputError("LP: non-finite objective or NaN bound");
                if (lower[i] == inf || upper[i] == -inf || lower[i] > upper[i])
                    throw InputError("LP: empty variable bound interval for variable " + std::to_string(i));
            }
            auto check = [&](const std::vector<Row> &rows) {
                for (const auto &r : rows)
                {
                    if (!std::isfinite(r.rhs))
                        throw InputError("LP: non-finite right-hand side");
                    for (const auto &[j, a] : r.terms)
                        if (j >= n || !std::isfinite(a))
                            throw InputError("LP: row references an unknown variable or has a non-finite coefficient");
                }
            };
            check(le);
            check(eq);
        }
    };

    struct LpSolution
    {
        Status status = Status::infeasible;
        std::vector<double> v;
        double objective = 0.0;
        double max_violation = 0.0; // largest constraint or bound violation of v
        std::size_t pivots = 0;
    };

    struct SolveOptions
    {
        double pivot_tol = 1e-9;       // reduced-cost and pivot-element threshold on the scaled tableau
        double feasibility_tol = 1e-7; // phase-one acceptance on the scaled problem
        int degenerate_switch = 50;    // consecutive degenerate pivots before falling back to Bland's rule
        bool scale = true;
    };

    inline double evaluate(const Terms &t, const std::vector<double> &v)
    {
        double s = 0.0;
        for (const auto &[j, a] : t)
            s += a * v[j];
        return s;
    }

    inline double max_violation(const LinearProgram &lp, const std::vector<double> &v)
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < lp.num_variables(); ++i)
        {
            worst = std::max(worst, lp.lower[i] - v[i]);
            worst = std::max(worst, v[i] - lp.upper[i]);
        }
        for (const auto &r : lp.le)
            worst = std::max(worst, evaluate(r.terms, v) - r.rhs);
        for (const auto &r : lp.eq)
            worst = std::max(worst, std::abs(evaluate(r.terms, v) - r.rhs));
        return worst;
    }

    namespace detail
    {
        // Bounded-variable tableau simplex on  max c^T x,  A x <= b,  0 <= x <= u.
        // Layout (m + 2) x (n + 2): constraint rows, objective row m, phase-one row m + 1;
        // column n is the phase-one artificial, column n + 1 the right-hand side.
        // Row i reads  x_B(i) = D[i][n+1] - sum_j D[i][j] x_N(j).
        // A variable at its upper bound is carried complemented (x' = u - x), so every
        // nonbasic column sits at zero; flipped_ records which variables are complemented.
        class Tableau
        {
        public:
            Tableau(const std::vector<Terms> &rows, const std::vector<double> &rhs, const std::vector<double> &cost,
                    const std::vector<double> &upper, const SolveOptions &opt)
                : m_(rows.size()), n_(cost.size()), w_(n_ + 2), D_((m_ + 2) * w_, 0.0), B_(m_), N_(n_ + 1),
                  upper_(upper), flipped_(n_ + m_, 0), opt_(opt)
            {
                for (std::size_t i = 0; i < m_; ++i)
                {
                    for (const auto &[j, a] : rows[i])
                        at(i, j) += a;
                    at(i, n_) = -1.0;
                    at(i, n_ + 1) = rhs[i];
                    B_[i] = static_cast<long>(n_ + i);
                }
                for (std::size_t j = 0; j < n_; ++j)
                {
                    N_[j] = static_cast<long>(j);
                    at(m_, j) = -cost[j];
                }
                N_[n_] = -1;
                at(m_ + 1, n_) = 1.0;
                nz_.reserve(w_);
            }

            // Maximises the cost; with a non-empty `secondary`, then maximises it over the
            // optimal face. On optimal fills x with the standard-form solution.
            Status run(std::vector<double> &x, const std::vector<double> &secondary)
            {
                std::vector<char> fixed(n_ + 1, 0);
                if (m_ > 0)
                {
                    std::size_t r = 0;
                    for (std::size_t i = 1; i < m_; ++i)
                        if (at(i, n_ + 1) < at(r, n_ + 1))
                            r = i;
                    if (at(r, n_ + 1) < -opt_.pivot_tol)
                    {
                        pivot(r, n_);
                        if (!simplex(2, fixed) || at(m_ + 1, n_ + 1) < -opt_.feasibility_tol)
                            return Status::infeasible;
                        for (std::size_t i = 0; i < m_; ++i)
                            if (B_[i] == -1)
                            {
                                std::size_t s = 0;
                                for (std::size_t j = 1; j <= n_; ++j)
                                    if (less(at(i, j), N_[j], at(i, s), N_[s]))
                                        s = j;
                                pivot(i, s);
                            }
                    }
                }
                if (!simplex(1, fixed))
                    return Status::unbounded;
                if (!secondary.empty())
                {
                    // Columns with a strictly positive reduced cost cannot move off their bound
                    // without losing primary objective; freezing them confines the second
                    // pass to the optimal face.
                    for (std::size_t j = 0; j <= n_; ++j)
                        fixed[j] = N_[j] < 0 || at(m_, j) > opt_.pivot_tol;
                    set_objective(secondary);
                    if (!simplex(1, fixed))
                        return Status::unbounded;
                }
                x.assign(n_, 0.0);
                for (std::size_t i = 0; i < m_; ++i)
                    if (B_[i] >= 0 && static_cast<std::size_t>(B_[i]) < n_)
                        x[static_cast<std::size_t>(B_[i])] = value(B_[i], at(i, n_ + 1));
                for (std::size_t j = 0; j <= n_; ++j)
                    if (N_[j] >= 0 && static_cast<std::size_t>(N_[j]) < n_)
                        x[static_cast<std::size_t>(N_[j])] = value(N_[j], 0.0);
                return Status::optimal;
            }

            std::size_t pivots() const { return pivots_; }

        private:
            double &at(std::size_t i, std::size_t j) { return D_[i * w_ + j]; }
            double at(std::size_t i, std::size_t j) const { return D_[i * w_ + j]; }

            static bool less(double a, long ia, double b, long ib) { return a < b || (a == b && ia < ib); }

            double ub(long var) const
            {
                return var >= 0 && static_cast<std::size_t>(var) < n_ ? upper_[static_cast<std::size_t>(var)] : inf;
            }

            bool flipped(long var) const { return var >= 0 && flipped_[static_cast<std::size_t>(var)]; }

            double value(long var, double stored) const { return flipped(var) ? ub(var) - stored : stored; }

            void pivot(std::size_t r, std::size_t s)
            {
                ++pivots_;
                double *pr = &D_[r * w_];
                const double inv = 1.0 / pr[s];
                nz_.clear();
                for (std::size_t j = 0; j < w_; ++j)
                    if (pr[j] != 0.0 && j != s)
                        nz_.push_back(j);
                for (std::size_t i = 0; i < m_ + 2; ++i)
                {
                    if (i == r)
                        continue;
                    double *pi = &D_[i * w_];
                    const double f = pi[s] * inv;
                    if (f == 0.0)
                        continue;
                    for (std::size_t j : nz_)
                        pi[j] -= pr[j] * f;
                    pi[s] = -f;
                }
                for (std::size_t j : nz_)
                    pr[j] *= inv;
                pr[s] = inv;
                std::swap(B_[r], N_[s]);
            }

            // Nonbasic column s moves to its other bound.
            void complement_column(std::size_t s)
            {
                const double u = ub(N_[s]);
                for (std::size_t i = 0; i < m_ + 2; ++i)
                {
                    double &a = at(i, s);
                    at(i, n_ + 1) -= a * u;
                    a = -a;
                }
                flipped_[static_cast<std::size_t>(N_[s])] ^= 1;
            }

            // Basic variable of row r is re-expressed as its complement.
            void complement_row(std::size_t r)
            {
                const double u = ub(B_[r]);
                at(r, n_ + 1) = u - at(r, n_ + 1);
                for (std::size_t j = 0; j <= n_; ++j)
                    at(r, j) = -at(r, j);
                flipped_[static_cast<std::size_t>(B_[r])] ^= 1;
            }

            // Replaces the objective row by `cost` expressed in the current basis.
            void set_objective(const std::vector<double> &cost)
            {
                double *obj = &D_[m_ * w_];
                std::fill(obj, obj + w_, 0.0);
                auto c_of = [&](long v) { return v >= 0 && static_cast<std::size_t>(v) < n_ ? cost[static_cast<std::size_t>(v)] : 0.0; };
                for (std::size_t j = 0; j <= n_; ++j)
                {
                    const double c = c_of(N_[j]);
                    if (flipped(N_[j]))
                        obj[j] = c, obj[n_ + 1] += c * ub(N_[j]);
                    else
                        obj[j] = -c;
                }
                for (std::size_t i = 0; i < m_; ++i)
                {
                    double cb = c_of(B_[i]);
                    if (cb == 0.0)
                        continue;
                    if (flipped(B_[i]))
                        obj[n_ + 1] += cb * ub(B_[i]), cb = -cb;
                    const double *pi = &D_[i * w_];
                    for (std::size_t j = 0; j < w_; ++j)
                        obj[j] += cb * pi[j];
                }
            }

            // phase 2: minimise the artificial (row m + 1); phase 1: the objective row m.
            bool simplex(int phase, const std::vector<char> &fixed)
            {
                const std::size_t row = phase == 2 ? m_ + 1 : m_;
                const long excluded = -phase; // artificial column is frozen in the second phase
                int degenerate = 0;
                const std::size_t limit = 50 * (m_ + n_ + 10) + 100000;
                for (std::size_t iter = 0;; ++iter)
                {
                    if (iter > limit)
                        throw std::runtime_error("simplex pivot limit exceeded");
                    const bool bland = degenerate >= opt_.degenerate_switch;
                    std::size_t s = w_;
                    for (std::size_t j = 0; j <= n_; ++j)
                    {
                        if (N_[j] == excluded || fixed[j])
                            continue;
                        const double d = at(row, j);
                        if (bland)
                        {
                            if (d < -opt_.pivot_tol && (s == w_ || N_[j] < N_[s]))
                                s = j;
                        }
                        else if (s == w_ || less(d, N_[j], at(row, s), N_[s]))
                            s = j;
                    }
                    if (s == w_ || at(row, s) >= -opt_.pivot_tol)
                        return true;

                    std::size_t r = m_;
                    bool to_upper = false;
                    double best = 0.0;
                    for (std::size_t i = 0; i < m_; ++i)
                    {
                        const double a = at(i, s);
                        double ratio;
                        bool up = false;
                        if (a > opt_.pivot_tol)
                            ratio = at(i, n_ + 1) / a;
                        else if (a < -opt_.pivot_tol && std::isfinite(ub(B_[i])))
                            ratio = (ub(B_[i]) - at(i, n_ + 1)) / -a, up = true;
                        else
                            continue;
                        if (r == m_ || ratio < best || (ratio == best && B_[i] < B_[r]))
                            r = i, best = ratio, to_upper = up;
                    }
                    const double own = ub(N_[s]);
                    if (std::isfinite(own) && (r == m_ || own < best))
                    {
                        complement_column(s);
                        degenerate = own <= 0.0 ? degenerate + 1 : 0;
                        continue;
                    }
                    if (r == m_)
                        return false;
                    degenerate = best <= 0.0 ? degenerate + 1 : 0;
                    if (to_upper)
                        complement_row(r);
                    pivot(r, s);
                }
            }

            std::size_t m_, n_, w_;
            std::vector<double> D_;
            std::vector<long> B_, N_;
            std::vector<double> upper_;
            std::vector<char> flipped_;
            std::vector<std::size_t> nz_;
            SolveOptions opt_;
            std::size_t pivots_ = 0;
        };
    }

    inline LpSolution solve(const LinearProgram &lp, const SolveOptions &opt = {})
    {
        lp.validate();
        const std::size_t n = lp.num_variables();

        // Map every variable onto non-negative standard-form columns:
        //   lo finite:            v = lo + s,  s <= hi - lo
        //   lo = -inf, hi finite: v = hi - s
        //   free:                 v = s1 - s2
        struct Map
        {
            std::size_t col;
            long col_neg; // second column for free variables, -1 otherwise
            double offset;
            double sign;
        };
        std::vector<Map> map(n);
        std::vector<double> upper;
        for (std::size_t i = 0; i < n; ++i)
        {
            const std::size_t cols = upper.size();
            if (std::isfinite(lp.lower[i]))
            {
                map[i] = {cols, -1, lp.lower[i], 1.0};
                upper.push_back(lp.upper[i] - lp.lower[i]);
            }
            else if (std::isfinite(lp.upper[i]))
            {
                map[i] = {cols, -1, lp.upper[i], -1.0};
                upper.push_back(inf);
            }
            else
            {
                map[i] = {cols, static_cast<long>(cols + 1), 0.0, 1.0};
                upper.push_back(inf);
                upper.push_back(inf);
            }
        }
        const std::size_t cols = upper.size();

        std::vector<Terms> rows;
        std::vector<double> rhs;
        auto push = [&](const Terms &t, double b, double sign) {
            Terms out;
            out.reserve(t.size() + 1);
            double r = sign * b;
            for (const auto &[j, a0] : t)
            {
                const double a = a0 * sign;
                if (a == 0.0)
                    continue;
                const Map &mp = map[j];
                r -= a * mp.offset;
                out.emplace_back(mp.col, a * mp.sign);
                if (mp.col_neg >= 0)
                    out.emplace_back(static_cast<std::size_t>(mp.col_neg), -a);
            }
            rows.push_back(std::move(out));
            rhs.push_back(r);
        };
        for (const auto &r : lp.le)
            push(r.terms, r.rhs, 1.0);
        // Equalities become paired inequalities.
        for (const auto &r : lp.eq)
        {
            push(r.terms, r.rhs, 1.0);
            push(r.terms, r.rhs, -1.0);
        }

        LpSolution sol;

        // Row scaling to unit max coefficient; empty rows are checked and dropped.
        {
            std::vector<Terms> kept;
            std::vector<double> kept_rhs;
            for (std::size_t i = 0; i < rows.size(); ++i)
            {
                double mx = 0.0;
                for (const auto &[j, a] : rows[i])
                    mx = std::max(mx, std::abs(a));
                if (mx == 0.0)
                {
                    if (rhs[i] < -opt.feasibility_tol)
                    {
                        sol.status = Status::infeasible;
                        return sol;
                    }
                    continue;
                }
                const double s = opt.scale ? 1.0 / mx : 1.0;
                for (auto &[j, a] : rows[i])
                    a *= s;
                kept.push_back(std::move(rows[i]));
                kept_rhs.push_back(rhs[i] * s);
            }
            rows = std::move(kept);
            rhs = std::move(kept_rhs);
        }

        auto standard_cost = [&](const std::vector<double> &c) {
            std::vector<double> out(cols, 0.0);
            for (std::size_t i = 0; i < n; ++i)
            {
                out[map[i].col] += c[i] * map[i].sign;
                if (map[i].col_neg >= 0)
                    out[static_cast<std::size_t>(map[i].col_neg)] -= c[i];
            }
            double cmax = 0.0;
            for (double v : out)
                cmax = std::max(cmax, std::abs(v));
            if (opt.scale && cmax > 0.0)
                for (double &v : out)
                    v /= cmax;
            return out;
        };
        const std::vector<double> cost = standard_cost(lp.objective);
        std::vector<double> secondary;
        if (!lp.tie_break.empty())
            secondary = standard_cost(lp.tie_break);

        detail::Tableau tab(rows, rhs, cost, upper, opt);
        std::vector<double> x;
        sol.status = tab.run(x, secondary);
        sol.pivots = tab.pivots();
        if (sol.status != Status::optimal)
            return sol;

        sol.v.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            const Map &mp = map[i];
            double val = mp.offset + mp.sign * x[mp.col];
            if (mp.col_neg >= 0)
                val -= x[static_cast<std::size_t>(mp.col_neg)];
            sol.v[i] = val;
        }
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            obj += lp.objective[i] * sol.v[i];
        sol.objective = obj;
        sol.max_violation = max_violation(lp, sol.v);
        return sol;
    }

    // A linear function coeffs . v + constant.
    struct LinearTerm
    {
        Terms coeffs;
        double constant = 0.0;
    };

    // Epigraph lift of  max min_t term_t(v):  appends a free variable tau (the last variable of
    // the returned program), sets the objective to tau alone and adds tau <= term_t for each t.
    inline LinearProgram maxmin_epigraph(const std::vector<LinearTerm> &terms, LinearProgram fragment)
    {
        if (terms.empty())
            throw InputError("max-min epigraph needs at least one term");
        std::fill(fragment.objective.begin(), fragment.objective.end(), 0.0);
        const std::size_t tau = fragment.add_variable(-inf, inf, 1.0);
        for (const auto &t : terms)
        {
            Terms row;
            row.reserve(t.coeffs.size() + 1);
            row.emplace_back(tau, 1.0);
            for (const auto &[j, a] : t.coeffs)
            {
                if (j >= tau)
                    throw InputError("max-min term references an unknown variable");
                row.emplace_back(j, -a);
            }
            fragment.add_le(std::move(row), t.constant);
        }
        return fragment;
    }

    // Plain-text dump, one item per line:
    //   vars <n>
    //   max <c_0> ... <c_{n-1}>
    //   tie <c_0> ... <c_{n-1}>        (optional second objective)
    //   bound <i> <lo> <hi>
    //   le <a_0> ... <a_{n-1}> <rhs>
    //   eq <a_0> ... <a_{n-1}> <rhs>
    // Infinite bounds print as inf / -inf.
    inline void write_lp(std::ostream &os, const LinearProgram &lp)
    {
        const std::size_t n = lp.num_variables();
        auto num = [&](double x) {
            if (x == inf)
                os << "inf";
            else if (x == -inf)
                os << "-inf";
            else
                os << x;
        };
        os << std::setprecision(17);
        os << "vars " << n << '\n' << "max";
        for (double c : lp.objective)
            os << ' ', num(c);
        os << '\n';
        if (!lp.tie_break.empty())
        {
            os << "tie";
            for (double c : lp.tie_break)
                os << ' ', num(c);
            os << '\n';
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            os << "bound " << i << ' ';
            num(lp.lower[i]);
            os << ' ';
            num(lp.upper[i]);
            os << '\n';
        }
        auto dense = [&](const char *tag, const Row &r) {
            std::vector<double> a(n, 0.0);
            for (const auto &[j, v] : r.terms)
                a[j] += v;
            os << tag;
            for (double v : a)
                os << ' ', num(v);
            os << ' ';
            num(r.rhs);
            os << '\n';
        };
        for (const auto &r : lp.le)
            dense("le", r);
        for (const auto &r : lp.eq)
            dense("eq", r);
    }

    inline LinearProgram read_lp(std::istream &is)
    {
        auto parse = [](const std::string &s) {
            if (s == "inf")
                return inf;
            if (s == "-inf")
                return -inf;
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size())
                throw InputError("LP dump: bad number '" + s + "'");
            return v;
        };
        LinearProgram lp;
        std::string line;
        std::size_t n = 0, line_no = 0;
        bool have_vars = false;
        while (std::getline(is, line))
        {
            ++line_no;
            std::istringstream ls(line);
            std::string tag;
            if (!(ls >> tag) || tag[0] == '#')
                continue;
            std::vector<std::string> tok;
            for (std::string t; ls >> t;)
                tok.push_back(t);
            try
            {
                if (tag == "vars")
                {
                    n = static_cast<std::size_t>(std::stoul(tok.at(0)));
                    lp.objective.assign(n, 0.0);
                    lp.lower.assign(n, 0.0);
                    lp.upper.assign(n, inf);
                    have_vars = true;
                }
                else if (!have_vars)
                    throw InputError("missing vars line");
                else if (tag == "max")
                {
                    if (tok.size() != n)
                        throw InputError("objective length");
                    for (std::size_t j = 0; j < n; ++j)
                        lp.objective[j] = parse(tok[j]);
                }
                else if (tag == "tie")
                {
                    if (tok.size() != n)
                        throw InputError("tie-break length");
                    lp.tie_break.resize(n);
                    for (std::size_t j = 0; j < n; ++j)
                        lp.tie_break[j] = parse(tok[j]);
                }
                else if (tag == "bound")
                {
                    const auto i = static_cast<std::size_t>(std::stoul(tok.at(0)));
                    if (i >= n || tok.size() != 3)
                        throw InputError("bound line");
                    lp.lower[i] = parse(tok[1]);
                    lp.upper[i] = parse(tok[2]);
                }
                else if (tag == "le" || tag == "eq")
                {
                    if (tok.size() != n + 1)
                        throw InputError("row length");
                    Row r;
                    for (std::size_t j = 0; j < n; ++j)
                        if (const double a = parse(tok[j]); a != 0.0)
                            r.terms.emplace_back(j, a);
                    r.rhs = parse(tok[n]);
                    (tag == "le" ? lp.le : lp.eq).push_back(std::move(r));
                }
                else
                    throw InputError("unknown tag '" + tag + "'");
            }
            catch (const InputError &e)
            {
                throw InputError("LP dump line " + std::to_string(line_no) + ": " + e.what());
            }
            catch (const std::exception &)
            {
                throw InputError("LP dump line " + std::to_string(line_no) + ": malformed");
            }
        }
        return lp;
    }
}
