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
#include "risa/geom.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace risa::channel
{
    using cplx = std::complex<double>;
    using ComplexVector = std::vector<cplx>;

    inline constexpr double two_pi = 2.0 * std::numbers::pi;

    // Planar RIS array: n_h elements along the local x axis, n_v along the local y axis.
    // Element index convention: i = p * n_h + q with p the vertical and q the horizontal index.
    struct ArrayGeometry
    {
        int n_h = 1;
        int n_v = 1;
        double delta = 0.5; // element spacing over wavelength

        int n_elements() const { return n_h * n_v; }
        double min_span_x() const { return 1.0 / (n_h * delta); }
        double min_span_y() const { return 1.0 / (n_v * delta); }

        void validate() const
        {
            if (n_h < 1 || n_v < 1)
                throw InputError("array geometry needs at least one element per axis");
            if (!(delta > 0.0) || !std::isfinite(delta))
                throw InputError("array spacing ratio must be positive");
        }
    };

    // Row-major dense complex matrix.
    struct ComplexMatrix
    {
        std::size_t rows = 0, cols = 0;
        std::vector<cplx> data;

        ComplexMatrix() = default;
        ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

        cplx &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
        const cplx &operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

        ComplexVector apply(std::span<const cplx> v) const
        {
            if (v.size() != cols)
                throw InputError("dimension mismatch in matrix-vector product");
            ComplexVector out(rows);
            for (std::size_t r = 0; r < rows; ++r)
            {
                cplx acc = 0.0;
                for (std::size_t c = 0; c < cols; ++c)
                    acc += data[r * cols + c] * v[c];
                out[r] = acc;
            }
            return out;
        }
    };

    // Per-element reflection coefficients alpha_i * exp(j phi_i).
    // When `phase_x`/`phase_y` are set the phases are separable,
    // phases[p * n_h + q] == phase_x[q] + phase_y[p] (mod 2 pi), and all amplitudes are 1;
    // pattern evaluation then costs O(n_h + n_v) instead of O(n_h * n_v).
    struct RisConfig
    {
        std::vector<double> phases;
        std::vector<double> amplitudes;
        std::vector<double> phase_x;
        std::vector<double> phase_y;

        std::size_t size() const { return phases.size(); }
        bool separable() const { return !phase_x.empty() && !phase_y.empty(); }

        static RisConfig uniform(std::size_t n, double amplitude = 1.0)
        {
            return {std::vector<double>(n, 0.0), std::vector<double>(n, amplitude), {}, {}};
        }

        void validate() const
        {
            if (phases.size() != amplitudes.size())
                throw InputError("RIS config: phase and amplitude counts differ");
            for (double a : amplitudes)
                if (!(a >= 0.0 && a <= 1.0))
                    throw InputError("RIS config: amplitudes must lie in [0, 1] (passive surface)");
        }

        cplx coefficient(std::size_t i) const { return std::polar(amplitudes[i], phases[i]); }
    };

    inline double wrap_phase(double phi)
    {
        double w = std::fmod(phi, two_pi);
        if (w < 0.0)
            w += two_pi;
        return w >= two_pi ? 0.0 : w;
    }

    inline ComplexVector pla_response(const ArrayGeometry &g, double omega, double psi)
    {
        ComplexVector b(static_cast<std::size_t>(g.n_elements()));
        for (int p = 0; p < g.n_v; ++p)
            for (int q = 0; q < g.n_h; ++q)
                b[static_cast<std::size_t>(p * g.n_h + q)] = std::polar(1.0, two_pi * g.delta * (p * psi + q * omega));
        return b;
    }

    inline ComplexVector ula_response(int n_b, double delta, double cos_theta)
    {
        ComplexVector a(static_cast<std::size_t>(n_b));
        for (int k = 0; k < n_b; ++k)
            a[static_cast<std::size_t>(k)] = std::polar(1.0, two_pi * delta * k * cos_theta);
        return a;
    }

    inline double pathgain(double d, double beta)
    {
        if (!(d > 0.0))
            throw InputError("degenerate distance: path gain needs d > 0");
        return std::pow(d, -beta);
    }

    inline ComplexVector ris_ue_channel(const geom::Frame3 &ris, const ArrayGeometry &g, const geom::Vec3 &u, double beta)
    {
        if (!geom::fronting(ris, u))
            throw InputError("user lies behind the RIS surface");
        const auto sf = geom::spatial_frequencies(ris, u);
        ComplexVector h = pla_response(g, sf.omega, sf.psi);
        const double amp = std::sqrt(pathgain(geom::distance(ris.origin, u), beta));
        for (auto &e : h)
            e *= amp;
        return h;
    }

    // Rank-1 LoS channel sqrt(gamma) * b_R a^H. The BS array lies along bs.axis_x.
    inline ComplexMatrix bs_ris_channel(const geom::Frame3 &bs, int n_b, const geom::Frame3 &ris, const ArrayGeometry &g,
                                        double beta)
    {
        if (!geom::fronting(ris, bs.origin))
            throw InputError("infeasible link: BS lies behind the RIS surface");
        const double d = geom::distance(bs.origin, ris.origin);
        const auto sf = geom::spatial_frequencies(ris, bs.origin);
        const ComplexVector b_r = pla_response(g, sf.omega, sf.psi);
        const double cos_theta = geom::dot(geom::normalized(ris.origin - bs.origin), bs.axis_x);
        const ComplexVector a = ula_response(n_b, g.delta, cos_theta);
        const double amp = std::sqrt(pathgain(d, beta));

        ComplexMatrix G(b_r.size(), a.size());
        for (std::size_t r = 0; r < b_r.size(); ++r)
            for (std::size_t c = 0; c < a.size(); ++c)
                G(r, c) = amp * b_r[r] * std::conj(a[c]);
        return G;
    }

    inline double vector_norm(std::span<const cplx> v)
    {
        double s = 0.0;
        for (const auto &e : v)
            s += std::norm(e);
        return std::sqrt(s);
    }

    // sqrt(P) times the dominant right singular vector of G, with the global phase fixed
    // so that the first non-negligible entry is real and positive.
    inline ComplexVector mrt_precoder(const ComplexMatrix &G, double power)
    {
        if (!(power > 0.0))
            throw InputError("MRT precoder needs a positive power budget");
        const std::size_t n = G.cols;

        // Seed with the conjugate of the strongest row: exact for rank-1 channels.
        std::size_t best_row = 0;
        double best = -1.0;
        for (std::size_t r = 0; r < G.rows; ++r)
        {
            double s = 0.0;
            for (std::size_t c = 0; c < n; ++c)
                s += std::norm(G(r, c));
            if (s > best)
                best = s, best_row = r;
        }
        if (!(best > 0.0))
            throw InputError("MRT precoder undefined for a zero channel");

        ComplexVector v(n);
        for (std::size_t c = 0; c < n; ++c)
            v[c] = std::conj(G(best_row, c));

        // Power iteration on G^H G.
        for (int it = 0; it < 500; ++it)
        {
            const ComplexVector gv = G.apply(v);
            ComplexVector next(n, 0.0);
            for (std::size_t r = 0; r < G.rows; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    next[c] += std::conj(G(r, c)) * gv[r];
            const double nn = vector_norm(next);
            if (nn == 0.0)
                break;
            double change = 0.0;
            const double nv = vector_norm(v);
            for (std::size_t c = 0; c < n; ++c)
            {
                next[c] /= nn;
                change += std::norm(next[c] - v[c] / nv);
            }
            v = std::move(next);
            if (change < 1e-28)
                break;
        }

        const double nv = vector_norm(v);
        cplx rot = 1.0;
        for (const auto &e : v)
            if (std::abs(e) > 1e-12 * nv)
            {
                rot = std::conj(e) / std::abs(e);
                break;
            }
        const double scale = std::sqrt(power) / nv;
        for (auto &e : v)
            e *= rot * scale;
        return v;
    }

    // |h^H Phi G w|^2 / sigma2
    inline double snr(std::span<const cplx> h, const RisConfig &phi, const ComplexMatrix &G, std::span<const cplx> w,
                      double sigma2)
    {
        if (h.size() != phi.size() || G.rows != h.size() || G.cols != w.size())
            throw InputError("dimension mismatch in SNR evaluation");
        if (!(sigma2 > 0.0))
            throw InputError("noise power must be positive");
        const ComplexVector gw = G.apply(w);
        cplx acc = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i)
            acc += std::conj(h[i]) * phi.coefficient(i) * gw[i];
        return std::norm(acc) / sigma2;
    }

    // One RIS-reflected contribution h^H Phi G w of a BS.
    struct ReflectedLink
    {
        ComplexVector h;
        RisConfig phi;
        ComplexMatrix G;
        ComplexVector w;
    };

    inline cplx link_amplitude(const ReflectedLink &l)
    {
        if (l.h.size() != l.phi.size() || l.G.rows != l.h.size() || l.G.cols != l.w.size())
            throw InputError("dimension mismatch in link evaluation");
        const ComplexVector gw = l.G.apply(l.w);
        cplx acc = 0.0;
        for (std::size_t i = 0; i < l.h.size(); ++i)
            acc += std::conj(l.h[i]) * l.phi.coefficient(i) * gw[i];
        return acc;
    }

    // Coherent sum over the serving BS's RISs, incoherent across interfering BSs.
    inline double sinr(std::span<const ReflectedLink> serving, std::span<const std::vector<ReflectedLink>> interferers,
                       double sigma2)
    {
        if (!(sigma2 > 0.0))
            throw InputError("noise power must be positive");
        cplx s = 0.0;
        for (const auto &l : serving)
            s += link_amplitude(l);
        double interference = 0.0;
        for (const auto &bs : interferers)
        {
            cplx acc = 0.0;
            for (const auto &l : bs)
                acc += link_amplitude(l);
            interference += std::norm(acc);
        }
        return std::norm(s) / (interference + sigma2);
    }

    // Broadened BS-RIS array gain model N_h N_v / (dx dy delta^2).
    inline double broadened_gain_g1(const ArrayGeometry &g, double dx, double dy)
    {
        constexpr double slack = 1e-12;
        if (dx < g.min_span_x() * (1.0 - slack) || dy < g.min_span_y() * (1.0 - slack))
            throw InputError("span under minimum beamwidth");
        return static_cast<double>(g.n_h) * g.n_v / (dx * dy * g.delta * g.delta);
    }

    struct Range
    {
        double lo = 0.0, hi = 0.0;
        double span() const { return hi - lo; }
        double center() const { return 0.5 * (lo + hi); }
    };

    struct Subarea
    {
        Range omega;
        Range psi;
        double dx = 0.0; // clamped spans
        double dy = 0.0;
    };

    // Spatial-frequency extent of a set of points as seen from the RIS, with spans clamped
    // up to the minimum beamwidth.
    inline Subarea subarea_for_points(const geom::Frame3 &ris, const ArrayGeometry &g, std::span<const geom::Vec3> points)
    {
        if (points.empty())
            throw InputError("span of an empty point set is undefined");
        Subarea s;
        s.omega = {1e300, -1e300};
        s.psi = {1e300, -1e300};
        for (const auto &p : points)
        {
            if (!geom::fronting(ris, p))
                throw InputError("span computation: point lies behind the RIS surface");
            const auto sf = geom::spatial_frequencies(ris, p);
            s.omega.lo = std::min(s.omega.lo, sf.omega);
            s.omega.hi = std::max(s.omega.hi, sf.omega);
            s.psi.lo = std::min(s.psi.lo, sf.psi);
            s.psi.hi = std::max(s.psi.hi, sf.psi);
        }
        s.dx = std::max(s.omega.span(), g.min_span_x());
        s.dy = std::max(s.psi.span(), g.min_span_y());
        return s;
    }

    inline std::pair<double, double> spans_for_subarea(const geom::Frame3 &ris, const ArrayGeometry &g,
                                                       std::span<const geom::Vec3> points)
    {
        const auto s = subarea_for_points(ris, g, points);
        return {s.dx, s.dy};
    }

    // Widens a range symmetrically about its center to at least `min_span`, keeping it in [-1, 1].
    inline Range widen_to(Range r, double min_span)
    {
        if (r.span() >= min_span)
            return r;
        const double c = r.center();
        r = {c - 0.5 * min_span, c + 0.5 * min_span};
        if (r.lo < -1.0)
            r = {-1.0, -1.0 + min_span};
        if (r.hi > 1.0)
            r = {1.0 - min_span, 1.0};
        return r;
    }

    namespace detail
    {
        // Piecewise-linear phase profile along one axis: n elements split into k contiguous
        // tiles, tile a steering to the a-th of k uniformly spaced centers of `range`.
        // The phase is continuous across tile boundaries.
        inline std::vector<double> tiled_profile(int n, int k, double delta, Range range)
        {
            std::vector<double> phase(static_cast<std::size_t>(n));
            double acc = 0.0;
            for (int q = 0; q < n; ++q)
            {
                phase[static_cast<std::size_t>(q)] = wrap_phase(acc);
                const int tile = std::min(static_cast<int>((static_cast<long long>(q) * k) / n), k - 1);
                const double center = range.lo + (tile + 0.5) * range.span() / k;
                acc += two_pi * delta * center;
            }
            return phase;
        }

        inline int tile_count(double span, int n, double delta)
        {
            const int k = static_cast<int>(std::ceil(span * n * delta - 1e-9));
            return std::clamp(k, 1, n);
        }
    }

    // Number of subarrays per axis used by broadening_config.
    inline std::pair<int, int> subarray_tiling(const ArrayGeometry &g, double dx, double dy)
    {
        return {detail::tile_count(dx, g.n_h, g.delta), detail::tile_count(dy, g.n_v, g.delta)};
    }

    // Beam broadening by subarray tiling: unit amplitudes; K_h x K_v contiguous subarrays,
    // each with a linear phase aimed at the center of its tile of the target rectangle.
    inline RisConfig broadening_config(const ArrayGeometry &g, Range omega, Range psi)
    {
        g.validate();
        auto in_unit = [](Range r) { return r.lo >= -1.0 - 1e-12 && r.hi <= 1.0 + 1e-12 && r.lo <= r.hi; };
        if (!in_unit(omega) || !in_unit(psi))
            throw InputError("broadening target must lie within [-1, 1]");
        constexpr double slack = 1e-9;
        if (omega.span() < g.min_span_x() * (1.0 - slack) || psi.span() < g.min_span_y() * (1.0 - slack))
            throw InputError("span under minimum beamwidth");

        const auto [k_h, k_v] = subarray_tiling(g, omega.span(), psi.span());
        RisConfig cfg;
        cfg.phase_x = detail::tiled_profile(g.n_h, k_h, g.delta, omega);
        cfg.phase_y = detail::tiled_profile(g.n_v, k_v, g.delta, psi);
        cfg.phases.resize(static_cast<std::size_t>(g.n_elements()));
        cfg.amplitudes.assign(cfg.phases.size(), 1.0);
        for (int p = 0; p < g.n_v; ++p)
            for (int q = 0; q < g.n_h; ++q)
                cfg.phases[static_cast<std::size_t>(p * g.n_h + q)] =
                    wrap_phase(cfg.phase_x[static_cast<std::size_t>(q)] + cfg.phase_y[static_cast<std::size_t>(p)]);
        return cfg;
    }

    // Plain linear-phase steering toward one spatial frequency.
    inline RisConfig steering_config(const ArrayGeometry &g, double omega, double psi)
    {
        return broadening_config(g, widen_to({omega, omega}, g.min_span_x()), widen_to({psi, psi}, g.min_span_y()));
    }

    // Array power pattern |b(omega, psi)^H c|^2 of the configured surface, where c holds the
    // reflection coefficients. Peaks at N_r^2 for a perfectly steered unit-amplitude config.
    inline double array_pattern(const ArrayGeometry &g, const RisConfig &cfg, double omega, double psi)
    {
        if (cfg.size() != static_cast<std::size_t>(g.n_elements()))
            throw InputError("RIS config size does not match the array geometry");
        if (cfg.separable() && cfg.phase_x.size() == static_cast<std::size_t>(g.n_h) &&
            cfg.phase_y.size() == static_cast<std::size_t>(g.n_v))
        {
            cplx ax = 0.0, ay = 0.0;
            for (int q = 0; q < g.n_h; ++q)
                ax += std::polar(1.0, cfg.phase_x[static_cast<std::size_t>(q)] - two_pi * g.delta * q * omega);
            for (int p = 0; p < g.n_v; ++p)
                ay += std::polar(1.0, cfg.phase_y[static_cast<std::size_t>(p)] - two_pi * g.delta * p * psi);
            return std::norm(ax) * std::norm(ay);
        }
        cplx acc = 0.0;
        for (int p = 0; p < g.n_v; ++p)
            for (int q = 0; q < g.n_h; ++q)
            {
                const auto i = static_cast<std::size_t>(p * g.n_h + q);
                acc += cfg.coefficient(i) * std::polar(1.0, -two_pi * g.delta * (p * psi + q * omega));
            }
        return std::norm(acc);
    }
}
