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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

// Deterministic specular propagation over triangle meshes (image method, up to two
// reflections) and the power-domain evaluation of BS and RIS sources.
namespace risa::rt
{
    using geom::Vec3;

    // Triangle soup with per-triangle unit normals (right-hand winding) and a grouping of
    // coplanar triangles into planes: reflection geometry depends only on the plane.
    class TriangleMesh
    {
    public:
        struct Plane
        {
            Vec3 normal;   // unit, canonical orientation
            double offset; // normal . p == offset on the plane
            std::vector<std::size_t> triangles;
        };

        std::size_t add_vertex(const Vec3 &v)
        {
            vertices_.push_back(v);
            return vertices_.size() - 1;
        }

        std::size_t add_triangle(std::size_t a, std::size_t b, std::size_t c)
        {
            if (a >= vertices_.size() || b >= vertices_.size() || c >= vertices_.size())
                throw InputError("triangle references a missing vertex");
            const Vec3 n = geom::cross(vertices_[b] - vertices_[a], vertices_[c] - vertices_[a]);
            const double area2 = geom::norm(n);
            const double scale = std::max({geom::norm(vertices_[b] - vertices_[a]), geom::norm(vertices_[c] - vertices_[a]), 1e-300});
            if (!(area2 > 1e-12 * scale * scale))
                throw InputError("zero-area triangle");
            triangles_.push_back({a, b, c});
            normals_.push_back(n / area2);
            add_to_plane(triangles_.size() - 1);
            return triangles_.size() - 1;
        }

        std::size_t add_triangle(const Vec3 &a, const Vec3 &b, const Vec3 &c)
        {
            const std::size_t i = add_vertex(a), j = add_vertex(b), k = add_vertex(c);
            return add_triangle(i, j, k);
        }

        // Axis-aligned box [lo, hi] as 12 outward-facing triangles.
        void add_box(const Vec3 &lo, const Vec3 &hi)
        {
            const std::size_t base = vertices_.size();
            for (int i = 0; i < 8; ++i)
                add_vertex({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
            static constexpr int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
            for (const auto &q : quads)
            {
                add_triangle(base + q[0], base + q[1], base + q[2]);
                add_triangle(base + q[0], base + q[2], base + q[3]);
            }
        }

        std::size_t size() const { return triangles_.size(); }
        bool empty() const { return triangles_.empty(); }
        const std::vector<Vec3> &vertices() const { return vertices_; }
        const std::array<std::size_t, 3> &triangle(std::size_t i) const { return triangles_[i]; }
        const Vec3 &normal(std::size_t i) const { return normals_[i]; }
        const Vec3 &corner(std::size_t tri, int k) const { return vertices_[triangles_[tri][static_cast<std::size_t>(k)]]; }
        const std::vector<Plane> &planes() const { return planes_; }

    private:
        void add_to_plane(std::size_t tri)
        {
            Vec3 n = normals_[tri];
            // canonical orientation: first significant component positive
            const double lead = std::abs(n.x) > 1e-9 ? n.x : (std::abs(n.y) > 1e-9 ? n.y : n.z);
            if (lead < 0.0)
                n = -n;
            const double d = geom::dot(n, corner(tri, 0));
            for (auto &p : planes_)
                if (geom::norm(p.normal - n) < 1e-9 && std::abs(p.offset - d) < 1e-9 * std::max(1.0, std::abs(d)))
                {
                    p.triangles.push_back(tri);
                    return;
                }
            planes_.push_back({n, d, {tri}});
        }

        std::vector<Vec3> vertices_;
        std::vector<std::array<std::size_t, 3>> triangles_;
        std::vector<Vec3> normals_;
        std::vector<Plane> planes_;
    };

    // OBJ subset: `v x y z` and `f i j k` (1-based; `i/t/n` forms accepted); all other lines ignored.
    inline TriangleMesh load_mesh(std::istream &in)
    {
        TriangleMesh mesh;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            std::istringstream ls(line);
            std::string tag;
            if (!(ls >> tag))
                continue;
            auto fail = [&](const std::string &why) {
                return InputError("mesh line " + std::to_string(line_no) + ": " + why);
            };
            if (tag == "v")
            {
                Vec3 v;
                if (!(ls >> v.x >> v.y >> v.z))
                    throw fail("malformed vertex");
                if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
                    throw fail("non-finite vertex");
                mesh.add_vertex(v);
            }
            else if (tag == "f")
            {
                std::array<std::size_t, 3> idx{};
                std::string tok;
                for (auto &i : idx)
                {
                    if (!(ls >> tok))
                        throw fail("face needs three vertex indices");
                    tok = tok.substr(0, tok.find('/'));
                    long long k = 0;
                    std::size_t used = 0;
                    try
                    {
                        k = std::stoll(tok, &used);
                    }
                    catch (const std::exception &)
                    {
                        throw fail("malformed vertex index '" + tok + "'");
                    }
                    if (used != tok.size())
                        throw fail("malformed vertex index '" + tok + "'");
                    if (k < 1 || static_cast<std::size_t>(k) > mesh.vertices().size())
                        throw fail("vertex index " + std::to_string(k) + " out of range (indices are 1-based)");
                    i = static_cast<std::size_t>(k - 1);
                }
                if (ls >> tok)
                    throw fail("only triangular faces are supported");
                try
                {
                    mesh.add_triangle(idx[0], idx[1], idx[2]);
                }
                catch (const InputError &e)
                {
                    throw fail(e.what());
                }
            }
        }
        return mesh;
    }

    inline TriangleMesh load_mesh_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw InputError("cannot open mesh file '" + path + "'");
        return load_mesh(in);
    }

    inline void write_mesh(std::ostream &os, const TriangleMesh &mesh)
    {
        os << std::setprecision(17);
        for (const auto &v : mesh.vertices())
            os << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
        for (std::size_t i = 0; i < mesh.size(); ++i)
        {
            const auto &t = mesh.triangle(i);
            os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
        }
    }

    // Moller-Trumbore: distance along the unit direction to the triangle, edges inclusive.
    inline std::optional<double> ray_triangle(const Vec3 &origin, const Vec3 &dir, const Vec3 &a, const Vec3 &b,
                                              const Vec3 &c)
    {
        constexpr double eps = 1e-12;
        const Vec3 e1 = b - a, e2 = c - a;
        const Vec3 p = geom::cross(dir, e2);
        const double det = geom::dot(e1, p);
        if (std::abs(det) < eps * geom::norm(e1) * geom::norm(e2))
            return std::nullopt;
        const double inv = 1.0 / det;
        const Vec3 s = origin - a;
        const double u = geom::dot(s, p) * inv;
        if (u < 0.0 || u > 1.0)
            return std::nullopt;
        const Vec3 q = geom::cross(s, e1);
        const double v = geom::dot(dir, q) * inv;
        if (v < 0.0 || u + v > 1.0)
            return std::nullopt;
        const double t = geom::dot(e2, q) * inv;
        if (!(t > 0.0))
            return std::nullopt;
        return t;
    }

    // True when some triangle cuts the open segment (p, q). Endpoints lying on a surface
    // (reflection points, wall-mounted surfaces) do not count.
    inline bool occluded(const TriangleMesh &mesh, const Vec3 &p, const Vec3 &q)
    {
        const Vec3 d = q - p;
        const double len = geom::norm(d);
        if (len == 0.0)
            return false;
        const Vec3 dir = d / len;
        const double eps = 1e-6 * std::max(1.0, len);
        for (std::size_t i = 0; i < mesh.size(); ++i)
            if (const auto t = ray_triangle(p, dir, mesh.corner(i, 0), mesh.corner(i, 1), mesh.corner(i, 2)))
                if (*t > eps && *t < len - eps)
                    return true;
        return false;
    }

    struct PropagationPath
    {
        std::vector<Vec3> points; // reflection points, in order from source to destination
        std::vector<std::size_t> triangles;
        double length = 0.0;

        std::size_t bounces() const { return points.size(); }
    };

    namespace detail
    {
        inline double side(const TriangleMesh::Plane &pl, const Vec3 &p) { return geom::dot(pl.normal, p) - pl.offset; }

        inline Vec3 mirror(const TriangleMesh::Plane &pl, const Vec3 &p) { return p - pl.normal * (2.0 * side(pl, p)); }

        // Intersection of segment a -> b with the plane (a and b on opposite sides).
        inline Vec3 cross_plane(const TriangleMesh::Plane &pl, const Vec3 &a, const Vec3 &b)
        {
            const double sa = side(pl, a), sb = side(pl, b);
            return a + (b - a) * (sa / (sa - sb));
        }

        // Lowest-index triangle of the plane containing p (edges inclusive).
        inline std::optional<std::size_t> containing(const TriangleMesh &mesh, const TriangleMesh::Plane &pl, const Vec3 &p)
        {
            constexpr double tol = 1e-9;
            for (std::size_t t : pl.triangles)
            {
                const Vec3 &a = mesh.corner(t, 0), &b = mesh.corner(t, 1), &c = mesh.corner(t, 2);
                const Vec3 n = mesh.normal(t);
                const double w0 = geom::dot(geom::cross(b - a, p - a), n);
                const double w1 = geom::dot(geom::cross(c - b, p - b), n);
                const double w2 = geom::dot(geom::cross(a - c, p - c), n);
                const double scale = tol * geom::norm(geom::cross(b - a, c - a));
                if (w0 >= -scale && w1 >= -scale && w2 >= -scale)
                    return t;
            }
            return std::nullopt;
        }

        inline double plane_eps(const Vec3 &p) { return 1e-9 * std::max({1.0, std::abs(p.x), std::abs(p.y), std::abs(p.z)}); }
    }

    // All specular paths src -> dst with at most `max_bounces` reflections (0, 1 or 2), by
    // the image method. Sorted by bounce count, then triangle ids.
    inline std::vector<PropagationPath> find_paths(const TriangleMesh &mesh, const Vec3 &src, const Vec3 &dst,
                                                   int max_bounces)
    {
        if (max_bounces < 0 || max_bounces > 2)
            throw InputError("find_paths supports 0, 1 or 2 reflections");
        using detail::side;
        std::vector<PropagationPath> out;
        if (!occluded(mesh, src, dst))
            out.push_back({{}, {}, geom::distance(src, dst)});
        if (max_bounces == 0)
            return out;

        const auto &planes = mesh.planes();
        const double es = detail::plane_eps(src), ed = detail::plane_eps(dst);
        std::vector<PropagationPath> first, second;
        for (const auto &pl : planes)
        {
            const double ss = side(pl, src), sd = side(pl, dst);
            if (std::abs(ss) <= es || std::abs(sd) <= ed || (ss > 0) != (sd > 0))
                continue;
            const Vec3 img = detail::mirror(pl, src);
            const Vec3 q = detail::cross_plane(pl, dst, img);
            const auto tri = detail::containing(mesh, pl, q);
            if (!tri || occluded(mesh, src, q) || occluded(mesh, q, dst))
                continue;
            first.push_back({{q}, {*tri}, geom::distance(dst, img)});
        }
        if (max_bounces >= 2)
            for (std::size_t i = 0; i < planes.size(); ++i)
            {
                const auto &pi = planes[i];
                const double ss = side(pi, src);
                if (std::abs(ss) <= es)
                    continue;
                const Vec3 img1 = detail::mirror(pi, src);
                for (std::size_t j = 0; j < planes.size(); ++j)
                {
                    if (i == j)
                        continue;
                    const auto &pj = planes[j];
                    const double sd = side(pj, dst), si = side(pj, img1);
                    if (std::abs(sd) <= ed || std::abs(si) <= detail::plane_eps(img1) || (sd > 0) != (si > 0))
                        continue;
                    const Vec3 img2 = detail::mirror(pj, img1);
                    const Vec3 q2 = detail::cross_plane(pj, dst, img2);
                    const double s2 = side(pi, q2);
                    if (std::abs(s2) <= detail::plane_eps(q2) || (s2 > 0) != (ss > 0))
                        continue;
                    const auto t2 = detail::containing(mesh, pj, q2);
                    if (!t2)
                        continue;
                    const Vec3 q1 = detail::cross_plane(pi, q2, img1);
                    const auto t1 = detail::containing(mesh, pi, q1);
                    if (!t1 || occluded(mesh, src, q1) || occluded(mesh, q1, q2) || occluded(mesh, q2, dst))
                        continue;
                    second.push_back({{q1, q2}, {*t1, *t2}, geom::distance(dst, img2)});
                }
            }
        auto by_ids = [](const PropagationPath &a, const PropagationPath &b) { return a.triangles < b.triangles; };
        std::sort(first.begin(), first.end(), by_ids);
        std::sort(second.begin(), second.end(), by_ids);
        out.insert(out.end(), first.begin(), first.end());
        out.insert(out.end(), second.begin(), second.end());
        return out;
    }

    // Cosine element power pattern cos^(2 mu) of the angle from broadside; no back radiation.
    inline double element_gain(double theta, double mu)
    {
        if (!(mu > 0.0))
            throw InputError("element pattern exponent must be positive");
        if (!(theta < std::numbers::pi / 2))
            return 0.0;
        return std::pow(std::cos(std::abs(theta)), 2.0 * mu);
    }

    // Mean over `draws` of |sum_k sqrt(P_k) e^(j phi_k)|^2 with i.i.d. uniform phases.
    // A single path is returned exactly: its power does not depend on the phase.
    inline double combine_random_phase(std::span<const double> powers, int draws, Rng &rng)
    {
        if (draws < 1)
            throw InputError("random-phase combination needs at least one draw");
        if (powers.empty())
            return 0.0;
        if (powers.size() == 1)
            return powers[0];
        std::vector<double> amp(powers.size());
        for (std::size_t k = 0; k < powers.size(); ++k)
            amp[k] = std::sqrt(powers[k]);
        double acc = 0.0;
        for (int d = 0; d < draws; ++d)
        {
            channel::cplx s = 0.0;
            for (double a : amp)
                s += std::polar(a, channel::two_pi * rng.uniform());
            acc += std::norm(s);
        }
        return acc / draws;
    }

    inline double received_power(std::span<const double> powers, int draws, std::uint64_t seed)
    {
        Rng rng(seed);
        return combine_random_phase(powers, draws, rng);
    }

    // Power collected by a RIS: the single-element power at its center times the element count.
    inline double ris_impinging_power(std::span<const double> element_path_powers, int n_elements, int draws,
                                      std::uint64_t seed)
    {
        return static_cast<double>(n_elements) * received_power(element_path_powers, draws, seed);
    }

    enum class SourceKind
    {
        bs,
        ris
    };

    struct RadiatingSource
    {
        SourceKind kind = SourceKind::bs;
        geom::Frame3 frame; // BS: array along axis_x, boresight axis_z; RIS: surface normal axis_z
        double mu = 0.5;
        bool isotropic = false; // element pattern 1 in every direction
        double power = 0.0;     // BS: transmit power; RIS: impinging power (W)
        int bs = 0;             // serving group for association
        int ris = -1;           // candidate site index of a RIS source

        int n_b = 1;                     // BS elements
        double bs_spacing = 0.5;         // BS element spacing over wavelength
        channel::ComplexVector precoder; // unit-norm BS weights; empty means uniform

        channel::ArrayGeometry geom; // RIS array
        channel::RisConfig config;

        void validate() const
        {
            if (!(power >= 0.0) || !std::isfinite(power))
                throw InputError("source power must be finite and non-negative");
            if (!isotropic && !(mu > 0.0))
                throw InputError("source element exponent must be positive");
        }
    };

    inline double angle_from(const geom::Frame3 &f, const Vec3 &dir)
    {
        const double c = geom::dot(f.axis_z, dir) / geom::norm(dir);
        return std::acos(std::clamp(c, -1.0, 1.0));
    }

    // Re-radiation gain of a configured RIS toward `dir`: array pattern over N_r times the
    // element pattern, so a zero-phase surface at broadside gives N_r.
    inline double ris_beampattern_gain(const RadiatingSource &src, const Vec3 &dir)
    {
        if (geom::dot(src.frame.axis_z, dir) <= 0.0)
            return 0.0;
        const auto sf = geom::direction_frequencies(src.frame, dir);
        const double pattern = channel::array_pattern(src.geom, src.config, sf.omega, sf.psi);
        const double el = src.isotropic ? 1.0 : element_gain(angle_from(src.frame, dir), src.mu);
        return pattern / src.geom.n_elements() * el;
    }

    // Unit-norm ULA weights along the BS axis aimed at `target` (matched filter).
    inline channel::ComplexVector bs_beam_toward(const geom::Frame3 &bs, int n_b, double spacing, const Vec3 &target)
    {
        const double cos_phi = geom::dot(geom::normalized(target - bs.origin), bs.axis_x);
        channel::ComplexVector w = channel::ula_response(n_b, spacing, cos_phi);
        for (auto &e : w)
            e /= std::sqrt(static_cast<double>(n_b));
        return w;
    }

    // Effective isotropic radiated power of the source toward `dir` (W).
    inline double eirp(const RadiatingSource &src, const Vec3 &dir)
    {
        if (src.kind == SourceKind::ris)
            return src.power * ris_beampattern_gain(src, dir);
        const double el = src.isotropic ? 1.0
                                        : (geom::dot(src.frame.axis_z, dir) <= 0.0 ? 0.0 : element_gain(angle_from(src.frame, dir), src.mu));
        if (el == 0.0)
            return 0.0;
        const double cos_phi = geom::dot(dir, src.frame.axis_x) / geom::norm(dir);
        const auto a = channel::ula_response(src.n_b, src.bs_spacing, cos_phi);
        channel::cplx acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k)
        {
            const channel::cplx w = src.precoder.empty() ? 1.0 / std::sqrt(static_cast<double>(src.n_b)) : src.precoder[k];
            acc += std::conj(a[k]) * w;
        }
        return src.power * el * std::norm(acc);
    }

    struct RtOptions
    {
        int max_bounces = 2;
        int phase_draws = 100;
        double reflection_loss_db = 6.0;
        double beta = 2.0;
        double frequency_hz = 26e9;
        bool reference_gain = true; // (lambda / 4 pi)^2 isotropic aperture factor per hop
        double mu = 0.5;
        double noise_w = 1e-11;
        double power_cap_w = std::numeric_limits<double>::infinity(); // JFI cap
        int threads = 1;

        double hop_gain() const
        {
            if (!reference_gain)
                return 1.0;
            const double lambda = 299792458.0 / frequency_hz;
            const double g = lambda / (4.0 * std::numbers::pi);
            return g * g;
        }

        void validate() const
        {
            if (max_bounces < 0 || max_bounces > 2)
                throw InputError("ray tracer supports 0 to 2 reflections");
            if (phase_draws < 1)
                throw InputError("phase draws must be positive");
            if (!(beta > 0.0) || !(frequency_hz > 0.0) || !(noise_w > 0.0))
                throw InputError("beta, frequency and noise must be positive");
        }
    };

    // Received power of one path: EIRP along the departure direction, receive pattern along
    // the arrival direction, per-bounce loss and d^-beta spreading over the unfolded length.
    inline double path_power(const RadiatingSource &src, const Vec3 &dst, const PropagationPath &p, const RtOptions &opt,
                             const geom::Frame3 *rx_element = nullptr)
    {
        const Vec3 first = p.points.empty() ? dst : p.points.front();
        const Vec3 last = p.points.empty() ? src.frame.origin : p.points.back();
        double pw = eirp(src, first - src.frame.origin);
        if (pw == 0.0)
            return 0.0;
        if (rx_element)
        {
            const Vec3 arrival = last - dst;
            if (geom::dot(rx_element->axis_z, arrival) <= 0.0)
                return 0.0;
            pw *= element_gain(angle_from(*rx_element, arrival), opt.mu);
        }
        const double loss = std::pow(10.0, -opt.reflection_loss_db / 10.0 * static_cast<double>(p.bounces()));
        return pw * loss * channel::pathgain(p.length, opt.beta) * opt.hop_gain();
    }

    // Parallel loop over [0, n) with static chunks; body(i) must only write slot i.
    template <class F>
    void parallel_for(std::size_t n, int threads, F &&body)
    {
        const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                body(i);
            return;
        }
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try
                {
                    for (std::size_t i = w; i < n; i += workers)
                        body(i);
                }
                catch (...)
                {
                    errors[w] = std::current_exception();
                }
            });
        for (auto &t : pool)
            t.join();
        for (auto &e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    // Highest power wins; ties to the lowest index.
    inline int associate(std::span<const double> per_bs_power)
    {
        if (per_bs_power.empty())
            throw InputError("association needs at least one base station");
        std::size_t best = 0;
        for (std::size_t m = 1; m < per_bs_power.size(); ++m)
            if (per_bs_power[m] > per_bs_power[best])
                best = m;
        return static_cast<int>(best);
    }

    struct PointPower
    {
        std::vector<double> per_bs; // random-phase combined power per BS group
        int serving = 0;
    };

    // Power at `point` from every source, grouped per BS and combined with random phases.
    // Paths per source may be supplied (one list per source) or are traced on the fly.
    inline PointPower point_power(const TriangleMesh &mesh, std::span<const RadiatingSource> sources, int num_bs,
                                  const Vec3 &point, const RtOptions &opt, std::uint64_t point_seed,
                                  const std::vector<const std::vector<PropagationPath> *> *paths = nullptr)
    {
        std::vector<std::vector<double>> group(static_cast<std::size_t>(num_bs));
        for (std::size_t s = 0; s < sources.size(); ++s)
        {
            const RadiatingSource &src = sources[s];
            if (src.power == 0.0 || src.bs < 0 || src.bs >= num_bs)
                continue;
            std::vector<PropagationPath> traced;
            const std::vector<PropagationPath> *ps = paths ? (*paths)[s] : nullptr;
            if (!ps)
            {
                traced = find_paths(mesh, src.frame.origin, point, opt.max_bounces);
                ps = &traced;
            }
            for (const auto &p : *ps)
                if (const double pw = path_power(src, point, p, opt); pw > 0.0)
                    group[static_cast<std::size_t>(src.bs)].push_back(pw);
        }
        PointPower out;
        out.per_bs.resize(group.size());
        for (std::size_t m = 0; m < group.size(); ++m)
            out.per_bs[m] = received_power(group[m], opt.phase_draws, stream_seed(point_seed, m));
        out.serving = associate(out.per_bs);
        return out;
    }

    // Sources of a deployment: every BS with a broadside uniform beam for direct coverage,
    // and every deployed RIS re-radiating the power it collects from its BS (which aims an
    // MRT beam at it) through its configuration.
    inline std::vector<RadiatingSource> deployment_sources(const TriangleMesh &mesh, const plan::PlanningInstance &inst,
                                                           const plan::Deployment &dep, const RtOptions &opt,
                                                           std::uint64_t seed,
                                                           const std::vector<std::vector<std::vector<PropagationPath>>> *bs_cs_paths = nullptr)
    {
        std::vector<RadiatingSource> out;
        for (std::size_t m = 0; m < inst.num_bs(); ++m)
        {
            RadiatingSource s;
            s.kind = SourceKind::bs;
            s.frame = inst.bss[m].frame;
            s.mu = opt.mu;
            s.power = inst.power;
            s.bs = static_cast<int>(m);
            s.n_b = inst.bss[m].n_b;
            out.push_back(std::move(s));
        }
        for (std::size_t n : dep.deployed())
        {
            const int m = dep.bs_of_ris[n];
            if (m < 0 || !dep.configs.count(n))
                continue;
            const auto &bs = inst.bss[static_cast<std::size_t>(m)];
            RadiatingSource feed;
            feed.kind = SourceKind::bs;
            feed.frame = bs.frame;
            feed.mu = opt.mu;
            feed.power = inst.power;
            feed.n_b = bs.n_b;
            feed.precoder = bs_beam_toward(bs.frame, bs.n_b, feed.bs_spacing, inst.css[n].origin);

            std::vector<PropagationPath> traced;
            const std::vector<PropagationPath> *ps = bs_cs_paths ? &(*bs_cs_paths)[static_cast<std::size_t>(m)][n] : nullptr;
            if (!ps)
            {
                traced = find_paths(mesh, bs.frame.origin, inst.css[n].origin, opt.max_bounces);
                ps = &traced;
            }
            std::vector<double> powers;
            for (const auto &p : *ps)
                if (const double pw = path_power(feed, inst.css[n].origin, p, opt, &inst.css[n]); pw > 0.0)
                    powers.push_back(pw);

            RadiatingSource s;
            s.kind = SourceKind::ris;
            s.frame = inst.css[n];
            s.mu = opt.mu;
            s.power = ris_impinging_power(powers, inst.ris_geom.n_elements(), opt.phase_draws,
                                          stream_seed(seed, 0x726973ULL, n));
            s.bs = m;
            s.ris = static_cast<int>(n);
            s.geom = inst.ris_geom;
            s.config = dep.configs.at(n);
            out.push_back(std::move(s));
        }
        return out;
    }

    // Ray-traced evaluation of deployments at the instance's test points. Paths from every BS
    // and candidate site are traced once and reused for every deployment.
    class Evaluator
    {
    public:
        Evaluator(const TriangleMesh &mesh, const plan::PlanningInstance &inst, RtOptions opt)
            : mesh_(mesh), inst_(inst), opt_(std::move(opt))
        {
            opt_.validate();
            const std::size_t M = inst.num_bs(), N = inst.num_cs(), T = inst.num_tp();
            bs_tp_.assign(M, std::vector<std::vector<PropagationPath>>(T));
            cs_tp_.assign(N, std::vector<std::vector<PropagationPath>>(T));
            bs_cs_.assign(M, std::vector<std::vector<PropagationPath>>(N));
            const std::size_t jobs = (M + N) * T + M * N;
            parallel_for(jobs, opt_.threads, [&](std::size_t j) {
                if (j < M * T)
                    bs_tp_[j / T][j % T] = find_paths(mesh_, inst_.bss[j / T].frame.origin, inst_.test_points[j % T], opt_.max_bounces);
                else if ((j -= M * T) < N * T)
                    cs_tp_[j / T][j % T] = find_paths(mesh_, inst_.css[j / T].origin, inst_.test_points[j % T], opt_.max_bounces);
                else
                {
                    j -= N * T;
                    bs_cs_[j / N][j % N] = find_paths(mesh_, inst_.bss[j / N].frame.origin, inst_.css[j % N].origin, opt_.max_bounces);
                }
            });
        }

        const RtOptions &options() const { return opt_; }

        CoverageReport evaluate(const plan::Deployment &dep, std::uint64_t seed) const
        {
            const auto sources = deployment_sources(mesh_, inst_, dep, opt_, seed, &bs_cs_);
            CoverageReport rep;
            rep.points.resize(inst_.num_tp());
            parallel_for(inst_.num_tp(), opt_.threads, [&](std::size_t t) {
                std::vector<const std::vector<PropagationPath> *> paths;
                for (const auto &s : sources)
                    paths.push_back(s.kind == SourceKind::bs ? &bs_tp_[static_cast<std::size_t>(s.bs)][t]
                                                             : &cs_tp_[static_cast<std::size_t>(s.ris)][t]);
                const PointPower pp = point_power(mesh_, sources, static_cast<int>(inst_.num_bs()), inst_.test_points[t],
                                                  opt_, stream_seed(seed, t), &paths);
                fill(rep.points[t], inst_.test_points[t], pp);
            });
            rep.summarize(opt_.power_cap_w);
            return rep;
        }

        void fill(PointResult &r, const Vec3 &pos, const PointPower &pp) const
        {
            r.position = pos;
            r.serving_bs = pp.serving;
            r.power = pp.per_bs[static_cast<std::size_t>(pp.serving)];
            r.snr = r.power / opt_.noise_w;
            r.serving_ris = -1;
        }

    private:
        const TriangleMesh &mesh_;
        const plan::PlanningInstance &inst_;
        RtOptions opt_;
        std::vector<std::vector<std::vector<PropagationPath>>> bs_tp_, cs_tp_, bs_cs_;
    };

    struct GridSpec
    {
        double x0 = 0, x1 = 1, y0 = 0, y1 = 1, z = 1.5;
        int nx = 1, ny = 1;

        void validate() const
        {
            if (nx < 1 || ny < 1 || !(x1 >= x0) || !(y1 >= y0) || !std::isfinite(z))
                throw InputError("heatmap grid needs nx, ny >= 1 and ordered bounds");
        }

        // Cell centers, row-major with x fastest.
        Vec3 cell(int ix, int iy) const
        {
            return {x0 + (ix + 0.5) * (x1 - x0) / nx, y0 + (iy + 0.5) * (y1 - y0) / ny, z};
        }
    };

    // Per-cell received power, SNR and serving BS; the point seed is the cell index.
    inline CoverageReport coverage_heatmap(const TriangleMesh &mesh, std::span<const RadiatingSource> sources, int num_bs,
                                           const GridSpec &grid, const RtOptions &opt, std::uint64_t seed)
    {
        grid.validate();
        opt.validate();
        for (const auto &s : sources)
            s.validate();
        CoverageReport rep;
        const auto cells = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
        rep.points.resize(cells);
        parallel_for(cells, opt.threads, [&](std::size_t c) {
            const Vec3 p = grid.cell(static_cast<int>(c % static_cast<std::size_t>(grid.nx)), static_cast<int>(c / static_cast<std::size_t>(grid.nx)));
            const PointPower pp = point_power(mesh, sources, num_bs, p, opt, stream_seed(seed, c));
            auto &r = rep.points[c];
            r.position = p;
            r.serving_bs = pp.serving;
            r.power = pp.per_bs[static_cast<std::size_t>(pp.serving)];
            r.snr = r.power / opt.noise_w;
        });
        rep.summarize(opt.power_cap_w);
        return rep;
    }

    inline constexpr double pgm_floor_dbm = -120.0;
    inline constexpr double pgm_cap_dbm = -65.0;

    // Gray level of a received power: -120 dBm -> 0, -65 dBm -> 255, linear in dB, clamped.
    inline int pgm_level(double power_w)
    {
        const double dbm = watt_to_dbm(power_w);
        if (!(dbm > pgm_floor_dbm))
            return 0;
        const double f = (dbm - pgm_floor_dbm) / (pgm_cap_dbm - pgm_floor_dbm);
        return static_cast<int>(std::lround(std::clamp(f, 0.0, 1.0) * 255.0));
    }

    inline std::string format_db(double db)
    {
        if (!std::isfinite(db))
            return db < 0 ? "-inf" : "inf";
        std::ostringstream os;
        os << std::fixed << std::setprecision(4) << db;
        return os.str();
    }

    inline void write_heatmap_csv(std::ostream &os, const CoverageReport &rep)
    {
        os << "x,y,power_dBm,snr_dB,serving_bs\n";
        for (const auto &p : rep.points)
        {
            os << std::fixed << std::setprecision(3) << p.position.x << ',' << p.position.y << ',';
            os << format_db(watt_to_dbm(p.power)) << ',' << format_db(linear_to_db(p.snr)) << ',' << p.serving_bs << '\n';
        }
    }

    // Binary PGM (P5); image row 0 is the grid's largest y so north is up.
    inline void write_heatmap_pgm(std::ostream &os, const CoverageReport &rep, const GridSpec &grid)
    {
        os << "P5\n" << grid.nx << ' ' << grid.ny << "\n255\n";
        for (int iy = grid.ny - 1; iy >= 0; --iy)
            for (int ix = 0; ix < grid.nx; ++ix)
                os.put(static_cast<char>(pgm_level(rep.points[static_cast<std::size_t>(iy * grid.nx + ix)].power)));
    }
}
