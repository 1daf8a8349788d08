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

#include <cmath>
#include <utility>

namespace risa::geom
{
    struct Vec3
    {
        double x = 0.0, y = 0.0, z = 0.0;

        constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
        constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
        constexpr Vec3 operator-() const { return {-x, -y, -z}; }
        constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
        constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
        constexpr Vec3 &operator+=(const Vec3 &o)
        {
            x += o.x, y += o.y, z += o.z;
            return *this;
        }
        constexpr bool operator==(const Vec3 &) const = default;
    };

    constexpr Vec3 operator*(double s, const Vec3 &v) { return v * s; }

    constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

    constexpr Vec3 cross(const Vec3 &a, const Vec3 &b)
    {
        return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
    }

    inline double norm(const Vec3 &v) { return std::sqrt(dot(v, v)); }

    inline double distance(const Vec3 &a, const Vec3 &b) { return norm(a - b); }

    inline Vec3 normalized(const Vec3 &v)
    {
        const double n = norm(v);
        if (n == 0.0)
            throw InputError("cannot normalize a zero vector");
        return v / n;
    }

    // Pose of a BS or RIS: center plus right-handed orthonormal axes.
    // For a RIS, axis_z is the outward surface normal, axis_x the horizontal element
    // axis and axis_y the vertical element axis.
    struct Frame3
    {
        Vec3 origin;
        Vec3 axis_x{1, 0, 0};
        Vec3 axis_y{0, 1, 0};
        Vec3 axis_z{0, 0, 1};

        bool valid(double tol = 1e-9) const
        {
            auto unit = [&](const Vec3 &a) { return std::abs(norm(a) - 1.0) <= tol; };
            if (!unit(axis_x) || !unit(axis_y) || !unit(axis_z))
                return false;
            if (std::abs(dot(axis_x, axis_y)) > tol || std::abs(dot(axis_y, axis_z)) > tol ||
                std::abs(dot(axis_x, axis_z)) > tol)
                return false;
            return norm(cross(axis_x, axis_y) - axis_z) <= tol;
        }

        // Frame whose axis_z points along `normal` and whose axis_y is the component of
        // `up` orthogonal to it. axis_x completes the right-handed triple.
        static Frame3 facing(const Vec3 &origin, const Vec3 &normal, const Vec3 &up = {0, 0, 1})
        {
            Frame3 f;
            f.origin = origin;
            f.axis_z = normalized(normal);
            Vec3 y = up - f.axis_z * dot(up, f.axis_z);
            if (norm(y) < 1e-9)
                y = std::abs(f.axis_z.x) < 0.9 ? Vec3{1, 0, 0} - f.axis_z * f.axis_z.x
                                               : Vec3{0, 1, 0} - f.axis_z * f.axis_z.y;
            f.axis_y = normalized(y);
            f.axis_x = cross(f.axis_y, f.axis_z);
            return f;
        }
    };

    // Coordinates of p in the frame, R^T (p - origin).
    inline Vec3 to_local(const Frame3 &frame, const Vec3 &p)
    {
        const Vec3 d = p - frame.origin;
        return {dot(d, frame.axis_x), dot(d, frame.axis_y), dot(d, frame.axis_z)};
    }

    inline Vec3 to_global_direction(const Frame3 &frame, const Vec3 &local)
    {
        return frame.axis_x * local.x + frame.axis_y * local.y + frame.axis_z * local.z;
    }

    struct SpatialFrequency
    {
        double omega = 0.0; // direction cosine along axis_x
        double psi = 0.0;   // direction cosine along axis_y
    };

    inline SpatialFrequency spatial_frequencies(const Frame3 &ris, const Vec3 &p)
    {
        const Vec3 u = to_local(ris, p);
        const double r = norm(u);
        if (r == 0.0)
            throw InputError("coincident point: spatial frequencies undefined at the frame origin");
        return {u.x / r, u.y / r};
    }

    // Direction cosines of a (not necessarily unit) direction expressed in the frame.
    inline SpatialFrequency direction_frequencies(const Frame3 &ris, const Vec3 &dir)
    {
        const double r = norm(dir);
        if (r == 0.0)
            throw InputError("zero direction");
        return {dot(dir, ris.axis_x) / r, dot(dir, ris.axis_y) / r};
    }

    // Closed half-space test: the point lies on or in front of the surface.
    inline bool fronting(const Frame3 &ris, const Vec3 &p)
    {
        return dot(ris.axis_z, p - ris.origin) >= 0.0;
    }
}
