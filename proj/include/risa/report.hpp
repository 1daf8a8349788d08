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

#include "risa/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace risa
{
    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double x) { return x > 0.0 ? 10.0 * std::log10(x) : -std::numeric_limits<double>::infinity(); }
    inline double dbm_to_watt(double dbm) { return db_to_linear(dbm - 30.0); }
    inline double watt_to_dbm(double w) { return linear_to_db(w) + 30.0; }

    // Jain's fairness index (sum x)^2 / (n sum x^2) after capping every value at `cap`.
    // All-zero input is defined as perfectly fair.
    inline double jfi(std::span<const double> values, double cap = std::numeric_limits<double>::infinity())
    {
        if (values.empty())
            throw InputError("JFI of an empty set is undefined");
        double s = 0.0, s2 = 0.0;
        for (double v : values)
        {
            if (!(v >= 0.0))
                throw InputError("JFI needs non-negative values");
            const double c = std::min(v, cap);
            s += c;
            s2 += c * c;
        }
        if (s2 == 0.0)
            return 1.0;
        const double j = s * s / (static_cast<double>(values.size()) * s2);
        return std::clamp(j, 1.0 / static_cast<double>(values.size()), 1.0);
    }

    struct PointResult
    {
        geom::Vec3 position;
        double power = 0.0; // received power (W) in the serving link
        double snr = 0.0;   // linear
        int serving_bs = -1;
        int serving_ris = -1; // -1: direct link or uncovered
    };

    struct CoverageReport
    {
        std::vector<PointResult> points;
        double min_snr = 0.0;
        double mean_snr = 0.0;
        double jfi = 1.0;

        // Recomputes the summary; JFI runs over received power capped at `power_cap` (W).
        void summarize(double power_cap = std::numeric_limits<double>::infinity())
        {
            if (points.empty())
            {
                min_snr = mean_snr = 0.0;
                jfi = 1.0;
                return;
            }
            min_snr = std::numeric_limits<double>::infinity();
            double sum = 0.0;
            std::vector<double> powers;
            powers.reserve(points.size());
            for (const auto &p : points)
            {
                min_snr = std::min(min_snr, p.snr);
                sum += p.snr;
                powers.push_back(p.power);
            }
            mean_snr = sum / static_cast<double>(points.size());
            jfi = risa::jfi(powers, power_cap);
        }
    };
}
