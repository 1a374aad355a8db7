/*
 * Copyright (C) 2026 The rewire authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef REWIRE_TRAJECTORY_HPP
#define REWIRE_TRAJECTORY_HPP

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rewire
{

/// One sample of the scaled state (s, i, i_E, w) at time t.
struct TrajectoryPoint {
    double t   = 0.0;
    double s   = 0.0;
    double i   = 0.0;
    double i_e = 0.0;
    double w   = 0.0;
};

using Trajectory = std::vector<TrajectoryPoint>;

/// Piecewise-constant (right-continuous) value of a trajectory at time t; holds the last point past the end.
inline TrajectoryPoint sample_at(std::span<const TrajectoryPoint> traj, double t)
{
    if (traj.empty()) {
        throw std::invalid_argument("empty trajectory");
    }
    auto it = std::upper_bound(traj.begin(), traj.end(), t,
                               [](double v, const TrajectoryPoint& p) { return v < p.t; });
    if (it == traj.begin()) {
        return traj.front();
    }
    TrajectoryPoint p = *(it - 1);
    p.t = t;
    return p;
}

/// Pointwise mean of step-function trajectories on a common time grid.
inline Trajectory mean_on_grid(std::span<const Trajectory> trajs, std::span<const double> grid)
{
    Trajectory out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out[k].t = grid[k];
    }
    if (trajs.empty()) {
        return out;
    }
    for (const auto& tr : trajs) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto p = sample_at(tr, grid[k]);
            out[k].s += p.s;
            out[k].i += p.i;
            out[k].i_e += p.i_e;
            out[k].w += p.w;
        }
    }
    const double inv = 1.0 / static_cast<double>(trajs.size());
    for (auto& p : out) {
        p.s *= inv;
        p.i *= inv;
        p.i_e *= inv;
        p.w *= inv;
    }
    return out;
}

inline std::vector<double> uniform_grid(double t_end, double dt)
{
    std::vector<double> g;
    if (dt <= 0.0) {
        throw std::invalid_argument("grid step must be > 0");
    }
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t > t_end + 1e-12 * dt) {
            break;
        }
        g.push_back(t);
    }
    return g;
}

/// Formats with 9 significant digits, the precision of every numeric CSV column.
inline std::string fmt9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void write_trajectory_csv(std::ostream& os, std::span<const TrajectoryPoint> traj)
{
    os << "t,s,i,i_e,w\n";
    for (const auto& p : traj) {
        os << fmt9(p.t) << ',' << fmt9(p.s) << ',' << fmt9(p.i) << ',' << fmt9(p.i_e) << ',' << fmt9(p.w) << '\n';
    }
}

} // namespace rewire

#endif // REWIRE_TRAJECTORY_HPP
