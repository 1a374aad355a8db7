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
#ifndef REWIRE_BRANCHING_HPP
#define REWIRE_BRANCHING_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "ctmc.hpp"
#include "infective_table.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "trajectory.hpp"

namespace rewire
{

/**
 * Early-phase branching approximation. Each individual is born with Po(mu)
 * edges and dies at rate gamma; each edge infects at rate lambda (spawning a
 * child) or is dropped at rate omega.
 */
struct BranchingConfig {
    Params params{};
    /// Stop and call the process surviving once this many individuals hold edges. Checked only after the
    /// ancestor's lifetime has ended, so its offspring count is always complete; progeny_cap is a hard stop.
    std::int64_t alive_cap   = 1000;
    std::int64_t progeny_cap = 10'000'000;
    double time_cap          = std::numeric_limits<double>::infinity();
};

struct BranchingOutcome {
    bool extinct                   = true;
    std::int64_t total_progeny     = 1; ///< includes the ancestor
    std::int64_t peak_edges        = 0;
    std::int64_t ancestor_children = 0;
    bool ancestor_complete         = false; ///< ancestor's lifetime ended before the run stopped
    double duration                = 0.0;
};

/// Malthusian growth rate lambda(mu-1) - gamma - omega of the approximating process.
inline double malthusian(const Params& p) noexcept
{
    return p.lambda * (p.mu - 1.0) - p.gamma - p.omega;
}

template <VariateSource R>
BranchingOutcome simulate_branching(const BranchingConfig& cfg, R& rng)
{
    const Params& p = cfg.params;
    validate(p);
    BranchingOutcome out;

    // Individuals without edges can no longer influence anything and are dropped at once.
    InfectiveTable table;
    std::vector<std::int64_t> children;
    std::size_t ancestor = 0;
    bool ancestor_alive  = true;

    auto retire = [&](std::size_t slot) {
        if (ancestor_alive && slot == ancestor) {
            out.ancestor_children = children[slot];
            out.ancestor_complete = true;
            ancestor_alive        = false;
        }
        const std::size_t last = table.size() - 1;
        table.remove(slot);
        children[slot] = children[last];
        children.pop_back();
        if (ancestor_alive && ancestor == last) {
            ancestor = slot;
        }
    };

    const std::int64_t first = rng.poisson(p.mu);
    table.push(first);
    children.push_back(0);
    out.peak_edges = first;
    if (first == 0 || p.lambda == 0.0) {
        out.ancestor_complete = true; // no edges or no transmission: no children ever
        out.extinct           = true;
        return out;
    }

    double t = 0.0;
    while (table.total() > 0) {
        const bool soft_stop = !ancestor_alive && (static_cast<std::int64_t>(table.size()) >= cfg.alive_cap
                                                   || t > cfg.time_cap);
        if (soft_stop || out.total_progeny >= cfg.progeny_cap) {
            out.extinct  = false;
            out.duration = t;
            return out;
        }
        const auto edges   = static_cast<double>(table.total());
        const double inf   = p.lambda * edges;
        const double drop  = p.omega * edges;
        const double total = inf + drop + p.gamma * static_cast<double>(table.size());
        t += rng.exponential(total);
        const double u = rng.uniform() * total;
        if (u <= inf + drop) {
            const auto rank        = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(table.total())));
            const std::size_t slot = table.find_edge(rank);
            table.add(slot, -1);
            if (u <= inf) {
                ++children[slot];
                ++out.total_progeny;
                const std::int64_t k = rng.poisson(p.mu);
                if (k > 0) {
                    table.push(k);
                    children.push_back(0);
                }
            }
            if (table.count(slot) == 0) {
                retire(slot);
            }
            out.peak_edges = std::max(out.peak_edges, table.total());
        }
        else {
            retire(static_cast<std::size_t>(rng.uniform_index(table.size())));
        }
    }
    out.extinct  = true;
    out.duration = t;
    return out;
}

/**
 * Probability that the branching process dies out: the smallest fixed point
 * in [0, 1] of the offspring generating function. Given a lifetime t, each of
 * the Po(mu) edges independently yields a child with probability
 * lambda/(lambda+omega) * (1 - exp(-(lambda+omega) t)); substituting
 * u = exp(-gamma t) turns the lifetime average into an integral over [0, 1].
 */
inline double extinction_probability(const Params& p, double quad_tol = 1e-10, double step_tol = 1e-12,
                                     int max_iterations = 1'000'000)
{
    validate(p);
    if (compute_r0(p) <= 1.0) {
        return 1.0;
    }
    const double share = p.lambda / (p.lambda + p.omega);
    const double m     = p.mu * share;
    auto pgf           = [&](double q) {
        if (p.gamma == 0.0) {
            return std::exp(m * (q - 1.0));
        }
        const double expo = (p.lambda + p.omega) / p.gamma;
        return integrate_gl([&](double u) { return std::exp(m * (1.0 - std::pow(u, expo)) * (q - 1.0)); }, 0.0,
                            1.0, quad_tol);
    };
    double q = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        const double next = pgf(q);
        if (std::fabs(next - q) < step_tol) {
            return next;
        }
        q = next;
    }
    throw NumericalError("extinction probability: fixed-point iteration did not converge");
}

/// Asymptotic probability of a major outbreak started by one initial infective.
inline double major_outbreak_probability(const Params& p)
{
    return 1.0 - extinction_probability(p);
}

struct BranchingRow {
    double lambda;
    double q_ext;
    double r_malthus;
    double r0;
};

inline BranchingRow branching_row(const Params& p)
{
    return {p.lambda, extinction_probability(p), malthusian(p), compute_r0(p)};
}

inline void write_branching_csv(std::ostream& os, std::span<const BranchingRow> rows)
{
    os << "lambda,q_ext,r_malthus,r0\n";
    for (const auto& r : rows) {
        os << fmt9(r.lambda) << ',' << fmt9(r.q_ext) << ',' << fmt9(r.r_malthus) << ',' << fmt9(r.r0) << '\n';
    }
}

} // namespace rewire

#endif // REWIRE_BRANCHING_HPP
