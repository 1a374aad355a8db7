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
#ifndef REWIRE_CTMC_HPP
#define REWIRE_CTMC_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "infective_table.hpp"
#include "model.hpp"
#include "random.hpp"
#include "trajectory.hpp"

namespace rewire
{

/// Anything that can drive the simulators. Sampler is the production model; tests substitute scripted sources.
template <typename R>
concept VariateSource = requires(R& r, double x, std::int64_t k, std::uint64_t m) {
    { r.uniform() } -> std::convertible_to<double>;
    { r.uniform_index(m) } -> std::convertible_to<std::uint64_t>;
    { r.bernoulli(x) } -> std::convertible_to<bool>;
    { r.exponential(x) } -> std::convertible_to<double>;
    { r.poisson(x) } -> std::convertible_to<std::int64_t>;
    { r.binomial(k, x) } -> std::convertible_to<std::int64_t>;
};

/// Thrown by step() when no event has positive rate.
class Absorbed : public std::logic_error
{
public:
    Absorbed()
        : std::logic_error("absorbed")
    {
    }
};

struct SimConfig {
    std::int64_t n                  = 1000;
    std::int64_t initial_infectives = 1;
    Params params{};
    RewireMode mode    = RewireMode::UniformAll;
    std::uint64_t seed = 0;
    /// Final sizes at or above this count are major outbreaks; -1 selects ceil(log n).
    std::int64_t major_threshold = -1;
    std::int64_t max_events      = std::int64_t{1} << 40;
    /// Trajectory recording: false records nothing.
    bool record_trajectory = false;
    /// Sampling interval: < 0 every event, 0 automatic, > 0 fixed grid step.
    double sample_dt = 0.0;
};

inline std::int64_t default_major_threshold(std::int64_t n)
{
    return static_cast<std::int64_t>(std::ceil(std::log(static_cast<double>(n))));
}

inline std::int64_t major_threshold(const SimConfig& cfg)
{
    return cfg.major_threshold < 0 ? default_major_threshold(cfg.n) : cfg.major_threshold;
}

/// Per-pair edge intensity scaled so that 1 - mu/n = exp(-mu_n/n).
inline double mu_n(std::int64_t n, double mu)
{
    const auto nd = static_cast<double>(n);
    if (!(mu < nd)) {
        throw DomainError("mu_n requires mu < n");
    }
    return -nd * std::log1p(-mu / nd);
}

inline void validate(const SimConfig& cfg)
{
    validate(cfg.params);
    if (cfg.n < 3) {
        throw DomainError("n must be >= 3");
    }
    if (cfg.initial_infectives < 1 || cfg.initial_infectives >= cfg.n) {
        throw DomainError("initial_infectives must lie in [1, n)");
    }
    if (!(cfg.params.mu < static_cast<double>(cfg.n))) {
        throw DomainError("mu must be < n");
    }
    if (cfg.major_threshold < -1 || cfg.major_threshold > cfg.n) {
        throw DomainError("major_threshold must be -1 (default) or in [0, n]");
    }
    if (cfg.max_events < 1) {
        throw DomainError("max_events must be >= 1");
    }
    if (!std::isfinite(cfg.sample_dt)) {
        throw DomainError("sample_dt must be finite");
    }
}

/// Aggregate state of the construction: no graph, only infectives and their live edges.
struct SimState {
    std::int64_t n = 0;
    std::int64_t s = 0;
    std::int64_t w = 0;
    InfectiveTable infectives;
    double t                    = 0.0;
    std::int64_t cum_infections = 0;

    std::int64_t i() const noexcept
    {
        return static_cast<std::int64_t>(infectives.size());
    }

    std::int64_t i_e() const noexcept
    {
        return infectives.total();
    }

    std::int64_t recovered() const noexcept
    {
        return n - s - i();
    }

    TrajectoryPoint scaled() const noexcept
    {
        const double inv = 1.0 / static_cast<double>(n);
        return {t, s * inv, i() * inv, i_e() * inv, w * inv};
    }
};

enum class EventKind {
    infection,
    recovery,
    warning_drop,
    rewire_susceptible,
    rewire_infective,
    rewire_recovered,
    warning_retained,
};

inline std::string_view to_string(EventKind e) noexcept
{
    switch (e) {
    case EventKind::infection:
        return "infection";
    case EventKind::recovery:
        return "recovery";
    case EventKind::warning_drop:
        return "warning_drop";
    case EventKind::rewire_susceptible:
        return "rewire_susceptible";
    case EventKind::rewire_infective:
        return "rewire_infective";
    case EventKind::rewire_recovered:
        return "rewire_recovered";
    case EventKind::warning_retained:
        return "warning_retained";
    }
    return "?";
}

struct FinalSizeReport {
    std::int64_t final_size      = 0;
    double final_fraction        = 0.0;
    bool major                   = false;
    bool truncated               = false;
    std::int64_t duration_events = 0;
    std::uint64_t seed           = 0;
};

inline FinalSizeReport make_report(std::int64_t n, std::int64_t final_size, std::int64_t threshold,
                                   bool truncated, std::int64_t events, std::uint64_t seed)
{
    FinalSizeReport r;
    r.final_size      = final_size;
    r.final_fraction  = static_cast<double>(final_size) / static_cast<double>(n);
    r.major           = final_size >= threshold;
    r.truncated       = truncated;
    r.duration_events = events;
    r.seed            = seed;
    return r;
}

template <VariateSource R>
SimState init_state(const SimConfig& cfg, R& rng)
{
    validate(cfg);
    SimState st;
    st.n              = cfg.n;
    st.s              = cfg.n - cfg.initial_infectives;
    st.cum_infections = cfg.initial_infectives;
    st.infectives.reserve(static_cast<std::size_t>(std::min<std::int64_t>(cfg.n, 1024)));
    const double mean = mu_n(cfg.n, cfg.params.mu) * static_cast<double>(st.s) / static_cast<double>(cfg.n);
    for (std::int64_t k = 0; k < cfg.initial_infectives; ++k) {
        st.infectives.push(rng.poisson(mean));
    }
    return st;
}

/// Removes one edge chosen uniformly among all live edges; returns the owning slot.
template <VariateSource R>
std::size_t take_uniform_edge(SimState& st, R& rng)
{
    const auto rank = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(st.i_e())));
    const std::size_t slot = st.infectives.find_edge(rank);
    st.infectives.add(slot, -1);
    return slot;
}

template <VariateSource R>
void apply_infection(SimState& st, double mu_n_value, R& rng)
{
    const auto s_pre = static_cast<double>(st.s);
    take_uniform_edge(st, rng); // the infecting edge is used up

    // fresh edges go to the s_pre - 1 susceptibles left once the new infective is removed
    const std::int64_t fresh    = rng.poisson(mu_n_value * (s_pre - 1.0) / static_cast<double>(st.n));
    const std::int64_t acquired = rng.binomial(st.w, std::min(1.0, 2.0 / s_pre));
    st.w -= acquired;

    // Each remaining live edge pointed at the new infective with probability 1/s.
    const std::int64_t drops = rng.binomial(st.i_e(), 1.0 / s_pre);
    for (std::int64_t k = 0; k < drops; ++k) {
        take_uniform_edge(st, rng);
    }

    st.s -= 1;
    st.cum_infections += 1;
    st.infectives.push(fresh + acquired);
}

template <VariateSource R>
void apply_recovery(SimState& st, R& rng)
{
    st.infectives.remove(static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(st.i()))));
}

template <VariateSource R>
EventKind apply_warning(SimState& st, double alpha, RewireMode mode, R& rng)
{
    const auto rank = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(st.i_e())));
    const std::size_t slot = st.infectives.find_edge(rank);

    if (!rng.bernoulli(alpha)) {
        st.infectives.add(slot, -1);
        return EventKind::warning_drop;
    }

    const std::int64_t others_s = st.s - 1; // excluding the warned susceptible
    const std::int64_t others_i = st.i() - 1;
    const std::int64_t others_r = st.recovered();

    auto to_susceptible = [&] {
        st.infectives.add(slot, -1);
        st.w += 1;
        return EventKind::rewire_susceptible;
    };
    auto to_recovered = [&] {
        st.infectives.add(slot, -1);
        return EventKind::rewire_recovered;
    };

    switch (mode) {
    case RewireMode::SusceptibleOnly:
        return others_s >= 1 ? to_susceptible() : EventKind::warning_retained;
    case RewireMode::NonInfectious: {
        const std::int64_t denom = others_s + others_r;
        if (denom == 0) {
            return EventKind::warning_retained;
        }
        const auto k = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(denom)));
        return k < others_s ? to_susceptible() : to_recovered();
    }
    case RewireMode::RecoveredOnly:
        return to_recovered();
    case RewireMode::UniformAll:
        break;
    }

    const auto k = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(st.n - 2)));
    if (k < others_s) {
        return to_susceptible();
    }
    if (k < others_s + others_i) {
        // The edge now hangs off a different infective, still pointing at a susceptible.
        st.infectives.add(slot, -1);
        auto j = static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(others_i)));
        if (j >= slot) {
            ++j;
        }
        st.infectives.add(j, +1);
        return EventKind::rewire_infective;
    }
    return to_recovered();
}

inline double total_rate(const SimState& st, const Params& p) noexcept
{
    return (p.lambda + p.omega) * static_cast<double>(st.i_e()) + p.gamma * static_cast<double>(st.i());
}

inline bool absorbed(const SimState& st, const Params& p) noexcept
{
    return total_rate(st, p) <= 0.0;
}

/**
 * One Gillespie event. `p` and `mode` must already be the effective model
 * (see effective_model); `mu_n_value` is mu_n(n, mu).
 */
template <VariateSource R>
EventKind step(SimState& st, const Params& p, RewireMode mode, double mu_n_value, R& rng)
{
    const double infect = p.lambda * static_cast<double>(st.i_e());
    const double warn   = p.omega * static_cast<double>(st.i_e());
    const double total  = infect + warn + p.gamma * static_cast<double>(st.i());
    if (!(total > 0.0)) {
        throw Absorbed();
    }
    st.t += rng.exponential(total);
    const double u = rng.uniform() * total;
    if (u <= infect) {
        apply_infection(st, mu_n_value, rng);
        return EventKind::infection;
    }
    if (u <= infect + warn) {
        return apply_warning(st, p.alpha, mode, rng);
    }
    apply_recovery(st, rng);
    return EventKind::recovery;
}

template <VariateSource R>
EventKind step(SimState& st, const SimConfig& cfg, R& rng)
{
    const auto eff = effective_model(cfg.params, cfg.mode);
    return step(st, eff.params, eff.mode, mu_n(cfg.n, cfg.params.mu), rng);
}

/// Resolved trajectory sampling interval; negative means every event.
inline double resolved_sample_dt(const SimConfig& cfg)
{
    if (cfg.sample_dt != 0.0) {
        return cfg.sample_dt;
    }
    if (cfg.n <= 1000) {
        return -1.0;
    }
    const double fastest = std::max({cfg.params.gamma, cfg.params.lambda, cfg.params.omega});
    return fastest > 0.0 ? 0.01 / fastest : -1.0;
}

struct RunResult {
    FinalSizeReport report;
    Trajectory trajectory;
};

template <VariateSource R>
RunResult run(const SimConfig& cfg, R& rng)
{
    SimState st         = init_state(cfg, rng);
    const auto eff      = effective_model(cfg.params, cfg.mode);
    const double mu_n_v = mu_n(cfg.n, cfg.params.mu);
    const double dt     = resolved_sample_dt(cfg);
    const bool every    = dt < 0.0;

    RunResult out;
    std::int64_t next_grid = 0;
    // The state is constant between events, so every grid time before the next event sees `held`.
    auto emit_grid = [&](const TrajectoryPoint& held, double t_limit) {
        for (double g = static_cast<double>(next_grid) * dt; g < t_limit;
             g = static_cast<double>(++next_grid) * dt) {
            TrajectoryPoint p = held;
            p.t               = g;
            out.trajectory.push_back(p);
        }
    };
    const bool record_every = cfg.record_trajectory && every;
    const bool record_grid  = cfg.record_trajectory && !every;

    if (record_every) {
        out.trajectory.push_back(st.scaled());
    }
    std::int64_t events = 0;
    bool truncated      = false;
    while (!absorbed(st, eff.params)) {
        if (events >= cfg.max_events) {
            truncated = true;
            break;
        }
        const TrajectoryPoint before = record_grid ? st.scaled() : TrajectoryPoint{};
        step(st, eff.params, eff.mode, mu_n_v, rng);
        ++events;
        if (record_every) {
            out.trajectory.push_back(st.scaled());
        }
        else if (record_grid) {
            emit_grid(before, st.t);
        }
    }
    if (record_grid) {
        emit_grid(st.scaled(), st.t + dt * 0.5);
        if (out.trajectory.empty() || out.trajectory.back().t < st.t) {
            out.trajectory.push_back(st.scaled());
        }
    }

    out.report = make_report(cfg.n, cfg.n - st.s, major_threshold(cfg), truncated, events, cfg.seed);
    return out;
}

inline RunResult run(const SimConfig& cfg)
{
    Sampler rng(cfg.seed);
    return run(cfg, rng);
}

} // namespace rewire

#endif // REWIRE_CTMC_HPP
