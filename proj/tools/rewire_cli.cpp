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
// Command-line front end: one subcommand per experiment kind.
//
// Exit codes: 0 success, 2 bad arguments or configuration, 3 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "rewire/experiments.hpp"

namespace
{

std::string describe(rewire::ExperimentKind k)
{
    using K = rewire::ExperimentKind;
    switch (k) {
    case K::trajectory:
        return "simulated and deterministic s, i, i_E, w over time";
    case K::final_size_sweep:
        return "simulated final sizes over a lambda grid with the limiting curve";
    case K::phase_diagram:
        return "limiting final size, jump verdict and monotonicity over parameter grids";
    case K::susonly_sweep:
        return "final-size sweep under susceptible-only rewiring";
    case K::yd_compare:
        return "SI final size against the edge-rewiring model of Yao and Durrett";
    case K::oracle_validate:
        return "construction simulator against the explicit-graph simulator";
    case K::branching_sweep:
        return "extinction probability and growth rate of the early-phase branching process";
    }
    return {};
}

struct Overrides {
    std::optional<double> mu, lambda, gamma, omega, alpha;
    std::optional<std::string> mode;
    std::optional<std::string> lambdas, omegas, mus, alphas;
    std::optional<std::int64_t> n, reps, initial, target_majors, max_reps, curve_points;
    std::optional<double> initial_fraction, major_fraction, t_max, epsilon, i_floor;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir;
};

void add_options(CLI::App& sub, Overrides& o)
{
    sub.add_option("--mu", o.mu, "mean degree");
    sub.add_option("--lambda", o.lambda, "infection rate per edge");
    sub.add_option("--gamma", o.gamma, "recovery rate");
    sub.add_option("--omega", o.omega, "rewiring rate per edge");
    sub.add_option("--alpha", o.alpha, "probability a dropped edge is reattached");
    sub.add_option("--mode", o.mode, "uniform | susceptible | noninfectious | recovered");
    sub.add_option("--lambdas", o.lambdas, "lambda grid: a,b,c or lo:hi:step");
    sub.add_option("--omegas", o.omegas, "omega grid");
    sub.add_option("--mus", o.mus, "mu grid");
    sub.add_option("--alphas", o.alphas, "alpha grid");
    sub.add_option("-n,--n", o.n, "population size");
    sub.add_option("--reps", o.reps, "replicates per point");
    sub.add_option("--initial", o.initial, "initial infectives");
    sub.add_option("--initial-fraction", o.initial_fraction, "initial infective fraction (overrides --initial)");
    sub.add_option("--major-fraction", o.major_fraction, "major-outbreak cut as a fraction of n");
    sub.add_option("--target-majors", o.target_majors, "replicate until this many majors (yd_compare)");
    sub.add_option("--max-reps", o.max_reps, "replicate cap for --target-majors");
    sub.add_option("--t-max", o.t_max, "trajectory horizon (0: until absorption)");
    sub.add_option("--curve-points", o.curve_points, "points on theory curves");
    sub.add_option("--epsilon", o.epsilon, "initial infective fraction of the vanishing-seed ODE run");
    sub.add_option("--i-floor", o.i_floor, "infective floor that ends the vanishing-seed ODE run");
    sub.add_option("--seed", o.seed, "base seed");
    sub.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub.add_option("--out-dir", o.out_dir, "output directory");
}

rewire::ExperimentConfig resolve(rewire::ExperimentKind kind, const Overrides& o)
{
    auto c = rewire::default_config(kind);
    auto set = [](auto& dst, const auto& src) {
        if (src) {
            dst = *src;
        }
    };
    set(c.params.mu, o.mu);
    set(c.params.lambda, o.lambda);
    set(c.params.gamma, o.gamma);
    set(c.params.omega, o.omega);
    set(c.params.alpha, o.alpha);
    if (o.mode) {
        try {
            c.mode = rewire::parse_rewire_mode(*o.mode);
        }
        catch (const rewire::DomainError& e) {
            throw rewire::ConfigError(e.what());
        }
    }
    if (o.lambdas) {
        c.lambdas = rewire::parse_grid(*o.lambdas);
    }
    if (o.omegas) {
        c.omegas = rewire::parse_grid(*o.omegas);
    }
    if (o.mus) {
        c.mus = rewire::parse_grid(*o.mus);
    }
    if (o.alphas) {
        c.alphas = rewire::parse_grid(*o.alphas);
    }
    set(c.n, o.n);
    set(c.reps, o.reps);
    if (o.initial) {
        c.initial_infectives = *o.initial;
        c.initial_fraction   = 0.0;
    }
    set(c.initial_fraction, o.initial_fraction);
    set(c.major_fraction, o.major_fraction);
    set(c.target_majors, o.target_majors);
    set(c.max_reps, o.max_reps);
    set(c.t_max, o.t_max);
    set(c.curve_points, o.curve_points);
    set(c.epsilon.epsilon, o.epsilon);
    set(c.epsilon.i_floor, o.i_floor);
    set(c.seed, o.seed);
    set(c.threads, o.threads);
    set(c.out_dir, o.out_dir);
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Epidemics with preventive rewiring: simulations and limiting theory"};
    app.set_version_flag("--version", std::string(REWIRE_VERSION));
    app.set_config("--config", "", "INI/TOML file; a [kind] section sets that subcommand's options");
    app.require_subcommand(1);

    Overrides o;
    std::optional<rewire::ExperimentKind> chosen;
    for (auto kind : rewire::all_experiment_kinds) {
        auto* sub = app.add_subcommand(std::string(rewire::to_string(kind)), describe(kind));
        add_options(*sub, o);
        sub->callback([&chosen, kind] { chosen = kind; });
    }

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::Success& e) {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    rewire::ExperimentConfig cfg;
    try {
        cfg = resolve(*chosen, o);
        rewire::validate(cfg);
    }
    catch (const rewire::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto res = rewire::run_experiment(cfg);
        for (const auto& f : res.files) {
            std::cout << (res.out_dir / f.path).string() << " (" << f.rows << " rows)\n";
        }
        std::cout << (res.out_dir / "manifest.json").string() << '\n';
    }
    catch (const rewire::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
