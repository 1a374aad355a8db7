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
#ifndef REWIRE_EXPERIMENTS_HPP
#define REWIRE_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "branching.hpp"
#include "ctmc.hpp"
#include "final_size.hpp"
#include "graph_oracle.hpp"
#include "model.hpp"
#include "ode.hpp"
#include "random.hpp"
#include "replicates.hpp"
#include "stats.hpp"
#include "trajectory.hpp"

#ifndef REWIRE_VERSION
#define REWIRE_VERSION "unknown"
#endif

namespace rewire
{

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// File-system failure; the message names the path.
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    trajectory,
    final_size_sweep,
    phase_diagram,
    susonly_sweep,
    yd_compare,
    oracle_validate,
    branching_sweep,
};

inline constexpr ExperimentKind all_experiment_kinds[] = {
    ExperimentKind::trajectory,    ExperimentKind::final_size_sweep, ExperimentKind::phase_diagram,
    ExperimentKind::susonly_sweep, ExperimentKind::yd_compare,       ExperimentKind::oracle_validate,
    ExperimentKind::branching_sweep,
};

inline std::string_view to_string(ExperimentKind k) noexcept
{
    switch (k) {
    case ExperimentKind::trajectory:
        return "trajectory";
    case ExperimentKind::final_size_sweep:
        return "final_size_sweep";
    case ExperimentKind::phase_diagram:
        return "phase_diagram";
    case ExperimentKind::susonly_sweep:
        return "susonly_sweep";
    case ExperimentKind::yd_compare:
        return "yd_compare";
    case ExperimentKind::oracle_validate:
        return "oracle_validate";
    case ExperimentKind::branching_sweep:
        return "branching_sweep";
    }
    return "?";
}

inline ExperimentKind parse_experiment_kind(std::string_view s)
{
    for (auto k : all_experiment_kinds) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw ConfigError("unknown experiment kind '" + std::string(s) + "'");
}

/**
 * Parses a grid: a comma list ("0.5,1,2") or an inclusive range "lo:hi:step".
 */
inline std::vector<double> parse_grid(std::string_view text)
{
    auto number = [&](std::string_view tok) {
        std::string t(tok);
        std::size_t used = 0;
        double v         = 0.0;
        try {
            v = std::stod(t, &used);
        }
        catch (const std::exception&) {
            used = 0;
        }
        if (t.empty() || used != t.size() || !std::isfinite(v)) {
            throw ConfigError("bad number '" + t + "' in grid '" + std::string(text) + "'");
        }
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        const auto a = text.find(':');
        const auto b = text.find(':', a + 1);
        if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos) {
            throw ConfigError("range grid must be lo:hi:step, got '" + std::string(text) + "'");
        }
        const double lo = number(text.substr(0, a));
        const double hi = number(text.substr(a + 1, b - a - 1));
        const double st = number(text.substr(b + 1));
        if (!(st > 0.0) || hi < lo) {
            throw ConfigError("range grid needs step > 0 and hi >= lo");
        }
        const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / st + 1e-9)) + 1;
        if (count > 1000000) {
            throw ConfigError("range grid too large");
        }
        for (std::int64_t k = 0; k < count; ++k) {
            out.push_back(lo + st * static_cast<double>(k));
        }
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        out.push_back(number(text.substr(start, end - start)));
        start = end + 1;
    }
    return out;
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::trajectory;
    Params params{};
    RewireMode mode = RewireMode::UniformAll;
    /// Sweep grids; an empty grid means "the value in params".
    std::vector<double> lambdas;
    std::vector<double> omegas;
    std::vector<double> mus;
    std::vector<double> alphas;
    std::int64_t n                  = 2000;
    std::int64_t reps               = 100;
    std::int64_t initial_infectives = 1;
    double initial_fraction         = 0.0; ///< > 0 overrides initial_infectives with round(fraction * n)
    double major_fraction           = 0.0; ///< > 0 sets the major cut to ceil(fraction * n)
    std::int64_t target_majors      = 0;   ///< yd_compare: replicate until this many majors (0: fixed reps)
    std::int64_t max_reps           = 100000;
    std::uint64_t seed              = 1;
    unsigned threads                = 1;
    std::string out_dir             = "out";
    double t_max                    = 0.0; ///< trajectory horizon; 0 runs until every replicate ends
    std::int64_t curve_points       = 201; ///< theory-curve resolution for sweeps
    EpsilonRunOptions epsilon{};
};

/// Setups of the reference figures, scaled to desk size.
inline ExperimentConfig default_config(ExperimentKind kind)
{
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
    case ExperimentKind::trajectory:
        c.params           = {5.0, 1.5, 1.0, 4.0, 1.0};
        c.n                = 5000;
        c.reps             = 100;
        c.initial_fraction = 0.01;
        break;
    case ExperimentKind::final_size_sweep:
        c.params = {5.0, 1.5, 1.0, 4.0, 1.0};
        for (int k = 1; k <= 20; ++k) {
            c.lambdas.push_back(0.1 * k);
        }
        c.n              = 2000;
        c.reps           = 200;
        c.major_fraction = 0.05;
        break;
    case ExperimentKind::susonly_sweep:
        c.params  = {2.5, 8.0, 1.0, 10.0, 1.0};
        c.mode    = RewireMode::SusceptibleOnly;
        c.lambdas = {6.0, 7.0, 7.5, 8.0, 8.5, 9.0, 10.0, 12.0, 15.0, 20.0};
        c.n              = 2000;
        c.reps           = 200;
        c.major_fraction = 0.05;
        break;
    case ExperimentKind::phase_diagram:
        c.params  = {2.0, 1.0, 0.0, 1.0, 1.0};
        c.mus     = {1.5, 2.0, 3.0, 4.0, 6.0};
        c.alphas  = {0.25, 0.5, 0.8, 1.0};
        c.lambdas = {0.5, 1.0, 2.0, 4.0};
        break;
    case ExperimentKind::yd_compare:
        c.params         = {2.0, 1.0, 0.0, 0.4, 1.0};
        c.omegas         = {0.2, 0.4, 0.6, 0.8, 1.0};
        c.n              = 5000;
        c.reps           = 2000;
        c.target_majors  = 300;
        c.major_fraction = 0.6;
        break;
    case ExperimentKind::oracle_validate:
        c.params             = {5.0, 1.5, 1.0, 4.0, 1.0};
        c.n                  = 300;
        c.reps               = 2000;
        c.initial_infectives = 3;
        break;
    case ExperimentKind::branching_sweep:
        c.params = {5.0, 1.5, 1.0, 4.0, 1.0};
        for (int k = 0; k <= 40; ++k) {
            c.lambdas.push_back(0.05 * k);
        }
        break;
    }
    return c;
}

inline std::int64_t resolved_initials(const ExperimentConfig& c)
{
    if (c.initial_fraction > 0.0) {
        return std::max<std::int64_t>(1, std::llround(c.initial_fraction * static_cast<double>(c.n)));
    }
    return c.initial_infectives;
}

inline std::int64_t resolved_major_threshold(const ExperimentConfig& c)
{
    if (c.major_fraction > 0.0) {
        return static_cast<std::int64_t>(std::ceil(c.major_fraction * static_cast<double>(c.n)));
    }
    return default_major_threshold(c.n);
}

inline void validate(const ExperimentConfig& c)
{
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    try {
        validate(c.params);
    }
    catch (const DomainError& e) {
        fail(std::string("params: ") + e.what());
    }
    const bool sweeps_lambda = c.kind == ExperimentKind::final_size_sweep || c.kind == ExperimentKind::susonly_sweep
                               || c.kind == ExperimentKind::branching_sweep;
    if (sweeps_lambda && c.lambdas.empty()) {
        fail("lambdas grid must not be empty");
    }
    if (c.kind == ExperimentKind::yd_compare && c.omegas.empty()) {
        fail("omegas grid must not be empty");
    }
    if (c.kind == ExperimentKind::phase_diagram && c.mus.empty() && c.alphas.empty() && c.lambdas.empty()
        && c.omegas.empty()) {
        fail("phase_diagram needs at least one non-empty grid");
    }
    for (const auto* g : {&c.lambdas, &c.omegas}) {
        for (double v : *g) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                fail("rate grids must hold finite values >= 0");
            }
        }
    }
    for (double v : c.mus) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            fail("mu grid must hold finite values > 0");
        }
    }
    for (double v : c.alphas) {
        if (!(v >= 0.0 && v <= 1.0)) {
            fail("alpha grid must lie in [0, 1]");
        }
    }
    const bool simulates = c.kind != ExperimentKind::phase_diagram && c.kind != ExperimentKind::branching_sweep;
    if (simulates) {
        if (c.n < 3) {
            fail("n must be >= 3");
        }
        if (c.reps < 1) {
            fail("reps must be >= 1");
        }
        const auto init = resolved_initials(c);
        if (init < 1 || init >= c.n) {
            fail("initial infectives must lie in [1, n)");
        }
        if (c.major_fraction < 0.0 || c.major_fraction > 1.0 || c.initial_fraction < 0.0 || c.initial_fraction >= 1.0) {
            fail("fractions must lie in [0, 1)");
        }
    }
    if (c.kind == ExperimentKind::oracle_validate && c.n > oracle_max_n) {
        fail("oracle_validate is capped at n <= " + std::to_string(oracle_max_n));
    }
    if (c.kind == ExperimentKind::yd_compare) {
        if (c.params.gamma != 0.0 || c.params.alpha != 1.0) {
            fail("yd_compare is defined for gamma = 0 and alpha = 1");
        }
        if (c.target_majors > 0 && c.max_reps < 1) {
            fail("max_reps must be >= 1");
        }
    }
    if (c.kind == ExperimentKind::susonly_sweep && c.params.mu <= 1.0) {
        fail("susonly_sweep needs mu > 1");
    }
    if (c.kind == ExperimentKind::phase_diagram && c.mode == RewireMode::NonInfectious) {
        fail("phase_diagram has no deterministic limit for the noninfectious rewiring mode");
    }
    if (c.curve_points < 2) {
        fail("curve_points must be >= 2");
    }
    if (c.t_max < 0.0) {
        fail("t_max must be >= 0");
    }
    if (c.threads < 1) {
        fail("threads must be >= 1");
    }
    if (c.out_dir.empty()) {
        fail("out_dir must not be empty");
    }
}

inline nlohmann::json to_json(const Params& p)
{
    return {{"mu", p.mu}, {"lambda", p.lambda}, {"gamma", p.gamma}, {"omega", p.omega}, {"alpha", p.alpha}};
}

inline nlohmann::json to_json(const ExperimentConfig& c)
{
    return {
        {"kind", to_string(c.kind)},
        {"params", to_json(c.params)},
        {"mode", to_string(c.mode)},
        {"lambdas", c.lambdas},
        {"omegas", c.omegas},
        {"mus", c.mus},
        {"alphas", c.alphas},
        {"n", c.n},
        {"reps", c.reps},
        {"initial_infectives", resolved_initials(c)},
        {"major_threshold", resolved_major_threshold(c)},
        {"target_majors", c.target_majors},
        {"max_reps", c.max_reps},
        {"seed", c.seed},
        {"t_max", c.t_max},
        {"curve_points", c.curve_points},
        {"epsilon_run", {{"epsilon", c.epsilon.epsilon}, {"i_floor", c.epsilon.i_floor}, {"s_floor", c.epsilon.s_floor}}},
    };
}

struct OutputFile {
    std::string path; ///< relative to the output directory
    std::string role;
    std::size_t rows;
};

/**
 * Output files of one experiment run. Files are written whole; if the run
 * does not reach commit() every file and directory it created is removed.
 */
class OutputSet
{
public:
    explicit OutputSet(std::filesystem::path dir)
        : dir_(std::move(dir))
    {
        make_dirs(dir_);
    }

    OutputSet(const OutputSet&)            = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    ~OutputSet()
    {
        if (committed_) {
            return;
        }
        std::error_code ec;
        for (auto it = written_.rbegin(); it != written_.rend(); ++it) {
            std::filesystem::remove(*it, ec);
        }
        for (auto it = created_dirs_.rbegin(); it != created_dirs_.rend(); ++it) {
            std::filesystem::remove(*it, ec); // only succeeds when empty
        }
    }

    void write(const std::string& rel, const std::string& role, const std::string& content)
    {
        const auto path = dir_ / rel;
        make_dirs(path.parent_path());
        {
            std::ofstream os(path, std::ios::binary | std::ios::trunc);
            if (!os) {
                throw IoError("cannot open " + path.string() + " for writing");
            }
            written_.push_back(path);
            os << content;
            os.flush();
            if (!os) {
                throw IoError("write failed: " + path.string());
            }
        }
        const auto lines = static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'));
        files_.push_back({rel, role, lines > 0 ? lines - 1 : 0});
    }

    /// Writes manifest.json listing every file and keeps the outputs.
    void commit(nlohmann::json manifest)
    {
        nlohmann::json files = nlohmann::json::array();
        for (const auto& f : files_) {
            files.push_back({{"path", f.path}, {"role", f.role}, {"rows", f.rows}});
        }
        manifest["files"] = files;
        write("manifest.json", "manifest", manifest.dump(2) + "\n");
        files_.pop_back();
        committed_ = true;
    }

    const std::vector<OutputFile>& files() const
    {
        return files_;
    }

    const std::filesystem::path& dir() const
    {
        return dir_;
    }

private:
    void make_dirs(const std::filesystem::path& d)
    {
        if (d.empty()) {
            return;
        }
        std::vector<std::filesystem::path> missing;
        for (auto p = d; !p.empty() && !std::filesystem::exists(p); p = p.parent_path()) {
            missing.push_back(p);
            if (p == p.parent_path()) {
                break;
            }
        }
        std::error_code ec;
        std::filesystem::create_directories(d, ec);
        if (ec || !std::filesystem::is_directory(d)) {
            throw IoError("cannot create directory " + d.string() + (ec ? ": " + ec.message() : ""));
        }
        created_dirs_.insert(created_dirs_.end(), missing.rbegin(), missing.rend());
    }

    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
    std::vector<std::filesystem::path> created_dirs_;
    std::vector<OutputFile> files_;
    bool committed_ = false;
};

struct ExperimentResult {
    std::filesystem::path out_dir;
    std::vector<OutputFile> files;
    nlohmann::json manifest;
};

namespace detail
{

inline SimConfig sim_config(const ExperimentConfig& c, const Params& p, std::uint64_t seed)
{
    SimConfig s;
    s.n                  = c.n;
    s.initial_infectives = resolved_initials(c);
    s.params             = p;
    s.mode               = c.mode;
    s.seed               = seed;
    s.major_threshold    = resolved_major_threshold(c);
    return s;
}

inline std::vector<double> linspace(double lo, double hi, std::int64_t count)
{
    std::vector<double> v(static_cast<std::size_t>(count));
    for (std::int64_t k = 0; k < count; ++k) {
        v[static_cast<std::size_t>(k)] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    }
    return v;
}

inline nlohmann::json seeds_json(const std::vector<FinalSizeReport>& reports)
{
    nlohmann::json s = nlohmann::json::array();
    for (const auto& r : reports) {
        s.push_back(r.seed);
    }
    return s;
}

inline nlohmann::json summary_json(const ReplicateSummary& sm)
{
    return {{"reps", sm.reps},
            {"majors", sm.majors},
            {"truncated", sm.truncated},
            {"major_probability", sm.major_probability},
            {"mean_major_fraction", sm.mean_major_fraction},
            {"se_major_fraction", sm.se_major_fraction}};
}

inline void write_scatter_rows(std::ostream& os, double lambda, const std::vector<FinalSizeReport>& reports)
{
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& r = reports[k];
        os << fmt9(lambda) << ',' << k << ',' << r.seed << ',' << r.final_size << ',' << fmt9(r.final_fraction) << ','
           << (r.major ? 1 : 0) << ',' << (r.truncated ? 1 : 0) << '\n';
    }
}

inline void run_trajectory(const ExperimentConfig& c, OutputSet& out, nlohmann::json& m)
{
    SimConfig base         = sim_config(c, c.params, c.seed);
    base.record_trajectory = true;
    const auto runs = parallel_map(static_cast<std::size_t>(c.reps), c.threads, [&](std::size_t k) {
        return run(replicate_config(base, k));
    });

    double t_end = c.t_max;
    if (t_end <= 0.0) {
        for (const auto& r : runs) {
            t_end = std::max(t_end, r.trajectory.back().t);
        }
    }
    double dt = resolved_sample_dt(base);
    if (dt <= 0.0) {
        const double fastest = std::max({c.params.gamma, c.params.lambda, c.params.omega});
        dt                   = fastest > 0.0 ? 0.01 / fastest : 0.01;
    }
    const auto grid = uniform_grid(std::max(t_end, dt), dt);

    std::vector<FinalSizeReport> reports;
    std::vector<Trajectory> trajs;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        reports.push_back(runs[k].report);
        trajs.push_back(runs[k].trajectory);
        std::ostringstream os;
        write_trajectory_csv(os, runs[k].trajectory);
        char name[64];
        std::snprintf(name, sizeof name, "trajectories/rep_%05zu.csv", k);
        out.write(name, "sim_trajectory", os.str());
    }
    {
        std::ostringstream os;
        write_trajectory_csv(os, mean_on_grid(trajs, grid));
        out.write("mean_trajectory.csv", "sim_mean_trajectory", os.str());
    }
    {
        std::ostringstream os;
        write_replicates_csv(os, reports);
        out.write("replicates.csv", "replicates", os.str());
    }

    const auto eff = effective_model(c.params, c.mode);
    if (eff.mode == RewireMode::UniformAll || eff.mode == RewireMode::SusceptibleOnly) {
        const double i0 = static_cast<double>(resolved_initials(c)) / static_cast<double>(c.n);
        const OdeState x0{1.0 - i0, i0, eff.params.mu * i0 * (1.0 - i0), 0.0};
        StopRule stop  = stop_at_time(grid.back());
        stop.s_floor   = c.epsilon.s_floor;
        const auto sol = eff.mode == RewireMode::UniformAll ? integrate_main(x0, eff.params, stop)
                                                            : integrate_susonly(x0, eff.params, stop);
        std::ostringstream os;
        write_trajectory_csv(os, sample(sol, grid));
        out.write("ode_trajectory.csv", "ode_trajectory", os.str());
        m["results"]["ode_peak_i"] = [&] {
            double peak = 0.0;
            for (const auto& x : sol.x) {
                peak = std::max(peak, x[1]);
            }
            return peak;
        }();
    }
    else {
        m["results"]["ode_trajectory"] = "no deterministic system for this rewiring mode";
    }
    m["replicate_seeds"]          = seeds_json(reports);
    m["results"]["summary"]       = summary_json(summarize(reports));
    m["results"]["grid_dt"]       = dt;
}

inline void run_lambda_sweep(const ExperimentConfig& c, OutputSet& out, nlohmann::json& m, bool susonly)
{
    std::ostringstream scatter, summary;
    scatter << "lambda,rep,seed,final_size,final_fraction,major,truncated\n";
    summary << "lambda,reps,majors,major_probability,mean_major_fraction,se_major_fraction\n";
    nlohmann::json seeds = nlohmann::json::array();
    for (std::size_t g = 0; g < c.lambdas.size(); ++g) {
        Params p     = c.params;
        p.lambda     = c.lambdas[g];
        const auto s = run_replicates(sim_config(c, p, derive_seed(c.seed, g)), static_cast<std::size_t>(c.reps),
                                      c.threads);
        write_scatter_rows(scatter, p.lambda, s.reports);
        const auto& sm = s.summary;
        summary << fmt9(p.lambda) << ',' << sm.reps << ',' << sm.majors << ',' << fmt9(sm.major_probability) << ','
                << fmt9(sm.mean_major_fraction) << ',' << fmt9(sm.se_major_fraction) << '\n';
        seeds.push_back({{"lambda", p.lambda}, {"seeds", seeds_json(s.reports)}});
    }
    out.write("scatter.csv", "sim_final_sizes", scatter.str());
    out.write("summary.csv", "sim_summary", summary.str());

    const double hi = *std::max_element(c.lambdas.begin(), c.lambdas.end());
    const auto grid = linspace(0.0, hi, c.curve_points);
    const auto eff  = effective_model(c.params, c.mode);
    const bool has_curve = susonly || eff.mode == RewireMode::UniformAll;
    if (has_curve) {
        const auto pts = parallel_map(grid.size(), c.threads, [&](std::size_t k) {
            Params p = eff.params;
            p.lambda = grid[k];
            if (susonly) {
                return solve_susonly_final(p);
            }
            return p.gamma == 0.0 ? si_phase_point(p) : sir_phase_point(p, c.epsilon);
        });
        std::ostringstream os;
        write_phase_csv(os, pts);
        out.write("curve.csv", susonly ? "theory_curve" : "conjectured_curve", os.str());
    }
    m["replicate_seeds"] = seeds;
    if (c.params.mu > 1.0) {
        m["results"]["lambda_c"] = compute_lambda_c(c.params);
    }
}

inline void run_phase_diagram(const ExperimentConfig& c, OutputSet& out, nlohmann::json& m)
{
    auto or_base = [](const std::vector<double>& g, double v) { return g.empty() ? std::vector<double>{v} : g; };
    const auto mus = or_base(c.mus, c.params.mu);
    const auto als = or_base(c.alphas, c.params.alpha);
    const auto las = or_base(c.lambdas, c.params.lambda);
    const auto oms = or_base(c.omegas, c.params.omega);
    std::vector<Params> pts;
    for (double mu : mus) {
        for (double a : als) {
            for (double l : las) {
                for (double o : oms) {
                    pts.push_back({mu, l, c.params.gamma, o, a});
                }
            }
        }
    }
    const auto eff_mode = effective_model(c.params, c.mode).mode;
    const auto rows     = parallel_map(pts.size(), c.threads, [&](std::size_t k) {
        const Params p = effective_model(pts[k], c.mode).params;
        if (eff_mode == RewireMode::SusceptibleOnly) {
            return p.mu > 1.0 ? solve_susonly_final(p) : PhasePoint{p};
        }
        return p.gamma == 0.0 ? si_phase_point(p) : sir_phase_point(p, c.epsilon);
    });
    std::ostringstream os;
    write_phase_csv(os, rows);
    out.write("phase.csv", "phase_diagram", os.str());
    m["results"]["points"] = rows.size();
}

inline void run_yd_compare(const ExperimentConfig& c, OutputSet& out, nlohmann::json& m)
{
    std::vector<YdRow> rows;
    std::ostringstream reps;
    reps << "omega,rep,seed,final_size,final_fraction,major,truncated\n";
    nlohmann::json seeds = nlohmann::json::array();
    for (std::size_t g = 0; g < c.omegas.size(); ++g) {
        Params p = c.params;
        p.omega  = c.omegas[g];
        YdRow row{p.omega, 0.0, std::nan("")};
        const double r0 = compute_r0(p);
        if (r0 > 1.0) {
            row.tau_ours = solve_si_final(p).tau;
        }
        else if (r0 == 1.0 && p.mu > 1.0 && si_discontinuity(p.mu, p.alpha)) {
            row.tau_ours = corollary_analysis(p.mu, p.alpha).tau0; // limit from above at threshold
        }
        if (p.mu > 1.0 && p.lambda > compute_lambda_c(p)) {
            row.nu_yd = yd_final_size(p.mu, p.lambda, p.omega).nu;
        }
        const auto cfg = sim_config(c, p, derive_seed(c.seed, g));
        const auto set = c.target_majors > 0 ? run_until_majors(cfg, static_cast<std::size_t>(c.target_majors),
                                                                static_cast<std::size_t>(c.max_reps), c.threads)
                                             : run_replicates(cfg, static_cast<std::size_t>(c.reps), c.threads);
        row.sim_mean = set.summary.mean_major_fraction;
        row.sim_se   = set.summary.se_major_fraction;
        rows.push_back(row);
        write_scatter_rows(reps, p.omega, set.reports);
        seeds.push_back({{"omega", p.omega}, {"seeds", seeds_json(set.reports)}});
    }
    std::ostringstream os;
    write_yd_csv(os, rows);
    out.write("yd_compare.csv", "yd_comparison", os.str());
    out.write("replicates.csv", "sim_final_sizes", reps.str());
    m["replicate_seeds"] = seeds;
}

inline void run_oracle_validate(const ExperimentConfig& c, OutputSet& out, nlohmann::json& m)
{
    const auto sim_cfg    = sim_config(c, c.params, derive_seed(c.seed, 0));
    const auto oracle_cfg = sim_config(c, c.params, derive_seed(c.seed, 1));
    const auto sim        = run_replicates(sim_cfg, static_cast<std::size_t>(c.reps), c.threads);
    const auto oracle     = run_naive_replicates(oracle_cfg, static_cast<std::size_t>(c.reps), c.threads);

    std::ostringstream os;
    os << "source,rep,seed,final_size,final_fraction,major,truncated\n";
    auto rows = [&](std::string_view src, const std::vector<FinalSizeReport>& rs) {
        for (std::size_t k = 0; k < rs.size(); ++k) {
            const auto& r = rs[k];
            os << src << ',' << k << ',' << r.seed << ',' << r.final_size << ',' << fmt9(r.final_fraction) << ','
               << (r.major ? 1 : 0) << ',' << (r.truncated ? 1 : 0) << '\n';
        }
    };
    rows("construction", sim.reports);
    rows("explicit_graph", oracle.reports);
    out.write("oracle_final_sizes.csv", "final_sizes", os.str());

    std::vector<double> a, b;
    for (const auto& r : sim.reports) {
        a.push_back(r.final_fraction);
    }
    for (const auto& r : oracle.reports) {
        b.push_back(r.final_fraction);
    }
    const auto ks = ks_two_sample(a, b);
    std::ostringstream sm;
    sm << "ks_statistic,ks_p_value,construction_mean_major,explicit_mean_major,construction_majors,explicit_majors\n"
       << fmt9(ks.statistic) << ',' << fmt9(ks.p_value) << ',' << fmt9(sim.summary.mean_major_fraction) << ','
       << fmt9(oracle.summary.mean_major_fraction) << ',' << sim.summary.majors << ',' << oracle.summary.majors
       << '\n';
    out.write("oracle_summary.csv", "comparison", sm.str());
    m["replicate_seeds"] = {{"construction", seeds_json(sim.reports)}, {"explicit_graph", seeds_json(oracle.reports)}};
    m["results"]         = {{"ks_statistic", ks.statistic},
                            {"ks_p_value", ks.p_value},
                            {"construction", summary_json(sim.summary)},
                            {"explicit_graph", summary_json(oracle.summary)}};
}

inline void run_branching_sweep(const ExperimentConfig& c, OutputSet& out, nlohmann::json& m)
{
    const auto rows = parallel_map(c.lambdas.size(), c.threads, [&](std::size_t k) {
        Params p = c.params;
        p.lambda = c.lambdas[k];
        return branching_row(p);
    });
    std::ostringstream os;
    write_branching_csv(os, rows);
    out.write("branching.csv", "branching", os.str());
    m["results"]["points"] = rows.size();
}

} // namespace detail

/**
 * Runs one experiment and writes its CSVs plus manifest.json into
 * cfg.out_dir. Output is a deterministic function of the configuration; the
 * thread count does not change it. On any failure the files written so far
 * are removed and the exception propagates.
 */
inline ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    validate(cfg);
    OutputSet out(cfg.out_dir);
    nlohmann::json m;
    m["library_version"] = REWIRE_VERSION;
    m["config"]          = to_json(cfg);
    m["results"]         = nlohmann::json::object();

    switch (cfg.kind) {
    case ExperimentKind::trajectory:
        detail::run_trajectory(cfg, out, m);
        break;
    case ExperimentKind::final_size_sweep:
        detail::run_lambda_sweep(cfg, out, m, false);
        break;
    case ExperimentKind::susonly_sweep: {
        ExperimentConfig c = cfg;
        c.mode             = RewireMode::SusceptibleOnly;
        m["config"]        = to_json(c);
        detail::run_lambda_sweep(c, out, m, true);
        break;
    }
    case ExperimentKind::phase_diagram:
        detail::run_phase_diagram(cfg, out, m);
        break;
    case ExperimentKind::yd_compare:
        detail::run_yd_compare(cfg, out, m);
        break;
    case ExperimentKind::oracle_validate:
        detail::run_oracle_validate(cfg, out, m);
        break;
    case ExperimentKind::branching_sweep:
        detail::run_branching_sweep(cfg, out, m);
        break;
    }
    out.commit(m);
    return {out.dir(), out.files(), m};
}

} // namespace rewire

#endif // REWIRE_EXPERIMENTS_HPP
