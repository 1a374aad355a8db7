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
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "rewire/experiments.hpp"

namespace fs = std::filesystem;
using namespace rewire;

namespace
{

fs::path fresh_dir(const std::string& name)
{
    auto d = fs::temp_directory_path() / ("rewire_exp_test_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), root).string()] = slurp(e.path());
        }
    }
    return out;
}

ExperimentConfig small_sweep(const fs::path& dir)
{
    auto c        = default_config(ExperimentKind::final_size_sweep);
    c.n           = 200;
    c.reps        = 12;
    c.lambdas     = {1.0, 2.0};
    c.curve_points = 5;
    c.out_dir     = dir.string();
    return c;
}

} // namespace

TEST(ParseGrid, CommaList)
{
    EXPECT_EQ(parse_grid("0.5,1,2"), (std::vector<double>{0.5, 1.0, 2.0}));
    EXPECT_EQ(parse_grid("3"), (std::vector<double>{3.0}));
}

TEST(ParseGrid, InclusiveRange)
{
    const auto g = parse_grid("0.1:0.5:0.1");
    ASSERT_EQ(g.size(), 5u);
    EXPECT_NEAR(g.back(), 0.5, 1e-12);
}

TEST(ParseGrid, RejectsMalformed)
{
    EXPECT_THROW(parse_grid(""), ConfigError);
    EXPECT_THROW(parse_grid("1,,2"), ConfigError);
    EXPECT_THROW(parse_grid("1:2"), ConfigError);
    EXPECT_THROW(parse_grid("2:1:0.5"), ConfigError);
    EXPECT_THROW(parse_grid("0:1:0"), ConfigError);
    EXPECT_THROW(parse_grid("1e"), ConfigError);
}

TEST(ExperimentKindNames, RoundTrip)
{
    for (auto k : all_experiment_kinds) {
        EXPECT_EQ(parse_experiment_kind(to_string(k)), k);
    }
    EXPECT_THROW(parse_experiment_kind("nope"), ConfigError);
}

TEST(ExperimentConfigs, DefaultsValidate)
{
    for (auto k : all_experiment_kinds) {
        EXPECT_NO_THROW(validate(default_config(k))) << to_string(k);
    }
}

TEST(ExperimentConfigs, FigureDefaults)
{
    const auto t = default_config(ExperimentKind::trajectory);
    EXPECT_EQ(t.n, 5000);
    EXPECT_EQ(resolved_initials(t), 50);
    const auto y = default_config(ExperimentKind::yd_compare);
    EXPECT_EQ(resolved_major_threshold(y), 3000);
}

TEST(ExperimentConfigs, RejectsBadInput)
{
    auto c    = default_config(ExperimentKind::final_size_sweep);
    c.lambdas = {};
    EXPECT_THROW(validate(c), ConfigError);

    auto o = default_config(ExperimentKind::oracle_validate);
    o.n    = 2001;
    EXPECT_THROW(validate(o), ConfigError);

    auto i               = default_config(ExperimentKind::trajectory);
    i.initial_fraction   = 0.0;
    i.initial_infectives = i.n;
    EXPECT_THROW(validate(i), ConfigError);

    auto p         = default_config(ExperimentKind::trajectory);
    p.params.alpha = 1.5;
    EXPECT_THROW(validate(p), ConfigError);

    auto y         = default_config(ExperimentKind::yd_compare);
    y.params.gamma = 1.0;
    EXPECT_THROW(validate(y), ConfigError);
}

TEST(RunExperiment, ByteIdenticalAcrossRunsAndThreadCounts)
{
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    auto ca      = small_sweep(a);
    auto cb      = small_sweep(b);
    ca.threads   = 1;
    cb.threads   = 4;
    run_experiment(ca);
    run_experiment(cb);
    const auto ta = tree(a), tb = tree(b);
    ASSERT_EQ(ta.size(), 4u);
    for (const auto& [name, bytes] : ta) {
        ASSERT_TRUE(tb.count(name)) << name;
        if (name == "manifest.json") {
            continue; // differs only in out_dir/threads, checked below
        }
        EXPECT_EQ(bytes, tb.at(name)) << name;
    }
    auto ma = nlohmann::json::parse(ta.at("manifest.json"));
    auto mb = nlohmann::json::parse(tb.at("manifest.json"));
    EXPECT_EQ(ma, mb);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(RunExperiment, RepeatRunReproducesManifestBytes)
{
    const auto d = fresh_dir("repeat");
    auto c       = small_sweep(d);
    run_experiment(c);
    const auto first = tree(d);
    run_experiment(c);
    EXPECT_EQ(first, tree(d));
    fs::remove_all(d);
}

TEST(RunExperiment, ManifestListsFilesRowsAndSeeds)
{
    const auto d   = fresh_dir("manifest");
    auto c         = small_sweep(d);
    c.seed         = 77;
    const auto res = run_experiment(c);
    const auto m   = nlohmann::json::parse(slurp(d / "manifest.json"));
    EXPECT_EQ(m["config"]["kind"], "final_size_sweep");
    EXPECT_EQ(m["config"]["seed"], 77u);
    EXPECT_TRUE(m.contains("library_version"));
    ASSERT_EQ(m["files"].size(), 3u);
    for (const auto& f : m["files"]) {
        const auto text = slurp(d / f["path"].get<std::string>());
        const auto rows = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
        EXPECT_EQ(f["rows"].get<std::size_t>(), rows) << f["path"];
    }
    const auto& seeds = m["replicate_seeds"];
    ASSERT_EQ(seeds.size(), 2u);
    for (std::size_t g = 0; g < 2; ++g) {
        ASSERT_EQ(seeds[g]["seeds"].size(), 12u);
        for (std::size_t k = 0; k < 12; ++k) {
            EXPECT_EQ(seeds[g]["seeds"][k].get<std::uint64_t>(), derive_seed(derive_seed(77, g), k));
        }
    }
    EXPECT_EQ(res.files.size(), 3u);
    fs::remove_all(d);
}

TEST(RunExperiment, FailureRemovesPartialOutputs)
{
    const auto d = fresh_dir("partial");
    fs::create_directories(d / "curve.csv"); // blocks the last CSV
    auto c = small_sweep(d);
    EXPECT_THROW(run_experiment(c), IoError);
    EXPECT_FALSE(fs::exists(d / "scatter.csv"));
    EXPECT_FALSE(fs::exists(d / "summary.csv"));
    EXPECT_FALSE(fs::exists(d / "manifest.json"));
    EXPECT_TRUE(fs::is_directory(d / "curve.csv")); // pre-existing content is left alone
    fs::remove_all(d);
}

TEST(OutputSetCleanup, UncommittedSetRemovesFilesAndCreatedDirectories)
{
    const auto root = fresh_dir("outset");
    fs::create_directories(root);
    {
        std::ofstream keep(root / "keep.txt");
    }
    {
        OutputSet out(root / "x" / "y");
        out.write("sub/a.csv", "t", "h\n1\n");
        out.write("b.csv", "t", "h\n");
        EXPECT_TRUE(fs::exists(root / "x" / "y" / "sub" / "a.csv"));
    }
    EXPECT_FALSE(fs::exists(root / "x"));
    EXPECT_TRUE(fs::exists(root / "keep.txt"));
    fs::remove_all(root);
}

TEST(OutputSetCleanup, CommittedSetKeepsFilesAndCountsRows)
{
    const auto root = fresh_dir("outset_commit");
    {
        OutputSet out(root);
        out.write("a.csv", "t", "h\n1\n2\n");
        out.commit({{"kind", "x"}});
        ASSERT_EQ(out.files().size(), 1u);
        EXPECT_EQ(out.files()[0].rows, 2u);
    }
    EXPECT_TRUE(fs::exists(root / "a.csv"));
    const auto m = nlohmann::json::parse(slurp(root / "manifest.json"));
    EXPECT_EQ(m["files"][0]["rows"], 2);
    fs::remove_all(root);
}

TEST(RunExperiment, InvalidConfigWritesNothing)
{
    const auto d = fresh_dir("invalid");
    auto c       = small_sweep(d);
    c.reps       = 0;
    EXPECT_THROW(run_experiment(c), ConfigError);
    EXPECT_FALSE(fs::exists(d));
}

TEST(RunExperiment, YdThresholdRowUsesJumpLimit)
{
    const auto d = fresh_dir("yd");
    auto c       = default_config(ExperimentKind::yd_compare);
    c.n          = 200;
    c.omegas     = {0.2, 1.0};
    c.target_majors = 0;
    c.reps       = 4;
    c.out_dir    = d.string();
    run_experiment(c);
    std::istringstream is(slurp(d / "yd_compare.csv"));
    std::string header, r1, r2;
    std::getline(is, header);
    std::getline(is, r1);
    std::getline(is, r2);
    EXPECT_EQ(header, "omega,tau_ours,nu_yd,sim_mean,sim_se");
    EXPECT_EQ(r1.substr(0, r1.find(',', 4)), "0.2,0.808218153");
    EXPECT_EQ(r2.substr(0, r2.find(',', 2)), "1,0.883413967");
    fs::remove_all(d);
}

TEST(RunExperiment, PhaseDiagramAndBranchingSchemas)
{
    const auto d = fresh_dir("schemas");
    auto p       = default_config(ExperimentKind::phase_diagram);
    p.out_dir    = (d / "phase").string();
    run_experiment(p);
    EXPECT_EQ(slurp(d / "phase" / "phase.csv").substr(0, 55),
              "mu,alpha,lambda,omega,gamma,tau,regime,monotonicity\n1.5");
    auto b    = default_config(ExperimentKind::branching_sweep);
    b.out_dir = (d / "br").string();
    run_experiment(b);
    EXPECT_EQ(slurp(d / "br" / "branching.csv").substr(0, 24), "lambda,q_ext,r_malthus,r");
    fs::remove_all(d);
}
