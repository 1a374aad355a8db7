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
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "rewire/final_size.hpp"
#include "rewire/graph_oracle.hpp"

using namespace rewire;

namespace
{

// Oracle values computed with 30-digit arithmetic, frozen here.
constexpr double giant_mu2 = 0.796812130020020;
constexpr double giant_mu25 = 0.892644753609209;

// |f(x)| < 1e-12, or f changes sign between the neighbouring doubles (steep roots)
template <typename F>
bool is_root(F&& f, double x)
{
    if (std::fabs(f(x)) < 1e-12) {
        return true;
    }
    const double lo = f(std::nextafter(x, -1.0));
    const double hi = f(std::nextafter(x, 2.0));
    return (lo > 0.0) != (hi > 0.0);
}

Params si(double mu, double lambda, double omega, double alpha)
{
    return make_params(mu, lambda, 0.0, omega, alpha);
}

} // namespace

TEST(FinalSizeSi, FunctionValuesAtEdges)
{
    const Params p = si(2.0, 1.0, 0.4, 1.0);
    EXPECT_EQ(f_eps(0.0, 0.0, p), 0.0);
    EXPECT_GT(f_eps(0.1, 0.1, p), 0.0);
    EXPECT_LT(f_eps(1.0, 0.0, p), 0.0);
    EXPECT_THROW(f_eps(0.5, 0.0, make_params(2, 1, 0.5, 0.4, 1)), DomainError);
}

TEST(FinalSizeSi, NoWarningsReducesToGiantComponentEquation)
{
    for (double mu : {1.5, 2.0, 4.0}) {
        const Params p = si(mu, 1.3, 0.0, 0.7);
        for (double x : {0.1, 0.4, 0.9}) {
            EXPECT_NEAR(f_eps(x, 0.0, p), 1.0 - x - std::exp(-mu * x), 1e-15);
        }
    }
    EXPECT_NEAR(solve_si_final(si(2.0, 1.0, 0.0, 1.0)).tau, giant_mu2, 1e-12);
}

TEST(FinalSizeSi, FrozenOracleValues)
{
    const std::vector<std::pair<double, double>> table = {
        {0.2, 0.808218153480145}, {0.4, 0.822397299180158}, {0.5, 0.830690936938237},
        {0.6, 0.839834948886062}, {0.8, 0.860526393442900}, {1.0, 0.883413967241879},
    };
    for (const auto& [omega, tau] : table) {
        const Params p = si(2.0, 1.0, omega, 1.0);
        if (compute_r0(p) <= 1.0) {
            // R0 = 1 at omega = 1: the value is the threshold limit
            EXPECT_NEAR(corollary_analysis(2.0, 1.0).tau0, tau, 1e-12);
            EXPECT_THROW(solve_si_final(p), NumericalError);
            continue;
        }
        const auto r = solve_si_final(p);
        EXPECT_NEAR(r.tau, tau, 1e-12) << omega;
        EXPECT_LT(std::fabs(f_eps(r.tau, 0.0, p)), 1e-12);
        EXPECT_TRUE(r.certified);
        EXPECT_EQ(r.derivative_sign, -1);
    }
}

TEST(FinalSizeSi, DerivativeMatchesFiniteDifference)
{
    const Params p = si(3.0, 1.4, 0.9, 0.6);
    for (double x : {0.2, 0.5, 0.8}) {
        const double fd = (f_eps(x + 1e-6, 0.05, p) - f_eps(x - 1e-6, 0.05, p)) / 2e-6;
        EXPECT_NEAR(f_eps_derivative(x, 0.05, p), fd, 1e-8);
    }
}

TEST(FinalSizeSi, SubcriticalHasNoRoot)
{
    EXPECT_THROW(solve_si_final(si(2.0, 0.5, 0.6, 1.0)), NumericalError);
    EXPECT_EQ(tau_si(si(2.0, 0.5, 0.6, 1.0)), 0.0);
}

TEST(FinalSizeSi, DependsOnRatesOnlyThroughTheirRatio)
{
    for (double alpha : {0.3, 0.8, 1.0}) {
        const Params p   = si(2.5, 1.0, 0.7, alpha);
        const double ref = solve_si_final(p).tau;
        for (double c : {0.5, 2.0, 10.0}) {
            EXPECT_NEAR(solve_si_final(si(2.5, c, c * 0.7, alpha)).tau, ref, 1e-10);
        }
    }
}

TEST(FinalSizeSi, ApproachesThresholdLimit)
{
    for (double alpha : {0.2, 0.6, 1.0}) {
        for (double mu : {1.8, 3.0, 6.0}) {
            const double omega = 1.0;
            const double lc    = omega / (mu - 1.0);
            const double tau   = solve_si_final(si(mu, lc * (1.0 + 1e-4), omega, alpha)).tau;
            EXPECT_NEAR(tau, corollary_analysis(mu, alpha).tau0, 1e-2) << mu << " " << alpha;
        }
    }
}

TEST(FinalSizeSi, SeededFractionMatchesExplicitGraph)
{
    const Params p   = si(2.0, 100.0, 1.0, 1.0);
    const double eps = 0.3;
    const auto root  = solve_si_final(p, eps);
    EXPECT_GT(root.tau, eps);
    SimConfig cfg;
    cfg.n                  = 1000;
    cfg.initial_infectives = 300;
    cfg.params             = p;
    cfg.seed               = 5;
    const auto set = run_naive_replicates(cfg, 8, 4);
    EXPECT_NEAR(set.summary.mean_fraction, root.tau, 0.03);
}

TEST(FinalSizeSi, JumpCondition)
{
    EXPECT_TRUE(si_discontinuity(5.0, 1.0));
    EXPECT_FALSE(si_discontinuity(100.0, 0.3));
    EXPECT_FALSE(si_discontinuity(3.0, 0.5));
    EXPECT_TRUE(si_discontinuity(3.0 + 1e-9, 0.5));
    EXPECT_THROW(si_discontinuity(1.0, 0.5), DomainError);
}

TEST(FinalSizeCorollary, ThresholdLimitIsLargestRootOfLimitFunction)
{
    EXPECT_EQ(corollary_analysis(4.0, 1.0 / 3.0).tau0, 0.0);
    EXPECT_EQ(corollary_analysis(3.0, 0.5).tau0, 0.0);
    for (double alpha : {0.5, 0.8, 1.0}) {
        for (double mu : {3.5, 5.0, 9.0}) {
            const auto c = corollary_analysis(mu, alpha);
            ASSERT_GT(c.tau0, 0.0);
            EXPECT_TRUE(is_root([&](double x) { return f0(x, mu, alpha); }, c.tau0)) << mu << " " << alpha;
            // nothing larger: f0 is negative all the way to 1
            for (double x = c.tau0 + 1e-3; x < 1.0; x += 1e-3) {
                EXPECT_LT(f0(x, mu, alpha), 0.0);
            }
        }
    }
}

TEST(FinalSizeCorollary, ConstantsFrozenAndNearPublishedRounding)
{
    const auto c = compute_constants();
    EXPECT_NEAR(c.theta_star, 0.461433744404312, 1e-12);
    EXPECT_NEAR(c.alpha_star, 0.820855392668077, 1e-12);
    EXPECT_NEAR(c.mu_hat_of_alpha_star, 3.348205084115901, 1e-10);
    EXPECT_NEAR(c.tau_star, 0.959786942401566, 1e-10);
    EXPECT_NEAR(c.mu_hat_star_1, 1.756431208626170, 1e-12);

    EXPECT_NEAR(c.theta_star, 0.4614, 5e-4);
    EXPECT_NEAR(c.alpha_star, 0.8209, 5e-4);
    EXPECT_NEAR(c.mu_hat_of_alpha_star, 3.3482, 5e-4);
    EXPECT_NEAR(c.mu_hat_star_1, 1.7564, 5e-4);

    EXPECT_GT(c.alpha_star, 7.0 / 9.0);
    EXPECT_LT(c.alpha_star, 1.0);
    EXPECT_NEAR(h(c.mu_hat_of_alpha_star, c.alpha_star), 0.0, 1e-12);
    EXPECT_NEAR(h(c.mu_hat_star_1, 1.0), 0.0, 1e-12);
    EXPECT_NEAR(2.0 * c.mu_hat_star_1, std::exp(c.mu_hat_star_1 - 0.5), 1e-12);
}

TEST(FinalSizeCorollary, HatFunctionAgreesWithDirectSubstitution)
{
    for (double th : {0.1, 0.3, 0.5, 0.8}) {
        const double alpha = eta_inverse(th);
        EXPECT_NEAR(eta(alpha), th, 1e-14);
        EXPECT_NEAR(h_hat(th), h(mu_hat(alpha), alpha), 1e-12);
    }
}

TEST(FinalSizeCorollary, CriticalPointIsConstantInLambda)
{
    const auto c = compute_constants();
    const auto r = corollary_analysis(c.mu_hat_of_alpha_star, c.alpha_star);
    EXPECT_EQ(r.monotonicity, Monotonicity::constant);
    const double lc = 1.0 / (c.mu_hat_of_alpha_star - 1.0);
    for (double k : {1.01, 2.0, 5.0, 50.0}) {
        const double tau = solve_si_final(si(c.mu_hat_of_alpha_star, k * lc, 1.0, c.alpha_star)).tau;
        EXPECT_NEAR(tau, c.tau_star, 1e-8) << k;
    }
    EXPECT_NEAR(r.tau0, c.tau_star, 1e-4);
}

TEST(FinalSizeCorollary, LowerAndUpperCriticalMeans)
{
    const auto c = compute_constants();
    EXPECT_FALSE(mu_lu_star(0.8).has_value());
    for (double alpha : {0.85, 0.9, 0.95}) {
        const auto lu = mu_lu_star(alpha);
        ASSERT_TRUE(lu.has_value());
        EXPECT_LT(lu->first, mu_hat(alpha));
        EXPECT_GT(lu->second, mu_hat(alpha));
        auto H = [alpha](double mu) { return h(mu, alpha); };
        EXPECT_TRUE(is_root(H, lu->first));
        // near alpha/(1-alpha) the log argument cancels; h itself is only good to ~1e-10 there
        EXPECT_NEAR(H(lu->second), 0.0, 1e-9);
    }
    EXPECT_DOUBLE_EQ(mu_lu_star(1.0)->first, c.mu_hat_star_1);
}

TEST(FinalSizeCorollary, ClassMatchesEmpiricalSlope)
{
    struct Case {
        double mu, alpha;
        Monotonicity expect;
    };
    const std::vector<Case> cases = {
        {2.0, 0.5, Monotonicity::increasing},  {2.0, 1.0, Monotonicity::decreasing},
        {1.5, 1.0, Monotonicity::increasing},  {3.0, 0.9, Monotonicity::decreasing},
        {8.0, 0.9, Monotonicity::decreasing},  {1.2, 0.9, Monotonicity::increasing},
        {4.0, 0.75, Monotonicity::increasing}, {12.0, 0.9, Monotonicity::increasing},
    };
    for (const auto& cs : cases) {
        const auto cls = corollary_analysis(cs.mu, cs.alpha).monotonicity;
        EXPECT_EQ(cls, cs.expect) << cs.mu << " " << cs.alpha;
        const double lc = 1.0 / (cs.mu - 1.0);
        double prev     = solve_si_final(si(cs.mu, lc * 1.01, 1.0, cs.alpha)).tau;
        for (int k = 1; k < 20; ++k) {
            const double lam = lc * (1.01 + 0.5 * k);
            const double tau = solve_si_final(si(cs.mu, lam, 1.0, cs.alpha)).tau;
            if (cls == Monotonicity::increasing) {
                EXPECT_GT(tau, prev);
            }
            else {
                EXPECT_LT(tau, prev);
            }
            prev = tau;
        }
    }
    EXPECT_EQ(corollary_analysis(2.0, 1.0).monotonicity, Monotonicity::decreasing);
}

TEST(FinalSizeSusOnly, JumpsToOneBetweenThresholds)
{
    const auto pt = solve_susonly_final(make_params(2.5, 8.0, 1.0, 10.0, 1.0));
    EXPECT_EQ(pt.regime, Regime::tau_equals_one);
    EXPECT_EQ(pt.tau, 1.0);
}

TEST(FinalSizeSusOnly, RootAboveUpperThreshold)
{
    const Params p = make_params(2.5, 12.0, 1.0, 10.0, 1.0);
    const auto pt  = solve_susonly_final(p);
    EXPECT_EQ(pt.regime, Regime::discontinuous);
    EXPECT_GT(pt.tau, 0.0);
    EXPECT_LT(pt.tau, 1.0);
    EXPECT_LT(std::fabs(g_susonly(pt.tau, p)), 1e-12);
}

TEST(FinalSizeSusOnly, LargeInfectionRateGivesGiantComponent)
{
    const auto pt = solve_susonly_final(make_params(2.5, 1e6, 1.0, 10.0, 1.0));
    EXPECT_NEAR(pt.tau, giant_mu25, 1e-4);
    EXPECT_NEAR(giant_component(2.5), giant_mu25, 1e-12);
    EXPECT_EQ(giant_component(1.0), 0.0);
}

TEST(FinalSizeSusOnly, SubcriticalAndContinuous)
{
    EXPECT_EQ(solve_susonly_final(make_params(2.5, 7.0, 1.0, 10.0, 1.0)).regime, Regime::subcritical);
    const auto pt = solve_susonly_final(make_params(3.0, 2.0, 1.0, 1.0, 0.2));
    EXPECT_EQ(pt.regime, Regime::continuous);
    EXPECT_GT(pt.tau, 0.0);
}

TEST(FinalSizeSusOnly, ContinuousAtUpperThreshold)
{
    // lambda = omega(2 alpha - 1) - gamma = 9: the root tends to 1 from above
    double prev = 0.0;
    for (double d : {1.0, 1e-1, 1e-2, 1e-3, 1e-5}) {
        const double tau = solve_susonly_final(make_params(2.5, 9.0 + d, 1.0, 10.0, 1.0)).tau;
        EXPECT_GE(tau, prev);
        prev = tau;
    }
    EXPECT_GT(prev, 1.0 - 1e-6);
}

TEST(FinalSizeSir, BoundVerdicts)
{
    EXPECT_EQ(sir_discontinuity_bounds(make_params(5.0, 1.0, 1.0, 4.0, 1.0)).verdict, SirVerdict::discontinuous);
    const auto gap = sir_discontinuity_bounds(make_params(5.0, 1.0, 1.0, 1.5, 1.0));
    EXPECT_EQ(gap.verdict, SirVerdict::gap);
    EXPECT_FALSE(gap.conjectured_discontinuous);
    EXPECT_EQ(sir_discontinuity_bounds(make_params(50.0, 1.0, 0.1, 9.0, 0.0)).verdict, SirVerdict::continuous);
}

TEST(FinalSizeSir, VerdictsMatchBoundingCurvatures)
{
    // jump iff the lower bounding curvature is positive; no jump iff the upper one is not
    for (double mu : {1.5, 3.0, 6.0, 20.0}) {
        for (double g : {0.0, 0.5, 2.0}) {
            for (double om : {0.5, 2.0, 8.0}) {
                for (double a : {0.0, 0.4, 0.7, 1.0}) {
                    const Params p = make_params(mu, 1.0, g, om, a);
                    const auto v   = sir_discontinuity_bounds(p).verdict;
                    const auto c   = detdisc_curvature(p);
                    if (std::fabs(c.lower_bound) < 1e-9 || std::fabs(c.upper_bound) < 1e-9) {
                        continue; // exact boundary, decided by rounding
                    }
                    EXPECT_EQ(v == SirVerdict::discontinuous, c.lower_bound > 0.0) << mu << g << om << a;
                    if (v != SirVerdict::discontinuous) {
                        EXPECT_EQ(v == SirVerdict::continuous, c.upper_bound < 0.0) << mu << g << om << a;
                    }
                }
            }
        }
    }
}

TEST(FinalSizeSir, PhasePointUsesVanishingSeedRun)
{
    const Params p = make_params(5.0, 1.5, 1.0, 4.0, 1.0);
    const auto pt  = sir_phase_point(p);
    EXPECT_EQ(pt.regime, Regime::discontinuous);
    EXPECT_NEAR(pt.tau, epsilon_run(p).tau, 0.0);
    EXPECT_EQ(sir_phase_point(make_params(5.0, 1.0, 1.0, 4.0, 1.0)).regime, Regime::subcritical);
}

TEST(FinalSizeYd, NoRewiringGivesGiantEpidemic)
{
    for (double lambda : {0.5, 1.0, 3.0}) {
        const auto yd = yd_final_size(2.0, lambda, 0.0);
        EXPECT_NEAR(yd.nu, giant_mu2, 1e-6);
        EXPECT_NEAR(yd.sigma, 1.0 - giant_mu2, 1e-6);
    }
}

TEST(FinalSizeYd, DiffersFromOurFinalSize)
{
    const auto yd    = yd_final_size(2.0, 1.0, 0.5);
    const double tau = solve_si_final(si(2.0, 1.0, 0.5, 1.0)).tau;
    EXPECT_GT(std::fabs(yd.nu - tau), 1e-3);
    EXPECT_LT(std::fabs(yd_f(yd.sigma, 2.0, yd.beta)), 1e-12);
    EXPECT_NEAR(yd_f(1.0, 2.0, yd.beta), 0.0, 1e-15);
    EXPECT_THROW(yd_final_size(2.0, 1.0, 1.0), DomainError);
}

TEST(FinalSizeHeuristic, ResidualVanishesAtRoot)
{
    for (double omega : {0.2, 0.5, 0.9}) {
        const Params p = si(2.0, 1.0, omega, 1.0);
        const double tau = solve_si_final(p).tau;
        const auto c     = heuristic_identity_check(p, tau);
        EXPECT_LT(std::fabs(c.residual), 1e-10);
        // product form: Poisson thinning of original and rewired infective neighbours
        const double escape = std::exp(-(p.mu * tau + c.rewired_mean) * c.p_infect);
        EXPECT_NEAR(1.0 - tau - escape, c.residual, 1e-14);
    }
}

TEST(FinalSizeHeuristic, EdgeCases)
{
    const auto c0 = heuristic_identity_check(si(2.0, 1.0, 0.0, 1.0), 0.5);
    EXPECT_EQ(c0.p_infect, 1.0);
    EXPECT_NEAR(c0.residual, 0.5 - std::exp(-1.0), 1e-15);
    const double tau = 1e-6;
    const auto c     = heuristic_identity_check(si(2.0, 1.0, 0.6, 1.0), tau);
    EXPECT_NEAR(c.rewired_mean, tau * tau * 0.6 / 2.0, 1e-3 * tau * tau);
    EXPECT_THROW(heuristic_identity_check(si(2.0, 1.0, 0.6, 0.5), 0.5), DomainError);
}

TEST(FinalSizeCsv, PhaseAndComparisonHeaders)
{
    std::ostringstream a, b;
    const PhasePoint pts[] = {si_phase_point(si(2.0, 1.0, 0.4, 1.0))};
    write_phase_csv(a, pts);
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "mu,alpha,lambda,omega,gamma,tau,regime,monotonicity");
    EXPECT_NE(a.str().find("continuous,decreasing"), std::string::npos);
    const YdRow rows[] = {{0.4, 0.82, 0.8}};
    write_yd_csv(b, rows);
    EXPECT_EQ(b.str(), "omega,tau_ours,nu_yd,sim_mean,sim_se\n0.4,0.82,0.8,nan,nan\n");
}
