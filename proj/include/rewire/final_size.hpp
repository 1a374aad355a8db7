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
#ifndef REWIRE_FINAL_SIZE_HPP
#define REWIRE_FINAL_SIZE_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"
#include "numerics.hpp"
#include "ode.hpp"
#include "trajectory.hpp"

namespace rewire
{

// Root-finding conventions shared by every solver in this file.
inline constexpr double root_scan_step   = 1e-4;
inline constexpr double root_scan_offset = 1e-6;

/**
 * Largest root in (bottom, 1) of a function that is positive just below the
 * root and negative near 1: descending scan from 1 - 1e-6, then bisection.
 * A root above the last double below 1 is returned as that double.
 */
template <typename F>
double descending_root(F&& f, double bottom = root_scan_offset)
{
    const double top = std::nextafter(1.0, 0.0);
    if (f(top) >= 0.0) {
        return top;
    }
    const double start = 1.0 - root_scan_offset;
    if (start <= bottom || f(start) >= 0.0) {
        return bisect(f, std::max(bottom, start), top);
    }
    const auto br = scan_down(f, start, bottom, root_scan_step);
    if (br) {
        return br->first == br->second ? br->first : bisect(f, br->first, br->second);
    }
    return bisect(f, std::numeric_limits<double>::min(), bottom);
}

/// Limiting fraction of the population in the giant component of G(n, mu/n); 0 for mu <= 1.
inline double giant_component(double mu)
{
    if (!(mu > 1.0)) {
        return 0.0;
    }
    return descending_root([mu](double x) { return 1.0 - x - std::exp(-mu * x); });
}

// ---------------------------------------------------------------------------
// SI model
// ---------------------------------------------------------------------------

namespace detail
{

inline void require_si(const Params& p)
{
    validate(p);
    if (p.gamma != 0.0) {
        throw DomainError("SI final-size equation needs gamma = 0");
    }
}

inline double si_denominator(double x, const Params& p)
{
    return p.lambda + p.omega * (1.0 - p.alpha) + 2.0 * p.omega * p.alpha * (1.0 - x);
}

} // namespace detail

/// Final-size function for the SI model started from a fraction eps of infectives.
inline double f_eps(double x, double eps, const Params& p)
{
    detail::require_si(p);
    const double num = (p.lambda * p.mu + p.omega * p.alpha) * x - p.omega * p.alpha * eps;
    return 1.0 - x - (1.0 - eps) * std::exp(-num / detail::si_denominator(x, p));
}

inline double f_eps_derivative(double x, double eps, const Params& p)
{
    detail::require_si(p);
    const double a   = p.lambda * p.mu + p.omega * p.alpha;
    const double num = a * x - p.omega * p.alpha * eps;
    const double den = detail::si_denominator(x, p);
    const double q   = (a * den + 2.0 * p.omega * p.alpha * num) / (den * den);
    return -1.0 + (1.0 - eps) * std::exp(-num / den) * q;
}

struct SiRoot {
    double tau        = 0.0;
    double derivative = 0.0; ///< F_eps'(tau)
    int derivative_sign = 0;
    /// The limit theorem needs F_eps'(tau) < 0; tangential roots are not certified.
    bool certified = false;
};

/**
 * Smallest root of F_eps in (eps, 1): ascending scan then bisection to machine
 * precision. For eps = 0 this is the unique root in (0, 1) and needs R0 > 1.
 */
inline SiRoot solve_si_final(const Params& p, double eps = 0.0)
{
    detail::require_si(p);
    if (!(eps >= 0.0 && eps < 1.0)) {
        throw DomainError("eps must lie in [0, 1)");
    }
    if (eps == 0.0 && compute_r0(p) <= 1.0) {
        throw NumericalError("no root (subcritical or degenerate)");
    }
    auto F = [&](double x) { return f_eps(x, eps, p); };
    const auto br = scan_up(F, eps + root_scan_offset, 1.0, root_scan_step);
    if (!br) {
        throw NumericalError("no root (subcritical or degenerate)");
    }
    SiRoot r;
    r.tau             = br->first == br->second ? br->first : bisect(F, br->first, br->second);
    r.derivative      = f_eps_derivative(r.tau, eps, p);
    r.derivative_sign = (r.derivative > 0.0) - (r.derivative < 0.0);
    r.certified       = r.derivative < -1e-9;
    return r;
}

/// tau_SI with the convention tau = 0 when R0 <= 1.
inline double tau_si(const Params& p)
{
    detail::require_si(p);
    return compute_r0(p) <= 1.0 ? 0.0 : solve_si_final(p).tau;
}

/// Jump at the threshold lambda_c for fixed mu, omega, alpha.
inline bool si_discontinuity(double mu, double alpha)
{
    if (!(mu > 1.0)) {
        throw DomainError("si_discontinuity needs mu > 1");
    }
    return alpha > 1.0 / 3.0 && mu > 3.0 * alpha / (3.0 * alpha - 1.0);
}

// ---------------------------------------------------------------------------
// Threshold limit and monotonicity in lambda
// ---------------------------------------------------------------------------

inline double theta(double mu, double alpha)
{
    return 2.0 * alpha * (mu - 1.0) / (mu + alpha * (mu - 1.0));
}

/// Limit of the SI final-size equation as lambda decreases to lambda_c.
inline double f0(double x, double mu, double alpha)
{
    return std::log1p(-x) + x / (1.0 - theta(mu, alpha) * x);
}

/// Root of the lambda-derivative of the final-size equation; independent of lambda and omega.
inline double x0(double mu, double alpha)
{
    return (1.0 + alpha) / (2.0 * alpha) - 1.0 / (2.0 * mu);
}

/// Final-size equation evaluated at x0; its sign decides the direction of monotonicity.
inline double h(double mu, double alpha)
{
    if (!(alpha > 0.5 && alpha <= 1.0)) {
        throw DomainError("h needs alpha in (1/2, 1]");
    }
    if (!(mu > 1.0) || (alpha < 1.0 && !(mu < alpha / (1.0 - alpha)))) {
        throw DomainError("h needs 1 < mu < alpha/(1-alpha)");
    }
    return std::log((alpha - (1.0 - alpha) * mu) / (2.0 * alpha * mu)) + (mu + alpha * (mu - 1.0)) / (2.0 * alpha);
}

inline double eta(double alpha)
{
    return std::sqrt((9.0 * alpha - 7.0) / (1.0 + alpha));
}

inline double eta_inverse(double th)
{
    return (7.0 + th * th) / (9.0 - th * th);
}

/// Location of the interior maximum of h(., alpha), alpha in [7/9, 1).
inline double mu_hat(double alpha)
{
    if (!(alpha >= 7.0 / 9.0 && alpha < 1.0)) {
        throw DomainError("mu_hat needs alpha in [7/9, 1)");
    }
    return alpha / (2.0 * (1.0 - alpha)) * (1.0 + eta(alpha));
}

/// h(mu_hat(alpha), alpha) re-expressed through theta = eta(alpha).
inline double h_hat(double th)
{
    return 2.0 * std::log1p(-th) - std::log(7.0 + th * th) + (3.0 + th) / (2.0 * (1.0 - th));
}

struct CorollaryConstants {
    double theta_star;
    double alpha_star;
    double mu_hat_of_alpha_star;
    double tau_star;
    double mu_hat_star_1;
};

inline CorollaryConstants compute_constants()
{
    CorollaryConstants c{};
    c.theta_star           = bisect(h_hat, 0.0, 0.99);
    c.alpha_star           = eta_inverse(c.theta_star);
    c.mu_hat_of_alpha_star = mu_hat(c.alpha_star);
    c.tau_star             = x0(c.mu_hat_of_alpha_star, c.alpha_star);
    c.mu_hat_star_1 = bisect([](double mu) { return 2.0 * mu - std::exp(mu - 0.5); }, 1.0, 10.0);
    return c;
}

/// The two roots of h(., alpha) for alpha in (alpha*, 1); the upper one is +inf at alpha = 1.
inline std::optional<std::pair<double, double>> mu_lu_star(double alpha)
{
    static const CorollaryConstants cc = compute_constants();
    if (!(alpha > cc.alpha_star && alpha <= 1.0)) {
        return std::nullopt;
    }
    if (alpha == 1.0) {
        return std::pair{cc.mu_hat_star_1, std::numeric_limits<double>::infinity()};
    }
    const double peak = mu_hat(alpha);
    const double top  = alpha / (1.0 - alpha);
    auto H            = [alpha](double mu) { return h(mu, alpha); };
    const double lo   = bisect(H, 1.0 + 1e-12, peak);
    // h -> -inf at the upper end
    const double edge = top - (top - peak) * 1e-12;
    return std::pair{lo, bisect(H, peak, edge)};
}

enum class Monotonicity { increasing, decreasing, constant, not_applicable };

inline std::string_view to_string(Monotonicity m) noexcept
{
    switch (m) {
    case Monotonicity::increasing:
        return "increasing";
    case Monotonicity::decreasing:
        return "decreasing";
    case Monotonicity::constant:
        return "constant";
    case Monotonicity::not_applicable:
        return "n/a";
    }
    return "?";
}

struct CorollaryResult {
    double tau0;               ///< limit of tau_SI as lambda decreases to lambda_c
    Monotonicity monotonicity; ///< of tau_SI in lambda above lambda_c
    double h_value;            ///< NaN where h is not defined
};

/**
 * Threshold limit tau0 (largest root of f0 in [0, 1)) and the direction in
 * which tau_SI moves with lambda. |h| <= constant_tol counts as "constant".
 */
inline CorollaryResult corollary_analysis(double mu, double alpha, double constant_tol = 1e-10)
{
    if (!(mu > 1.0)) {
        throw DomainError("corollary_analysis needs mu > 1");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("alpha must lie in [0, 1]");
    }
    CorollaryResult out{0.0, Monotonicity::increasing, std::nan("")};

    const double th = theta(mu, alpha);
    if (si_discontinuity(mu, alpha)) {
        // f0 rises from 0 to its maximum at (2 theta - 1)/theta^2 and then falls to -inf
        const double peak = (2.0 * th - 1.0) / (th * th);
        auto F            = [&](double x) { return f0(x, mu, alpha); };
        out.tau0          = descending_root(F, peak);
    }

    if (alpha <= 0.5 || (alpha < 1.0 && mu >= alpha / (1.0 - alpha))) {
        return out;
    }
    out.h_value = h(mu, alpha);
    if (std::fabs(out.h_value) <= constant_tol) {
        out.monotonicity = Monotonicity::constant;
    }
    else if (out.h_value > 0.0) {
        out.monotonicity = Monotonicity::decreasing;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Susceptible-only rewiring
// ---------------------------------------------------------------------------

enum class Regime { subcritical, continuous, discontinuous, tau_equals_one };

inline std::string_view to_string(Regime r) noexcept
{
    switch (r) {
    case Regime::subcritical:
        return "subcritical";
    case Regime::continuous:
        return "continuous";
    case Regime::discontinuous:
        return "discontinuous";
    case Regime::tau_equals_one:
        return "tau_equals_one";
    }
    return "?";
}

struct PhasePoint {
    Params params;
    double tau   = 0.0;
    Regime regime = Regime::subcritical;
    Monotonicity monotonicity = Monotonicity::not_applicable;
};

/// Final-size function of the susceptible-only model.
inline double g_susonly(double x, const Params& p)
{
    return (1.0 + (p.gamma + p.omega * (1.0 - 2.0 * p.alpha)) / p.lambda) * std::log1p(-x)
           + (p.mu - 2.0 * p.alpha * p.omega / p.lambda) * x;
}

/**
 * Limiting final fraction of a major outbreak with susceptible-only rewiring.
 * Regime records the behaviour at lambda_c: a negative r gives a jump.
 */
inline PhasePoint solve_susonly_final(const Params& p)
{
    validate(p);
    if (!(p.mu > 1.0)) {
        throw DomainError("solve_susonly_final needs mu > 1");
    }
    PhasePoint pt;
    pt.params = p;
    if (p.lambda <= compute_lambda_c(p)) {
        return pt;
    }
    const double r = compute_r_susonly(p);
    if (r < 0.0 && p.lambda <= p.omega * (2.0 * p.alpha - 1.0) - p.gamma) {
        pt.tau    = 1.0;
        pt.regime = Regime::tau_equals_one;
        return pt;
    }
    pt.regime = r < 0.0 ? Regime::discontinuous : Regime::continuous;
    auto G    = [&](double x) { return g_susonly(x, p); };
    // g(0) = 0 with g'(0) > 0 above threshold and g -> -inf at 1; the interior root is unique
    // just above omega(2 alpha - 1) - gamma the log coefficient vanishes and the root nears 1
    pt.tau = descending_root(G);
    return pt;
}

// ---------------------------------------------------------------------------
// SIR threshold behaviour and phase points
// ---------------------------------------------------------------------------

enum class SirVerdict { discontinuous, continuous, gap };

inline std::string_view to_string(SirVerdict v) noexcept
{
    switch (v) {
    case SirVerdict::discontinuous:
        return "discontinuous";
    case SirVerdict::continuous:
        return "continuous";
    case SirVerdict::gap:
        return "gap";
    }
    return "?";
}

struct SirDiscontinuity {
    SirVerdict verdict;
    /// Verdict from the sign of the curvature at threshold; a conjecture, used to resolve the gap.
    bool conjectured_discontinuous;
};

/// Proven sufficient conditions for a jump / no jump at lambda_c; anything else is a gap.
inline SirDiscontinuity sir_discontinuity_bounds(const Params& p)
{
    validate(p);
    if (!(p.mu > 1.0)) {
        throw DomainError("sir_discontinuity_bounds needs mu > 1");
    }
    const double om = p.omega, a = p.alpha, g = p.gamma;
    const double d2 = om * (2.0 * a - 1.0) - g;
    const double d3 = om * (3.0 * a - 1.0) - g;
    if (d2 > 0.0 && p.mu > 2.0 * om * a / d2) {
        return {SirVerdict::discontinuous, true};
    }
    if (d3 <= 0.0 || p.mu <= 3.0 * om * a / d3) {
        return {SirVerdict::continuous, false};
    }
    return {SirVerdict::gap, detdisc_curvature(p).discontinuous};
}

/// SI phase point: tau_SI, jump verdict and monotonicity class.
inline PhasePoint si_phase_point(const Params& p)
{
    detail::require_si(p);
    PhasePoint pt;
    pt.params = p;
    if (compute_r0(p) <= 1.0) {
        return pt;
    }
    pt.tau = solve_si_final(p).tau;
    if (p.mu > 1.0) {
        pt.regime       = si_discontinuity(p.mu, p.alpha) ? Regime::discontinuous : Regime::continuous;
        pt.monotonicity = corollary_analysis(p.mu, p.alpha).monotonicity;
    }
    else {
        pt.regime = Regime::continuous;
    }
    return pt;
}

/// SIR phase point from the vanishing-seed ODE run; gap cases take the conjectured verdict.
inline PhasePoint sir_phase_point(const Params& p, const EpsilonRunOptions& o = {})
{
    validate(p);
    PhasePoint pt;
    pt.params = p;
    if (!(p.mu > 1.0) || p.lambda <= compute_lambda_c(p)) {
        return pt;
    }
    pt.tau         = epsilon_run(p, o).tau;
    const auto dis = sir_discontinuity_bounds(p);
    const bool jump = dis.verdict == SirVerdict::gap ? dis.conjectured_discontinuous
                                                     : dis.verdict == SirVerdict::discontinuous;
    pt.regime = jump ? Regime::discontinuous : Regime::continuous;
    return pt;
}

inline void write_phase_csv(std::ostream& os, std::span<const PhasePoint> pts)
{
    os << "mu,alpha,lambda,omega,gamma,tau,regime,monotonicity\n";
    for (const auto& pt : pts) {
        const auto& p = pt.params;
        os << fmt9(p.mu) << ',' << fmt9(p.alpha) << ',' << fmt9(p.lambda) << ',' << fmt9(p.omega) << ','
           << fmt9(p.gamma) << ',' << fmt9(pt.tau) << ',' << to_string(pt.regime) << ','
           << to_string(pt.monotonicity) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Effective-degree comparison (Poisson degrees, alpha = 1)
// ---------------------------------------------------------------------------

struct YdFinalSize {
    double beta;
    double sigma;
    double nu;
};

/// f(x) with G(z) = exp(mu(z - 1)) substituted; f(1) = 0 identically.
inline double yd_f(double x, double mu, double beta)
{
    return std::log(mu * x) - mu * (x - 1.0) - std::log(mu + beta * (1.0 - x)) + 0.5 * beta * (x - 1.0) * (x - 1.0);
}

inline YdFinalSize yd_final_size(double mu, double lambda, double omega)
{
    const Params p = make_params(mu, lambda, 0.0, omega, 1.0);
    if (!(mu > 1.0) || !(lambda > compute_lambda_c(p))) {
        throw DomainError("yd_final_size needs lambda > lambda_c");
    }
    YdFinalSize out{omega * mu / lambda, 0.0, 0.0};
    auto F        = [&](double x) { return yd_f(x, mu, out.beta); };
    const auto br = scan_down(F, 1.0 - root_scan_offset, root_scan_offset, root_scan_step);
    if (br) {
        out.sigma = br->first == br->second ? br->first : bisect(F, br->first, br->second);
    }
    const double s = out.sigma;
    out.nu         = 1.0 - std::exp(-0.5 * out.beta * (s - 1.0) * (s - 1.0)) * std::exp(mu * (s - 1.0));
    return out;
}

struct YdRow {
    double omega;
    double tau_ours;
    double nu_yd;
    double sim_mean = std::nan("");
    double sim_se   = std::nan("");
};

inline void write_yd_csv(std::ostream& os, std::span<const YdRow> rows)
{
    os << "omega,tau_ours,nu_yd,sim_mean,sim_se\n";
    for (const auto& r : rows) {
        os << fmt9(r.omega) << ',' << fmt9(r.tau_ours) << ',' << fmt9(r.nu_yd) << ',' << fmt9(r.sim_mean) << ','
           << fmt9(r.sim_se) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Heuristic derivation of the SI final size (alpha = 1)
// ---------------------------------------------------------------------------

struct HeuristicCheck {
    double residual;     ///< (1 - tau) minus the escape probability
    double p_infect;     ///< chance an original infective neighbour infects before a rewire to a susceptible
    double rewired_mean; ///< Poisson mean of infective neighbours gained by rewiring
};

inline HeuristicCheck heuristic_identity_check(const Params& p, double tau)
{
    detail::require_si(p);
    if (p.alpha != 1.0) {
        throw DomainError("heuristic identity is stated for alpha = 1");
    }
    if (!(tau > 0.0 && tau < 1.0)) {
        throw DomainError("tau must lie in (0, 1)");
    }
    const double lam = p.lambda, om = p.omega;
    const double l1  = std::log1p(-tau);
    HeuristicCheck c{};
    c.p_infect     = lam / (lam + om * (1.0 - tau));
    c.rewired_mean = tau * om / lam * (1.0 + (1.0 - tau) / tau * l1);
    c.residual     = (1.0 - tau) - std::exp(-(tau * (p.mu * lam + om) + om * (1.0 - tau) * l1) / (lam + om * (1.0 - tau)));
    return c;
}

} // namespace rewire

#endif // REWIRE_FINAL_SIZE_HPP
