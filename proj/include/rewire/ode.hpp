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
#ifndef REWIRE_ODE_HPP
#define REWIRE_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"
#include "numerics.hpp"
#include "trajectory.hpp"

namespace rewire
{

/// (s, i, i_E, w) in the original time scale, or (s~, i~, i~_E, w~) for the transformed systems.
using OdeState = std::array<double, 4>;
/// (s, i, x_SS, x_SI) of the pair approximation.
using PairState = std::array<double, 4>;
using Jacobian  = std::array<std::array<double, 4>, 4>;

enum Component : std::size_t { comp_s = 0, comp_i = 1, comp_ie = 2, comp_w = 3 };

namespace detail
{

inline void require_positive_s(double s)
{
    if (!(s > 0.0)) {
        throw DomainError("singular vector field: s <= 0 in the 1/s terms");
    }
}

} // namespace detail

/// Main SIR system with uniform rewiring.
inline OdeState rhs_main(const OdeState& x, const Params& p)
{
    const auto [s, i, ie, w] = x;
    detail::require_positive_s(s);
    const double lam = p.lambda;
    return {
        -lam * ie,
        -p.gamma * i + lam * ie,
        -lam * ie - p.gamma * ie + lam * p.mu * ie * s - lam * ie * ie / s + 2.0 * lam * ie * w / s
            - p.omega * ie * (1.0 - p.alpha + p.alpha * (1.0 - i)),
        p.omega * p.alpha * ie * s - 2.0 * lam * ie * w / s,
    };
}

/// Variant where every rewiring goes to a susceptible: the warned edge is always lost.
inline OdeState rhs_susonly(const OdeState& x, const Params& p)
{
    const auto [s, i, ie, w] = x;
    detail::require_positive_s(s);
    const double lam = p.lambda;
    return {
        -lam * ie,
        -p.gamma * i + lam * ie,
        -lam * ie - p.gamma * ie + lam * p.mu * ie * s - lam * ie * ie / s + 2.0 * lam * ie * w / s - p.omega * ie,
        p.omega * p.alpha * ie - 2.0 * lam * ie * w / s,
    };
}

inline Jacobian jacobian_main(const OdeState& x, const Params& p)
{
    const auto [s, i, ie, w] = x;
    detail::require_positive_s(s);
    const double lam = p.lambda, g = p.gamma, om = p.omega, a = p.alpha, mu = p.mu;
    Jacobian j{};
    j[0] = {0.0, 0.0, -lam, 0.0};
    j[1] = {0.0, -g, lam, 0.0};
    j[2] = {ie * (lam * mu + lam * ie / (s * s) - 2.0 * lam * w / (s * s)), om * a * ie,
            -lam - g + lam * mu * s - 2.0 * lam * ie / s + 2.0 * lam * w / s - om * (1.0 - a * i), 2.0 * lam * ie / s};
    j[3] = {om * a * ie + 2.0 * lam * ie * w / (s * s), 0.0, om * a * s - 2.0 * lam * w / s, -2.0 * lam * ie / s};
    return j;
}

inline Jacobian jacobian_susonly(const OdeState& x, const Params& p)
{
    const auto [s, i, ie, w] = x;
    (void)i;
    detail::require_positive_s(s);
    const double lam = p.lambda, g = p.gamma, om = p.omega, a = p.alpha, mu = p.mu;
    Jacobian j{};
    j[0] = {0.0, 0.0, -lam, 0.0};
    j[1] = {0.0, -g, lam, 0.0};
    j[2] = {ie * (lam * mu + lam * ie / (s * s) - 2.0 * lam * w / (s * s)), 0.0,
            -lam - g + lam * mu * s - 2.0 * lam * ie / s + 2.0 * lam * w / s - om, 2.0 * lam * ie / s};
    j[3] = {2.0 * lam * ie * w / (s * s), 0.0, om * a - 2.0 * lam * w / s, -2.0 * lam * ie / s};
    return j;
}

/// Systems in the time scale where the total force of infection is 1.
enum class Transformed {
    si_a,      ///< SI model (gamma = 0)
    sir_b,     ///< SIR model
    susonly_c, ///< SIR with susceptible-only rewiring
    lower_bl,  ///< lower bound: every warning costs the infective its edge
    upper_bu,  ///< upper bound: rewiring to recovered keeps the edge
    upper_bu1, ///< upper bound with infectives bounded by L' times infectious edges
};

inline std::string_view to_string(Transformed k) noexcept
{
    switch (k) {
    case Transformed::si_a:
        return "SI_A";
    case Transformed::sir_b:
        return "SIR_B";
    case Transformed::susonly_c:
        return "SUSONLY_C";
    case Transformed::lower_bl:
        return "LOWER_BL";
    case Transformed::upper_bu:
        return "UPPER_BU";
    case Transformed::upper_bu1:
        return "UPPER_BU1";
    }
    return "?";
}

/// Default L' = 1.5 L for the UPPER_BU1 system.
inline double default_l_prime(const Params& p)
{
    return 1.5 * compute_L(p);
}

/**
 * Transformed vector field. `l_prime` is used only by UPPER_BU1. For SI_A the
 * i~ component simply counts infections (di~/dt = 1).
 */
inline OdeState rhs_transformed(const OdeState& x, const Params& p, Transformed kind, double l_prime = 0.0)
{
    const auto [s, i, ie, w] = x;
    if (!(s > 0.0)) {
        throw DomainError("singular transformed field: s~ <= 0 in the 1/s~ terms");
    }
    if (!(p.lambda > 0.0)) {
        throw DomainError("transformed fields need lambda > 0");
    }
    const double g  = p.gamma / p.lambda;
    const double o  = p.omega / p.lambda;
    const double a  = p.alpha;
    const double common = p.mu * s - ie / s + 2.0 * w / s;

    double di       = 1.0;
    double recovery = 0.0;
    if (kind != Transformed::si_a) {
        if (!(ie > 0.0)) {
            throw DomainError("singular transformed field: i~_E <= 0 in the i~/i~_E term");
        }
        di       = -g * i / ie + 1.0;
        recovery = g;
    }

    double loss = 0.0;
    switch (kind) {
    case Transformed::si_a:
    case Transformed::upper_bu:
        loss = 1.0 - a + a * s;
        break;
    case Transformed::sir_b:
        loss = 1.0 - a + a * (1.0 - i);
        break;
    case Transformed::lower_bl:
    case Transformed::susonly_c:
        loss = 1.0;
        break;
    case Transformed::upper_bu1:
        loss = 1.0 - a + a * (1.0 - l_prime * ie);
        break;
    }
    const double dw = kind == Transformed::susonly_c ? o * a - 2.0 * w / s : o * a * s - 2.0 * w / s;
    return {-1.0, di, -1.0 - recovery + common - o * loss, dw};
}

/// Closed pair-approximation system (uniform rewiring, alpha = 1).
inline PairState rhs_pair(const PairState& x, const Params& p)
{
    const auto [s, i, xss, xsi] = x;
    detail::require_positive_s(s);
    if (p.alpha != 1.0) {
        throw DomainError("pair approximation is defined for alpha = 1");
    }
    const double r   = 1.0 - s - i;
    const double lam = p.lambda;
    return {
        -lam * xsi,
        lam * xsi - p.gamma * i,
        2.0 * p.omega * s * xsi - 2.0 * lam * xsi * xss / s,
        -lam * xsi * (1.0 - xss / s + xsi / s) - (p.omega * (s + r) + p.gamma) * xsi,
    };
}

/// Rewired edges are the susceptible pairs in excess of the original graph's: w = (x_SS - mu s^2)/2.
inline OdeState pair_to_main(const PairState& x, double mu)
{
    return {x[0], x[1], x[3], 0.5 * (x[2] - mu * x[0] * x[0])};
}

inline PairState main_to_pair(const OdeState& x, double mu)
{
    return {x[0], x[1], 2.0 * x[3] + mu * x[0] * x[0], x[2]};
}

/**
 * Explicit solution of the SI_A system from (1-eps, eps, mu eps (1-eps), 0).
 * Requires gamma = 0 and 0 <= t <= 1 - eps; at t = 1 - eps every term has limit 0.
 */
inline OdeState closed_form_si(double t, double eps, const Params& p)
{
    if (p.gamma != 0.0) {
        throw DomainError("closed form holds for the SI model only");
    }
    if (!(eps >= 0.0 && eps < 1.0)) {
        throw DomainError("closed form needs eps in [0, 1)");
    }
    if (!(t >= 0.0 && t <= 1.0 - eps)) {
        throw DomainError("closed form needs 0 <= t <= 1 - eps");
    }
    const double s  = 1.0 - eps - t;
    const double oa = p.omega * p.alpha / p.lambda;
    if (s <= 0.0) {
        return {0.0, 1.0, 0.0, 0.0};
    }
    const double lg = std::log(s / (1.0 - eps));
    const double ie = s
                      * ((1.0 + p.omega / p.lambda * (1.0 - p.alpha)) * lg + (p.mu + oa) * (1.0 - s) - oa * eps
                         + 2.0 * oa * s * lg);
    const double w  = -oa * s * s * lg;
    return {s, 1.0 - s, ie, w};
}

// ---------------------------------------------------------------------------
// Integrator
// ---------------------------------------------------------------------------

/// Halts integration when component `component` crosses `threshold` from above.
struct FloorRule {
    std::size_t component;
    double threshold;
};

struct StopRule {
    double t_max = std::numeric_limits<double>::infinity();
    std::vector<FloorRule> floors;
    /// Always-on guard on component 0 (s or s~); the 1/s terms are not trusted below it.
    double s_floor = 1e-6;
};

inline StopRule stop_at_time(double t_max)
{
    StopRule r;
    r.t_max = t_max;
    return r;
}

enum class StopReason { time_limit, floor, s_floor };

struct IntegratorOptions {
    double rtol           = 1e-9;
    double atol           = 1e-12;
    double event_tol      = 1e-10;
    double h_initial      = 0.0; ///< 0 picks a step from the initial derivative
    double h_min          = 1e-14;
    std::size_t max_steps = 5'000'000;
};

/// Step-size underflow or step budget exhausted; carries the last accepted state.
class IntegrationError : public NumericalError
{
public:
    IntegrationError(const std::string& what, double t, const OdeState& x)
        : NumericalError(what)
        , t_last(t)
        , x_last(x)
    {
    }

    double t_last;
    OdeState x_last;
};

/// Accepted steps plus Dormand-Prince dense output between them.
class OdeSolution
{
public:
    struct Segment {
        double t0;
        double h;
        std::array<OdeState, 5> r; // continuous extension coefficients
    };

    std::vector<double> t;
    std::vector<OdeState> x;
    std::vector<Segment> segments;
    StopReason reason        = StopReason::time_limit;
    std::size_t floor_index  = 0; ///< which FloorRule fired when reason == floor

    double t_end() const
    {
        return t.back();
    }

    const OdeState& final_state() const
    {
        return x.back();
    }

    /// Dense-output state at time tq, clamped to [t.front(), t.back()].
    OdeState at(double tq) const
    {
        if (segments.empty() || tq <= t.front()) {
            return x.front();
        }
        if (tq >= t.back()) {
            return x.back();
        }
        auto it = std::upper_bound(segments.begin(), segments.end(), tq,
                                   [](double v, const Segment& sg) { return v < sg.t0; });
        const Segment& sg = *(it - 1);
        return eval(sg, tq);
    }

    static OdeState eval(const Segment& sg, double tq)
    {
        const double th  = (tq - sg.t0) / sg.h;
        const double th1 = 1.0 - th;
        OdeState y{};
        for (std::size_t k = 0; k < 4; ++k) {
            y[k] = sg.r[0][k] + th * (sg.r[1][k] + th1 * (sg.r[2][k] + th * (sg.r[3][k] + th1 * sg.r[4][k])));
        }
        return y;
    }
};

using VectorField = std::function<OdeState(const OdeState&)>;

/**
 * Dormand-Prince 5(4) with step-size control and the standard 4th-order
 * continuous extension. Trial stages that leave the field's domain (it throws
 * DomainError) are treated as rejected steps.
 */
inline OdeSolution integrate(const VectorField& f, const OdeState& x0, const StopRule& stop,
                             const IntegratorOptions& opt = {})
{
    // autonomous fields, so the stage nodes c_i are not needed
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                     a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    auto axpy = [](const OdeState& y, double h, std::initializer_list<std::pair<double, const OdeState*>> terms) {
        OdeState out = y;
        for (const auto& [c, k] : terms) {
            if (c == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < 4; ++j) {
                out[j] += h * c * (*k)[j];
            }
        }
        return out;
    };
    auto finite = [](const OdeState& v) {
        return std::all_of(v.begin(), v.end(), [](double q) { return std::isfinite(q); });
    };

    OdeSolution sol;
    double t   = 0.0;
    OdeState y = x0;
    sol.t.push_back(t);
    sol.x.push_back(y);

    OdeState k1 = f(y);
    if (!finite(k1)) {
        throw DomainError("vector field is not finite at the initial state");
    }

    double h = opt.h_initial;
    if (h <= 0.0) {
        double d0 = 0.0, d1n = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            const double sc = opt.atol + opt.rtol * std::fabs(y[j]);
            d0 += (y[j] / sc) * (y[j] / sc);
            d1n += (k1[j] / sc) * (k1[j] / sc);
        }
        h = (d0 < 1e-10 || d1n < 1e-10) ? 1e-6 : 0.01 * std::sqrt(d0 / d1n);
        h = std::min(h, 0.1);
    }

    auto g_value = [&](const FloorRule& r, const OdeState& v) { return v[r.component] - r.threshold; };
    std::vector<FloorRule> rules = stop.floors;
    rules.push_back({comp_s, stop.s_floor});

    for (std::size_t steps = 0;; ++steps) {
        if (steps >= opt.max_steps) {
            throw IntegrationError("integrator step budget exhausted", t, y);
        }
        if (t >= stop.t_max) {
            sol.reason = StopReason::time_limit;
            return sol;
        }
        h = std::min(h, stop.t_max - t);
        if (h < opt.h_min) {
            if (stop.t_max - t < opt.h_min) {
                sol.reason = StopReason::time_limit;
                return sol;
            }
            throw IntegrationError("step size underflow", t, y);
        }

        OdeState k2, k3, k4, k5, k6, k7, y1;
        bool ok = true;
        try {
            k2 = f(axpy(y, h, {{a21, &k1}}));
            k3 = f(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
            k4 = f(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
            k5 = f(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
            k6 = f(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
            y1 = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
            k7 = f(y1);
            ok = finite(k2) && finite(k3) && finite(k4) && finite(k5) && finite(k6) && finite(k7) && finite(y1);
        }
        catch (const DomainError&) {
            ok = false;
        }

        double err = std::numeric_limits<double>::infinity();
        if (ok) {
            err = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                const double e  = h * (e1 * k1[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] + e6 * k6[j] + e7 * k7[j]);
                const double sc = opt.atol + opt.rtol * std::max(std::fabs(y[j]), std::fabs(y1[j]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / 4.0);
        }
        if (!(err <= 1.0)) {
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
            h *= fac;
            continue;
        }

        OdeSolution::Segment sg;
        sg.t0 = t;
        sg.h  = h;
        for (std::size_t j = 0; j < 4; ++j) {
            const double ydiff = y1[j] - y[j];
            const double bspl  = h * k1[j] - ydiff;
            sg.r[0][j]         = y[j];
            sg.r[1][j]         = ydiff;
            sg.r[2][j]         = bspl;
            sg.r[3][j]         = ydiff - h * k7[j] - bspl;
            sg.r[4][j] = h * (d1 * k1[j] + d3 * k3[j] + d4 * k4[j] + d5 * k5[j] + d6 * k6[j] + d7 * k7[j]);
        }

        // earliest downward crossing inside this step
        double t_hit       = std::numeric_limits<double>::infinity();
        std::size_t which  = rules.size();
        for (std::size_t r = 0; r < rules.size(); ++r) {
            if (g_value(rules[r], y) > 0.0 && g_value(rules[r], y1) <= 0.0) {
                const double th = bisect(
                    [&](double tq) { return g_value(rules[r], OdeSolution::eval(sg, tq)); },
                    t, t + h, opt.event_tol);
                if (th < t_hit) {
                    t_hit = th;
                    which = r;
                }
            }
        }

        sol.segments.push_back(sg);
        if (which < rules.size()) {
            sol.t.push_back(t_hit);
            sol.x.push_back(OdeSolution::eval(sg, t_hit));
            if (which + 1 == rules.size()) {
                sol.reason = StopReason::s_floor;
            }
            else {
                sol.reason      = StopReason::floor;
                sol.floor_index = which;
            }
            return sol;
        }

        t += h;
        y  = y1;
        k1 = k7; // first-same-as-last
        sol.t.push_back(t);
        sol.x.push_back(y);
        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
    }
}

inline OdeSolution integrate_main(const OdeState& x0, const Params& p, const StopRule& stop,
                                  const IntegratorOptions& opt = {})
{
    return integrate([&](const OdeState& x) { return rhs_main(x, p); }, x0, stop, opt);
}

inline OdeSolution integrate_susonly(const OdeState& x0, const Params& p, const StopRule& stop,
                                     const IntegratorOptions& opt = {})
{
    return integrate([&](const OdeState& x) { return rhs_susonly(x, p); }, x0, stop, opt);
}

inline OdeSolution integrate_transformed(Transformed kind, const OdeState& x0, const Params& p,
                                         const StopRule& stop, double l_prime = 0.0,
                                         const IntegratorOptions& opt = {})
{
    return integrate([&](const OdeState& x) { return rhs_transformed(x, p, kind, l_prime); }, x0, stop, opt);
}

inline OdeSolution integrate_pair(const PairState& x0, const Params& p, const StopRule& stop,
                                  const IntegratorOptions& opt = {})
{
    return integrate([&](const PairState& x) { return rhs_pair(x, p); }, x0, stop, opt);
}

/// Accepted-step states as trajectory points.
inline Trajectory to_trajectory(const OdeSolution& sol)
{
    Trajectory out;
    out.reserve(sol.t.size());
    for (std::size_t k = 0; k < sol.t.size(); ++k) {
        out.push_back({sol.t[k], sol.x[k][0], sol.x[k][1], sol.x[k][2], sol.x[k][3]});
    }
    return out;
}

/// Dense-output samples at the given times.
inline Trajectory sample(const OdeSolution& sol, std::span<const double> times)
{
    Trajectory out;
    out.reserve(times.size());
    for (double tq : times) {
        const auto v = sol.at(tq);
        out.push_back({tq, v[0], v[1], v[2], v[3]});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Final-size runs and threshold curvature
// ---------------------------------------------------------------------------

struct EpsilonRunOptions {
    double epsilon = 1e-10;
    double i_floor = 1e-8;
    double s_floor = 1e-6;
    double t_max   = std::numeric_limits<double>::infinity();
};

/// Final size from a vanishing initial infection; for the SIR model this is a conjectured limit.
struct EpsilonRun {
    double tau      = 0.0;
    bool subcritical = false;
    StopReason reason = StopReason::time_limit;
    double t_end      = 0.0;
    std::string label = "conjectured limit";
};

/**
 * Main system from (1-eps, eps, eps/L, 0), stopped when i falls back through
 * i_floor (or i_E does, for the SI model). Returns tau = 1 - s at the stop.
 * Below threshold (lambda <= lambda_c) no run is made and tau = 0.
 */
inline EpsilonRun epsilon_run(const Params& p, const EpsilonRunOptions& o = {},
                              bool susceptible_only = false, const IntegratorOptions& opt = {})
{
    validate(p);
    EpsilonRun out;
    if (p.mu <= 1.0 || p.lambda <= compute_lambda_c(p)) {
        out.subcritical = true;
        return out;
    }
    const double L = compute_L(p);
    StopRule stop;
    stop.t_max   = o.t_max;
    stop.s_floor = o.s_floor;
    stop.floors.push_back({p.is_si() ? comp_ie : comp_i, o.i_floor});
    const OdeState x0{1.0 - o.epsilon, o.epsilon, o.epsilon / L, 0.0};
    const auto sol = susceptible_only ? integrate_susonly(x0, p, stop, opt) : integrate_main(x0, p, stop, opt);
    out.reason = sol.reason;
    out.t_end  = sol.t_end();
    out.tau    = out.reason == StopReason::s_floor ? 1.0 - o.s_floor : 1.0 - sol.final_state()[comp_s];
    return out;
}

struct Curvature {
    double at_threshold; ///< second derivative of i~_E at 0 when lambda = lambda_c
    bool discontinuous;  ///< positive curvature predicts a jump at lambda_c
    double lower_bound;  ///< -mu + 2 omega alpha / lambda_c
    double upper_bound;  ///< -mu + 3 omega alpha / lambda_c
};

inline Curvature detdisc_curvature(const Params& p)
{
    validate(p);
    if (p.mu <= 1.0) {
        throw DomainError("curvature needs mu > 1");
    }
    if (p.gamma + p.omega <= 0.0) {
        throw DomainError("curvature needs gamma + omega > 0");
    }
    const double lc  = compute_lambda_c(p);
    const double oa  = p.omega * p.alpha;
    const double val = (p.mu * (p.omega * (2.0 * p.alpha - 1.0) - p.gamma) - 2.0 * oa) / (p.gamma + p.omega);
    return {val, val > 0.0, -p.mu + 2.0 * oa / lc, -p.mu + 3.0 * oa / lc};
}

} // namespace rewire

#endif // REWIRE_ODE_HPP
