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
#ifndef REWIRE_MODEL_HPP
#define REWIRE_MODEL_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rewire
{

/// Thrown for parameter combinations outside a function's domain.
class DomainError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Model parameters of the SIR/SI epidemic with preventive rewiring on G(n, mu/n).
 *
 *  mu     mean degree of the underlying Erdos-Renyi graph
 *  lambda infection rate per susceptible-infective edge
 *  gamma  recovery rate (0 selects the SI model)
 *  omega  warning rate per susceptible-infective edge
 *  alpha  probability that a warned edge is rewired rather than dropped
 */
struct Params {
    double mu     = 1.0;
    double lambda = 0.0;
    double gamma  = 0.0;
    double omega  = 0.0;
    double alpha  = 0.0;

    bool is_si() const noexcept
    {
        return gamma == 0.0;
    }
};

inline void validate(const Params& p)
{
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(p.mu) || !finite(p.lambda) || !finite(p.gamma) || !finite(p.omega) || !finite(p.alpha)) {
        throw DomainError("parameters must be finite");
    }
    if (p.mu <= 0.0) {
        throw DomainError("mu must be > 0");
    }
    if (p.lambda < 0.0 || p.gamma < 0.0 || p.omega < 0.0) {
        throw DomainError("rates must be >= 0");
    }
    if (p.alpha < 0.0 || p.alpha > 1.0) {
        throw DomainError("alpha must lie in [0, 1]");
    }
}

/// Validating factory; the aggregate stays usable for designated initializers.
inline Params make_params(double mu, double lambda, double gamma, double omega, double alpha)
{
    Params p{mu, lambda, gamma, omega, alpha};
    validate(p);
    return p;
}

/// Where a rewired edge is reattached.
enum class RewireMode {
    UniformAll,      ///< any of the other n-2 individuals
    SusceptibleOnly, ///< another susceptible; the edge is kept if none exists
    NonInfectious,   ///< anyone not currently infective
    RecoveredOnly,   ///< a recovered individual (equivalent to dropping)
};

inline std::string_view to_string(RewireMode m) noexcept
{
    switch (m) {
    case RewireMode::UniformAll:
        return "uniform";
    case RewireMode::SusceptibleOnly:
        return "susceptible";
    case RewireMode::NonInfectious:
        return "noninfectious";
    case RewireMode::RecoveredOnly:
        return "recovered";
    }
    return "?";
}

inline RewireMode parse_rewire_mode(std::string_view s)
{
    if (s == "uniform" || s == "UniformAll") {
        return RewireMode::UniformAll;
    }
    if (s == "susceptible" || s == "SusceptibleOnly") {
        return RewireMode::SusceptibleOnly;
    }
    if (s == "noninfectious" || s == "NonInfectious") {
        return RewireMode::NonInfectious;
    }
    if (s == "recovered" || s == "RecoveredOnly") {
        return RewireMode::RecoveredOnly;
    }
    throw DomainError("unknown rewire mode '" + std::string(s) + "'");
}

/// Parameters and mode the simulators actually run: RecoveredOnly becomes UniformAll with alpha = 0.
struct EffectiveModel {
    Params params;
    RewireMode mode;
};

inline EffectiveModel effective_model(const Params& p, RewireMode m) noexcept
{
    if (m == RewireMode::RecoveredOnly) {
        Params q = p;
        q.alpha  = 0.0;
        return {q, RewireMode::UniformAll};
    }
    return {p, m};
}

/// Basic reproduction number mu*lambda/(lambda+omega+gamma). Returns 0 when all rates vanish.
inline double compute_r0(const Params& p) noexcept
{
    const double denom = p.lambda + p.omega + p.gamma;
    if (denom == 0.0) {
        return 0.0;
    }
    return p.mu * p.lambda / denom;
}

/// Critical infection rate (gamma+omega)/(mu-1). Independent of alpha.
inline double compute_lambda_c(const Params& p)
{
    if (p.mu <= 1.0) {
        throw DomainError("subcritical graph: no finite lambda_c");
    }
    return (p.gamma + p.omega) / (p.mu - 1.0);
}

/// Critical warning rate (mu-1)*lambda for fixed lambda (SI model).
inline double compute_omega_c(const Params& p) noexcept
{
    return (p.mu - 1.0) * p.lambda;
}

/// Limiting ratio of infectives to infectious edges early in a major outbreak.
inline double compute_L(const Params& p)
{
    const double denom = p.lambda * (p.mu - 1.0) - p.omega;
    if (denom <= 0.0) {
        throw DomainError("L requires lambda*(mu-1) > omega");
    }
    return p.lambda / denom;
}

/// Sign discriminant for susceptible-only rewiring: negative values allow a jump to 1.
inline double compute_r_susonly(const Params& p) noexcept
{
    return p.mu * (p.gamma + p.omega - 2.0 * p.alpha * p.omega) + 2.0 * p.alpha * p.omega;
}

struct DerivedQuantities {
    double r0;
    double lambda_c;  ///< NaN when mu <= 1
    double omega_c;
    double L;         ///< NaN when lambda*(mu-1) <= omega
    double r_susonly;
};

inline DerivedQuantities derive(const Params& p)
{
    validate(p);
    const double nan = std::nan("");
    DerivedQuantities d{};
    d.r0        = compute_r0(p);
    d.lambda_c  = p.mu > 1.0 ? compute_lambda_c(p) : nan;
    d.omega_c   = compute_omega_c(p);
    d.L         = p.lambda * (p.mu - 1.0) - p.omega > 0.0 ? compute_L(p) : nan;
    d.r_susonly = compute_r_susonly(p);
    return d;
}

} // namespace rewire

#endif // REWIRE_MODEL_HPP
