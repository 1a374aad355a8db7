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
#ifndef REWIRE_RANDOM_HPP
#define REWIRE_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace rewire
{

/// SplitMix64 finaliser. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of replicate `index` under base seed `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/**
 * Random variate source used by all simulators.
 *
 * Wraps std::mt19937_64 and implements every distribution itself so that a
 * seed reproduces the same stream on any standard library. Poisson variates
 * use sequential inversion for mean < 12 and Hormann's PTRS transformed
 * rejection otherwise. Binomial variates count geometric waiting times, which
 * is exact and costs O(n*min(p, 1-p) + 1).
 */
class Sampler
{
public:
    explicit Sampler(std::uint64_t seed)
        : engine_(seed)
    {
    }

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform()
    {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform integer in [0, k). k must be > 0.
    std::uint64_t uniform_index(std::uint64_t k)
    {
        // Lemire's multiply-shift with rejection.
        std::uint64_t x = engine_();
        __uint128_t m   = static_cast<__uint128_t>(x) * k;
        auto low        = static_cast<std::uint64_t>(m);
        if (low < k) {
            const std::uint64_t threshold = (0 - k) % k;
            while (low < threshold) {
                x   = engine_();
                m   = static_cast<__uint128_t>(x) * k;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p)
    {
        return uniform() <= p;
    }

    double exponential(double rate)
    {
        return -std::log(uniform()) / rate;
    }

    std::int64_t poisson(double mean)
    {
        if (mean <= 0.0) {
            return 0;
        }
        if (mean < 12.0) {
            return poisson_inversion(mean);
        }
        return poisson_ptrs(mean);
    }

    std::int64_t binomial(std::int64_t n, double p)
    {
        if (n <= 0 || p <= 0.0) {
            return 0;
        }
        if (p >= 1.0) {
            return n;
        }
        if (p > 0.5) {
            return n - binomial_waiting(n, 1.0 - p);
        }
        return binomial_waiting(n, p);
    }

private:
    std::int64_t poisson_inversion(double mean)
    {
        double u     = uniform();
        double prob  = std::exp(-mean);
        std::int64_t k = 0;
        while (u > prob) {
            u -= prob;
            ++k;
            prob *= mean / static_cast<double>(k);
            if (prob <= 0.0) {
                break; // tail exhausted in floating point
            }
        }
        return k;
    }

    std::int64_t poisson_ptrs(double mean)
    {
        const double slam     = std::sqrt(mean);
        const double loglam   = std::log(mean);
        const double b        = 0.931 + 2.53 * slam;
        const double a        = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr       = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u  = uniform() - 0.5;
            const double v  = uniform();
            const double us = 0.5 - std::fabs(u);
            const auto k    = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
            if (us >= 0.07 && v <= vr) {
                return k;
            }
            if (k < 0 || (us < 0.013 && v > us)) {
                continue;
            }
            const double lhs = std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b);
            const double rhs = -mean + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0);
            if (lhs <= rhs) {
                return k;
            }
        }
    }

    std::int64_t binomial_waiting(std::int64_t n, double p)
    {
        // Gaps between successes are Geometric(p) on {1, 2, ...}.
        const double log_q = std::log1p(-p);
        std::int64_t successes = 0;
        double position        = 0.0;
        for (;;) {
            position += std::floor(std::log(uniform()) / log_q) + 1.0;
            if (position > static_cast<double>(n)) {
                return successes;
            }
            ++successes;
        }
    }

    std::mt19937_64 engine_;
};

} // namespace rewire

#endif // REWIRE_RANDOM_HPP
