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
#ifndef REWIRE_STATS_HPP
#define REWIRE_STATS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace rewire
{

/// Asymptotic Kolmogorov distribution tail Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_q(double x)
{
    if (x < 1e-3) {
        return 1.0;
    }
    double sum  = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * x * x);
        sum += term;
        if (std::fabs(term) <= 1e-12 * std::fabs(sum) || std::fabs(term) <= 1e-300) {
            return std::clamp(2.0 * sum, 0.0, 1.0);
        }
        sign = -sign;
    }
    return 1.0; // series failed to settle: only happens for tiny x
}

struct KsResult {
    double statistic; ///< sup |F1 - F2|
    double p_value;
};

/// Two-sample Kolmogorov-Smirnov test with the Stephens small-sample correction.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_two_sample: empty sample");
    }
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const auto n1 = static_cast<double>(x.size());
    const auto n2 = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d      = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) {
            ++i;
        }
        while (j < y.size() && y[j] == v) {
            ++j;
        }
        d = std::max(d, std::fabs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }
    const double en = std::sqrt(n1 * n2 / (n1 + n2));
    return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

struct MeanSe {
    double mean       = std::nan("");
    double se         = std::nan("");
    std::size_t count = 0;
};

inline MeanSe mean_se(std::span<const double> v)
{
    MeanSe r;
    r.count = v.size();
    if (v.empty()) {
        return r;
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    r.mean = s / static_cast<double>(v.size());
    if (v.size() < 2) {
        r.se = 0.0;
        return r;
    }
    double ss = 0.0;
    for (double x : v) {
        ss += (x - r.mean) * (x - r.mean);
    }
    r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    return r;
}

} // namespace rewire

#endif // REWIRE_STATS_HPP
