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
#ifndef REWIRE_NUMERICS_HPP
#define REWIRE_NUMERICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

namespace rewire
{

class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail
{

// 10-point Gauss-Legendre rule on [-1, 1]; nodes are symmetric so only the positive half is stored.
inline constexpr std::array<double, 5> gl10_nodes = {
    0.1488743389816312108848260, 0.4333953941292471907992659, 0.6794095682990244062343274,
    0.8650633666889845107320967, 0.9739065285171717200779640};
inline constexpr std::array<double, 5> gl10_weights = {
    0.2955242247147528701738930, 0.2692667193099963550912269, 0.2190863625159820439955349,
    0.1494513491505805931457763, 0.0666713443086881375935688};

template <typename F>
double gl10(F& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double sum     = 0.0;
    for (std::size_t k = 0; k < gl10_nodes.size(); ++k) {
        const double dx = h * gl10_nodes[k];
        sum += gl10_weights[k] * (f(c - dx) + f(c + dx));
    }
    return sum * h;
}

template <typename F>
double adaptive_gl(F& f, double a, double b, double whole, double tol, int depth)
{
    const double m     = 0.5 * (a + b);
    const double left  = gl10(f, a, m);
    const double right = gl10(f, m, b);
    const double both  = left + right;
    if (std::fabs(both - whole) <= tol || depth <= 0) {
        return both;
    }
    return adaptive_gl(f, a, m, left, 0.5 * tol, depth - 1) + adaptive_gl(f, m, b, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive composite Gauss-Legendre quadrature: panels are halved until two levels agree to `tol`.
template <typename F>
double integrate_gl(F&& f, double a, double b, double tol = 1e-10, int max_depth = 40)
{
    return detail::adaptive_gl(f, a, b, detail::gl10(f, a, b), tol, max_depth);
}

/**
 * Bisection on a bracket with f(lo) and f(hi) of opposite sign (or zero).
 * Stops when the bracket width is below `xtol` or cannot shrink further in floating point.
 */
template <typename F>
double bisect(F&& f, double lo, double hi, double xtol = 0.0)
{
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) {
        return lo;
    }
    if (fhi == 0.0) {
        return hi;
    }
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw NumericalError("bisect: no sign change on bracket");
    }
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= xtol) {
            break;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if ((fm > 0.0) == (flo > 0.0)) {
            lo  = mid;
            flo = fm;
        }
        else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// First bracket [x, x + step] with a sign change when stepping up from `from`; nothing if none before `to`.
template <typename F>
std::optional<std::pair<double, double>> scan_up(F&& f, double from, double to, double step)
{
    double x  = from;
    double fx = f(x);
    if (fx == 0.0) {
        return std::pair{x, x};
    }
    while (x < to) {
        const double y  = std::min(x + step, to);
        const double fy = f(y);
        if (fy == 0.0 || (fy > 0.0) != (fx > 0.0)) {
            return std::pair{x, y};
        }
        x  = y;
        fx = fy;
    }
    return std::nullopt;
}

/// Mirror of scan_up, stepping down from `from` towards `to`; the pair is returned as (lower, upper).
template <typename F>
std::optional<std::pair<double, double>> scan_down(F&& f, double from, double to, double step)
{
    double x  = from;
    double fx = f(x);
    if (fx == 0.0) {
        return std::pair{x, x};
    }
    while (x > to) {
        const double y  = std::max(x - step, to);
        const double fy = f(y);
        if (fy == 0.0 || (fy > 0.0) != (fx > 0.0)) {
            return std::pair{y, x};
        }
        x  = y;
        fx = fy;
    }
    return std::nullopt;
}

} // namespace rewire

#endif // REWIRE_NUMERICS_HPP
