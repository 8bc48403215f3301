// Bracketing and bisection for monotone scalar equations.
#pragma once

#include "rcp/errors.hpp"

#include <cmath>
#include <string>

namespace rcp {

struct BisectionOptions {
    double rel_tol = 1e-12;  // relative width of the final bracket
    int max_iterations = 200;
};

/**
 * Solves f(x) = target for a strictly decreasing f on (0, inf).
 *
 * The caller supplies a starting bracket [lo, hi] with f(lo) >= target >= f(hi).
 * Terminates when the residual is negligible or the bracket width drops below
 * rel_tol * hi; returns the feasible (f >= target) end of the final bracket so
 * that f(result) >= target - O(rel_tol).
 */
template <class F>
double bisect_decreasing(F&& f, double target, double lo, double hi,
                         const BisectionOptions& opts = {}) {
    if (!(lo < hi))
        throw NumericError("bisect_decreasing: invalid bracket [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    const double residual_tol = 1e-13 * std::fabs(target);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::fabs(fm - target) <= residual_tol) return mid;
        if (fm >= target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= opts.rel_tol * std::fabs(hi)) return lo;
    }
    throw NumericError("bisect_decreasing: no convergence after " +
                       std::to_string(opts.max_iterations) + " iterations (bracket [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "], target " +
                       std::to_string(target) + ")");
}

/**
 * Expands a bracket for a strictly decreasing f starting from x0 > 0 and
 * solves f(x) = target. Doubles upward while f is still above the target and
 * halves downward while it is below, then bisects.
 */
template <class F>
double solve_decreasing(F&& f, double target, double x0 = 1.0,
                        const BisectionOptions& opts = {}) {
    double lo = x0, hi = x0;
    int guard = 0;
    while (f(hi) > target) {
        hi *= 2.0;
        if (++guard > opts.max_iterations)
            throw NumericError("solve_decreasing: failed to bracket above (target " +
                               std::to_string(target) + ")");
    }
    guard = 0;
    while (f(lo) < target) {
        lo *= 0.5;
        if (++guard > opts.max_iterations)
            throw NumericError("solve_decreasing: failed to bracket below (target " +
                               std::to_string(target) + ")");
    }
    if (lo == hi) return lo;
    return bisect_decreasing(f, target, lo, hi, opts);
}

} // namespace rcp
