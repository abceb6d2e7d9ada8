#pragma once

#include <cmath>
#include <functional>

#include "flagopt/types.hpp"

namespace flagopt {

/// Number of midpoint evaluations bisection() will spend to localize a root of
/// a sign-changing function on [lo, hi] to within epsilon.
inline int bisection_eval_count(double lo, double hi, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("bisection: epsilon must be positive");
    if (!(hi > lo)) throw std::invalid_argument("bisection: requires hi > lo");
    const double n = std::ceil(std::log2((hi - lo) / epsilon));
    return n > 0.0 ? int(n) : 0;
}

/// Bisection with precomputed endpoint values. Spends exactly
/// ceil(log2((hi-lo)/epsilon)) evaluations of r, then returns the center of
/// the final bracket, so |t - t*| <= epsilon/2 for some root t*. Endpoints
/// that are exact roots are returned immediately without evaluations.
inline double bisection(const std::function<double(double)>& r, double lo, double hi,
                        double epsilon, double r_lo, double r_hi) {
    const int n = bisection_eval_count(lo, hi, epsilon);
    if (r_lo == 0.0) return lo;
    if (r_hi == 0.0) return hi;
    if ((r_lo > 0.0) == (r_hi > 0.0))
        throw std::invalid_argument("bisection: endpoints must have opposite signs");
    const bool lo_positive = r_lo > 0.0;
    for (int i = 0; i < n; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double rm = r(mid);
        if (rm == 0.0) return mid;
        if ((rm > 0.0) == lo_positive)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Convenience overload that evaluates the endpoints itself (two extra calls).
inline double bisection(const std::function<double(double)>& r, double lo, double hi,
                        double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("bisection: epsilon must be positive");
    if (!(hi > lo)) throw std::invalid_argument("bisection: requires hi > lo");
    return bisection(r, lo, hi, epsilon, r(lo), r(hi));
}

}  // namespace flagopt
