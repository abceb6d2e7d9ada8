#pragma once

#include <cmath>

#include "flagopt/baselines.hpp"
#include "flagopt/prox.hpp"

namespace flagopt {

struct ReferenceSolution {
    double f_star = 0.0;
    Vector x;                 ///< best iterate found
    double residual_inf = 0.0;  ///< ||x - prox(x)||_inf at the final iterate
    long iterations = 0;
};

/// High-accuracy optimum estimate: ref_iters of the accelerated method, then
/// ref_iters/10 plain prox-descent steps to polish (the accelerated method is
/// not monotone near the floor). Tracks the best F over everything evaluated.
inline ReferenceSolution reference_optimum(const CompositeProblem& problem, long ref_iters) {
    if (ref_iters < 1) throw std::invalid_argument("reference_optimum: ref_iters must be >= 1");
    ReferenceSolution out;
    Vector x_prev = problem.set().project(Vector::Zero(problem.dim()));
    Vector w = x_prev;
    double t = 1.0;
    out.x = x_prev;
    out.f_star = problem.eval(x_prev);

    auto consider = [&](const Vector& candidate) {
        const double f = problem.eval(candidate);
        if (!std::isfinite(f))
            throw DivergenceError("reference_optimum: nonfinite objective", StepTrace{});
        if (f < out.f_star) {
            out.f_star = f;
            out.x = candidate;
        }
    };

    for (long k = 0; k < ref_iters; ++k) {
        Vector x = prox(problem, w);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        w = x + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;
        x_prev = std::move(x);
        consider(x_prev);
    }
    Vector x = out.x;  // polish from the best point seen, not the last momentum iterate
    for (long k = 0; k < ref_iters / 10; ++k) {
        x = prox(problem, x);
        consider(x);
    }
    out.residual_inf = (out.x - prox(problem, out.x)).lpNorm<Eigen::Infinity>();
    out.iterations = ref_iters + ref_iters / 10;
    return out;
}

}  // namespace flagopt
