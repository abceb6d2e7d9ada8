#pragma once

#include <cmath>
#include <utility>

#include "flagopt/problem.hpp"

namespace flagopt {

/// Diagonal metric S = diag(s) + delta*I. s holds the row norms of the
/// accumulated normalized gradient-mapping matrix; it is never materialized as
/// a matrix. s is coordinatewise nondecreasing across updates.
struct MetricDiag {
    Vector s;
    double delta = 0.0;

    MetricDiag() = default;
    MetricDiag(Vector s_, double delta_) : s(std::move(s_)), delta(delta_) {
        if ((s.array() < 0.0).any())
            throw std::invalid_argument("MetricDiag: s must be nonnegative");
    }

    bool positive_definite() const { return (s.array() + delta > 0.0).all(); }
};

/// prox(x) = argmin_{y in C} h(y) + L/2 ||y - (x - grad f(x)/L)||^2, exact:
/// soft-threshold (for h = lambda*||.||_1) then clamp. Exactness relies on h
/// and the box both being separable.
inline Vector prox(const CompositeProblem& problem, const Vector& x) {
    const double L = problem.lipschitz();
    Vector v = x - problem.smooth_grad(x) / L;
    if (problem.nonsmooth().kind() == NonsmoothKind::L1) {
        const double t = problem.nonsmooth().weight() / L;
        v = v.unaryExpr([t](double a) {
            if (a > t) return a - t;
            if (a < -t) return a + t;
            return 0.0;
        });
    }
    return problem.set().project(std::move(v));
}

/// Gradient mapping p = -L*(prox(x) - x). Zero exactly at constrained optima;
/// equals grad f(x) when h = 0 on the full space.
inline Vector gradient_mapping(const CompositeProblem& problem, const Vector& x) {
    return -problem.lipschitz() * (prox(problem, x) - x);
}

/// One mirror-descent step in the diagonal metric:
/// argmin_{z' in C} <eta*p, z' - z> + 1/2 ||z' - z||_S^2, solved in closed
/// form coordinatewise: clamp(z_i - eta*p_i/(s_i + delta)).
inline Vector mirror_step(const Vector& z, const Vector& p, double eta, const MetricDiag& metric,
                          const FeasibleSet& set) {
    if (!(eta > 0.0)) throw std::invalid_argument("mirror_step: eta must be positive");
    if (z.size() != p.size() || z.size() != metric.s.size())
        throw std::invalid_argument("mirror_step: dimension mismatch");
    if (!metric.positive_definite())
        throw std::invalid_argument("mirror_step: metric must be positive definite");
    Vector out = z - eta * (p.array() / (metric.s.array() + metric.delta)).matrix();
    return set.project(std::move(out));
}

/// Folds one normalized gradient mapping g into the squared-row-norm
/// accumulator: accumulator'(i) = accumulator(i) + g(i)^2, s(i) =
/// sqrt(accumulator'(i)). Equivalent to the row norms of the growing matrix
/// [g_1, ..., g_k] without storing it. Requires ||g||_2 = 1 up to 1e-9.
inline std::pair<Vector, Vector> metric_update(const Vector& accumulator, const Vector& g) {
    if (accumulator.size() != g.size())
        throw std::invalid_argument("metric_update: dimension mismatch");
    if (std::abs(g.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("metric_update: g must have unit 2-norm");
    Vector acc = accumulator + g.cwiseAbs2();
    Vector s = acc.cwiseSqrt();
    return {std::move(acc), std::move(s)};
}

}  // namespace flagopt
