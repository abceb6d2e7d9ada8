#pragma once

#include <chrono>
#include <cmath>
#include <optional>

#include "flagopt/prox.hpp"
#include "flagopt/trace.hpp"

namespace flagopt {

enum class BaselineAlgorithm { Ista, Fista, Adagrad, MirrorDescent };

struct BaselineConfig {
    BaselineAlgorithm algorithm = BaselineAlgorithm::Ista;
    int T = 100;
    /// Adagrad: step = step_scale (metric absorbs the 1/sqrt(k) decay);
    /// mirror descent: step = step_scale/sqrt(k). Defaults: sqrt(D) for
    /// adagrad; mirror descent uses the online schedule
    /// sqrt(D_2 / sum_j ||grad_j||^2) when unset.
    std::optional<double> step_scale;
    double delta = 1e-8;           ///< adagrad metric floor
    bool average_output = true;    ///< adagrad/mirror: return uniform iterate average
    std::optional<Vector> x0;      ///< start point; defaults to project(0)
    bool record_trace = true;
    bool record_iterates = false;  ///< keep every iterate (tests only; O(dT) memory)
};

struct BaselineResult {
    Vector solution;
    StepTrace trace;
    std::vector<double> aux;  ///< per-iteration schedule scalar (t_k / step size)
    std::vector<Vector> iterates;
    int iterations = 0;
};

namespace detail {

inline void baseline_validate(const BaselineConfig& config) {
    if (config.T < 1) throw std::invalid_argument("baseline: T must be >= 1");
    if (config.step_scale && !(*config.step_scale > 0.0))
        throw std::invalid_argument("baseline: step_scale must be positive");
}

inline Vector baseline_start(const CompositeProblem& problem, const BaselineConfig& config) {
    if (config.x0) return problem.set().project(*config.x0);
    return problem.set().project(Vector::Zero(problem.dim()));
}

inline void baseline_record(BaselineResult& out, const BaselineConfig& config, int k, double f_val,
                            double eta, double l_eff, double q, long prox_calls,
                            const std::chrono::steady_clock::time_point& t_start) {
    if (!std::isfinite(f_val))
        throw DivergenceError("baseline: nonfinite objective", out.trace);
    if (!config.record_trace) return;
    IterateRecord row;
    row.k = k;
    row.f_val = f_val;
    row.eta = eta;
    row.l_eff = l_eff;
    row.q = q;
    row.prox_calls_cum = prox_calls;
    row.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    out.trace.rows.push_back(row);
}

/// A deterministic subgradient of F: grad f + lambda * sign(x), sign(0) = 0.
inline Vector subgradient(const CompositeProblem& problem, const Vector& x) {
    Vector g = problem.smooth_grad(x);
    if (problem.nonsmooth().kind() == NonsmoothKind::L1) {
        const double lam = problem.nonsmooth().weight();
        for (Index i = 0; i < x.size(); ++i) {
            if (x[i] > 0.0)
                g[i] += lam;
            else if (x[i] < 0.0)
                g[i] -= lam;
        }
    }
    return g;
}

}  // namespace detail

/// Proximal gradient: x_{k+1} = prox(x_k). Monotone in F.
inline BaselineResult ista_run(const CompositeProblem& problem, const BaselineConfig& config) {
    detail::baseline_validate(config);
    const auto t_start = std::chrono::steady_clock::now();
    BaselineResult out;
    Vector x = detail::baseline_start(problem, config);
    const double L = problem.lipschitz();
    for (int k = 1; k <= config.T; ++k) {
        x = prox(problem, x);
        if (config.record_iterates) out.iterates.push_back(x);
        detail::baseline_record(out, config, k, problem.eval(x), 1.0 / L, L, 0.0, k, t_start);
    }
    out.solution = std::move(x);
    out.iterations = config.T;
    return out;
}

/// Accelerated proximal gradient with the classical momentum sequence
/// t_{k+1} = (1 + sqrt(1 + 4 t_k^2))/2. Not monotone in F.
inline BaselineResult fista_run(const CompositeProblem& problem, const BaselineConfig& config) {
    detail::baseline_validate(config);
    const auto t_start = std::chrono::steady_clock::now();
    BaselineResult out;
    const double L = problem.lipschitz();
    Vector x_prev = detail::baseline_start(problem, config);
    Vector w = x_prev;  // extrapolated query point
    double t = 1.0;
    for (int k = 1; k <= config.T; ++k) {
        Vector x = prox(problem, w);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        w = x + ((t - 1.0) / t_next) * (x - x_prev);
        out.aux.push_back(t);
        t = t_next;
        x_prev = std::move(x);
        if (config.record_iterates) out.iterates.push_back(x_prev);
        detail::baseline_record(out, config, k, problem.eval(x_prev), 1.0 / L, L, 0.0, k,
                                t_start);
    }
    out.solution = std::move(x_prev);
    out.iterations = config.T;
    return out;
}

/// Projected diagonal-metric subgradient descent: the metric accumulates
/// squared subgradients coordinatewise, H_k = diag(sqrt(acc)) + delta*I, and
/// x_{k+1} = project(x_k - step_scale * H_k^-1 grad_k). Requires a bounded
/// set; the default step is sqrt(D). With average_output the reported iterate
/// is the uniform average of the query points.
inline BaselineResult adagrad_run(const CompositeProblem& problem, const BaselineConfig& config) {
    detail::baseline_validate(config);
    if (!problem.set().bounded())
        throw std::invalid_argument("adagrad_run: requires a bounded feasible set");
    if (!(config.delta > 0.0))
        throw std::invalid_argument("adagrad_run: delta must be positive");
    const auto t_start = std::chrono::steady_clock::now();
    const double step = config.step_scale.value_or(std::sqrt(problem.set().diameters().inf_sq));
    BaselineResult out;
    Vector x = detail::baseline_start(problem, config);
    Vector acc = Vector::Zero(problem.dim());
    Vector avg = Vector::Zero(problem.dim());
    for (int k = 1; k <= config.T; ++k) {
        const Vector grad = detail::subgradient(problem, x);
        acc += grad.cwiseAbs2();
        const Vector h = acc.cwiseSqrt();
        avg += (x - avg) / double(k);
        Vector x_next =
            problem.set().project(x - step * (grad.array() / (h.array() + config.delta)).matrix());
        out.aux.push_back(step);
        x = std::move(x_next);
        if (config.record_iterates) out.iterates.push_back(x);
        const Vector& report = config.average_output ? avg : x;
        detail::baseline_record(out, config, k, problem.eval(report), step, problem.lipschitz(),
                                h.lpNorm<1>(), 0, t_start);
        if (k == config.T) out.solution = report;
    }
    out.iterations = config.T;
    return out;
}

/// Projected subgradient descent with a 1/sqrt(k) schedule (Euclidean mirror
/// descent). Requires a bounded set. Without an explicit step_scale the
/// schedule is the online-tuned sqrt(D_2 / sum_j ||grad_j||^2).
inline BaselineResult mirror_descent_run(const CompositeProblem& problem,
                                         const BaselineConfig& config) {
    detail::baseline_validate(config);
    if (!problem.set().bounded())
        throw std::invalid_argument("mirror_descent_run: requires a bounded feasible set");
    const auto t_start = std::chrono::steady_clock::now();
    const double d2 = problem.set().diameters().two_sq;
    BaselineResult out;
    Vector x = detail::baseline_start(problem, config);
    Vector avg = Vector::Zero(problem.dim());
    double grad_sq_sum = 0.0;
    for (int k = 1; k <= config.T; ++k) {
        const Vector grad = detail::subgradient(problem, x);
        grad_sq_sum += grad.squaredNorm();
        double eta;
        if (config.step_scale)
            eta = *config.step_scale / std::sqrt(double(k));
        else
            eta = grad_sq_sum > 0.0 ? std::sqrt(d2 / grad_sq_sum)
                                    : std::sqrt(d2);
        avg += (x - avg) / double(k);
        Vector x_next = problem.set().project(x - eta * grad);
        out.aux.push_back(eta);
        x = std::move(x_next);
        if (config.record_iterates) out.iterates.push_back(x);
        const Vector& report = config.average_output ? avg : x;
        detail::baseline_record(out, config, k, problem.eval(report), eta, problem.lipschitz(),
                                0.0, 0, t_start);
        if (k == config.T) out.solution = report;
    }
    out.iterations = config.T;
    return out;
}

inline BaselineResult run_baseline(const CompositeProblem& problem, const BaselineConfig& config) {
    switch (config.algorithm) {
        case BaselineAlgorithm::Ista: return ista_run(problem, config);
        case BaselineAlgorithm::Fista: return fista_run(problem, config);
        case BaselineAlgorithm::Adagrad: return adagrad_run(problem, config);
        case BaselineAlgorithm::MirrorDescent: return mirror_descent_run(problem, config);
    }
    throw std::invalid_argument("run_baseline: unknown algorithm");
}

}  // namespace flagopt
