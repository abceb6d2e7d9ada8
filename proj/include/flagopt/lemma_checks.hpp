#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flagopt/flag.hpp"
#include "flagopt/prox.hpp"

namespace flagopt {

/// Outcome of one sampling-based lemma check. worst_margin is the most
/// negative slack (rhs - lhs in the inequality's natural scale) seen across
/// trials; a passing report has violations == 0.
struct CheckReport {
    std::string name;
    long trials = 0;
    long violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    bool skipped = false;

    void record(double margin, double tolerance) {
        ++trials;
        if (margin < worst_margin) worst_margin = margin;
        if (margin < -tolerance) ++violations;
    }
};

namespace detail {

constexpr double kCheckAtol = 1e-9;
constexpr double kCheckRtol = 1e-9;
constexpr double kCheckAggTol = 1e-6;  // for quantities summed over T iterations

/// h evaluated from its definition, bypassing NonsmoothPart::value.
inline double nonsmooth_oracle(const CompositeProblem& problem, const Vector& x) {
    if (problem.nonsmooth().kind() == NonsmoothKind::Zero) return 0.0;
    double total = 0.0;
    for (Index i = 0; i < x.size(); ++i) total += std::abs(x[i]);
    return problem.nonsmooth().weight() * total;
}

inline double objective_oracle(const CompositeProblem& problem, const Vector& x) {
    return problem.smooth_value(x) + nonsmooth_oracle(problem, x);
}

}  // namespace detail

/// F(prox(x)) <= F(y) + <L(prox(x)-x), y-x> - L/2 ||x - prox(x)||^2 on
/// sampled feasible pairs. Every tenth trial sets y = x, which reduces the
/// statement to the plain descent inequality.
inline CheckReport check_gradient_mapping(const CompositeProblem& problem, int trials,
                                          std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_gradient_mapping: trials must be >= 1");
    CheckReport report;
    report.name = "gradient_mapping";
    std::mt19937_64 rng(seed);
    const double L = problem.lipschitz();
    for (int trial = 0; trial < trials; ++trial) {
        const Vector x = problem.set().sample(rng);
        const Vector y = trial % 10 == 0 ? x : problem.set().sample(rng);
        const Vector px = prox(problem, x);
        const double lhs = detail::objective_oracle(problem, px);
        const double rhs = detail::objective_oracle(problem, y) +
                           L * (px - x).dot(y - x) - 0.5 * L * (x - px).squaredNorm();
        report.record(rhs - lhs, detail::kCheckAtol + detail::kCheckRtol * std::abs(rhs));
    }
    return report;
}

/// ||prox(x) - prox(y)||_2 <= 2 ||x - y||_2 on sampled feasible pairs.
inline CheckReport check_prox_lipschitz(const CompositeProblem& problem, int trials,
                                        std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_prox_lipschitz: trials must be >= 1");
    CheckReport report;
    report.name = "prox_lipschitz";
    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        const Vector x = problem.set().sample(rng);
        const Vector y = trial % 10 == 0 ? x : problem.set().sample(rng);
        const double lhs = (prox(problem, x) - prox(problem, y)).norm();
        const double rhs = 2.0 * (x - y).norm();
        report.record(rhs - lhs, detail::kCheckAtol + detail::kCheckRtol * rhs);
    }
    return report;
}

/// The closed-form trace-1 diagonal metric s*(i) = sqrt(a_i)/sum_j sqrt(a_j),
/// a(i) = sum_k g_k(i)^2, attains sum_k g^T S^-1 g = (sum_i sqrt(a_i))^2 and
/// dominates `candidates` random trace-`metric_trace` diagonal metrics.
/// Coordinates with a(i) = 0 are excluded (their optimal weight is zero and
/// they contribute nothing). metric_trace > 1 is a deliberate corruption: it
/// admits metrics outside the feasible class that beat the closed form.
inline CheckReport check_min_diag_metric(const std::vector<Vector>& g_list, int candidates = 1000,
                                         std::uint64_t seed = 12345,
                                         double metric_trace = 1.0) {
    if (g_list.empty())
        throw std::invalid_argument("check_min_diag_metric: g_list must be nonempty");
    const Index d = g_list.front().size();
    for (const auto& g : g_list) {
        if (g.size() != d)
            throw std::invalid_argument("check_min_diag_metric: inconsistent dimensions");
        if (std::abs(g.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("check_min_diag_metric: g must have unit 2-norm");
    }
    CheckReport report;
    report.name = "min_diag_metric";

    Vector a = Vector::Zero(d);
    for (const auto& g : g_list) a += g.cwiseAbs2();
    const double root_sum = a.cwiseSqrt().sum();
    const double q_sq = root_sum * root_sum;

    // Value at the closed form: sum over active coordinates of a_i/s*_i.
    double closed_form = 0.0;
    for (Index i = 0; i < d; ++i)
        if (a[i] > 0.0) closed_form += a[i] / (std::sqrt(a[i]) / root_sum);
    report.record(detail::kCheckAtol + detail::kCheckRtol * q_sq - std::abs(closed_form - q_sq),
                  0.0);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(1e-3, 1.0);
    for (int c = 0; c < candidates; ++c) {
        Vector s(d);
        for (Index i = 0; i < d; ++i) s[i] = unit(rng);
        s *= metric_trace / s.sum();
        double value = 0.0;
        for (Index i = 0; i < d; ++i) value += a[i] / s[i];
        report.record(value - q_sq, detail::kCheckAtol + detail::kCheckRtol * q_sq);
    }
    return report;
}

/// Replays the stepsize recurrence over a given positive L sequence through
/// an independent algebraic route (eta_k from the accumulated stepsize sum,
/// long double arithmetic) and asserts: (i) eta_k^2 L_k = sum eta_i, (ii) the
/// telescoping identity, (iii) eta_k L_k >= 1, the lower bound sum eta >=
/// T^3/(constant * sum L), and agreement with next_eta to 1e-12 relative.
/// Shrinking sum_bound_constant below 1000 is the negative control.
inline CheckReport check_eta_chain(const std::vector<double>& L_list,
                                   double sum_bound_constant = 1000.0) {
    if (L_list.empty()) throw std::invalid_argument("check_eta_chain: L_list must be nonempty");
    for (double l : L_list)
        if (!(l > 0.0)) throw std::invalid_argument("check_eta_chain: entries must be positive");
    CheckReport report;
    report.name = "eta_chain";

    long double eta_sum = 0.0L;
    long double eta_prev = 0.0L, lk_prev = 0.0L;
    double eta_lib_prev = 0.0, lk_lib_prev = 0.0;
    for (double lk : L_list) {
        // Positive root of eta^2 * lk - eta - eta_sum = 0 via the stable form.
        const long double disc = std::sqrt(1.0L + 4.0L * (long double)lk * eta_sum);
        const long double eta = (1.0L + disc) / (2.0L * (long double)lk);
        eta_sum += eta;

        const double part_i_resid = double(std::abs(eta * eta * (long double)lk - eta_sum));
        report.record(detail::kCheckRtol * double(eta_sum) - part_i_resid, 0.0);
        const double part_ii_resid =
            double(std::abs(eta_prev * eta_prev * lk_prev - eta * eta * (long double)lk + eta));
        report.record(detail::kCheckRtol * double(eta * eta * (long double)lk) - part_ii_resid,
                      0.0);
        report.record(double(eta * (long double)lk) - 1.0, detail::kCheckRtol);

        const double eta_lib = next_eta(eta_lib_prev, lk_lib_prev, lk);
        report.record(1e-12 - std::abs(eta_lib - double(eta)) / double(eta), 0.0);
        eta_lib_prev = eta_lib;
        lk_lib_prev = lk;
        eta_prev = eta;
        lk_prev = lk;
    }

    long double l_sum = 0.0L;
    for (double l : L_list) l_sum += l;
    const double t = double(L_list.size());
    const double bound = t * t * t / (sum_bound_constant * double(l_sum));
    report.record(double(eta_sum) - bound, detail::kCheckAggTol * double(eta_sum));
    return report;
}

/// Runs the coupling search on sampled feasible (y, z) pairs and verifies by
/// direct prox evaluation that the returned point lands in exactly one of the
/// three cases: x = y with r(1) >= 0, x = z with r(1) < 0 <= -r(0), or an
/// interior x with |<prox(x)-x, y-z>| <= 3 ||y-z||^2 * assert_epsilon.
/// Passing assert_epsilon < search epsilon is the negative control.
inline CheckReport check_binary_search(const CompositeProblem& problem, int trials,
                                       std::uint64_t seed, double epsilon = 1e-6,
                                       std::optional<double> assert_epsilon = std::nullopt) {
    if (trials < 1) throw std::invalid_argument("check_binary_search: trials must be >= 1");
    CheckReport report;
    report.name = "binary_search";
    const double eps_assert = assert_epsilon.value_or(epsilon);
    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        const Vector y = problem.set().sample(rng);
        const Vector z = trial % 10 == 0 ? y : problem.set().sample(rng);
        const Vector dir = y - z;
        const double nsq = dir.squaredNorm();
        const Vector x = binary_search(problem, z, y, epsilon);
        const auto r_at = [&](const Vector& w) { return (prox(problem, w) - w).dot(dir); };
        if (x == y) {
            report.record(r_at(y), detail::kCheckAtol);
        } else if (x == z) {
            const double margin = std::min(-r_at(z), -r_at(y));  // r(0) <= 0 and r(1) < 0
            report.record(margin, detail::kCheckAtol);
        } else {
            const double resid = std::abs((prox(problem, x) - x).dot(dir));
            report.record(3.0 * nsq * eps_assert - resid,
                          detail::kCheckAtol + detail::kCheckRtol * nsq);
        }
    }
    return report;
}

/// Verifies, for sampled feasible u, the summed mirror-descent bound
///   sum_k <eta_k p_k, z_k - u>
///     <= sum_k (eta_k^2/2) p_k^T (diag(s_k) + delta I)^-1 p_k + (D/2)||s_T||_1
/// over the recorded iterations of a completed run. The first two samples are
/// the witnesses u = z_1 and u = final solution. Skipped (with the flag set)
/// when D is infinite. diameter_override replaces D; forcing it to 0 is the
/// negative control.
inline CheckReport check_mirror_descent_inequality(const CompositeProblem& problem,
                                                   const FlagResult& run, int u_samples,
                                                   std::uint64_t seed,
                                                   std::optional<double> diameter_override =
                                                       std::nullopt) {
    CheckReport report;
    report.name = "mirror_descent_inequality";
    if (!problem.set().bounded() && !diameter_override) {
        report.skipped = true;
        return report;
    }
    if (run.internals.empty())
        throw std::invalid_argument(
            "check_mirror_descent_inequality: run must record internals");
    const double d_inf = diameter_override.value_or(problem.set().diameters().inf_sq);
    const double s_term = 0.5 * d_inf * run.s_final.lpNorm<1>();

    // u-independent quadratic term, accumulated once.
    double quad = 0.0;
    for (const auto& it : run.internals) {
        const double dual_sq =
            (it.p.cwiseAbs2().array() / (it.s.array() + run.delta)).sum();
        quad += 0.5 * it.eta * it.eta * dual_sq;
    }

    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < u_samples; ++trial) {
        Vector u;
        if (trial == 0)
            u = run.internals.front().z;
        else if (trial == 1)
            u = run.solution;
        else
            u = problem.set().sample(rng);
        double lhs = 0.0;
        for (const auto& it : run.internals) lhs += it.eta * it.p.dot(it.z - u);
        const double rhs = quad + s_term;
        report.record(rhs - lhs, detail::kCheckAggTol * std::max(1.0, std::abs(rhs)));
    }
    return report;
}

}  // namespace flagopt
