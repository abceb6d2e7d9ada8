#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>

#include "flagopt/bisection.hpp"
#include "flagopt/prox.hpp"
#include "flagopt/trace.hpp"

namespace flagopt {

/// Binary-search accuracy tied to the iteration budget: eps = 1/(6*d*T^3).
inline double flag_epsilon(Index d, int T) {
    const double t = double(T);
    return 1.0 / (6.0 * double(d) * t * t * t);
}

/// L_k = L * g^T S^-1 g = L * sum_i g(i)^2/(s(i)+delta) for the diagonal
/// metric. Strictly positive for unit g and positive definite S.
inline double effective_lipschitz(double L, const Vector& g, const MetricDiag& metric) {
    if (g.size() != metric.s.size())
        throw std::invalid_argument("effective_lipschitz: dimension mismatch");
    if (std::abs(g.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("effective_lipschitz: g must have unit 2-norm");
    // The quadratic form only touches coordinates in the support of g, so the
    // metric need only be positive there (delta = 0 is fine off-support).
    double sum = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        const double di = metric.s[i] + metric.delta;
        if (!(di > 0.0))
            throw std::invalid_argument(
                "effective_lipschitz: metric must be positive on the support of g");
        sum += gi * gi / di;
    }
    return L * sum;
}

/// Positive root of eta^2*Lk - eta - eta_prev^2*Lk_prev = 0, which maintains
/// eta_k^2 L_k = sum_i eta_i across iterations. With eta_prev = 0 this is
/// 1/Lk, the first-iteration stepsize.
inline double next_eta(double eta_prev, double Lk_prev, double Lk) {
    if (!(Lk > 0.0)) throw std::invalid_argument("next_eta: Lk must be positive");
    if (eta_prev < 0.0 || Lk_prev < 0.0)
        throw std::invalid_argument("next_eta: eta_prev and Lk_prev must be nonnegative");
    const double carry = eta_prev * eta_prev * Lk_prev;
    return 0.5 / Lk + std::sqrt(0.25 / (Lk * Lk) + carry / Lk);
}

/// q = ||s||_1, the sum of accumulated row norms.
inline double q_value(const Vector& s) {
    if ((s.array() < 0.0).any()) throw std::invalid_argument("q_value: s must be nonnegative");
    return s.lpNorm<1>();
}

struct BinarySearchResult {
    Vector x;
    int case_id = 0;  ///< 1: returned y, 2: returned z, 3: interior point
    double t = 0.0;   ///< combination weight, x = t*y + (1-t)*z
    int prox_calls = 0;
    bool prox_known = false;  ///< prox(x) was evaluated during the search
    Vector prox_at_x;
};

/// Finds the coupling point on the segment [z, y] via the sign of
/// r(t) = <prox(w) - w, y - z> at w = t*y + (1-t)*z:
///   r(1) >= 0 -> y;  r(0) <= 0 -> z;  otherwise a t in (0,1) with
///   |<prox(x) - x, y - z>| <= 3*||y-z||^2*epsilon.
/// The interior search localizes the sign change to a bracket of width at
/// most 2*epsilon; since prox is 2-Lipschitz, r moves by at most 2*||y-z||^2
/// per unit t, so the bracket center meets the residual bound. An early exit
/// returns the first probed point whose measured residual already qualifies,
/// which lets the caller reuse its prox evaluation.
inline BinarySearchResult binary_search_detailed(const CompositeProblem& problem, const Vector& z,
                                                 const Vector& y, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("binary_search: epsilon must be positive");
    if (y.size() != z.size()) throw std::invalid_argument("binary_search: dimension mismatch");
    BinarySearchResult out;
    const Vector dir = y - z;
    const double nsq = dir.squaredNorm();

    Vector py = prox(problem, y);
    ++out.prox_calls;
    if ((py - y).dot(dir) >= 0.0) {
        out.x = y;
        out.case_id = 1;
        out.t = 1.0;
        out.prox_known = true;
        out.prox_at_x = std::move(py);
        return out;
    }
    Vector pz = prox(problem, z);
    ++out.prox_calls;
    if ((pz - z).dot(dir) <= 0.0) {
        out.x = z;
        out.case_id = 2;
        out.t = 0.0;
        out.prox_known = true;
        out.prox_at_x = std::move(pz);
        return out;
    }

    const double bound = 3.0 * nsq * epsilon;
    const double depth_raw = std::ceil(std::log2(1.0 / epsilon)) - 1.0;
    const int depth = depth_raw > 0.0 ? int(depth_raw) : 0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < depth; ++i) {
        const double mid = 0.5 * (lo + hi);
        Vector xm = z + mid * dir;
        Vector pm = prox(problem, xm);
        ++out.prox_calls;
        const double rm = (pm - xm).dot(dir);
        if (std::abs(rm) <= bound) {
            out.x = std::move(xm);
            out.case_id = 3;
            out.t = mid;
            out.prox_known = true;
            out.prox_at_x = std::move(pm);
            return out;
        }
        if (rm > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    out.x = z + t * dir;
    out.case_id = 3;
    out.t = t;
    return out;
}

inline Vector binary_search(const CompositeProblem& problem, const Vector& z, const Vector& y,
                            double epsilon) {
    return binary_search_detailed(problem, z, y, epsilon).x;
}

struct FlagConfig {
    int T = 100;
    double delta = 1e-8;
    /// Early-exit threshold on ||p_k||_2; defaults to 1e-13*max(1, L).
    std::optional<double> stationary_tol;
    std::optional<Vector> x0;  ///< start point; defaults to project(0)
    bool record_trace = true;
    bool record_internals = false;
    /// Assert the per-iteration inequalities the analysis guarantees
    /// (stepsize recurrence, descent, coupling inequality, metric bounds).
    /// A violation throws std::logic_error: it means a bug, not bad data.
    bool runtime_checks = true;
};

/// Live optimizer state; one instance per run, never shared.
struct FlagState {
    int k = 0;
    Vector x, y, z;
    Vector accumulator;
    Vector s;
    double eta_prev = 0.0;
    double lk_prev = 0.0;
    double eta_sum = 0.0;
    double q = 0.0;
};

/// Start-of-iteration state plus the step quantities of one iteration,
/// recorded when FlagConfig::record_internals is set. Enough to replay every
/// per-iteration inequality offline.
struct FlagIterationInternals {
    Vector x, y, z;  ///< x_k, y_k, z_k entering the iteration
    Vector p;        ///< gradient mapping p_k
    Vector s;        ///< metric diagonal s_k (after the update)
    double eta = 0.0;
    double l_eff = 0.0;
    int case_id = 0;
    int prox_calls = 0;
};

struct FlagResult {
    Vector solution;  ///< y_{T+1}
    StepTrace trace;
    std::vector<FlagIterationInternals> internals;
    int iterations = 0;  ///< completed iterations (== T unless stationary exit)
    bool stationary_exit = false;
    long total_prox_calls = 0;
    int max_prox_calls_per_iter = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    Vector s_final;
    double q_final = 0.0;
    double eta_sum = 0.0;
    double sum_l_eff = 0.0;        ///< sum of L_k
    double sum_metric_form = 0.0;  ///< sum of g^T S^-1 g = sum_l_eff / L
    double eta_last = 0.0;
    double l_eff_last = 0.0;
};

namespace detail {

inline void runtime_assert(bool ok, const char* what, double lhs, double rhs) {
    if (ok) return;
    std::ostringstream msg;
    msg << "flag_run internal invariant violated: " << what << " (lhs=" << lhs
        << ", rhs=" << rhs << ")";
    throw std::logic_error(msg.str());
}

}  // namespace detail

/// One full run of the adaptively preconditioned linearly coupled method:
/// per iteration, a prox step from x_k, a normalized gradient mapping folded
/// into the diagonal metric, a mirror-descent step on z, and a binary search
/// along [z_{k+1}, y_{k+1}] for the next coupling point. Returns y_{T+1} and
/// the trace. Exits early when ||p_k|| certifies stationarity.
inline FlagResult flag_run(const CompositeProblem& problem, const FlagConfig& config) {
    if (config.T < 1) throw std::invalid_argument("flag_run: T must be >= 1");
    if (!(config.delta > 0.0)) throw std::invalid_argument("flag_run: delta must be positive");

    const double L = problem.lipschitz();
    const Index d = problem.dim();
    const int T = config.T;
    const double eps = flag_epsilon(d, T);
    const double stat_tol = config.stationary_tol.value_or(1e-13 * std::max(1.0, L));
    const Diameters diam = problem.set().diameters();
    const bool bounded = problem.set().bounded();
    const double check_atol = 1e-9, check_rtol = 1e-9;

    FlagResult out;
    out.epsilon = eps;
    out.delta = config.delta;

    FlagState st;
    st.x = config.x0 ? problem.set().project(*config.x0) : problem.set().project(Vector::Zero(d));
    st.y = st.x;
    st.z = st.x;
    st.accumulator = Vector::Zero(d);
    st.s = Vector::Zero(d);

    std::optional<Vector> cached_prox;  // prox(st.x) when the search evaluated it
    const auto t_start = std::chrono::steady_clock::now();

    for (st.k = 1; st.k <= T; ++st.k) {
        int iter_calls = 0;
        Vector y_next;
        if (cached_prox) {
            y_next = std::move(*cached_prox);
            cached_prox.reset();
        } else {
            y_next = prox(problem, st.x);
            ++iter_calls;
        }
        Vector p = -L * (y_next - st.x);
        const double p_norm = p.norm();
        if (!std::isfinite(p_norm))
            throw DivergenceError("flag_run: nonfinite gradient mapping", out.trace);
        if (p_norm <= stat_tol) {
            out.solution = std::move(y_next);
            out.stationary_exit = true;
            out.iterations = st.k - 1;
            out.total_prox_calls += iter_calls;
            out.s_final = st.s;
            out.q_final = st.q;
            out.eta_sum = st.eta_sum;
            out.eta_last = st.eta_prev;
            out.l_eff_last = st.lk_prev;
            return out;
        }

        const Vector g = p / p_norm;
        auto [acc_next, s_next] = metric_update(st.accumulator, g);
        st.accumulator = std::move(acc_next);
        st.s = std::move(s_next);
        MetricDiag metric{st.s, config.delta};
        const double q = q_value(st.s);
        const double l_eff = effective_lipschitz(L, g, metric);
        const double eta = next_eta(st.eta_prev, st.lk_prev, l_eff);
        const double eta_sum_next = st.eta_sum + eta;

        Vector z_next = mirror_step(st.z, p, eta, metric, problem.set());
        BinarySearchResult bs = binary_search_detailed(problem, z_next, y_next, eps);
        iter_calls += bs.prox_calls;
        if (bs.prox_known) cached_prox = std::move(bs.prox_at_x);

        const double f_y = problem.eval(y_next);
        if (!std::isfinite(f_y))
            throw DivergenceError("flag_run: nonfinite objective", out.trace);

        if (config.runtime_checks) {
            // Stepsize recurrence, parts i-iii.
            detail::runtime_assert(
                std::abs(eta * eta * l_eff - eta_sum_next) <= check_rtol * eta_sum_next,
                "eta_k^2 L_k = sum eta_i", eta * eta * l_eff, eta_sum_next);
            const double carry = st.eta_prev * st.eta_prev * st.lk_prev;
            detail::runtime_assert(
                std::abs(carry - eta * eta * l_eff + eta) <= check_rtol * (eta * eta * l_eff),
                "eta_{k-1}^2 L_{k-1} - eta_k^2 L_k + eta_k = 0", carry + eta, eta * eta * l_eff);
            detail::runtime_assert(eta * l_eff >= 1.0 - check_rtol, "eta_k L_k >= 1", eta * l_eff,
                                   1.0);
            // Metric growth stays inside the analysis window.
            const double kk = double(st.k);
            detail::runtime_assert(q >= std::sqrt(kk) - check_atol - check_rtol * q,
                                   "q_k >= sqrt(k)", q, std::sqrt(kk));
            detail::runtime_assert(q <= std::sqrt(double(d) * kk) + check_atol + check_rtol * q,
                                   "q_k <= sqrt(d k)", q, std::sqrt(double(d) * kk));
            // Prox step descent.
            const double f_x = problem.eval(st.x);
            const double descent_rhs =
                f_x - 0.5 * L * (st.x - y_next).squaredNorm() + check_atol +
                check_rtol * std::abs(f_x);
            detail::runtime_assert(f_y <= descent_rhs, "F(prox(x)) <= F(x) - L/2 ||x-prox(x)||^2",
                                   f_y, descent_rhs);
            // Coupling inequality for the point picked by the previous search.
            if (bounded) {
                const double lhs = p.dot(st.x - st.z);
                const double rhs = (eta * l_eff - 1.0) * p.dot(st.y - st.x) +
                                   diam.inf_sq * L * eta * l_eff / (double(T) * T * T);
                detail::runtime_assert(lhs <= rhs + check_atol + check_rtol * std::abs(rhs),
                                       "<p, x-z> <= (eta L_k - 1)<p, y-x> + D L eta L_k / T^3",
                                       lhs, rhs);
            }
        }

        if (config.record_internals) {
            FlagIterationInternals it;
            it.x = st.x;
            it.y = st.y;
            it.z = st.z;
            it.p = p;
            it.s = st.s;
            it.eta = eta;
            it.l_eff = l_eff;
            it.case_id = bs.case_id;
            it.prox_calls = iter_calls;
            out.internals.push_back(std::move(it));
        }

        out.total_prox_calls += iter_calls;
        if (iter_calls > out.max_prox_calls_per_iter) out.max_prox_calls_per_iter = iter_calls;
        out.sum_l_eff += l_eff;
        out.sum_metric_form += l_eff / L;

        if (config.record_trace) {
            IterateRecord row;
            row.k = st.k;
            row.f_val = f_y;
            row.eta = eta;
            row.l_eff = l_eff;
            row.q = q;
            row.prox_calls_cum = out.total_prox_calls;
            row.elapsed_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
            out.trace.rows.push_back(row);
        }

        st.x = std::move(bs.x);
        st.y = std::move(y_next);
        st.z = std::move(z_next);
        st.eta_prev = eta;
        st.lk_prev = l_eff;
        st.eta_sum = eta_sum_next;
        st.q = q;
    }

    out.solution = st.y;
    out.iterations = T;
    out.s_final = st.s;
    out.q_final = st.q;
    out.eta_sum = st.eta_sum;
    out.eta_last = st.eta_prev;
    out.l_eff_last = st.lk_prev;

    if (config.runtime_checks) {
        // Aggregated bounds; 1e-6 tolerance for T-summed quantities.
        detail::runtime_assert(out.sum_metric_form <= 2.0 * out.q_final + 1e-6,
                               "sum g^T S^-1 g <= 2 q_T", out.sum_metric_form, 2.0 * out.q_final);
        const double tt = double(T);
        detail::runtime_assert(
            out.eta_sum >= tt * tt * tt / (1000.0 * out.sum_l_eff) - 1e-6 * out.eta_sum,
            "sum eta_k >= T^3/(1000 sum L_k)", out.eta_sum,
            tt * tt * tt / (1000.0 * out.sum_l_eff));
    }
    return out;
}

}  // namespace flagopt
