#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "flagopt/feasible_set.hpp"
#include "flagopt/types.hpp"

namespace flagopt {

enum class NonsmoothKind { Zero, L1 };

/// The nonsmooth part h of the objective: either h = 0 or h = lambda*||.||_1.
/// Both are separable across coordinates, which keeps the prox exact.
class NonsmoothPart {
public:
    static NonsmoothPart zero() { return NonsmoothPart(NonsmoothKind::Zero, 0.0); }

    static NonsmoothPart l1(double weight) {
        if (!(weight >= 0.0))
            throw std::invalid_argument("NonsmoothPart::l1: weight must be nonnegative");
        return NonsmoothPart(weight == 0.0 ? NonsmoothKind::Zero : NonsmoothKind::L1, weight);
    }

    NonsmoothKind kind() const { return kind_; }
    double weight() const { return weight_; }

    double value(const Vector& x) const {
        return kind_ == NonsmoothKind::L1 ? weight_ * x.lpNorm<1>() : 0.0;
    }

private:
    NonsmoothPart(NonsmoothKind k, double w) : kind_(k), weight_(w) {}

    NonsmoothKind kind_;
    double weight_;
};

enum class SmoothKind { Quadratic, Logistic };

namespace detail {

/// Largest eigenvalue of A^T A by power iteration on the Gram operator.
/// Deterministic start vector; stops when the Rayleigh quotient is stable to
/// rel_tol. Throws ConvergenceError (carrying the last estimate) at the cap.
inline double spectral_norm_sq(const Matrix& A, double rel_tol, int max_iters = 20000) {
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("spectral_norm_sq: rel_tol must be positive");
    const Index d = A.cols();
    Vector v(d);
    for (Index i = 0; i < d; ++i) v[i] = 1.0 + 0.5 * double(i) / double(d > 1 ? d : 1);
    v.normalize();

    double lambda = 0.0;
    double prev_change = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        Vector w = A.transpose() * (A * v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;  // A annihilates the iterate: A = 0 on its span
        const double lambda_new = v.dot(w);
        v = w / nw;
        const double change = std::abs(lambda_new - lambda);
        if (it > 0) {
            // The Rayleigh quotient converges geometrically; extrapolate the
            // remaining error as change * rho/(1-rho) from the observed ratio
            // so the rel_tol contract is on the true error, not the step.
            if (change <= 1e-13 * lambda_new) return lambda_new;
            const double rho = change / prev_change;
            if (rho < 1.0 && change * rho / (1.0 - rho) <= rel_tol * lambda_new)
                return lambda_new;
        }
        prev_change = change;
        lambda = lambda_new;
    }
    throw ConvergenceError("spectral_norm_sq: power iteration did not converge", lambda,
                           max_iters);
}

}  // namespace detail

/// Composite objective F(x) = f(x) + h(x) over a feasible set C, with
///   f(x) = 1/2 ||Ax - b||_2^2           (Quadratic), or
///   f(x) = sum_i log(1 + exp(-b_i a_i^T x))  (Logistic, labels b_i in {-1,+1}).
/// The stored Lipschitz constant is the power-iteration estimate of the true
/// gradient Lipschitz constant times a 1.01 safety factor, fixed at
/// construction. Immutable afterwards; concurrent reads are safe.
class CompositeProblem {
public:
    static CompositeProblem least_squares(Matrix A, Vector b, NonsmoothPart h, FeasibleSet set) {
        return CompositeProblem(SmoothKind::Quadratic, std::move(A), std::move(b), h,
                                std::move(set));
    }

    static CompositeProblem logistic(Matrix A, Vector labels, NonsmoothPart h, FeasibleSet set) {
        if (!((labels.array() == 1.0) || (labels.array() == -1.0)).all())
            throw std::invalid_argument("CompositeProblem::logistic: labels must be +-1");
        return CompositeProblem(SmoothKind::Logistic, std::move(A), std::move(labels), h,
                                std::move(set));
    }

    Index dim() const { return A_.cols(); }
    SmoothKind smooth_kind() const { return smooth_; }
    const Matrix& data_matrix() const { return A_; }
    const Vector& data_vector() const { return b_; }
    const NonsmoothPart& nonsmooth() const { return h_; }
    const FeasibleSet& set() const { return set_; }

    /// Safety-adjusted L used by all algorithm steps.
    double lipschitz() const { return lipschitz_; }

    double smooth_value(const Vector& x) const {
        check_dim(x);
        if (smooth_ == SmoothKind::Quadratic) return 0.5 * (A_ * x - b_).squaredNorm();
        // log(1 + exp(t)) evaluated stably for t = -label * margin
        const Vector m = A_ * x;
        double total = 0.0;
        for (Index i = 0; i < m.size(); ++i) {
            const double t = -b_[i] * m[i];
            total += t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
        }
        return total;
    }

    Vector smooth_grad(const Vector& x) const {
        check_dim(x);
        if (smooth_ == SmoothKind::Quadratic) return A_.transpose() * (A_ * x - b_);
        const Vector m = A_ * x;
        Vector w(m.size());
        for (Index i = 0; i < m.size(); ++i) {
            const double t = -b_[i] * m[i];
            const double sig = t > 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
            w[i] = -b_[i] * sig;
        }
        return A_.transpose() * w;
    }

    /// F(x) = f(x) + h(x).
    double eval(const Vector& x) const { return smooth_value(x) + h_.value(x); }

    /// Copy with the stored L replaced. Intended for negative controls in the
    /// lemma checks; no validation beyond positivity.
    CompositeProblem with_lipschitz(double L) const {
        if (!(L > 0.0))
            throw std::invalid_argument("with_lipschitz: L must be positive");
        CompositeProblem p(*this);
        p.lipschitz_ = L;
        return p;
    }

private:
    CompositeProblem(SmoothKind smooth, Matrix A, Vector b, NonsmoothPart h, FeasibleSet set)
        : smooth_(smooth), A_(std::move(A)), b_(std::move(b)), h_(h), set_(std::move(set)) {
        if (A_.rows() != b_.size())
            throw std::invalid_argument("CompositeProblem: A rows must match b length");
        if (set_.dim() != A_.cols())
            throw std::invalid_argument("CompositeProblem: set dimension must match A columns");
        if (A_.cols() < 1) throw std::invalid_argument("CompositeProblem: dimension must be >= 1");
        double est = detail::spectral_norm_sq(A_, 1e-6);
        if (smooth_ == SmoothKind::Logistic) est *= 0.25;
        if (!(est > 0.0))
            throw std::invalid_argument("CompositeProblem: smooth part has zero curvature bound");
        lipschitz_ = 1.01 * est;
    }

    void check_dim(const Vector& x) const {
        if (x.size() != dim()) throw std::invalid_argument("CompositeProblem: dimension mismatch");
    }

    SmoothKind smooth_;
    Matrix A_;
    Vector b_;
    NonsmoothPart h_;
    FeasibleSet set_;
    double lipschitz_ = 0.0;
};

/// F(x) = f(x) + h(x). Free-function spelling of CompositeProblem::eval.
inline double eval_F(const CompositeProblem& problem, const Vector& x) {
    return problem.eval(x);
}

/// Fresh power-iteration estimate of the gradient Lipschitz constant
/// (quadratic: sigma_max(A)^2; logistic: sigma_max(A)^2/4). Returns the raw
/// estimate; the CompositeProblem constructor applies the 1.01 safety factor
/// to what it stores.
inline double estimate_lipschitz(const CompositeProblem& problem, double rel_tol) {
    double est = detail::spectral_norm_sq(problem.data_matrix(), rel_tol);
    if (problem.smooth_kind() == SmoothKind::Logistic) est *= 0.25;
    return est;
}

}  // namespace flagopt
