#pragma once

#include <cmath>
#include <limits>
#include <random>

#include "flagopt/types.hpp"

namespace flagopt {

enum class SetKind { FullSpace, Box };

/// Squared diameters of a feasible set. Infinite for unbounded sets.
struct Diameters {
    double inf_sq;  ///< sup_{x,y in C} ||x - y||_inf^2
    double two_sq;  ///< sup_{x,y in C} ||x - y||_2^2
};

/// The constraint set C: either all of R^d or an axis-aligned box
/// [lower_1, upper_1] x ... x [lower_d, upper_d].
class FeasibleSet {
public:
    /// C = R^d.
    static FeasibleSet full_space(Index dim) {
        FeasibleSet s;
        s.kind_ = SetKind::FullSpace;
        s.dim_ = dim;
        return s;
    }

    /// Axis-aligned box with per-coordinate bounds. Requires lower <= upper
    /// coordinatewise and matching lengths.
    static FeasibleSet box(Vector lower, Vector upper) {
        if (lower.size() != upper.size())
            throw std::invalid_argument("FeasibleSet::box: bound length mismatch");
        if ((lower.array() > upper.array()).any())
            throw std::invalid_argument("FeasibleSet::box: lower bound exceeds upper bound");
        FeasibleSet s;
        s.kind_ = SetKind::Box;
        s.dim_ = lower.size();
        s.lower_ = std::move(lower);
        s.upper_ = std::move(upper);
        return s;
    }

    /// Uniform box [lo, hi]^dim.
    static FeasibleSet box(Index dim, double lo, double hi) {
        return box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
    }

    SetKind kind() const { return kind_; }
    Index dim() const { return dim_; }
    bool bounded() const { return kind_ == SetKind::Box; }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

    /// Euclidean projection onto C. Identity for the full space; for a box,
    /// the coordinatewise clamp (also the projection in any diagonal metric).
    Vector project(Vector x) const {
        check_dim(x.size());
        if (kind_ == SetKind::Box)
            x = x.cwiseMax(lower_).cwiseMin(upper_);
        return x;
    }

    bool contains(const Vector& x, double tol = 0.0) const {
        check_dim(x.size());
        if (kind_ == SetKind::FullSpace) return true;
        return (x.array() >= lower_.array() - tol).all() &&
               (x.array() <= upper_.array() + tol).all();
    }

    /// D = sup ||x-y||_inf^2 and D_2 = sup ||x-y||_2^2 over C x C.
    Diameters diameters() const {
        if (kind_ == SetKind::FullSpace) {
            const double inf = std::numeric_limits<double>::infinity();
            return {inf, inf};
        }
        const Vector w = upper_ - lower_;
        const double side = w.maxCoeff();
        return {side * side, w.squaredNorm()};
    }

    /// Uniform sample from a box; for the full space, i.i.d. N(0, 9) noise
    /// (used only by sampling-based checks, which need some spread).
    template <class Rng>
    Vector sample(Rng& rng) const {
        Vector x(dim_);
        if (kind_ == SetKind::Box) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (Index i = 0; i < dim_; ++i)
                x[i] = lower_[i] + unit(rng) * (upper_[i] - lower_[i]);
        } else {
            std::normal_distribution<double> gauss(0.0, 3.0);
            for (Index i = 0; i < dim_; ++i) x[i] = gauss(rng);
        }
        return x;
    }

private:
    void check_dim(Index n) const {
        if (n != dim_) throw std::invalid_argument("FeasibleSet: dimension mismatch");
    }

    SetKind kind_ = SetKind::FullSpace;
    Index dim_ = 0;
    Vector lower_;
    Vector upper_;
};

}  // namespace flagopt
