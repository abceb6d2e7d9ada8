#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "flagopt/problem.hpp"
#include "flagopt/trace.hpp"

namespace flagopt {

/// Reproducible problem-instance description. Instances are always rebuilt
/// from this (generator, seed, sizes) tuple; matrices are never serialized.
/// box_lower/box_upper are NaN for an unconstrained instance.
struct ProblemDescriptor {
    std::string generator;  ///< lasso | logistic_l1 | box_qp
    std::uint64_t seed = 0;
    Index n = 0;
    Index d = 0;
    double lambda = 0.0;
    double box_lower = std::numeric_limits<double>::quiet_NaN();
    double box_upper = std::numeric_limits<double>::quiet_NaN();

    bool has_box() const { return !std::isnan(box_lower) && !std::isnan(box_upper); }

    std::string to_string() const {
        std::ostringstream os;
        os << "generator = " << generator << ", seed = " << seed << ", n = " << n
           << ", d = " << d << ", lambda = " << detail::fmt_double(lambda);
        os << ", box_lower = " << (has_box() ? detail::fmt_double(box_lower) : "none");
        os << ", box_upper = " << (has_box() ? detail::fmt_double(box_upper) : "none");
        return os.str();
    }

    static ProblemDescriptor parse(const std::string& text) {
        ProblemDescriptor desc;
        std::istringstream is(text);
        std::string field;
        while (std::getline(is, field, ',')) {
            const auto eq = field.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("ProblemDescriptor::parse: missing '=' in field");
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t");
                const auto e = s.find_last_not_of(" \t");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            const std::string key = trim(field.substr(0, eq));
            const std::string val = trim(field.substr(eq + 1));
            if (key == "generator")
                desc.generator = val;
            else if (key == "seed")
                desc.seed = std::stoull(val);
            else if (key == "n")
                desc.n = std::stol(val);
            else if (key == "d")
                desc.d = std::stol(val);
            else if (key == "lambda")
                desc.lambda = std::stod(val);
            else if (key == "box_lower")
                desc.box_lower = val == "none" ? std::numeric_limits<double>::quiet_NaN()
                                               : std::stod(val);
            else if (key == "box_upper")
                desc.box_upper = val == "none" ? std::numeric_limits<double>::quiet_NaN()
                                               : std::stod(val);
            else
                throw std::invalid_argument("ProblemDescriptor::parse: unknown key " + key);
        }
        return desc;
    }
};

namespace detail {

/// Planted sparse signal: ceil(d/10) active coordinates (at least one),
/// spread deterministically, with N(0, 4) values.
inline Vector planted_signal(Index d, std::mt19937_64& rng) {
    Vector x = Vector::Zero(d);
    Index nnz = (d + 9) / 10;
    if (nnz < 1) nnz = 1;
    std::vector<Index> idx(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (Index j = 0; j < nnz; ++j) x[idx[size_t(j)]] = gauss(rng);
    return x;
}

inline Matrix gaussian_matrix(Index n, Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix A(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) A(i, j) = gauss(rng);
    return A;
}

}  // namespace detail

/// Builds the instance a descriptor names. All randomness flows from one
/// mt19937_64 stream in a fixed draw order, so equal descriptors give
/// bit-identical data.
///   lasso:       f = 1/2||Ax-b||^2, h = lambda*||.||_1, b from a planted
///                sparse signal plus N(0, 0.01) noise.
///   logistic_l1: logistic loss with +-1 labels from the sign of a noisy
///                planted linear score, h = lambda*||.||_1.
///   box_qp:      f = 1/2||Ax-b||^2 with b targeting a point that sticks out
///                of the box, so some constraints bind; h = lambda*||.||_1
///                (zero when lambda = 0). Defaults to the unit box.
inline CompositeProblem generate_problem(const ProblemDescriptor& desc) {
    if (desc.n < 1 || desc.d < 1)
        throw std::invalid_argument("generate_problem: n and d must be positive");
    if (desc.lambda < 0.0)
        throw std::invalid_argument("generate_problem: lambda must be nonnegative");
    std::mt19937_64 rng(desc.seed);

    auto make_set = [&](double default_lo, double default_hi, bool force_box) {
        if (desc.has_box()) return FeasibleSet::box(desc.d, desc.box_lower, desc.box_upper);
        if (force_box) return FeasibleSet::box(desc.d, default_lo, default_hi);
        return FeasibleSet::full_space(desc.d);
    };

    if (desc.generator == "lasso") {
        Matrix A = detail::gaussian_matrix(desc.n, desc.d, rng);
        const Vector signal = detail::planted_signal(desc.d, rng);
        std::normal_distribution<double> noise(0.0, 0.1);
        Vector b = A * signal;
        for (Index i = 0; i < b.size(); ++i) b[i] += noise(rng);
        return CompositeProblem::least_squares(std::move(A), std::move(b),
                                               NonsmoothPart::l1(desc.lambda),
                                               make_set(0.0, 0.0, false));
    }
    if (desc.generator == "logistic_l1") {
        Matrix A = detail::gaussian_matrix(desc.n, desc.d, rng);
        const Vector signal = detail::planted_signal(desc.d, rng);
        std::normal_distribution<double> noise(0.0, 0.5);
        Vector labels(desc.n);
        for (Index i = 0; i < desc.n; ++i) {
            const double score = A.row(i).dot(signal) + noise(rng);
            labels[i] = score >= 0.0 ? 1.0 : -1.0;
        }
        return CompositeProblem::logistic(std::move(A), std::move(labels),
                                          NonsmoothPart::l1(desc.lambda),
                                          make_set(0.0, 0.0, false));
    }
    if (desc.generator == "box_qp") {
        FeasibleSet set = make_set(0.0, 1.0, true);
        Matrix A = detail::gaussian_matrix(desc.n, desc.d, rng);
        // Target point straddles the box so roughly half the coordinates of
        // the unconstrained optimum violate a bound.
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Vector target(desc.d);
        for (Index i = 0; i < desc.d; ++i) {
            const double lo = set.lower()[i], hi = set.upper()[i];
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            target[i] = mid + (2.0 * unit(rng) - 1.0) * 1.5 * half;
        }
        Vector b = A * target;
        return CompositeProblem::least_squares(std::move(A), std::move(b),
                                               NonsmoothPart::l1(desc.lambda), std::move(set));
    }
    throw std::invalid_argument("generate_problem: unknown generator " + desc.generator);
}

}  // namespace flagopt
