#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flagopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when an iterative estimator hits its iteration cap before reaching
/// its tolerance. Carries the last estimate so callers can inspect or reuse it.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::string what, double last_estimate, int iterations)
        : std::runtime_error(std::move(what)),
          last_estimate_(last_estimate),
          iterations_(iterations) {}

    double last_estimate() const { return last_estimate_; }
    int iterations() const { return iterations_; }

private:
    double last_estimate_;
    int iterations_;
};

}  // namespace flagopt
