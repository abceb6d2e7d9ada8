#pragma once

#include <cmath>
#include <limits>

#include "flagopt/trace.hpp"

namespace flagopt {

struct RateFit {
    double slope = 0.0;
    int points = 0;                   ///< positive-gap rows used in the fit
    bool converged_exactly = false;   ///< all post-burn-in gaps were zero
};

/// Least-squares slope of log(gap) against log(k) over the rows after the
/// burn-in window, using only rows with positive gap (exact zeros mean the
/// floor was hit; they carry no rate information). All post-burn-in gaps zero
/// means the run converged exactly: the slope is -inf by convention. Fewer
/// than 20 positive rows otherwise is a contract violation.
inline RateFit fit_rate(const StepTrace& trace, double burn_in_fraction = 0.2) {
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
        throw std::invalid_argument("fit_rate: burn_in_fraction must be in [0, 1)");
    const auto& rows = trace.rows;
    const size_t start = size_t(burn_in_fraction * double(rows.size()));

    RateFit fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    size_t nonzero = 0, total = 0;
    for (size_t i = start; i < rows.size(); ++i) {
        ++total;
        const double g = rows[i].gap;
        if (std::isnan(g)) throw std::invalid_argument("fit_rate: trace has unfilled gaps");
        if (g <= 0.0) continue;
        ++nonzero;
        const double lx = std::log(double(rows[i].k));
        const double ly = std::log(g);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    if (total == 0) throw std::invalid_argument("fit_rate: no rows after burn-in");
    if (nonzero == 0) {
        fit.slope = -std::numeric_limits<double>::infinity();
        fit.converged_exactly = true;
        return fit;
    }
    if (nonzero < 20)
        throw std::invalid_argument("fit_rate: needs >= 20 positive-gap rows after burn-in");
    const double n = double(nonzero);
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.points = int(nonzero);
    return fit;
}

}  // namespace flagopt
