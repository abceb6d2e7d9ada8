#pragma once

#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "flagopt/types.hpp"

namespace flagopt {

/// One per-iteration trace row. f_val is F at the iterate the algorithm would
/// return if stopped after this iteration. gap is filled against a reference
/// optimum by the benchmark layer and is NaN until then.
struct IterateRecord {
    int k = 0;
    double f_val = 0.0;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double eta = 0.0;
    double l_eff = 0.0;
    double q = 0.0;
    long prox_calls_cum = 0;
    double elapsed_s = 0.0;
};

struct StepTrace {
    std::vector<IterateRecord> rows;

    bool empty() const { return rows.empty(); }
    const IterateRecord& back() const { return rows.back(); }
};

/// Thrown when an optimizer produces a non-finite objective value. Carries the
/// trace collected up to that point.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::string what, StepTrace partial)
        : std::runtime_error(std::move(what)), partial_(std::move(partial)) {}

    const StepTrace& partial_trace() const { return partial_; }

private:
    StepTrace partial_;
};

/// Thrown when a trace beats its reference optimum by more than the flooring
/// tolerance, i.e. the reference itself is not trustworthy.
class ReferenceQualityError : public std::runtime_error {
public:
    ReferenceQualityError(std::string what, double excess)
        : std::runtime_error(std::move(what)), excess_(excess) {}

    double excess() const { return excess_; }

private:
    double excess_;
};

/// gap = f_val - f_star, floored at 0 when negative by at most floor_tol.
/// A larger beat means the reference is worse than the trace and raises
/// ReferenceQualityError.
inline void fill_gaps(StepTrace& trace, double f_star, double floor_tol = 1e-12) {
    for (auto& row : trace.rows) {
        double g = row.f_val - f_star;
        if (g < 0.0) {
            if (g < -floor_tol)
                throw ReferenceQualityError(
                    "fill_gaps: trace beats reference optimum beyond tolerance", -g);
            g = 0.0;
        }
        row.gap = g;
    }
}

namespace detail {

/// Shortest exact decimal for a double; %.17g round-trips and is stable across
/// runs, which the byte-identical-trace contract relies on.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// CSV schema (fixed column order): k,f_val,gap,eta_k,L_k,q_k,prox_calls_cum,
/// elapsed_s. Header first, then a '#' comment echoing the problem descriptor
/// and run config, then one row per iteration.
inline void write_trace_csv(std::ostream& os, const StepTrace& trace,
                            const std::string& descriptor) {
    os << "k,f_val,gap,eta_k,L_k,q_k,prox_calls_cum,elapsed_s\n";
    if (!descriptor.empty()) os << "# " << descriptor << "\n";
    for (const auto& r : trace.rows) {
        char tail[32];
        std::snprintf(tail, sizeof(tail), "%.6f", r.elapsed_s);
        os << r.k << ',' << detail::fmt_double(r.f_val) << ',' << detail::fmt_double(r.gap)
           << ',' << detail::fmt_double(r.eta) << ',' << detail::fmt_double(r.l_eff) << ','
           << detail::fmt_double(r.q) << ',' << r.prox_calls_cum << ',' << tail << '\n';
    }
}

/// JSON-lines variant: first line is a meta object carrying the descriptor,
/// then one object per row with the same fields as the CSV columns.
inline void write_trace_jsonl(std::ostream& os, const StepTrace& trace,
                              const std::string& descriptor) {
    os << "{\"descriptor\":\"";
    for (char c : descriptor) {
        if (c == '"' || c == '\\') os << '\\';
        os << c;
    }
    os << "\"}\n";
    for (const auto& r : trace.rows) {
        char tail[32];
        std::snprintf(tail, sizeof(tail), "%.6f", r.elapsed_s);
        os << "{\"k\":" << r.k << ",\"f_val\":" << detail::fmt_double(r.f_val)
           << ",\"gap\":" << detail::fmt_double(r.gap)
           << ",\"eta_k\":" << detail::fmt_double(r.eta)
           << ",\"L_k\":" << detail::fmt_double(r.l_eff)
           << ",\"q_k\":" << detail::fmt_double(r.q)
           << ",\"prox_calls_cum\":" << r.prox_calls_cum << ",\"elapsed_s\":" << tail << "}\n";
    }
}

}  // namespace flagopt
