#pragma once

#include <chrono>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <vector>

#include "flagopt/baselines.hpp"
#include "flagopt/flag.hpp"
#include "flagopt/generators.hpp"
#include "flagopt/lemma_checks.hpp"
#include "flagopt/rate_fit.hpp"
#include "flagopt/reference.hpp"

namespace flagopt {

struct RunConfig {
    ProblemDescriptor problem;
    std::string algorithm = "flag";  ///< flag|fista|ista|adagrad|mirror_descent
    int T = 100;
    double delta = 1e-8;
    long ref_iters = 0;  ///< 0 -> 10*T; anything below 10*T is rejected
    std::string out_path;
    std::string format = "csv";  ///< csv | json-lines
    std::optional<double> step_scale;
    bool average_output = true;
};

struct SummaryRow {
    std::string algorithm;
    int T = 0;
    double final_gap = std::numeric_limits<double>::quiet_NaN();
    double q_T = std::numeric_limits<double>::quiet_NaN();
    double j_b = std::numeric_limits<double>::quiet_NaN();  ///< q_T^2/(d*T), in [1/d, 1]
    double d_inf_sq = std::numeric_limits<double>::infinity();
    double d_two_sq = std::numeric_limits<double>::infinity();
    double slope = std::numeric_limits<double>::quiet_NaN();
    long prox_calls = 0;
    double wall_s = 0.0;
    std::string status = "ok";  ///< ok | stationary@k | diverged
    double f_star = std::numeric_limits<double>::quiet_NaN();
    double ref_residual_inf = std::numeric_limits<double>::quiet_NaN();
};

struct RunOutcome {
    StepTrace trace;
    SummaryRow summary;
    Vector solution;
    std::optional<FlagResult> flag_details;  ///< set for algorithm == "flag"
};

namespace detail {

inline long resolved_ref_iters(const RunConfig& config) {
    const long minimum = 10L * config.T;
    if (config.ref_iters == 0) return minimum;
    if (config.ref_iters < minimum)
        throw std::invalid_argument("RunConfig: ref_iters must be >= 10*T");
    return config.ref_iters;
}

inline std::string config_echo(const RunConfig& config, long ref_iters) {
    std::ostringstream os;
    os << config.problem.to_string() << ", algo = " << config.algorithm
       << ", T = " << config.T << ", delta = " << fmt_double(config.delta)
       << ", ref_iters = " << ref_iters;
    return os.str();
}

inline void write_trace_file(const RunConfig& config, const StepTrace& trace,
                             const std::string& echo) {
    if (config.out_path.empty()) return;
    std::ofstream os(config.out_path);
    if (!os) throw std::runtime_error("cannot open trace output file: " + config.out_path);
    if (config.format == "csv")
        write_trace_csv(os, trace, echo);
    else if (config.format == "json-lines")
        write_trace_jsonl(os, trace, echo);
    else
        throw std::invalid_argument("RunConfig: unknown format " + config.format);
    if (!os) throw std::runtime_error("failed writing trace output file: " + config.out_path);
}

/// Runs one algorithm against an existing problem + reference. Lets compare()
/// and sweep() reuse one reference across runs.
inline RunOutcome run_with_reference(const CompositeProblem& problem,
                                     const ReferenceSolution& ref, const RunConfig& config,
                                     bool record_internals = false) {
    RunOutcome out;
    out.summary.algorithm = config.algorithm;
    out.summary.T = config.T;
    const Diameters diam = problem.set().diameters();
    out.summary.d_inf_sq = diam.inf_sq;
    out.summary.d_two_sq = diam.two_sq;
    out.summary.f_star = ref.f_star;
    out.summary.ref_residual_inf = ref.residual_inf;

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (config.algorithm == "flag") {
            FlagConfig fc;
            fc.T = config.T;
            fc.delta = config.delta;
            fc.record_internals = record_internals;
            FlagResult r = flag_run(problem, fc);
            out.trace = r.trace;
            out.solution = r.solution;
            out.summary.q_T = r.q_final;
            out.summary.j_b =
                r.q_final * r.q_final / (double(problem.dim()) * double(r.iterations > 0 ? r.iterations : 1));
            out.summary.prox_calls = r.total_prox_calls;
            if (r.stationary_exit)
                out.summary.status = "stationary@" + std::to_string(r.iterations + 1);
            out.flag_details = std::move(r);
        } else {
            BaselineConfig bc;
            bc.T = config.T;
            bc.delta = config.delta;
            bc.step_scale = config.step_scale;
            bc.average_output = config.average_output;
            if (config.algorithm == "ista")
                bc.algorithm = BaselineAlgorithm::Ista;
            else if (config.algorithm == "fista")
                bc.algorithm = BaselineAlgorithm::Fista;
            else if (config.algorithm == "adagrad")
                bc.algorithm = BaselineAlgorithm::Adagrad;
            else if (config.algorithm == "mirror_descent")
                bc.algorithm = BaselineAlgorithm::MirrorDescent;
            else
                throw std::invalid_argument("RunConfig: unknown algorithm " + config.algorithm);
            BaselineResult r = run_baseline(problem, bc);
            out.trace = std::move(r.trace);
            out.solution = std::move(r.solution);
            out.summary.prox_calls = out.trace.empty() ? 0 : out.trace.back().prox_calls_cum;
        }
    } catch (const DivergenceError& err) {
        out.trace = err.partial_trace();
        out.summary.status = "diverged";
    }
    out.summary.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (out.summary.status != "diverged") {
        fill_gaps(out.trace, ref.f_star);
        if (!out.trace.empty()) out.summary.final_gap = out.trace.back().gap;
        try {
            RateFit fit = fit_rate(out.trace, 0.2);
            out.summary.slope = fit.slope;
        } catch (const std::invalid_argument&) {
            // too few positive rows for a meaningful fit; slope stays NaN
        }
    }
    return out;
}

}  // namespace detail

/// Generates the instance, computes the reference optimum, runs the chosen
/// algorithm, fills gaps, fits the empirical rate, and writes the trace file
/// (CSV or JSON-lines) with the descriptor echoed in a comment line.
inline RunOutcome run_and_trace(const RunConfig& config, bool record_internals = false) {
    const long ref_iters = detail::resolved_ref_iters(config);
    const CompositeProblem problem = generate_problem(config.problem);
    const ReferenceSolution ref = reference_optimum(problem, ref_iters);
    RunOutcome out = detail::run_with_reference(problem, ref, config, record_internals);
    detail::write_trace_file(config, out.trace, detail::config_echo(config, ref_iters));
    return out;
}

/// Runs every algorithm on one problem instance, sharing one reference
/// optimum. Runs execute concurrently; the returned order is fixed.
inline std::vector<RunOutcome> compare(const RunConfig& base) {
    static const char* kAlgorithms[] = {"flag", "fista", "ista", "adagrad", "mirror_descent"};
    const long ref_iters = detail::resolved_ref_iters(base);
    const CompositeProblem problem = generate_problem(base.problem);
    const ReferenceSolution ref = reference_optimum(problem, ref_iters);

    std::vector<std::future<RunOutcome>> futures;
    for (const char* algo : kAlgorithms) {
        RunConfig config = base;
        config.algorithm = algo;
        if (!base.out_path.empty()) config.out_path = base.out_path + "." + algo;
        futures.push_back(std::async(std::launch::async, [&problem, &ref, config]() {
            RunOutcome out = detail::run_with_reference(problem, ref, config);
            detail::write_trace_file(config, out.trace,
                                     detail::config_echo(config, detail::resolved_ref_iters(config)));
            return out;
        }));
    }
    std::vector<RunOutcome> outcomes;
    for (auto& f : futures) outcomes.push_back(f.get());
    return outcomes;
}

struct SweepResult {
    std::vector<SummaryRow> rows;
    /// log final_gap vs log T slope across the grid; NaN with < 2 positive gaps.
    double cross_t_slope = std::numeric_limits<double>::quiet_NaN();
};

/// Runs one algorithm over a grid of iteration budgets and fits how the final
/// gap scales with T.
inline SweepResult sweep(const RunConfig& base, const std::vector<int>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("sweep: empty T grid");
    SweepResult result;
    const CompositeProblem problem = generate_problem(base.problem);
    long ref_iters = base.ref_iters;
    int t_max = 0;
    for (int t : t_grid) t_max = std::max(t_max, t);
    if (ref_iters == 0) ref_iters = 10L * t_max;
    const ReferenceSolution ref = reference_optimum(problem, ref_iters);

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int pts = 0;
    for (int t : t_grid) {
        RunConfig config = base;
        config.T = t;
        config.ref_iters = ref_iters;
        if (!base.out_path.empty()) config.out_path = base.out_path + ".T" + std::to_string(t);
        RunOutcome out = detail::run_with_reference(problem, ref, config);
        detail::write_trace_file(config, out.trace, detail::config_echo(config, ref_iters));
        if (out.summary.final_gap > 0.0) {
            const double lx = std::log(double(t)), ly = std::log(out.summary.final_gap);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++pts;
        }
        result.rows.push_back(out.summary);
    }
    if (pts >= 2) {
        const double n = double(pts);
        result.cross_t_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return result;
}

/// Full lemma audit on one instance: the sampling checks run directly on the
/// problem; the run-dependent checks use a short recorded run.
inline std::vector<CheckReport> audit(const ProblemDescriptor& desc, std::uint64_t seed = 99,
                                      int trials = 500) {
    const CompositeProblem problem = generate_problem(desc);
    FlagConfig fc;
    fc.T = 50;
    fc.record_internals = true;
    const FlagResult run = flag_run(problem, fc);

    std::vector<CheckReport> reports;
    reports.push_back(check_gradient_mapping(problem, trials, seed));
    reports.push_back(check_prox_lipschitz(problem, trials, seed + 1));

    std::vector<Vector> g_list;
    for (const auto& it : run.internals) g_list.push_back(it.p.normalized());
    if (!g_list.empty()) reports.push_back(check_min_diag_metric(g_list, 1000, seed + 2));

    std::vector<double> l_list;
    for (const auto& it : run.internals) l_list.push_back(it.l_eff);
    if (!l_list.empty()) reports.push_back(check_eta_chain(l_list));

    reports.push_back(check_binary_search(problem, std::min(trials, 200), seed + 3));
    reports.push_back(check_mirror_descent_inequality(problem, run, 50, seed + 4));
    return reports;
}

inline void print_summary_table(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << std::left << std::setw(15) << "algorithm" << std::right << std::setw(7) << "T"
       << std::setw(14) << "final_gap" << std::setw(11) << "q_T" << std::setw(10) << "J_B"
       << std::setw(11) << "D" << std::setw(11) << "D2" << std::setw(9) << "slope"
       << std::setw(12) << "prox_calls" << std::setw(10) << "wall_s" << "  status\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(15) << r.algorithm << std::right << std::setw(7) << r.T
           << std::setw(14) << std::setprecision(4) << std::scientific << r.final_gap
           << std::setw(11) << std::defaultfloat << std::setprecision(4) << r.q_T
           << std::setw(10) << r.j_b << std::setw(11) << r.d_inf_sq << std::setw(11)
           << r.d_two_sq << std::setw(9) << std::setprecision(3) << r.slope << std::setw(12)
           << r.prox_calls << std::setw(10) << std::setprecision(3) << r.wall_s << "  "
           << r.status << "\n";
    }
}

inline void print_check_reports(std::ostream& os, const std::vector<CheckReport>& reports) {
    os << std::left << std::setw(28) << "check" << std::right << std::setw(9) << "trials"
       << std::setw(12) << "violations" << std::setw(15) << "worst_margin" << "  status\n";
    for (const auto& r : reports) {
        os << std::left << std::setw(28) << r.name << std::right << std::setw(9) << r.trials
           << std::setw(12) << r.violations << std::setw(15) << std::setprecision(4)
           << std::scientific << r.worst_margin << "  "
           << (r.skipped ? "skipped" : (r.violations == 0 ? "pass" : "FAIL")) << "\n";
    }
    os << std::defaultfloat;
}

}  // namespace flagopt
