// Benchmark driver: generates seeded instances, runs the optimizers, writes
// per-iteration traces, and verifies the analytical inequalities on demand.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flagopt/flagopt.hpp"

namespace {

struct CliOptions {
    std::string problem = "lasso";
    std::string algo = "flag";
    int iters = 100;
    std::uint64_t seed = 7;
    double delta = 1e-8;
    double lambda = -1.0;  // negative -> per-generator default
    std::vector<double> box;
    long ref_iters = 0;
    std::string out;
    std::string format = "csv";
    long n = 0;
    long d = 0;
    double step_scale = 0.0;
    bool last_iterate = false;
    int trials = 500;
    std::vector<int> grid;
};

flagopt::ProblemDescriptor make_descriptor(const CliOptions& opt) {
    flagopt::ProblemDescriptor desc;
    desc.generator = opt.problem;
    desc.seed = opt.seed;
    if (opt.problem == "lasso") {
        desc.n = 50;
        desc.d = 20;
        desc.lambda = 0.1;
    } else if (opt.problem == "logistic_l1") {
        desc.n = 100;
        desc.d = 30;
        desc.lambda = 0.05;
    } else if (opt.problem == "box_qp") {
        desc.n = 40;
        desc.d = 40;
        desc.lambda = 0.0;
    } else {
        throw CLI::ValidationError("--problem", "unknown generator " + opt.problem);
    }
    if (opt.n > 0) desc.n = opt.n;
    if (opt.d > 0) desc.d = opt.d;
    if (opt.lambda >= 0.0) desc.lambda = opt.lambda;
    if (!opt.box.empty()) {
        desc.box_lower = opt.box[0];
        desc.box_upper = opt.box[1];
    }
    return desc;
}

flagopt::RunConfig make_run_config(const CliOptions& opt) {
    flagopt::RunConfig config;
    config.problem = make_descriptor(opt);
    config.algorithm = opt.algo;
    config.T = opt.iters;
    config.delta = opt.delta;
    config.ref_iters = opt.ref_iters;
    config.out_path = opt.out;
    config.format = opt.format;
    if (opt.step_scale > 0.0) config.step_scale = opt.step_scale;
    config.average_output = !opt.last_iterate;
    return config;
}

void add_problem_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--problem", opt.problem, "Problem generator: lasso, logistic_l1, box_qp");
    cmd->add_option("--seed", opt.seed, "Generator seed");
    cmd->add_option("--lambda", opt.lambda, "l1 weight (default per generator)");
    cmd->add_option("--box", opt.box, "Box bounds: lower upper")->expected(2);
    cmd->add_option("--n", opt.n, "Rows of the data matrix");
    cmd->add_option("--d", opt.d, "Problem dimension");
}

void add_run_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--iters", opt.iters, "Iteration budget T");
    cmd->add_option("--delta", opt.delta, "Metric regularization delta");
    cmd->add_option("--ref-iters", opt.ref_iters, "Reference-optimum iterations (>= 10*T)");
    cmd->add_option("--out", opt.out, "Trace output path");
    cmd->add_option("--format", opt.format, "Trace format: csv or json-lines")
        ->check(CLI::IsMember({"csv", "json-lines"}));
    cmd->add_option("--step-scale", opt.step_scale, "Step scale for adagrad/mirror_descent");
    cmd->add_flag("--last-iterate", opt.last_iterate,
                  "Report last iterates instead of averages (adagrad/mirror_descent)");
}

int cmd_run(const CliOptions& opt) {
    flagopt::RunOutcome out = flagopt::run_and_trace(make_run_config(opt));
    flagopt::print_summary_table(std::cout, {out.summary});
    return out.summary.status == "diverged" ? 2 : 0;
}

int cmd_compare(const CliOptions& opt) {
    std::vector<flagopt::RunOutcome> outcomes = flagopt::compare(make_run_config(opt));
    std::vector<flagopt::SummaryRow> rows;
    bool failed = false;
    for (const auto& o : outcomes) {
        rows.push_back(o.summary);
        failed = failed || o.summary.status == "diverged";
    }
    flagopt::print_summary_table(std::cout, rows);
    return failed ? 2 : 0;
}

int cmd_audit(const CliOptions& opt) {
    std::vector<flagopt::CheckReport> reports =
        flagopt::audit(make_descriptor(opt), opt.seed + 1000, opt.trials);
    flagopt::print_check_reports(std::cout, reports);
    for (const auto& r : reports)
        if (!r.skipped && r.violations > 0) return 2;
    return 0;
}

int cmd_sweep(const CliOptions& opt) {
    flagopt::SweepResult result = flagopt::sweep(make_run_config(opt), opt.grid);
    flagopt::print_summary_table(std::cout, result.rows);
    std::cout << "cross-T slope of final gap: " << result.cross_t_slope << "\n";
    for (const auto& r : result.rows)
        if (r.status == "diverged") return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Composite optimization benchmark: adaptively preconditioned "
                 "linear coupling vs. first-order baselines"};
    app.require_subcommand(1);
    CliOptions opt;

    CLI::App* run = app.add_subcommand("run", "Run one algorithm and write its trace");
    add_problem_flags(run, opt);
    add_run_flags(run, opt);
    run->add_option("--algo", opt.algo,
                    "Algorithm: flag, fista, ista, adagrad, mirror_descent");

    CLI::App* cmp = app.add_subcommand("compare", "Run every algorithm on one instance");
    add_problem_flags(cmp, opt);
    add_run_flags(cmp, opt);

    CLI::App* aud = app.add_subcommand("audit", "Verify the analytical inequalities numerically");
    add_problem_flags(aud, opt);
    aud->add_option("--trials", opt.trials, "Sampling trials per check");

    CLI::App* swp = app.add_subcommand("sweep", "Run a grid of iteration budgets and fit rates");
    add_problem_flags(swp, opt);
    add_run_flags(swp, opt);
    swp->add_option("--algo", opt.algo, "Algorithm to sweep");
    swp->add_option("--grid", opt.grid, "Comma-separated T values")
        ->delimiter(',')
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(opt);
        if (cmp->parsed()) return cmd_compare(opt);
        if (aud->parsed()) return cmd_audit(opt);
        if (swp->parsed()) return cmd_sweep(opt);
    } catch (const flagopt::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 2;
    } catch (const flagopt::ReferenceQualityError& e) {
        std::cerr << "reference quality: " << e.what() << " (excess " << e.excess() << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
