// finecone: fine resolutions and transversal cones for singular systems
// G[z] = 0 around a curve ansatz; batch analysis, exact verification suites
// and rate traces.

#include "finecone/report.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace finecone;

constexpr int kExitOk = 0;
constexpr int kExitNotTransversal = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNumericFailure = 3;

void configure_threads() {
    if (const char* env = std::getenv("FINECONE_THREADS")) {
        int threads = std::atoi(env);
        if (threads > 0) Eigen::setNbThreads(threads);
    }
}

int write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        std::cerr << "cannot write " << path << "\n";
        return kExitInputError;
    }
    out << text;
    return kExitOk;
}

void print_summary(const Problem& problem, const AnalysisResult& result) {
    std::cout << "status: " << to_string(result.status) << "\n";
    if (!result.resolution) {
        std::cout << "range dims per stage:";
        for (int d : result.range_dims) std::cout << " " << d;
        std::cout << " (sum " << result.achieved_sum << " of " << problem.m << ")\n";
        return;
    }
    const auto& res = *result.resolution;
    std::cout << "k = " << res.k << ", chi = " << result.chi_value << ", l = " << res.l
              << ", transversal = " << (res.transversal ? "yes" : "no") << "\n";
    std::cout << "approximation of order " << result.approximation.target << ": "
              << (result.approximation.holds ? "holds" : "fails");
    if (result.approximation.exact_zero)
        std::cout << " (curve solves G exactly)";
    else if (result.approximation.vanish_order)
        std::cout << " (first nonzero T at order " << *result.approximation.vanish_order
                  << ")";
    std::cout << "\n";
    std::cout << "verdict: " << to_string(result.verdict.verdict) << " ("
              << result.verdict.reason << ")\n";
    for (const auto& o : result.identities) {
        std::cout << "identity " << o.name << ": "
                  << (o.skipped ? "skipped" : (o.pass ? "pass" : "FAIL"));
        if (!o.detail.empty()) std::cout << " [" << o.detail << "]";
        std::cout << "\n";
    }
    if (result.continuation_run) {
        if (result.approximation.holds) {
            std::cout << "newton: "
                      << (result.positive.all_converged && result.negative.all_converged
                              ? "converged on the whole grid"
                              : "FAILED somewhere on the grid")
                      << "\n";
            std::cout << "degree signs: " << result.signs.positive_halfcone << " / "
                      << result.signs.negative_halfcone << "\n";
        }
        std::cout << "det slope: " << result.trace.det_fit.slope << " (expected "
                  << result.chi_value << ")\n";
        std::cout << "inverse-norm slope: " << result.trace.inv_fit.slope
                  << " (expected " << -res.k << ")\n";
    }
}

int cmd_analyze(const std::string& input, const std::string& output) {
    Problem problem;
    try {
        problem = load_problem(input);
    } catch (const ProblemParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    }
    AnalysisResult result = analyze_problem(problem);
    json report = report_to_json(problem, result);
    if (!output.empty()) {
        if (int rc = write_text(output, report.dump(2) + "\n"); rc != kExitOk) return rc;
    }
    print_summary(problem, result);
    return result.exit_code();
}

int cmd_verify(int k_max, int count, std::uint64_t seed, bool corrupt) {
    // The corrupted entry d_{5,2} leaves everything below k = 2 intact and
    // surfaces precisely through the diagonal scaling law (Lemma 1 (iv)).
    if (corrupt) corrupt_scheme_entry(5, 2, Rational(99));
    VerifyOptions opts;
    opts.k_max = k_max;
    opts.count = count;
    opts.seed = seed;
    VerifyReport rep = run_verification(opts);
    clear_scheme_corruption();
    std::cout << "instances: " << rep.instances << " (seed " << seed << ", k <= " << k_max
              << ")\n";
    for (const auto& t : rep.totals)
        std::cout << (t.pass ? "pass" : "FAIL") << "  " << t.name << "\n";
    if (!rep.all_pass)
        std::cout << "first counterexample: " << rep.first_counterexample << "\n";
    return rep.all_pass ? kExitOk : kExitNumericFailure;
}

int cmd_trace(const std::string& input, const std::string& grid_spec,
              const std::string& output) {
    Problem problem;
    try {
        problem = load_problem(input);
    } catch (const ProblemParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    }
    EpsGrid grid = problem.options.grid;
    bool defaulted = !problem.options.grid_given;
    if (!grid_spec.empty()) {
        double a, b;
        int points;
        if (std::sscanf(grid_spec.c_str(), "%lf:%lf:%d", &a, &b, &points) != 3) {
            std::cerr << "input error: grid spec must be start:stop:points\n";
            return kExitInputError;
        }
        grid = EpsGrid{a, b, points};
        defaulted = false;
    }
    auto search = find_minimal_k<Rational>(problem.map, problem.curve, problem.k_max);
    if (search.status != SearchStatus::Transversal) {
        std::cerr << "trace requires a transversal problem (status: "
                  << to_string(search.status) << ")\n";
        return kExitNotTransversal;
    }
    const auto& res = *search.resolution;
    ConeFrame frame(res, problem.map, problem.curve);
    MapJet<double> jetd = problem.map.cast<double>();
    auto app = approximation_order<Rational>(problem.map, problem.curve, res.k);
    TraceTable table;
    CurveSamples solved;
    if (app.holds) {
        solved = newton_continue(jetd, frame, grid.values(false));
        table = rate_trace(jetd, frame, grid.values(false), &solved);
    } else {
        table = rate_trace(jetd, frame, grid.values(false));
    }
    std::ostringstream comment;
    comment << "grid " << grid.hi << ":" << grid.lo << ":" << grid.points
            << (defaulted ? " (default)" : "");
    if (!app.holds) comment << "; residual column follows the center line";
    std::string csv = trace_to_csv(table, res.k, comment.str());
    if (output.empty()) {
        std::cout << csv;
        return kExitOk;
    }
    if (int rc = write_text(output, csv); rc != kExitOk) return rc;
    std::cout << "trace written to " << output << " (" << table.rows.size()
              << " rows), det slope " << table.det_fit.slope << "\n";
    return app.holds && !solved.all_converged ? kExitNumericFailure : kExitOk;
}

int cmd_example(const std::string& name, const std::string& output) {
    json problem;
    try {
        problem = bundled_example(name);
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    }
    std::string text = problem.dump(2) + "\n";
    if (output.empty()) {
        std::cout << text;
        return kExitOk;
    }
    return write_text(output, text);
}

}  // namespace

int main(int argc, char** argv) {
    configure_threads();
    CLI::App app{"fine resolutions and k-transversal cones for singular systems"};
    app.require_subcommand(1);

    std::string input, output, grid_spec, example_name;
    int k_max = 3, count = 100;
    std::uint64_t seed = 0;
    bool corrupt = false;

    auto* analyze = app.add_subcommand("analyze", "analyze a problem file");
    analyze->add_option("input", input, "problem JSON")->required();
    analyze->add_option("-o,--output", output, "report JSON path");

    auto* verify = app.add_subcommand("verify", "run the exact identity suites");
    verify->add_option("--k", k_max, "largest transversality order (default 3)");
    verify->add_option("--count", count, "number of random instances (default 100)");
    verify->add_option("--seed", seed, "random seed (default 0)");
    verify->add_flag("--corrupt-scheme", corrupt,
                     "corrupt one scheme entry first (mutation check)")
        ->group("");  // hidden test hook

    auto* trace = app.add_subcommand("trace", "write the rate-law trace CSV");
    trace->add_option("input", input, "problem JSON")->required();
    trace->add_option("--grid", grid_spec, "start:stop:points (geometric)");
    trace->add_option("-o,--output", output, "CSV path (stdout if omitted)");

    auto* example = app.add_subcommand("example", "print a bundled problem");
    example
        ->add_option("name", example_name,
                     "quartic-primary | quartic-secondary | pitchfork | regular")
        ->required();
    example->add_option("-o,--output", output, "file path (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand(analyze)) return cmd_analyze(input, output);
    if (app.got_subcommand(verify)) return cmd_verify(k_max, count, seed, corrupt);
    if (app.got_subcommand(trace)) return cmd_trace(input, grid_spec, output);
    if (app.got_subcommand(example)) return cmd_example(example_name, output);
    return kExitInputError;
}
