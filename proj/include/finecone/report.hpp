#pragma once

#include "finecone/identities.hpp"
#include "finecone/problem_io.hpp"

#include <optional>
#include <string>

namespace finecone {

/// Full analysis result: the exact cone data plus the floating verification
/// layer, ready for serialization.
struct AnalysisResult {
    SearchStatus status = SearchStatus::NotTransversal;
    std::optional<Resolution<Rational>> resolution;
    std::vector<int> range_dims;
    int achieved_sum = 0;

    int chi_value = 0;
    ApproximationReport approximation;
    VerdictReport verdict;
    std::vector<IdentityOutcome> identities;

    // Float layer (real field, transversal, k >= 1 only).
    bool continuation_run = false;
    EpsGrid grid;
    CurveSamples positive, negative;
    TraceTable trace;
    IdentityCheck identity_first_order;
    DegreeSigns signs;
    bool numeric_ok = true;

    // One solution family per requested parameter direction p.
    struct ParameterFamily {
        Eigen::VectorXd p;
        bool converged = false;
        double max_residual = 0;
        std::string note;
    };
    std::vector<ParameterFamily> families;

    int exit_code() const {
        if (status == SearchStatus::Transversal ||
            status == SearchStatus::DegenerateRegular)
            return numeric_ok ? 0 : 3;
        return 1;
    }
};

inline const char* to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::Transversal: return "transversal";
        case SearchStatus::DegenerateRegular: return "regular-degenerate";
        case SearchStatus::NotTransversal: return "not-transversal";
        default: return "curve-direction-exhausted";
    }
}

/// Run the whole pipeline on a parsed problem: minimal k, approximation
/// order, verdict, instance identity suite, then the float verification
/// layer when the field is real and the cone is transversal.
inline AnalysisResult analyze_problem(const Problem& problem) {
    AnalysisResult out;
    auto search = find_minimal_k<Rational>(problem.map, problem.curve, problem.k_max);
    out.status = search.status;
    out.range_dims = search.range_dims;
    out.achieved_sum = search.achieved_sum;
    if (!search.found()) return out;

    out.resolution = std::move(search.resolution);
    const auto& res = *out.resolution;
    out.chi_value = chi(res);
    out.approximation =
        approximation_order<Rational>(problem.map, problem.curve, std::max(res.k, 1));
    out.verdict = bifurcation_verdict<Rational>(res, problem.field,
                                                out.approximation.holds, out.chi_value);
    out.identities = run_instance_identities<Rational>(problem.map, problem.curve, res);

    if (problem.field != FieldKind::Real || res.degenerate_regular || !res.transversal)
        return out;

    out.continuation_run = true;
    out.grid = problem.options.grid;
    ConeFrame frame(res, problem.map, problem.curve);
    MapJet<double> jetd = problem.map.cast<double>();
    NewtonOptions nopts;
    nopts.tolerance = problem.options.newton_tolerance;
    if (out.approximation.holds) {
        out.positive = newton_continue(jetd, frame, out.grid.values(false), {}, nopts);
        out.negative = newton_continue(jetd, frame, out.grid.values(true), {}, nopts);
        out.numeric_ok = out.positive.all_converged && out.negative.all_converged;
        out.identity_first_order = identity_order_check(frame, out.positive);
        out.signs = degree_signs(jetd, frame, out.positive, out.negative);
        out.trace = rate_trace(jetd, frame, out.grid.values(false), &out.positive);
        // Requested parameter directions inside P_{k+1}.
        for (const auto& sample : problem.options.p_samples) {
            AnalysisResult::ParameterFamily fam;
            if (static_cast<int>(sample.size()) != res.n) {
                fam.note = "parameter dimension mismatch";
                out.families.push_back(fam);
                continue;
            }
            RatVector p_exact(res.n);
            for (int i = 0; i < res.n; ++i) p_exact(i) = parse_rational(sample[i]);
            Subspace<Rational> pspace{res.p_basis};
            if (!pspace.contains(p_exact)) {
                fam.note = "parameter not in P_{k+1}";
                out.families.push_back(fam);
                continue;
            }
            fam.p = to_double(p_exact);
            auto run = newton_continue(jetd, frame, out.grid.values(false), fam.p, nopts);
            fam.converged = run.all_converged;
            for (const auto& s : run.samples)
                fam.max_residual = std::max(fam.max_residual, s.residual);
            out.numeric_ok = out.numeric_ok && fam.converged;
            out.families.push_back(fam);
        }
    } else {
        // No solution curve to follow; the center-line rate laws still apply.
        out.trace = rate_trace(jetd, frame, out.grid.values(false));
    }
    return out;
}

namespace detail {

inline json fit_to_json(const SlopeFit& fit, double expected) {
    json j;
    j["slope"] = fit.slope;
    j["expected"] = expected;
    j["rms_decades"] = fit.rms;
    j["points"] = fit.points;
    j["accept"] = fit.accept;
    j["integer_tolerance"] = 0.1;
    return j;
}

}  // namespace detail

inline json report_to_json(const Problem& problem, const AnalysisResult& r) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool"] = {{"name", "finecone"}, {"version", kVersion}};
    j["input_digest"] = problem_digest(problem);
    j["status"] = to_string(r.status);
    j["field"] = problem.field == FieldKind::Real ? "real" : "complex";
    if (!r.resolution) {
        j["range_dims"] = r.range_dims;
        j["achieved_sum"] = r.achieved_sum;
        return j;
    }
    const auto& res = *r.resolution;
    json cone;
    cone["k"] = res.k;
    cone["transversal"] = res.transversal;
    cone["chi"] = r.chi_value;
    cone["l"] = res.l;
    std::vector<int> cdims;
    for (int s = 1; s <= res.k + 1; ++s) cdims.push_back(res.complement_dim(s));
    cone["complement_dims"] = cdims;
    cone["bottom_kernel_dim"] = res.bottom_kernel_dim();
    cone["parameter_dim"] = static_cast<int>(res.p_basis.cols());
    j["cone"] = cone;

    json app;
    app["target"] = r.approximation.target;
    app["holds"] = r.approximation.holds;
    if (r.approximation.exact_zero)
        app["order"] = "exact-zero";
    else if (r.approximation.vanish_order)
        app["order"] = *r.approximation.vanish_order;
    if (r.approximation.first_nonzero)
        app["first_nonzero"] = *r.approximation.first_nonzero;
    j["approximation"] = app;

    j["verdict"] = {{"value", to_string(r.verdict.verdict)},
                    {"reason", r.verdict.reason}};

    json ids = json::array();
    for (const auto& o : r.identities)
        ids.push_back({{"name", o.name},
                       {"pass", o.pass},
                       {"skipped", o.skipped},
                       {"detail", o.detail}});
    j["identities"] = ids;

    if (r.continuation_run) {
        json c;
        c["grid"] = {{"start", r.grid.hi}, {"stop", r.grid.lo}, {"points", r.grid.points}};
        if (r.approximation.holds) {
            json newton;
            newton["tolerance"] = 1e-12;
            newton["all_converged"] =
                r.positive.all_converged && r.negative.all_converged;
            double max_res = 0;
            int max_iters = 0;
            for (const auto* run : {&r.positive, &r.negative})
                for (const auto& s : run->samples) {
                    max_res = std::max(max_res, s.residual);
                    max_iters = std::max(max_iters, s.iterations);
                }
            newton["max_residual"] = max_res;
            newton["max_iterations"] = max_iters;
            c["newton"] = newton;
            c["identity_order_k"] = {{"bound", 1e-8},
                                     {"max_coefficient", r.identity_first_order.max_coefficient},
                                     {"ok", r.identity_first_order.ok}};
            c["degree_signs"] = {{"positive", r.signs.positive_halfcone},
                                 {"negative", r.signs.negative_halfcone},
                                 {"constant", r.signs.constant},
                                 {"measurable", r.signs.measurable}};
            if (!r.families.empty()) {
                json fams = json::array();
                for (const auto& f : r.families)
                    fams.push_back({{"converged", f.converged},
                                    {"max_residual", f.max_residual},
                                    {"note", f.note}});
                c["parameter_families"] = fams;
            }
        }
        json slopes;
        slopes["det"] = detail::fit_to_json(r.trace.det_fit, r.chi_value);
        slopes["inverse_norm"] = detail::fit_to_json(r.trace.inv_fit, -res.k);
        json blocks = json::array();
        for (size_t i = 0; i < r.trace.block_fits.size(); ++i)
            blocks.push_back(detail::fit_to_json(r.trace.block_fits[i],
                                                 static_cast<double>(i)));
        slopes["blocks"] = blocks;
        json lin = detail::fit_to_json(r.trace.lin_fit, 2.0 * res.k + 2);
        lin["law_holds"] = r.trace.linearization_law_holds(res.k);
        lin["negligible"] = r.trace.lin_negligible();
        slopes["linearization"] = lin;
        c["slopes"] = slopes;
        j["continuation"] = c;
    }
    return j;
}

/// Trace CSV: eps, residual, abs_det, inv_norm, dnorm_1..dnorm_{k+1},
/// lin_residual; decimal text with 17 significant digits.
inline std::string trace_to_csv(const TraceTable& table, int k,
                                const std::string& grid_comment) {
    std::ostringstream out;
    if (!grid_comment.empty()) out << "# " << grid_comment << "\n";
    out << "eps,residual,abs_det,inv_norm";
    for (int i = 1; i <= k + 1; ++i) out << ",dnorm_" << i;
    out << ",lin_residual\n";
    char buf[64];
    auto put = [&](double v, bool lead_comma = true) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        if (lead_comma) out << ',';
        out << buf;
    };
    for (const auto& row : table.rows) {
        put(row.eps, false);
        put(row.residual);
        put(row.abs_det);
        put(row.inv_norm);
        for (double b : row.block_norms) put(b);
        put(row.lin_residual);
        out << "\n";
    }
    return out.str();
}

/// Bundled reproduction problems.
inline json bundled_example(const std::string& name) {
    auto monomial = [](const std::string& c, std::vector<int> e) {
        return json{{"coeff", c}, {"exponents", e}};
    };
    auto row = [](std::vector<std::string> cs) {
        json r = json::array();
        for (auto& c : cs) r.push_back(c);
        return r;
    };
    json j;
    if (name == "quartic-primary" || name == "quartic-secondary") {
        // G = -x y^3 + x^5 + y^6 with a branch ansatz.
        j["field"] = "real";
        j["dims"] = {{"n", 2}, {"m", 1}};
        j["map"] = json::array({json::array(
            {monomial("-1", {1, 3}), monomial("1", {5, 0}), monomial("1", {0, 6})})});
        j["k_max"] = 12;
        if (name == "quartic-primary") {
            j["curve"] = json::array(
                {row({"0", "0"}), row({"0", "0"}), row({"1", "0"}), row({"0", "1"})});
            j["options"] = {{"grid", {{"start", 0.2}, {"stop", 0.02}, {"points", 25}}}};
        } else {
            j["curve"] = json::array({row({"0", "1"}), row({"0", "0"}), row({"1", "0"})});
        }
        return j;
    }
    if (name == "pitchfork") {
        j["field"] = "real";
        j["dims"] = {{"n", 2}, {"m", 1}};
        j["map"] =
            json::array({json::array({monomial("1", {1, 1}), monomial("-1", {0, 3})})});
        j["curve"] = json::array({row({"0", "1"}), row({"1", "0"})});
        j["k_max"] = 8;
        return j;
    }
    if (name == "regular") {
        j["field"] = "real";
        j["dims"] = {{"n", 1}, {"m", 1}};
        j["map"] = json::array({json::array({monomial("1", {1})})});
        j["curve"] = json::array({row({"1"})});
        j["k_max"] = 4;
        return j;
    }
    throw std::invalid_argument(
        "unknown example (try quartic-primary, quartic-secondary, pitchfork, regular)");
}

}  // namespace finecone
