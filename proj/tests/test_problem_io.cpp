#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "finecone/report.hpp"

using namespace finecone;

TEST_CASE("bundled problems parse to the expected jets and curves") {
    auto p = parse_problem(bundled_example("pitchfork"));
    CHECK(p.field == FieldKind::Real);
    CHECK(p.n == 2);
    CHECK(p.m == 1);
    // Taylor input c_1 = (0,1), c_2 = (1,0) becomes z1 = (0,1), z2 = (2,0).
    CHECK(p.curve.coefficient(1)(1) == 1);
    CHECK(p.curve.coefficient(2)(0) == 2);
    CHECK(p.curve.leading_index() == 1);
    CHECK(p.map.degree() == 3);

    auto q = parse_problem(bundled_example("quartic-primary"));
    CHECK(q.curve.leading_index() == 3);
    CHECK(q.curve.coefficient(3)(0) == 6);
    CHECK(q.curve.coefficient(4)(1) == 24);
    CHECK(q.options.grid_given);
    CHECK(q.options.grid.hi == 0.2);
}

TEST_CASE("parser rejects malformed problems") {
    json bad = bundled_example("pitchfork");
    bad["map"][0].push_back({{"coeff", "1"}, {"exponents", {0, 0}}});
    CHECK_THROWS_AS(parse_problem(bad), ProblemParseError);  // constant term

    json zero_curve = bundled_example("pitchfork");
    zero_curve["curve"] = json::array({json::array({"0", "0"})});
    CHECK_THROWS_AS(parse_problem(zero_curve), ProblemParseError);

    json bad_len = bundled_example("pitchfork");
    bad_len["curve"] = json::array({json::array({"1"})});
    CHECK_THROWS_AS(parse_problem(bad_len), ProblemParseError);

    json bad_field = bundled_example("pitchfork");
    bad_field["field"] = "quaternion";
    CHECK_THROWS_AS(parse_problem(bad_field), ProblemParseError);

    json bad_expo = bundled_example("pitchfork");
    bad_expo["map"][0][0]["exponents"] = {1, 1, 1};
    CHECK_THROWS_AS(parse_problem(bad_expo), ProblemParseError);
}

TEST_CASE("rational strings parse exactly") {
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("-7") == Rational(-7));
    CHECK(parse_rational("1.25") == Rational(5, 4));
    CHECK(parse_rational(" 2 / 3 ") == Rational(2, 3));
    CHECK_THROWS(parse_rational(""));
}

TEST_CASE("round trip is identical modulo key order") {
    for (const char* name : {"pitchfork", "quartic-primary", "quartic-secondary"}) {
        auto p = parse_problem(bundled_example(name));
        json out = problem_to_json(p);
        auto p2 = parse_problem(out);
        json out2 = problem_to_json(p2);
        CHECK(out == out2);
        CHECK(p.curve == p2.curve);
        CHECK(p.map == p2.map);
    }
}

TEST_CASE("digests are deterministic and input sensitive") {
    auto p = parse_problem(bundled_example("pitchfork"));
    auto q = parse_problem(bundled_example("pitchfork"));
    CHECK(problem_digest(p) == problem_digest(q));
    json other = bundled_example("pitchfork");
    other["map"][0][0]["coeff"] = "2";
    CHECK(problem_digest(parse_problem(other)) != problem_digest(p));
}

TEST_CASE("complex problems parse and analyze the exact layer only") {
    json j = bundled_example("pitchfork");
    j["field"] = "complex";
    auto p = parse_problem(j);
    CHECK(p.field == FieldKind::Complex);
    auto result = analyze_problem(p);
    CHECK(result.status == SearchStatus::Transversal);
    CHECK(result.resolution->k == 1);
    CHECK(result.verdict.verdict == Verdict::NotApplicable);
    CHECK(!result.continuation_run);
}

TEST_CASE("analysis report serializes the cone data") {
    auto p = parse_problem(bundled_example("quartic-secondary"));
    auto result = analyze_problem(p);
    json rep = report_to_json(p, result);
    CHECK(rep["schema_version"] == kReportSchemaVersion);
    CHECK(rep["cone"]["k"] == 3);
    CHECK(rep["cone"]["chi"] == 3);
    CHECK(rep["cone"]["l"] == 1);
    CHECK(rep["verdict"]["value"] == "bifurcation");
    CHECK(rep["approximation"]["order"] == 15);
    CHECK(rep["continuation"]["slopes"]["det"]["accept"] == true);
    // Determinism: a second run serializes identically.
    auto again = analyze_problem(p);
    CHECK(report_to_json(p, again).dump() == rep.dump());
}

TEST_CASE("parameter samples drive solution families") {
    // Pitchfork with a dummy third variable: P_2 = span{e3}.
    json j;
    j["field"] = "real";
    j["dims"] = {{"n", 3}, {"m", 1}};
    j["map"] = json::array({json::array({json{{"coeff", "1"}, {"exponents", {1, 1, 0}}},
                                         json{{"coeff", "-1"}, {"exponents", {0, 3, 0}}}})});
    j["curve"] = json::array(
        {json::array({"0", "1", "0"}), json::array({"1", "0", "0"})});
    j["k_max"] = 6;
    j["options"]["p_samples"] =
        json::array({json::array({"0", "0", "1/2"}), json::array({"1", "0", "0"})});
    auto p = parse_problem(j);
    auto result = analyze_problem(p);
    REQUIRE(result.status == SearchStatus::Transversal);
    REQUIRE(result.families.size() == 2);
    CHECK(result.families[0].converged);
    CHECK(result.families[0].max_residual < 1e-12);
    CHECK(result.families[1].note == "parameter not in P_{k+1}");
    json rep = report_to_json(p, result);
    CHECK(rep["continuation"]["parameter_families"].size() == 2);
}

TEST_CASE("trace CSV format") {
    auto p = parse_problem(bundled_example("pitchfork"));
    auto result = analyze_problem(p);
    std::string csv = trace_to_csv(result.trace, result.resolution->k, "grid test");
    CHECK(csv.rfind("# grid test\n", 0) == 0);
    CHECK(csv.find("eps,residual,abs_det,inv_norm,dnorm_1,dnorm_2,lin_residual\n") !=
          std::string::npos);
    // 17 significant digits survive.
    CHECK(csv.find("0.10000000000000001") != std::string::npos);
}
