#pragma once

#include "finecone/continuation.hpp"
#include "finecone/version.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace finecone {

using nlohmann::json;

struct ProblemOptions {
    EpsGrid grid;
    bool grid_given = false;
    double newton_tolerance = 1e-12;
    std::vector<std::vector<std::string>> p_samples;  // parameter directions
};

/// A problem file: the map as monomial terms per output component (exact
/// rational coefficient strings), the curve as plain Taylor coefficients
/// c_i (internally z-bar_i = i! c_i), a k budget and numeric options.
struct Problem {
    FieldKind field = FieldKind::Real;
    int n = 0, m = 0;
    MapJet<Rational> map;
    CurveJet<Rational> curve;
    int k_max = 16;
    ProblemOptions options;
    json raw;  // canonical parsed form, for digests and round-trips
};

struct ProblemParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Problem parse_problem(const json& j) {
    Problem p;
    try {
        std::string field = j.value("field", "real");
        if (field == "real")
            p.field = FieldKind::Real;
        else if (field == "complex")
            p.field = FieldKind::Complex;
        else
            throw ProblemParseError("field must be \"real\" or \"complex\"");
        p.n = j.at("dims").at("n").get<int>();
        p.m = j.at("dims").at("m").get<int>();
        if (p.n < 1 || p.m < 1) throw ProblemParseError("dims must be positive");

        p.map = MapJet<Rational>(p.n, p.m);
        const auto& comps = j.at("map");
        if (static_cast<int>(comps.size()) != p.m)
            throw ProblemParseError("map must list one term array per output component");
        for (int c = 0; c < p.m; ++c) {
            for (const auto& term : comps.at(c)) {
                Rational coeff = parse_rational(term.at("coeff").get<std::string>());
                MultiIndex mi = term.at("exponents").get<std::vector<int>>();
                if (static_cast<int>(mi.size()) != p.n)
                    throw ProblemParseError("exponent vector length must equal n");
                if (mi_degree(mi) < 1)
                    throw ProblemParseError("constant terms violate G[0] = 0");
                p.map.add_monomial(c, mi, coeff);
            }
        }

        std::vector<RatVector> taylor;
        for (const auto& row : j.at("curve")) {
            RatVector v(p.n);
            if (static_cast<int>(row.size()) != p.n)
                throw ProblemParseError("curve coefficient length must equal n");
            for (int i = 0; i < p.n; ++i)
                v(i) = parse_rational(row.at(i).get<std::string>());
            taylor.push_back(v);
        }
        if (taylor.empty()) throw ProblemParseError("curve must have coefficients");
        p.curve = CurveJet<Rational>::from_taylor(taylor);
        if (!p.curve.leading_index())
            throw ProblemParseError("curve is identically zero");

        p.k_max = j.value("k_max", 16);
        if (j.contains("options")) {
            const auto& o = j.at("options");
            if (o.contains("grid")) {
                p.options.grid.hi = o.at("grid").value("start", 1e-1);
                p.options.grid.lo = o.at("grid").value("stop", 1e-4);
                p.options.grid.points = o.at("grid").value("points", 25);
                p.options.grid_given = true;
            }
            p.options.newton_tolerance = o.value("newton_tolerance", 1e-12);
            if (o.contains("p_samples"))
                p.options.p_samples =
                    o.at("p_samples").get<std::vector<std::vector<std::string>>>();
        }
        p.raw = j;
    } catch (const json::exception& e) {
        throw ProblemParseError(std::string("problem parse: ") + e.what());
    }
    return p;
}

inline Problem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProblemParseError("cannot open problem file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ProblemParseError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return parse_problem(j);
}

/// Re-serialize a problem to its canonical JSON form (identical modulo key
/// order on a round trip).
inline json problem_to_json(const Problem& p) {
    json j;
    j["field"] = p.field == FieldKind::Real ? "real" : "complex";
    j["dims"] = {{"n", p.n}, {"m", p.m}};
    json comps = json::array();
    for (int c = 0; c < p.m; ++c) {
        json terms = json::array();
        for (int beta = 1; beta <= p.map.degree(); ++beta) {
            for (const auto& [mi, coeff] : p.map.form(beta).terms()) {
                if (coeff(c) == Rational(0)) continue;
                std::ostringstream s;
                s << coeff(c);
                terms.push_back({{"coeff", s.str()}, {"exponents", mi}});
            }
        }
        comps.push_back(terms);
    }
    j["map"] = comps;
    json curve = json::array();
    Rational fact = 1;
    for (int i = 1; i <= p.curve.max_index(); ++i) {
        fact *= i;
        json row = json::array();
        RatVector v = p.curve.coefficient(i);
        for (int c = 0; c < p.n; ++c) {
            std::ostringstream s;
            s << Rational(v(c) / fact);  // back to plain Taylor coefficients
            row.push_back(s.str());
        }
        curve.push_back(row);
    }
    j["curve"] = curve;
    j["k_max"] = p.k_max;
    json o;
    if (p.options.grid_given)
        o["grid"] = {{"start", p.options.grid.hi},
                     {"stop", p.options.grid.lo},
                     {"points", p.options.grid.points}};
    o["newton_tolerance"] = p.options.newton_tolerance;
    if (!p.options.p_samples.empty()) o["p_samples"] = p.options.p_samples;
    j["options"] = o;
    return j;
}

/// FNV-1a digest of the canonical serialization.
inline std::string problem_digest(const Problem& p) {
    std::string text = problem_to_json(p).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream s;
    s << std::hex << h;
    return s.str();
}

}  // namespace finecone
