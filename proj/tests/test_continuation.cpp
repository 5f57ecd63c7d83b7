#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "finecone/continuation.hpp"
#include "test_support.hpp"

using namespace finecone;
using testsup::rvec;

namespace {

struct Setup {
    MapJet<double> jetd;
    ConeFrame frame;
};

Setup make_setup(const MapJet<Rational>& jet, const CurveJet<Rational>& curve, int k) {
    auto res = build_resolution<Rational>(jet, curve, k);
    return Setup{jet.cast<double>(), ConeFrame(res, jet, curve)};
}

std::vector<double> both_grids_concat(const EpsGrid& g) {
    auto pos = g.values(false);
    auto neg = g.values(true);
    pos.insert(pos.end(), neg.begin(), neg.end());
    return pos;
}

// Independent scalar Newton solve of -x y^3 + x^5 + y^6 = 0 for y near
// x^{4/3}, used as the oracle for the recovered primary branch.
double solve_branch_y(double x) {
    double y = std::pow(x, 4.0 / 3.0);
    for (int it = 0; it < 60; ++it) {
        double f = -x * y * y * y + std::pow(x, 5) + std::pow(y, 6);
        double fp = -3 * x * y * y + 6 * std::pow(y, 5);
        double step = f / fp;
        y -= step;
        if (std::abs(step) < 1e-18 * std::max(1.0, std::abs(y))) break;
    }
    return y;
}

}  // namespace

TEST_CASE("cone points: center line, closed form, eps = 0") {
    auto s = make_setup(testsup::pitchfork_map(), testsup::pitchfork_curve(), 1);
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(1);
    CHECK(cone_point(s.frame, 0.3, y0) == s.frame.curve_point(0.3));
    // k = 1 closed form: z0 + eps^2/2 (n2c + p) + eps^3/6 n1c; here N_1^c = 0.
    Eigen::VectorXd y(1);
    y << 2.0;
    Eigen::VectorXd z = cone_point(s.frame, 0.5, y);
    Eigen::VectorXd manual = s.frame.curve_point(0.5);
    manual(0) += 0.25 / 2.0 * 2.0;  // n2c = 2 e1
    CHECK((z - manual).norm() < 1e-15);
    CHECK(cone_point(s.frame, 0.0, y) == s.frame.curve_point(0.0));
    CHECK(s.frame.curve_point(0.0).isZero());
}

TEST_CASE("remainder H: zero limit and continuity in eps") {
    {
        auto s = make_setup(testsup::pitchfork_map(), testsup::pitchfork_curve(), 1);
        Eigen::VectorXd y0 = Eigen::VectorXd::Zero(1);
        // Exact curve: T^3 = 0, so H(0, 0, 0) = 0.
        CHECK(remainder_at_zero(s.frame, y0).norm() == 0.0);
        // For the cubic pitchfork the blown-up remainder is eps-independent:
        // H(eps, s) agrees with the explicit limit to roundoff.
        Eigen::VectorXd y(1);
        y << 0.7;
        Eigen::VectorXd h0 = remainder_H(s.jetd, s.frame, 0.0, y);
        for (double e : EpsGrid{1e-1, 1e-4, 10}.values())
            CHECK((remainder_H(s.jetd, s.frame, e, y) - h0).norm() < 1e-12);
    }
    {
        // Secondary branch: |H(eps, s) - H(0, s)| <= C eps on the grid, with
        // C calibrated at the largest point and a roundoff allowance at the
        // small end (H carries an eps^{-7} amplification there).
        auto s = make_setup(testsup::quartic_map(), testsup::quartic_secondary_curve(), 3);
        Eigen::VectorXd y(1);
        y << 0.7;
        Eigen::VectorXd h0 = remainder_H(s.jetd, s.frame, 0.0, y);
        auto grid = EpsGrid{1e-1, 1e-4, 25}.values();
        double c0 = (remainder_H(s.jetd, s.frame, grid.front(), y) - h0).norm() /
                    grid.front();
        CHECK(c0 > 0);
        for (double e : grid) {
            double gap = (remainder_H(s.jetd, s.frame, e, y) - h0).norm();
            double floor = 16 * std::numeric_limits<double>::epsilon() *
                           abs_eval(s.jetd, cone_point(s.frame, e, y)) *
                           std::pow(e, -(2 * s.frame.k() + 1));
            CHECK(gap <= c0 * e * 1.000001 + floor);
        }
    }
}

TEST_CASE("base solution vanishes when T^{2k+1} does") {
    auto jet = testsup::quartic_map();
    auto curve = testsup::quartic_primary_curve();
    auto res = build_resolution<Rational>(jet, curve, 11);
    ConeFrame frame(res, jet, curve);
    CHECK(base_solution(frame).norm() == 0.0);
}

TEST_CASE("pitchfork end to end: newton, identity, degree signs, rates") {
    auto s = make_setup(testsup::pitchfork_map(), testsup::pitchfork_curve(), 1);
    EpsGrid grid;
    auto pos = newton_continue(s.jetd, s.frame, grid.values(false));
    auto neg = newton_continue(s.jetd, s.frame, grid.values(true));
    CHECK(pos.all_converged);
    CHECK(neg.all_converged);
    for (const auto& smp : pos.samples) {
        CHECK(smp.residual < 1e-12);
        CHECK(smp.y.norm() < 1e-10);  // the curve is exact: zero correction
    }
    auto id = identity_order_check(s.frame, pos);
    CHECK(id.ok);
    CHECK(id.max_coefficient < 1e-8);
    auto signs = degree_signs(s.jetd, s.frame, pos, neg);
    CHECK(signs.measurable);
    CHECK(signs.constant);
    CHECK(signs.positive_halfcone == 1);
    CHECK(signs.negative_halfcone == -1);
    auto table = rate_trace(s.jetd, s.frame, grid.values(false), &pos);
    CHECK(std::abs(table.det_fit.slope - 1.0) < 0.05);
    CHECK(std::abs(table.inv_fit.slope + 1.0) < 0.05);
    CHECK(table.block_fits[1].accept);
    CHECK(std::abs(table.block_fits[1].slope - 1.0) < 0.1);
    // The cubic cone map is linearized exactly; the remainder is roundoff.
    CHECK(table.lin_negligible());
    CHECK(table.linearization_law_holds(1));
    for (const auto& row : table.rows) CHECK(row.residual < 1e-14);
}

TEST_CASE("secondary branch rates: det 3, inverse -3, linearization >= 8") {
    auto s = make_setup(testsup::quartic_map(), testsup::quartic_secondary_curve(), 3);
    EpsGrid grid;
    auto pos = newton_continue(s.jetd, s.frame, grid.values(false));
    CHECK(pos.all_converged);
    auto table = rate_trace(s.jetd, s.frame, grid.values(false), &pos);
    CHECK(std::abs(table.det_fit.slope - 3.0) < 0.05);
    CHECK(std::abs(table.inv_fit.slope + 3.0) < 0.05);
    CHECK(table.linearization_law_holds(3));
    CHECK(table.block_fits[3].accept);
    CHECK(std::abs(table.block_fits[3].slope - 3.0) < 0.1);
    auto id = identity_order_check(s.frame, pos);
    CHECK(id.ok);
}

TEST_CASE("linearization law with a genuine eps^{2k+2} remainder term") {
    // Random transversal instances with nonzero quadratic data produce a real
    // eps^4 remainder, exercising the slope-fit branch of the law.
    std::mt19937_64 rng(91);
    int done = 0, fitted = 0;
    while (done < 5) {
        auto inst = testsup::random_instance(rng, 1);
        if (!inst.res.transversal) continue;
        ConeFrame frame(inst.res, inst.jet, inst.curve);
        auto table =
            rate_trace(inst.jet.cast<double>(), frame, EpsGrid{1e-1, 1e-4, 25}.values());
        CHECK(table.linearization_law_holds(1));
        if (!table.lin_negligible()) {
            CHECK(table.lin_fit.slope >= 3.9);
            ++fitted;
        }
        ++done;
    }
    CHECK(fitted >= 1);  // at least one instance took the genuine fit branch
}

TEST_CASE("primary branch: det 11, inverse -11, recovered curve vs scalar solve") {
    auto s = make_setup(testsup::quartic_map(), testsup::quartic_primary_curve(), 11);
    EpsGrid grid{0.2, 0.02, 25};  // documented override keeps eps^23 above noise
    auto pos = newton_continue(s.jetd, s.frame, grid.values(false));
    auto neg = newton_continue(s.jetd, s.frame, grid.values(true));
    CHECK(pos.all_converged);
    auto table = rate_trace(s.jetd, s.frame, grid.values(false), &pos);
    CHECK(std::abs(table.det_fit.slope - 11.0) < 0.05);
    CHECK(std::abs(table.inv_fit.slope + 11.0) < 0.05);
    // Recovered curve against the independent scalar solve at eps = 0.1: the
    // correction eps^13/3 off the center line is resolved by the blown-up
    // Newton far below the raw G-residual scale.
    auto mid = newton_continue(s.jetd, s.frame, {0.1});
    REQUIRE(mid.all_converged);
    CHECK(mid.samples[0].residual < 1e-12);
    double eps = 0.1;
    double x = std::pow(eps, 3);
    double y_oracle = solve_branch_y(x);
    CHECK(std::abs(mid.samples[0].z(0) - x) < 1e-15);
    CHECK(std::abs(mid.samples[0].z(1) - y_oracle) < 1e-16);
    CHECK(std::abs(mid.samples[0].z(1) - std::pow(eps, 4)) <= 1.0 * std::pow(eps, 13));
    // Degree signs opposite (chi = 11 odd): det = dG/dy ~ -3 eps^11.
    auto signs = degree_signs(s.jetd, s.frame, pos, neg);
    CHECK(signs.measurable);
    CHECK(signs.positive_halfcone == -1);
    CHECK(signs.negative_halfcone == 1);
}

TEST_CASE("chi-even instance: equal degree signs in both half-cones") {
    // Reparametrized pitchfork (eps^4, eps^2): k = 2, chi = 2.
    CurveJet<Rational> slow(2);
    slow.set_coefficient(2, rvec({0, 2}));
    slow.set_coefficient(4, rvec({24, 0}));
    auto jet = testsup::pitchfork_map();
    auto res = build_resolution<Rational>(jet, slow, 2);
    REQUIRE(res.transversal);
    CHECK(chi(res) == 2);
    ConeFrame frame(res, jet, slow);
    auto jetd = jet.cast<double>();
    EpsGrid grid;
    auto pos = newton_continue(jetd, frame, grid.values(false));
    auto neg = newton_continue(jetd, frame, grid.values(true));
    CHECK(pos.all_converged);
    CHECK(neg.all_converged);
    auto signs = degree_signs(jetd, frame, pos, neg);
    CHECK(signs.measurable);
    CHECK(signs.positive_halfcone == signs.negative_halfcone);
}

TEST_CASE("broken approximation: newton fails or exits the cone everywhere") {
    MapJet<Rational> broken = testsup::pitchfork_map();
    broken.add_monomial(0, {0, 2}, Rational(1, 7));  // T^2 != 0 now
    auto res = build_resolution<Rational>(broken, testsup::pitchfork_curve(), 1);
    CHECK(res.transversal);  // the cone itself survives (order-2 term keeps G0^2-data)
    CHECK(!approximation_order<Rational>(broken, testsup::pitchfork_curve(), 1).holds);
    ConeFrame frame(res, broken, testsup::pitchfork_curve());
    NewtonOptions opts;
    opts.cone_box = 1.0;  // tight cone sections
    auto run = newton_continue(broken.cast<double>(), frame,
                               EpsGrid{1e-1, 1e-4, 25}.values(false), {}, opts);
    CHECK(!run.all_converged);
    for (const auto& smp : run.samples) CHECK(!smp.converged);
}

TEST_CASE("grid independence: direct jump equals stepped continuation") {
    auto s = make_setup(testsup::quartic_map(), testsup::quartic_secondary_curve(), 3);
    auto stepped = newton_continue(s.jetd, s.frame, EpsGrid{1e-1, 1e-3, 12}.values(false));
    auto direct = newton_continue(s.jetd, s.frame, {1e-3});
    REQUIRE(stepped.all_converged);
    REQUIRE(direct.all_converged);
    CHECK((stepped.samples.back().y - direct.samples.back().y).norm() < 1e-10);
}

TEST_CASE("level sets: center point fixed, exact solutions, O(eps) corrections") {
    auto s = make_setup(testsup::pitchfork_map(), testsup::pitchfork_curve(), 1);
    // n_{k+1} = 0: the center line is its own level point.
    auto center = level_set(s.jetd, s.frame, 0.1, Eigen::VectorXd::Zero(2));
    CHECK(center.converged);
    CHECK(center.y.norm() == 0.0);
    // The pitchfork curve solves G = 0, so its level set is the solution set.
    Eigen::VectorXd dir = 0.3 * s.frame.bottom_kernel().col(0);
    std::vector<double> eps, corr;
    for (double e : EpsGrid{1e-1, 1e-3, 15}.values()) {
        auto pt = level_set(s.jetd, s.frame, e, dir);
        REQUIRE(pt.converged);
        CHECK(std::abs(s.jetd.eval(pt.z)(0)) < 1e-12);
        eps.push_back(e);
        corr.push_back(pt.y.norm());
    }
    auto fit = fit_slope(eps, corr);
    CHECK(fit.slope >= 0.9);  // corrections shrink at least linearly in eps
}

TEST_CASE("parameter directions: solutions move with p as eps^{k+1}/(k+1)! p") {
    // Pitchfork with a dummy third variable: P_2 = span{e3}.
    MapJet<Rational> jet(3, 1);
    jet.add_monomial(0, {1, 1, 0}, Rational(1));
    jet.add_monomial(0, {0, 3, 0}, Rational(-1));
    CurveJet<Rational> curve(3);
    curve.set_coefficient(1, rvec({0, 1, 0}));
    curve.set_coefficient(2, rvec({2, 0, 0}));
    auto res = build_resolution<Rational>(jet, curve, 1);
    REQUIRE(res.transversal);
    CHECK(res.p_basis.cols() == 1);
    ConeFrame frame(res, jet, curve);
    auto jetd = jet.cast<double>();
    Eigen::VectorXd p = 0.5 * frame.p_basis().col(0);
    auto with_p = newton_continue(jetd, frame, {0.1}, p);
    auto without = newton_continue(jetd, frame, {0.1});
    REQUIRE(with_p.all_converged);
    REQUIRE(without.all_converged);
    Eigen::VectorXd shift = with_p.samples[0].z - without.samples[0].z;
    Eigen::VectorXd expect = (0.1 * 0.1 / 2.0) * p;
    CHECK((shift - expect).norm() < 1e-12);
}

TEST_CASE("linearization family coefficients match the jacobian along the curve") {
    // Exact check: sum_i eps^i C_i equals G'[z0(eps)] for polynomial data.
    auto jet = testsup::quartic_map();
    auto curve = testsup::quartic_secondary_curve();
    Rational eps(1, 5);
    RatMatrix total = RatMatrix::Zero(1, 2);
    Rational pw = 1;
    for (int i = 0; i <= 30; ++i) {
        total += pw * linearization_coefficient<Rational>(jet, curve, i);
        pw *= eps;
    }
    CHECK(total == RatMatrix(jet.jacobian(curve.eval(eps))));
}

TEST_CASE("generalized-eigenvalue verification: level-set tangents and P^k") {
    // With U = N^c and V = N_{k+1}: the inverse-norm law is the det/inverse
    // trace; here the level-set tangent is annihilated by G'[z0(eps)] and the
    // degree-k Taylor family P^k kills it to order k+1 while staying
    // invertible on U with an eps^{-k} inverse.
    auto pf_jet = testsup::pitchfork_map();
    auto pf_curve = testsup::pitchfork_curve();
    auto res = build_resolution<Rational>(pf_jet, pf_curve, 1);
    ConeFrame frame(res, pf_jet, pf_curve);
    auto jetd = pf_jet.cast<double>();
    const int k = 1;
    std::vector<Eigen::MatrixXd> coeffs;
    for (int i = 0; i <= k; ++i)
        coeffs.push_back(to_double(
            RatMatrix(linearization_coefficient<Rational>(pf_jet, pf_curve, i))));
    Eigen::VectorXd dir = frame.bottom_kernel().col(0);
    std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> tangent_ratio, taylor_ratio, sigma_min;
    for (double e : eps_list) {
        // Finite-difference tangent of the level set in the V-direction.
        double delta = 1e-6;
        auto a = level_set(jetd, frame, e, delta * dir);
        REQUIRE(a.converged);
        Eigen::VectorXd tangent = (a.z - frame.curve_point(e)) / delta;
        Eigen::MatrixXd gz = jetd.jacobian(frame.curve_point(e));
        tangent_ratio.push_back((gz * tangent).norm() / (gz.norm() * tangent.norm()));
        Eigen::MatrixXd taylor = coeffs[0];
        double pw = 1;
        for (int i = 1; i <= k; ++i) {
            pw *= e;
            taylor += pw * coeffs[i];
        }
        taylor_ratio.push_back((taylor * tangent).norm() /
                               std::max(1e-300, taylor.norm() * tangent.norm()));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(taylor * frame.complement_stack());
        sigma_min.push_back(svd.singularValues().minCoeff());
    }
    // (3.16)/(3.18): ratios decay at least linearly in eps (FD noise allowed).
    double c16 = 2 * tangent_ratio.front() / eps_list.front();
    double c18 = 2 * taylor_ratio.front() / eps_list.front();
    for (size_t i = 0; i < eps_list.size(); ++i) {
        CHECK(tangent_ratio[i] <= c16 * eps_list[i] + 1e-6);
        CHECK(taylor_ratio[i] <= c18 * eps_list[i] + 1e-6);
    }
    // (3.17): sigma_min(P^k|_U) ~ eps^k, so the U-inverse grows like eps^-k.
    auto fit = fit_slope(eps_list, sigma_min);
    CHECK(std::abs(fit.slope - k) < 0.1);
}

TEST_CASE("taylor extraction recovers known coefficients") {
    std::vector<double> eps;
    std::vector<Eigen::VectorXd> vals;
    for (double e : EpsGrid{1e-1, 1e-3, 12}.values()) {
        eps.push_back(e);
        Eigen::VectorXd v(2);
        v << 3 * e - 2 * e * e, 0.5 * e * e * e;
        vals.push_back(v);
    }
    auto coeffs = extract_taylor_coefficients(eps, vals, 3);
    CHECK(std::abs(coeffs[0](0) - 3.0) < 1e-9);
    CHECK(std::abs(coeffs[1](0) + 2.0) < 1e-8);
    CHECK(std::abs(coeffs[0](1)) < 1e-9);
    CHECK(std::abs(coeffs[2](1) - 0.5) < 1e-7);
}
