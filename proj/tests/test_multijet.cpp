#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

using namespace finecone;
using testsup::rvec;

TEST_CASE("apply_form: identity jet is the identity") {
    SymForm<Rational> f(1, 2, 2);
    f.add_term({1, 0}, rvec({1, 0}));
    f.add_term({0, 1}, rvec({0, 1}));
    std::vector<RatVector> args{rvec({3, 4})};
    CHECK(apply_form<Rational>(f, args) == rvec({3, 4}));
}

TEST_CASE("apply_form: quartic piece of -x y^3 by iterated differentiation") {
    // D_a D_b D_c D_d (-x y^3) with a = e1, b = c = d = e2 expands to
    // -6 (d_x a_y b_y c_y + c_x a_y b_y d_y + b_x a_y c_y d_y + a_x b_y c_y d_y) = -6.
    auto jet = testsup::quartic_map();
    std::vector<RatVector> args{rvec({1, 0}), rvec({0, 1}), rvec({0, 1}), rvec({0, 1})};
    CHECK(apply_form<Rational>(jet.form(4), args) == rvec({Rational(-6)}));
    // Symmetry under argument permutations.
    std::vector<RatVector> perm{rvec({0, 1}), rvec({0, 1}), rvec({1, 0}), rvec({0, 1})};
    CHECK(apply_form<Rational>(jet.form(4), perm) == rvec({Rational(-6)}));
    // Consistency with the homogeneous normalization G0^4[v,..,v] = 4! P_4(v).
    RatVector v = rvec({Rational(2), Rational(-3)});
    std::vector<RatVector> same{v, v, v, v};
    CHECK(apply_form<Rational>(jet.form(4), same) ==
          RatVector(Rational(factorial(4)) * jet.form(4).eval(v)));
}

TEST_CASE("apply_form: zero form and error paths") {
    SymForm<Rational> zero(3, 2, 2);
    std::vector<RatVector> args{rvec({1, 2}), rvec({3, 4}), rvec({5, 6})};
    CHECK(apply_form<Rational>(zero, args).isZero());
    std::vector<RatVector> wrong{rvec({1, 2})};
    CHECK_THROWS_AS(apply_form<Rational>(zero, wrong), std::invalid_argument);
    std::vector<RatVector> baddim{rvec({1, 2, 3}), rvec({1, 2}), rvec({1, 2})};
    CHECK_THROWS_AS(apply_form<Rational>(zero, baddim), std::invalid_argument);
}

TEST_CASE("apply_form symmetry on random instances") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        int m = 2 + static_cast<int>(rng() % 3);
        auto jet = testsup::random_jet(rng, n, m, 4, 0);
        const auto& f = jet.form(3);
        std::vector<RatVector> args;
        for (int i = 0; i < 3; ++i) {
            RatVector v(n);
            for (int j = 0; j < n; ++j) v(j) = testsup::small_rational(rng);
            args.push_back(v);
        }
        auto base = apply_form<Rational>(f, args);
        std::vector<RatVector> perm{args[2], args[0], args[1]};
        CHECK(apply_form<Rational>(f, perm) == base);
        std::swap(perm[0], perm[1]);
        CHECK(apply_form<Rational>(f, perm) == base);
    }
}

TEST_CASE("compose_curve: first orders match the chain rule") {
    std::mt19937_64 rng(11);
    auto jet = testsup::random_jet(rng, 3, 2, 4, 0);
    auto curve = testsup::random_curve(rng, 3, 3);
    auto T = compose_curve<Rational>(jet, curve, 2);
    // T^1 = G0^1 z1.
    std::vector<RatVector> one{curve.coefficient(1)};
    CHECK(T[0] == apply_form<Rational>(jet.form(1), one));
    // T^2 = G0^1 z2 + G0^2 z1^2.
    std::vector<RatVector> two{curve.coefficient(1), curve.coefficient(1)};
    std::vector<RatVector> lin{curve.coefficient(2)};
    CHECK(T[1] == RatVector(apply_form<Rational>(jet.form(1), lin) +
                            apply_form<Rational>(jet.form(2), two)));
}

TEST_CASE("compose_curve equals exact interpolation of G[z0(eps)]") {
    // Independent oracle: evaluate the composed polynomial at enough exact
    // rational nodes and interpolate; eval_map never touches the series code.
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 9; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        int m = 2 + static_cast<int>(rng() % 3);
        const int max_order = (trial == 0) ? 2 : 4;
        const int M = (trial == 0) ? 9 : 3 + static_cast<int>(rng() % 4);
        auto jet = testsup::random_jet(rng, n, m, max_order, 0);
        auto curve = testsup::random_curve(rng, n, M);
        auto T = compose_curve<Rational>(jet, curve, M);
        const int full = jet.degree() * curve.max_index();
        RatMatrix vand(full + 1, full + 1);
        RatMatrix vals(full + 1, m);
        for (int r = 0; r <= full; ++r) {
            Rational eps(r + 1, 17);
            Rational pw = 1;
            for (int c = 0; c <= full; ++c) {
                vand(r, c) = pw;
                pw *= eps;
            }
            RatVector g = jet.eval(curve.eval(eps));
            for (int c = 0; c < m; ++c) vals(r, c) = g(c);
        }
        RatMatrix coef = invert<Rational>(vand) * vals;  // row i = [eps^i]
        Rational fact = 1;
        for (int i = 1; i <= M; ++i) {
            fact *= i;
            for (int c = 0; c < m; ++c) CHECK(T[i - 1](c) == Rational(fact * coef(i, c)));
        }
    }
}

TEST_CASE("compose_curve on the order-4 example: T^i = 0 through 23, T^24 = 24!") {
    auto jet = testsup::quartic_map();
    auto curve = testsup::quartic_primary_curve();
    auto T = compose_curve<Rational>(jet, curve, 24);
    for (int i = 1; i <= 23; ++i) CHECK(T[i - 1].isZero());
    CHECK(T[23](0) == Rational(factorial(24)));
}

TEST_CASE("compose_curve rejects insufficient jet order") {
    auto jet = testsup::quartic_map();
    jet.set_truncation_order(6);
    auto curve = testsup::quartic_primary_curve();
    CHECK_THROWS_AS(compose_curve<Rational>(jet, curve, 7), std::invalid_argument);
    CHECK_NOTHROW(compose_curve<Rational>(jet, curve, 6));
}

TEST_CASE("eval_map exact values") {
    auto jet = testsup::quartic_map();
    CHECK(jet.eval(rvec({1, 1})) == rvec({Rational(1)}));
    CHECK(jet.eval(rvec({0, 0})).isZero());
    // Curve point at eps = 1/2: G[(1/8, 1/16)] = 2^-24.
    auto curve = testsup::quartic_primary_curve();
    RatVector z = curve.eval(Rational(1, 2));
    CHECK(z == rvec({Rational(1, 8), Rational(1, 16)}));
    CHECK(jet.eval(z) == rvec({Rational(1, 16777216)}));
}

TEST_CASE("float evaluation agrees with exact within 1e-12 relative") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        int m = 2 + static_cast<int>(rng() % 2);
        auto jet = testsup::random_jet(rng, n, m, 5, 0);
        RatVector point(n);
        for (int j = 0; j < n; ++j)
            point(j) = Rational(static_cast<int>(rng() % 2000) - 1000, 1000 + rng() % 999);
        RatVector exact = jet.eval(point);
        Eigen::VectorXd approx = eval_map_float(jet, to_double(point));
        for (int c = 0; c < m; ++c) {
            double e = to_double(exact(c));
            CHECK(std::abs(approx(c) - e) <= 1e-12 * std::max(1.0, std::abs(e)));
        }
    }
}

TEST_CASE("curve jets: factorial convention and leading index") {
    std::vector<RatVector> taylor{rvec({0, 0}), rvec({0, 0}), rvec({1, 0}), rvec({0, 1})};
    auto c = CurveJet<Rational>::from_taylor(taylor);
    CHECK(c.leading_index() == 3);
    CHECK(c.coefficient(3) == rvec({Rational(6), Rational(0)}));
    CHECK(c.coefficient(4) == rvec({Rational(0), Rational(24)}));
    CHECK(c.coefficient(9).isZero());  // beyond the support
}

TEST_CASE("complex scalars are supported structurally") {
    using C = ComplexRational;
    MapJet<C> jet(2, 1);
    jet.add_monomial(0, {1, 1}, C(Rational(1), Rational(0)));
    jet.add_monomial(0, {0, 3}, C(Rational(-1), Rational(0)));
    CurveJet<C> curve(2);
    Vector<C> z1(2), z2(2);
    z1 << C(Rational(0)), C(Rational(0), Rational(1));  // (0, i)
    z2 << C(Rational(-2)), C(Rational(0));
    curve.set_coefficient(1, z1);
    curve.set_coefficient(2, z2);
    // G[(-eps^2, i eps)] = -eps^3 i - (i eps)^3 = i(-eps^3 + eps^3)... check by oracle.
    auto T = compose_curve<C>(jet, curve, 3);
    CHECK(T[0].isZero());
    CHECK(T[1].isZero());
    CHECK(T[2].isZero());
}
