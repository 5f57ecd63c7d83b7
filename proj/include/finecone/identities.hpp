#pragma once

#include "finecone/analysis.hpp"

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace finecone {

/// Exact identity checks (zero tolerance) used by the verification front
/// door and by per-problem reports. Every check returns true only on exact
/// equality of rationals.

struct IdentityOutcome {
    std::string name;
    bool pass = true;
    bool skipped = false;
    std::string detail;
};

namespace detail {

inline RatMatrix embed_slot(const RatMatrix& basis, int slot, int count, int n) {
    RatMatrix out = RatMatrix::Zero(static_cast<Eigen::Index>(n) * count, basis.cols());
    out.middleRows(static_cast<Eigen::Index>(n) * slot, n) = basis;
    return out;
}

inline RatMatrix hcat(const RatMatrix& a, const RatMatrix& b) {
    RatMatrix out(a.rows() ? a.rows() : b.rows(), a.cols() + b.cols());
    out.leftCols(a.cols()) = a;
    out.rightCols(b.cols()) = b;
    return out;
}

inline bool spans_match(const RatMatrix& a, const RatMatrix& b) {
    if (a.rows() != b.rows()) return false;
    int ra = rank<Rational>(a), rb = rank<Rational>(b);
    return ra == rb && rank<Rational>(hcat(a, b)) == ra;
}

}  // namespace detail

/// Lemma 1 (i): N[Delta^k] = R[M^{2k+1}] on N_1 x ... x N_k.
template <class Scalar>
bool identity_kernel_mix(const MapJet<Scalar>& jet, const Resolution<Scalar>& res) {
    auto sys = delta_system<Scalar>(jet, res.zbar, res.k);
    RatMatrix kernel = kernel_basis<Scalar>(sys.delta);
    RatMatrix image(static_cast<Eigen::Index>(res.n) * res.k, 0);
    for (int i = 1; i <= res.k; ++i)
        image = detail::hcat(
            image, RatMatrix(res.mix() * detail::embed_slot(res.levels[i - 1].kernel,
                                                            i - 1, res.k, res.n)));
    return detail::spans_match(kernel, image);
}

/// Lemma 1 (ii): W^{2k+1} Mhat = [Sbar_1|...|Sbar_{k+1}] C^{2k+1}.
template <class Scalar>
bool identity_stage_row(const MapJet<Scalar>& jet, const Resolution<Scalar>& res) {
    auto sys = delta_system<Scalar>(jet, res.zbar, res.k);
    Matrix<Scalar> lhs = sys.w_row * res.cone_mix;
    Matrix<Scalar> rhs = scalar_cast<Scalar>(Rational(factorial(2 * res.k + 1))) *
                         res.leading_operator();
    return lhs == rhs;
}

/// Lemma 1 (iii): the stage-row kernel on N_0 x..x N_k is the elimination
/// image on N_1 x..x N_{k+1}.
template <class Scalar>
bool identity_elimination_kernel(const Resolution<Scalar>& res) {
    const int n = res.n, k = res.k;
    RatMatrix cols(res.m, 0);
    std::vector<RatMatrix> bases;
    for (int i = 0; i <= k; ++i) {
        RatMatrix nb = (i == 0) ? RatMatrix(RatMatrix::Identity(n, n))
                                : res.levels[i - 1].kernel;
        bases.push_back(nb);
        cols = detail::hcat(cols, RatMatrix(res.levels[i].raw_op * nb));
    }
    RatMatrix kcoords = kernel_basis<Rational>(cols);
    RatMatrix lhs(static_cast<Eigen::Index>(n) * (k + 1), kcoords.cols());
    for (Eigen::Index c = 0; c < kcoords.cols(); ++c) {
        Eigen::Index off = 0;
        for (int i = 0; i <= k; ++i) {
            lhs.block(static_cast<Eigen::Index>(n) * i, c, n, 1) =
                bases[i] * kcoords.block(off, c, bases[i].cols(), 1);
            off += bases[i].cols();
        }
    }
    RatMatrix rhs(static_cast<Eigen::Index>(n) * (k + 1), 0);
    for (int j = 1; j <= k + 1; ++j)
        rhs = detail::hcat(
            rhs, RatMatrix(res.elim * detail::embed_slot(res.levels[j - 1].kernel, j - 1,
                                                         k + 1, n)));
    return detail::spans_match(lhs, rhs);
}

/// Lemma 1 (iv): M^{2k+1} D = D (a^{2k+1}; M^{2k+1} A^{2k+1}) cancelled.
template <class Scalar>
bool identity_mix_scaling(const Resolution<Scalar>& res) {
    const int n = res.n, k = res.k;
    auto top = scaled_elim<Scalar>(res.elim, n, 2 * k + 1);
    Matrix<Scalar> inner(static_cast<Eigen::Index>(n) * (k + 1),
                         static_cast<Eigen::Index>(n) * k);
    inner.topRows(n) = top.alpha;
    inner.bottomRows(static_cast<Eigen::Index>(n) * k) = res.mix() * top.lower;
    Matrix<Scalar> cancelled = inner.topRows(static_cast<Eigen::Index>(n) * k);
    auto dd = d_diagonal(2 * k + 1);
    Matrix<Scalar> lhs = res.mix();
    Matrix<Scalar> rhs = cancelled;
    for (int b = 0; b < k; ++b) {
        lhs.middleCols(static_cast<Eigen::Index>(n) * b, n) *= scalar_cast<Scalar>(dd[b + 1]);
        rhs.middleRows(static_cast<Eigen::Index>(n) * b, n) *= scalar_cast<Scalar>(dd[b + 1]);
    }
    return lhs == rhs;
}

/// Lemma 1 (v): 2k-approximation puts z-bar_l into the bottom kernel.
template <class Scalar>
bool identity_leading_in_bottom(const Resolution<Scalar>& res,
                                const CurveJet<Scalar>& curve) {
    Subspace<Scalar> bottom{res.levels.back().kernel};
    return bottom.contains(curve.coefficient(res.l));
}

/// (5.12) upper triangularity with identity diagonal and (5.13) invertibility.
template <class Scalar>
bool identity_mix_triangular(const Resolution<Scalar>& res) {
    const int n = res.n, k = res.k;
    const Matrix<Scalar>& mix = res.mix();
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
            Matrix<Scalar> block = mix.block(static_cast<Eigen::Index>(n) * r,
                                             static_cast<Eigen::Index>(n) * c, n, n);
            if (r == c && !(block == Matrix<Scalar>(Matrix<Scalar>::Identity(n, n))))
                return false;
            if (c < r && !block.isZero()) return false;
        }
    return rank<Scalar>(mix) == mix.rows();
}

/// Oracle equivalence: Delta/I and W/R assemblies against compose_curve.
template <class Scalar>
bool identity_oracle_equivalence(const MapJet<Scalar>& jet,
                                 const std::vector<Vector<Scalar>>& z, int k) {
    const int n = jet.input_dim(), m = jet.output_dim();
    CurveJet<Scalar> curve(n);
    for (size_t i = 0; i < z.size(); ++i) curve.set_coefficient(static_cast<int>(i + 1), z[i]);
    auto sys = delta_system<Scalar>(jet, z, k);
    auto T = compose_curve<Scalar>(jet, curve, 2 * k + 1);
    Vector<Scalar> stacked(static_cast<Eigen::Index>(n) * k);
    for (int c = 0; c < k; ++c)
        stacked.segment(static_cast<Eigen::Index>(n) * c, n) = z[2 * k - 1 - c];
    Vector<Scalar> rhs = sys.delta * stacked + sys.inhomog;
    for (int r = 0; r < k; ++r)
        if (!(T[2 * k - 1 - r] ==
              Vector<Scalar>(rhs.segment(static_cast<Eigen::Index>(m) * r, m))))
            return false;
    Vector<Scalar> odd(static_cast<Eigen::Index>(n) * (k + 1));
    for (int c = 0; c <= k; ++c)
        odd.segment(static_cast<Eigen::Index>(n) * c, n) = z[2 * k - c];
    return T[2 * k] == Vector<Scalar>(sys.w_row * odd + sys.r_tail);
}

/// Hurwitz two-way equality (2.6)-(2.7) against the oracle.
template <class Scalar>
bool identity_hurwitz(const MapJet<Scalar>& jet, const CurveJet<Scalar>& curve, int k,
                      int l) {
    auto T = compose_curve<Scalar>(jet, curve, 2 * k + 1 + l);
    return hurwitz_high_order<Scalar>(jet, curve, k, l) == T[2 * k + l];
}

/// Scheme identities (7.1)-(7.3) plus the closed binomial form.
inline bool identity_schemes(int max_m = 40) {
    for (int m = 0; m <= max_m; ++m) {
        if (d_coeff(m, 1) != 1 || c_coeff(m, 1) != 1) return false;
        for (int l = 1; 2 * l - 2 <= m; ++l)
            if (c_coeff(m, l) != c_coeff_closed(m, l)) return false;
    }
    for (int m = 1; 2 * m + 1 <= max_m; ++m)
        for (int j = 0; j <= m - 1; ++j) {
            if (d_coeff(2 * m, 2 + j) / d_coeff(2 * m - 1, 1 + j) != d_coeff(2 * m, 2))
                return false;
            if (d_coeff(2 * m + 1, 2 + j) / d_coeff(2 * m, 1 + j) !=
                d_coeff(2 * m + 1, 2))
                return false;
        }
    for (int m = 2; 2 * m + 1 <= max_m; ++m)
        for (int j = 0; j <= m - 2; ++j)
            if (d_coeff(2 * m + 1, 3 + j) / d_coeff(2 * m - 1, 1 + j) !=
                Rational(d_coeff(2 * m, 2) * d_coeff(2 * m + 1, 2)))
                return false;
    return true;
}

/// Operator ladders (7.4)-(7.6).
template <class Scalar>
bool identity_ladders(const MapJet<Scalar>& jet, const std::vector<Vector<Scalar>>& z,
                      int m_idx) {
    const int n = jet.input_dim(), m = jet.output_dim();
    for (int j = 0; j <= m_idx - 1; ++j) {
        Matrix<Scalar> lhs =
            w_operator<Scalar>(jet, z, 2 * m_idx + 1, 2 * m_idx + 1 - j, m_idx);
        Matrix<Scalar> rhs =
            w_operator<Scalar>(jet, z, 2 * m_idx, 2 * m_idx - j, m_idx - 1) *
            scalar_cast<Scalar>(d_coeff(2 * m_idx, j + 1));
        if (!(lhs == Matrix<Scalar>(rhs))) return false;
    }
    {
        Matrix<Scalar> lhs = w_operator<Scalar>(jet, z, 2 * m_idx + 1, m_idx + 1, m_idx);
        Matrix<Scalar> wm = w_operator<Scalar>(jet, z, 2 * m_idx, m_idx, m_idx - 1);
        Matrix<Scalar> g2 = Matrix<Scalar>::Zero(m, n);
        const auto& form2 = jet.form(2);
        if (!form2.is_zero()) {
            std::vector<Vector<Scalar>> args{z[m_idx - 1], Vector<Scalar>::Zero(n)};
            for (int c = 0; c < n; ++c) {
                args[1] = Vector<Scalar>::Zero(n);
                args[1](c) = Scalar(1);
                g2.col(c) = apply_form<Scalar>(form2, args);
            }
        }
        Rational quad = Rational(factorial(2 * m_idx)) /
                        (Rational(factorial(m_idx)) * Rational(factorial(m_idx)));
        Matrix<Scalar> rhs = (wm + scalar_cast<Scalar>(quad) * g2) *
                             scalar_cast<Scalar>(d_coeff(2 * m_idx, m_idx + 1));
        if (!(lhs == rhs)) return false;
    }
    for (int j = 0; j <= m_idx - 1; ++j) {
        Matrix<Scalar> lhs =
            w_operator<Scalar>(jet, z, 2 * m_idx, 2 * m_idx - j, m_idx - 1);
        Matrix<Scalar> rhs =
            w_operator<Scalar>(jet, z, 2 * m_idx - 1, 2 * m_idx - 1 - j, m_idx - 1) *
            scalar_cast<Scalar>(d_coeff(2 * m_idx - 1, j + 1));
        if (!(lhs == Matrix<Scalar>(rhs))) return false;
    }
    return true;
}

/// Per-instance suite: every exact law the resolution must satisfy.
template <class Scalar>
std::vector<IdentityOutcome> run_instance_identities(const MapJet<Scalar>& jet,
                                                     const CurveJet<Scalar>& curve,
                                                     const Resolution<Scalar>& res) {
    std::vector<IdentityOutcome> out;
    auto add = [&](const std::string& name, bool pass) {
        out.push_back({name, pass, false, ""});
    };
    if (res.degenerate_regular) {
        out.push_back({"instance-suite", true, true, "regular point, no cone laws"});
        return out;
    }
    add("lemma1.i kernel = mix image", identity_kernel_mix<Scalar>(jet, res));
    add("lemma1.ii stage row scaling", identity_stage_row<Scalar>(jet, res));
    add("lemma1.iii elimination kernel", identity_elimination_kernel<Scalar>(res));
    add("lemma1.iv mix diagonal scaling", identity_mix_scaling<Scalar>(res));
    {
        auto app = approximation_order<Scalar>(jet, curve, res.k);
        IdentityOutcome v{"lemma1.v leading coefficient", true, false, ""};
        if (app.holds)
            v.pass = identity_leading_in_bottom<Scalar>(res, curve);
        else {
            v.skipped = true;
            v.detail = "needs 2k-approximation";
        }
        out.push_back(v);
    }
    add("mix triangular + invertible", identity_mix_triangular<Scalar>(res));
    add("low-order gamma identity",
        gamma_identity_check<Scalar>(jet, res.zbar, res.k).holds);
    return out;
}

/// Seeded random-instance verification run.
struct VerifyOptions {
    int k_max = 3;
    int count = 100;
    std::uint64_t seed = 0;
    int dims_min = 2;
    int dims_max = 4;
};

struct VerifyReport {
    std::vector<IdentityOutcome> totals;  // aggregated pass/fail per identity
    int instances = 0;
    bool all_pass = true;
    std::string first_counterexample;
};

namespace detail {

inline Rational verify_rational(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-3, 3);
    std::uniform_int_distribution<int> den(1, 3);
    return Rational(num(rng), den(rng));
}

inline MapJet<Rational> verify_jet(std::mt19937_64& rng, int n, int m, int order,
                                   int defect) {
    MapJet<Rational> jet(n, m);
    int r = std::max(0, std::min(n, m) - defect);
    RatMatrix a = RatMatrix::Zero(m, r), b = RatMatrix::Zero(r, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < r; ++j) a(i, j) = verify_rational(rng);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = verify_rational(rng);
    RatMatrix lin = a * b;
    for (int c = 0; c < m; ++c)
        for (int j = 0; j < n; ++j)
            if (lin(c, j) != 0) {
                MultiIndex mi(n, 0);
                mi[j] = 1;
                jet.add_monomial(c, mi, lin(c, j));
            }
    std::uniform_int_distribution<int> var(0, n - 1);
    for (int beta = 2; beta <= order; ++beta) {
        int count = 2 + static_cast<int>(rng() % 3);
        for (int t = 0; t < count; ++t) {
            MultiIndex mi(n, 0);
            for (int e = 0; e < beta; ++e) mi[var(rng)]++;
            jet.add_monomial(static_cast<int>(rng() % m), mi, verify_rational(rng));
        }
    }
    return jet;
}

inline std::string dump_instance(const MapJet<Rational>& jet,
                                 const CurveJet<Rational>& curve, int k,
                                 const std::string& which) {
    std::ostringstream s;
    s << "identity '" << which << "' failed at k=" << k << ", n=" << jet.input_dim()
      << ", m=" << jet.output_dim() << "; curve coefficients:";
    for (int i = 1; i <= curve.max_index(); ++i)
        s << " z" << i << "=" << curve.coefficient(i).transpose();
    return s.str();
}

}  // namespace detail

inline VerifyReport run_verification(const VerifyOptions& opts) {
    VerifyReport rep;
    std::mt19937_64 rng(opts.seed);
    auto tally = [&](const std::string& name, bool pass, const MapJet<Rational>& jet,
                     const CurveJet<Rational>& curve, int k) {
        for (auto& t : rep.totals) {
            if (t.name == name) {
                if (!pass) t.pass = false;
                goto done;
            }
        }
        rep.totals.push_back({name, pass, false, ""});
    done:
        if (!pass) {
            rep.all_pass = false;
            if (rep.first_counterexample.empty())
                rep.first_counterexample = detail::dump_instance(jet, curve, k, name);
        }
    };

    if (!identity_schemes()) {
        rep.totals.push_back({"scheme identities (7.1)-(7.3) + closed form", false});
        rep.all_pass = false;
        rep.first_counterexample = "scheme table corrupted";
    } else {
        rep.totals.push_back({"scheme identities (7.1)-(7.3) + closed form", true});
    }

    std::uniform_int_distribution<int> dims(opts.dims_min, opts.dims_max);
    for (int i = 0; i < opts.count; ++i) {
        ++rep.instances;
        int k = 1 + static_cast<int>(rng() % opts.k_max);
        int n = dims(rng), m = dims(rng);
        auto jet = detail::verify_jet(rng, n, m, 2 * k + 2 + 3, 1 + static_cast<int>(rng() % 2));
        std::vector<RatVector> z;
        for (int t = 0; t < 2 * k + 1 + 3; ++t) {
            RatVector v(n);
            for (int j = 0; j < n; ++j) v(j) = detail::verify_rational(rng);
            z.push_back(v);
        }
        if (z[0].isZero()) z[0](0) = 1;
        CurveJet<Rational> curve(n);
        for (size_t t = 0; t < z.size(); ++t)
            curve.set_coefficient(static_cast<int>(t + 1), z[t]);
        CurveJet<Rational> base(n);
        for (int t = 1; t <= k; ++t) base.set_coefficient(t, z[t - 1]);

        tally("oracle equivalence W/R/Delta/I",
              identity_oracle_equivalence<Rational>(jet, z, k), jet, curve, k);
        tally("gamma identity (2.5)",
              gamma_identity_check<Rational>(jet, z, k).holds, jet, curve, k);
        for (int l = 0; l <= 3; ++l)
            tally("hurwitz (2.6)-(2.7), l=" + std::to_string(l),
                  identity_hurwitz<Rational>(jet, curve, k, l), jet, curve, k);
        if (k >= 2)
            tally("ladders (7.4)-(7.6)", identity_ladders<Rational>(jet, z, k), jet,
                  curve, k);

        Resolution<Rational> res;
        try {
            res = build_resolution<Rational>(jet, base, k);
        } catch (const CurveDirectionExhausted&) {
            continue;  // no cone around this draw; operator identities were run
        }
        tally("lemma1.i", identity_kernel_mix<Rational>(jet, res), jet, base, k);
        tally("lemma1.ii", identity_stage_row<Rational>(jet, res), jet, base, k);
        tally("lemma1.iii", identity_elimination_kernel<Rational>(res), jet, base, k);
        tally("lemma1.iv", identity_mix_scaling<Rational>(res), jet, base, k);
        tally("triangularity (5.12) + invertibility (5.13)",
              identity_mix_triangular<Rational>(res), jet, base, k);
    }
    return rep;
}

}  // namespace finecone
