#pragma once

#include "finecone/resolution.hpp"

#include <optional>
#include <string>
#include <vector>

namespace finecone {

/// ---- minimal transversality order ------------------------------------

enum class SearchStatus { Transversal, DegenerateRegular, NotTransversal, CurveExhausted };

template <class Scalar>
struct MinimalKResult {
    SearchStatus status = SearchStatus::NotTransversal;
    int k = -1;
    std::optional<Resolution<Scalar>> resolution;
    std::vector<int> range_dims;  // dim R_i per stage actually built
    int achieved_sum = 0;
    int exhausted_stage = 0;

    bool found() const {
        return status == SearchStatus::Transversal ||
               status == SearchStatus::DegenerateRegular;
    }
};

/// Smallest k <= k_max with R_1 + ... + R_{k+1} = B-bar (and k >= leading
/// index l). Saturation already at stage 1 is the regular case k = 0.
template <class Scalar>
MinimalKResult<Scalar> find_minimal_k(const MapJet<Scalar>& jet,
                                      const CurveJet<Scalar>& curve, int k_max) {
    auto lopt = curve.leading_index();
    if (!lopt) throw std::invalid_argument("find_minimal_k: zero curve");
    const int l = *lopt;
    if (k_max < l) throw std::invalid_argument("find_minimal_k: k_max below leading index");

    MinimalKResult<Scalar> out;
    ResolutionBuilder<Scalar> builder(jet, curve);
    while (!builder.saturated() && builder.stages() < k_max + 1) builder.add_stage();
    for (const auto& lv : builder.levels()) out.range_dims.push_back(lv.range_dim());
    out.achieved_sum = builder.range_sum();
    if (!builder.saturated()) {
        out.status = SearchStatus::NotTransversal;
        return out;
    }
    const int k_sat = builder.stages() - 1;
    if (k_sat == 0) {
        out.status = SearchStatus::DegenerateRegular;
        out.k = 0;
        out.resolution = builder.finalize(0);
        return out;
    }
    try {
        out.k = std::max(k_sat, l);  // the paper requires l <= k
        out.resolution = builder.finalize(out.k);
        out.status = SearchStatus::Transversal;
    } catch (const CurveDirectionExhausted& e) {
        out.status = SearchStatus::CurveExhausted;
        out.exhausted_stage = e.stage;
    }
    return out;
}

/// chi = 1 dim(N_2^c) + ... + k dim(N_{k+1}^c).
template <class Scalar>
int chi(const Resolution<Scalar>& res) {
    int total = 0;
    for (int stage = 2; stage <= res.k + 1; ++stage)
        total += (stage - 1) * res.complement_dim(stage);
    return total;
}

/// ---- approximation order ----------------------------------------------

struct ApproximationReport {
    int target = 0;        // 2k
    bool holds = false;    // T^1 = ... = T^{2k} = 0 exactly
    std::optional<int> first_nonzero;  // smallest i with T^i != 0 (scanned range)
    bool exact_zero = false;           // G[z0(eps)] vanishes identically
    std::optional<int> vanish_order;   // exact order of G[z0(eps)] when polynomial
};

/// Exact check of T^1 = ... = T^{2k} = 0, plus the exact vanishing order of
/// the composed polynomial (curve and map are polynomial by construction).
template <class Scalar>
ApproximationReport approximation_order(const MapJet<Scalar>& jet,
                                        const CurveJet<Scalar>& curve, int k) {
    ApproximationReport rep;
    rep.target = 2 * k;
    const int full = std::max(rep.target, jet.degree() * std::max(curve.max_index(), 1));
    const int scan = jet.exact_polynomial() ? full : std::min(full, *jet.truncation_order());
    auto T = compose_curve<Scalar>(jet, curve, scan);
    rep.holds = true;
    for (int i = 1; i <= std::min(rep.target, scan); ++i) {
        if (!T[i - 1].isZero()) {
            rep.holds = false;
            break;
        }
    }
    for (int i = 1; i <= scan; ++i) {
        if (!T[i - 1].isZero()) {
            rep.first_nonzero = i;
            break;
        }
    }
    if (jet.exact_polynomial()) {
        if (!rep.first_nonzero)
            rep.exact_zero = true;  // the curve solves G exactly
        else
            rep.vanish_order = rep.first_nonzero;
    }
    return rep;
}

/// ---- secondary bifurcation verdict --------------------------------------

enum class Verdict { Bifurcation, Inconclusive, NotApplicable };

struct VerdictReport {
    Verdict verdict = Verdict::NotApplicable;
    std::string reason;
};

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Bifurcation: return "bifurcation";
        case Verdict::Inconclusive: return "inconclusive";
        default: return "not-applicable";
    }
}

/// Corollary-2 style verdict. Structural preconditions (real field, minimal
/// transversal cone shaped with P_{k+1} = 0 and a unique curve direction,
/// 2k-approximation) are enforced rather than assumed.
template <class Scalar>
VerdictReport bifurcation_verdict(const Resolution<Scalar>& res, FieldKind field,
                                  bool approximation_holds, int chi_value) {
    VerdictReport rep;
    if (field != FieldKind::Real) {
        rep.reason = "degree logic requires the real field";
        return rep;
    }
    if (res.degenerate_regular) {
        rep.reason = "regular point: implicit function theorem case, no cone";
        return rep;
    }
    if (!res.transversal) {
        rep.reason = "cone is not transversal";
        return rep;
    }
    if (!approximation_holds) {
        rep.reason = "curve is not an approximation of order 2k";
        return rep;
    }
    if (res.p_basis.cols() != 0) {
        rep.reason = "extra parameter directions present (P_{k+1} != 0)";
        return rep;
    }
    if (res.bottom_kernel_dim() != 1) {
        rep.reason = "solution curve in the cone is not unique (dim N_{k+1} != 1)";
        return rep;
    }
    if (res.levels.back().range_dim() < 1) {
        rep.reason = "k not minimal for this cone (last range trivial)";
        return rep;
    }
    if (res.l % 2 == 0) {
        rep.verdict = Verdict::Inconclusive;
        rep.reason = "leading index even: the cylindrical construction fails";
        return rep;
    }
    if (chi_value % 2 == 0) {
        rep.verdict = Verdict::Inconclusive;
        rep.reason = "chi even: equal degree in both half-cones";
        return rep;
    }
    rep.verdict = Verdict::Bifurcation;
    rep.reason = "l odd and chi odd: degree changes sign across the half-cones";
    return rep;
}

/// mu = chi_1 + ... + chi_tau - ord(G) + 1. The Newton-polygon applicability
/// condition is the caller's assertion; it is recorded, not checked.
struct MilnorResult {
    int mu = 0;
    bool applicability_asserted = false;
};

inline MilnorResult milnor_from_branches(const std::vector<int>& chis, int map_order,
                                         bool applicability_asserted = true) {
    MilnorResult r;
    r.applicability_asserted = applicability_asserted;
    r.mu = 1 - map_order;
    for (int c : chis) r.mu += c;
    return r;
}

/// ---- arc prefix ----------------------------------------------------------

struct ArcObstruction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class Scalar>
struct ArcPrefix {
    // z_{k+1} .. z_{k+L} extending the curve with T^i = 0 through 2k+1.
    std::vector<Vector<Scalar>> coefficients;
    // Per slot: determined part (in N^c for the leading slots) and parameter.
    std::vector<Vector<Scalar>> determined;
    std::vector<Vector<Scalar>> parameters;
};

/// Solve the undetermined-coefficient block T^{k+1} = ... = T^{2k+1} = 0 for
/// z_{k+1}..z_{2k+1} with the given parameters q_j in N_{k+1} (default 0)
/// and every remaining free direction zeroed; return the first L slots.
template <class Scalar>
ArcPrefix<Scalar> arc_prefix(const MapJet<Scalar>& jet, const CurveJet<Scalar>& curve,
                             const Resolution<Scalar>& res, int L,
                             std::vector<Vector<Scalar>> q = {}) {
    if (!res.transversal || res.degenerate_regular)
        throw ArcObstruction("arc_prefix: transversal cone with k >= 1 required");
    const int n = res.n, m = res.m, k = res.k;
    if (L < 1 || L > k + 1)
        throw ArcObstruction("arc_prefix: 1 <= L <= k+1 supported (orders up to 2k+1)");
    for (auto& qi : q) {
        Subspace<Scalar> bottom{res.levels.back().kernel};
        if (!bottom.contains(qi))
            throw ArcObstruction("arc_prefix: parameter not in N_{k+1}");
    }
    q.resize(k + 1, Vector<Scalar>::Zero(n));

    std::vector<Vector<Scalar>> zb;
    for (int i = 1; i <= k; ++i) zb.push_back(curve.coefficient(i));
    auto sys = delta_system<Scalar>(jet, zb, k);

    // Particular solution of the even block Delta^k zeta = -I^k.
    auto zeta = solve_linear<Scalar>(sys.delta, Vector<Scalar>(-sys.inhomog));
    if (!zeta)
        throw ArcObstruction(
            "arc_prefix: inhomogeneity outside the range of the even block");

    const Eigen::Index NK = static_cast<Eigen::Index>(n) * (k + 1);
    // n-stack (n_0; ...; n_k), n_{i} in N_i, free parts v, complements u.
    // z-stack = (0; zeta) + Mhat * n-stack, rows (z_{2k+1}; ...; z_{k+1}).
    Vector<Scalar> zshift = Vector<Scalar>::Zero(NK);
    zshift.tail(static_cast<Eigen::Index>(n) * k) = *zeta;

    // Right-hand side of the odd row: W^{2k+1} z-stack + R^{2k+1} = 0.
    Vector<Scalar> rhs = -sys.r_tail - sys.w_row * zshift;

    // Scaled stage row on complements (invertible by transversality).
    Matrix<Scalar> lead_u(m, res.total_complement_dim());
    {
        Eigen::Index off = 0;
        for (int i = 0; i <= k; ++i) {
            const auto& u = res.levels[i].complement;
            lead_u.middleCols(off, u.cols()) =
                scalar_cast<Scalar>(c_coeff(2 * k + 1, i + 1)) *
                (res.levels[i].raw_op * u);
            off += u.cols();
        }
    }
    Matrix<Scalar> lead_u_inv = invert<Scalar>(lead_u);

    std::vector<Vector<Scalar>> v(k + 1, Vector<Scalar>::Zero(n));  // v_i in N_i
    Vector<Scalar> zstack;
    auto solve_with_free = [&]() {
        Vector<Scalar> rhs_v = rhs;
        for (int i = 1; i <= k + 1; ++i)
            rhs_v -= scalar_cast<Scalar>(c_coeff(2 * k + 1, i)) *
                     (res.levels[i - 1].raw_op * v[i - 1]);
        Vector<Scalar> ucoords = lead_u_inv * rhs_v;
        Vector<Scalar> nstack = Vector<Scalar>::Zero(NK);
        Eigen::Index off = 0;
        for (int i = 0; i <= k; ++i) {
            const auto& u = res.levels[i].complement;
            nstack.segment(static_cast<Eigen::Index>(n) * i, n) =
                u * ucoords.segment(off, u.cols()) + v[i];
            off += u.cols();
        }
        zstack = zshift + res.cone_mix * nstack;
    };
    solve_with_free();

    // Canonicalize bottom-up: slot z_{k+j} keeps exactly q_j as its
    // N_{k+1}-component (free directions beyond the parameters are zeroed).
    const int bottom_block = res.domain_frame.blocks() - 1;
    for (int pass = 0; pass <= k + 1; ++pass) {
        bool clean = true;
        for (int j = 1; j <= k + 1; ++j) {
            Eigen::Index row = static_cast<Eigen::Index>(n) * (k + 1 - j);
            Vector<Scalar> slot = zstack.segment(row, n);
            Vector<Scalar> have = res.domain_frame.project(bottom_block, slot);
            Vector<Scalar> delta = q[j - 1] - have;
            if (!delta.isZero()) {
                v[k + 1 - j] += delta;
                clean = false;
            }
        }
        if (clean) break;
        solve_with_free();
        if (pass == k + 1)
            throw std::logic_error("arc_prefix: canonicalization did not settle");
    }

    ArcPrefix<Scalar> out;
    for (int j = 1; j <= L; ++j) {
        Eigen::Index row = static_cast<Eigen::Index>(n) * (k + 1 - j);
        Vector<Scalar> slot = zstack.segment(row, n);
        out.coefficients.push_back(slot);
        out.parameters.push_back(q[j - 1]);
        out.determined.push_back(slot - q[j - 1]);
    }
    return out;
}

}  // namespace finecone
