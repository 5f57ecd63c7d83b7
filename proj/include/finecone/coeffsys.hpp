#pragma once

#include "finecone/multijet.hpp"
#include "finecone/schemes.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace finecone {

namespace detail {

/// Enumerate multi-indices (n_1..n_parts) with sum_tau tau*n_tau = weight,
/// in lexicographic order.
inline void for_each_weighted_composition(
    int weight, int parts, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> n(std::max(parts, 0), 0);
    std::function<void(int, int)> rec = [&](int tau, int remaining) {
        if (tau > parts) {
            if (remaining == 0) fn(n);
            return;
        }
        for (int count = 0; count * tau <= remaining; ++count) {
            n[tau - 1] = count;
            rec(tau + 1, remaining - count * tau);
        }
        n[tau - 1] = 0;
    };
    if (weight == 0) {
        fn(n);
        return;
    }
    if (parts <= 0) return;
    rec(1, weight);
}

}  // namespace detail

/// Coefficient operator of z_mu inside T^total, restricted to terms whose
/// remaining factors are z_1..z_parts (each z_tau entering n_tau times):
///   (1/mu!) sum_beta G0^beta sum_{1*n_1+..+parts*n_parts = total-mu}
///       total!/(n_1!..n_parts!) prod (z_tau/tau!)^{n_tau} [ . ]
/// Realized column-by-column: the free slot is filled with each basis vector.
template <class Scalar>
Matrix<Scalar> w_operator(const MapJet<Scalar>& jet,
                          const std::vector<Vector<Scalar>>& z, int total, int mu,
                          int parts) {
    if (mu < 1 || mu > total) throw std::invalid_argument("w_operator: mu out of band");
    if (parts > static_cast<int>(z.size()))
        throw std::invalid_argument("w_operator: missing curve coefficients");
    if (!jet.order_available(total))
        throw std::invalid_argument("w_operator: insufficient jet order");
    const int n = jet.input_dim(), m = jet.output_dim();
    Matrix<Scalar> out = Matrix<Scalar>::Zero(m, n);
    const Rational total_fact(factorial(total));
    const Rational mu_fact(factorial(mu));
    detail::for_each_weighted_composition(total - mu, parts, [&](const std::vector<int>& comp) {
        int beta = 1;
        for (int c : comp) beta += c;
        const SymForm<Scalar>& form = jet.form(beta);
        if (form.is_zero()) return;
        Rational factor = total_fact / mu_fact;
        for (int tau = 1; tau <= parts; ++tau) {
            if (comp[tau - 1] == 0) continue;
            factor /= Rational(factorial(comp[tau - 1]));
            Rational tf(factorial(tau));
            for (int e = 0; e < comp[tau - 1]; ++e) factor /= tf;
        }
        std::vector<Vector<Scalar>> args;
        args.reserve(beta);
        for (int tau = 1; tau <= parts; ++tau)
            for (int e = 0; e < comp[tau - 1]; ++e) args.push_back(z[tau - 1]);
        args.push_back(Vector<Scalar>::Zero(n));
        Scalar sf = scalar_cast<Scalar>(factor);
        for (int j = 0; j < n; ++j) {
            args.back() = Vector<Scalar>::Zero(n);
            args.back()(j) = Scalar(1);
            out.col(j) += sf * apply_form<Scalar>(form, args);
        }
    });
    return out;
}

/// Inhomogeneity: all terms of T^total built from z_1..z_parts alone.
template <class Scalar>
Vector<Scalar> r_inhomogeneity(const MapJet<Scalar>& jet,
                               const std::vector<Vector<Scalar>>& z, int total,
                               int parts) {
    if (parts > static_cast<int>(z.size()))
        throw std::invalid_argument("r_inhomogeneity: missing curve coefficients");
    if (!jet.order_available(total))
        throw std::invalid_argument("r_inhomogeneity: insufficient jet order");
    const int m = jet.output_dim();
    Vector<Scalar> out = Vector<Scalar>::Zero(m);
    const Rational total_fact(factorial(total));
    detail::for_each_weighted_composition(total, parts, [&](const std::vector<int>& comp) {
        int beta = 0;
        for (int c : comp) beta += c;
        if (beta == 0) return;
        const SymForm<Scalar>& form = jet.form(beta);
        if (form.is_zero()) return;
        Rational factor = total_fact;
        for (int tau = 1; tau <= parts; ++tau) {
            if (comp[tau - 1] == 0) continue;
            factor /= Rational(factorial(comp[tau - 1]));
            Rational tf(factorial(tau));
            for (int e = 0; e < comp[tau - 1]; ++e) factor /= tf;
        }
        std::vector<Vector<Scalar>> args;
        args.reserve(beta);
        for (int tau = 1; tau <= parts; ++tau)
            for (int e = 0; e < comp[tau - 1]; ++e) args.push_back(z[tau - 1]);
        out += scalar_cast<Scalar>(factor) * apply_form<Scalar>(form, args);
    });
    return out;
}

/// The assembled system of undetermined coefficients at order k:
///   (T^{2k}, ..., T^{k+1})^T = Delta^k (z_{2k}, ..., z_{k+1})^T + I^k
/// plus the top odd row T^{2k+1} = W^{2k+1} (z_{2k+1},...,z_{k+1})^T + R^{2k+1}.
template <class Scalar>
struct CoeffSystem {
    int k = 0;
    Matrix<Scalar> delta;       // (m k) x (n k), block upper triangular, G0^1 diagonal
    Vector<Scalar> inhomog;     // (m k)
    Matrix<Scalar> w_row;       // m x (n (k+1)): [W_{2k+1}^{2k+1} .. W_{k+1}^{2k+1}]
    Vector<Scalar> r_tail;      // m: R^{2k+1}(z_k..z_1)

    Matrix<Scalar> w_block(int i) const {  // 0-based from the left
        int n = static_cast<int>(w_row.rows() ? w_row.cols() / (k + 1) : 0);
        return w_row.middleCols(static_cast<Eigen::Index>(i) * n, n);
    }
};

template <class Scalar>
CoeffSystem<Scalar> delta_system(const MapJet<Scalar>& jet,
                                 const std::vector<Vector<Scalar>>& z, int k) {
    if (k < 1) throw std::invalid_argument("delta_system: k >= 1 required");
    if (static_cast<int>(z.size()) < k)
        throw std::invalid_argument("delta_system: need z_1..z_k");
    if (!jet.order_available(2 * k + 1))
        throw std::invalid_argument("delta_system: insufficient jet order");
    const int n = jet.input_dim(), m = jet.output_dim();
    CoeffSystem<Scalar> sys;
    sys.k = k;
    sys.delta = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(m) * k,
                                     static_cast<Eigen::Index>(n) * k);
    sys.inhomog = Vector<Scalar>::Zero(static_cast<Eigen::Index>(m) * k);
    // Row r <-> equation T^{2k+1-r}, column c <-> unknown z_{2k+1-c} (1-based).
    for (int r = 1; r <= k; ++r) {
        int total = 2 * k + 1 - r;
        for (int c = r; c <= k; ++c) {
            int mu = 2 * k + 1 - c;
            sys.delta.block(static_cast<Eigen::Index>(m) * (r - 1),
                            static_cast<Eigen::Index>(n) * (c - 1), m, n) =
                w_operator<Scalar>(jet, z, total, mu, std::min(k, c - r));
        }
        sys.inhomog.segment(static_cast<Eigen::Index>(m) * (r - 1), m) =
            r_inhomogeneity<Scalar>(jet, z, total, k);
    }
    sys.w_row = Matrix<Scalar>::Zero(m, static_cast<Eigen::Index>(n) * (k + 1));
    for (int c = 0; c <= k; ++c) {
        int mu = 2 * k + 1 - c;
        sys.w_row.middleCols(static_cast<Eigen::Index>(n) * c, n) =
            w_operator<Scalar>(jet, z, 2 * k + 1, mu, k);
    }
    sys.r_tail = r_inhomogeneity<Scalar>(jet, z, 2 * k + 1, k);
    return sys;
}

template <class Scalar>
struct GammaIdentityReport {
    bool holds = true;
    Vector<Scalar> deviation;  // stacked difference, zero when the identity holds
};

/// Exact check of the low-order identity
///   (T^k, ..., T^1)^T = (Gamma^k)^{-1} Delta^k(z_{k-1}..z_1) Gamma^k (z_k..z_1)^T.
template <class Scalar>
GammaIdentityReport<Scalar> gamma_identity_check(const MapJet<Scalar>& jet,
                                                 const std::vector<Vector<Scalar>>& z,
                                                 int k) {
    if (k < 1 || static_cast<int>(z.size()) < k)
        throw std::invalid_argument("gamma_identity_check: need z_1..z_k");
    const int n = jet.input_dim(), m = jet.output_dim();
    CurveJet<Scalar> curve(n);
    for (int i = 1; i <= k; ++i) curve.set_coefficient(i, z[i - 1]);
    auto T = compose_curve<Scalar>(jet, curve, k);

    auto sys = delta_system<Scalar>(jet, z, k);
    auto gamma = gamma_diagonal(k);
    Vector<Scalar> stacked(static_cast<Eigen::Index>(n) * k);
    for (int i = 0; i < k; ++i)
        stacked.segment(static_cast<Eigen::Index>(n) * i, n) =
            scalar_cast<Scalar>(gamma[i]) * z[k - 1 - i];
    Vector<Scalar> rhs = sys.delta * stacked;
    GammaIdentityReport<Scalar> report;
    report.deviation = Vector<Scalar>::Zero(static_cast<Eigen::Index>(m) * k);
    for (int i = 0; i < k; ++i) {
        Vector<Scalar> lhs = T[k - 1 - i];  // row i of (T^k .. T^1)
        Vector<Scalar> rhs_i =
            (Scalar(1) / scalar_cast<Scalar>(gamma[i])) *
            rhs.segment(static_cast<Eigen::Index>(m) * i, m);
        report.deviation.segment(static_cast<Eigen::Index>(m) * i, m) = lhs - rhs_i;
    }
    report.holds = report.deviation.isZero();
    return report;
}

/// eps^i coefficient operator of the linearization family G'[z0(eps)],
/// realized through the free-slot machinery: C_i = (mu!/m!) W_mu^m for any
/// m - mu = i with mu in the linear band (m = 2i+1, mu = i+1 here).
template <class Scalar>
Matrix<Scalar> linearization_coefficient(const MapJet<Scalar>& jet,
                                         const CurveJet<Scalar>& curve, int i) {
    std::vector<Vector<Scalar>> z;
    for (int t = 1; t <= std::max(i, 1); ++t) z.push_back(curve.coefficient(t));
    Rational scale = Rational(factorial(i + 1)) / Rational(factorial(2 * i + 1));
    return scalar_cast<Scalar>(scale) *
           w_operator<Scalar>(jet, z, 2 * i + 1, i + 1, i);
}

/// High-order coefficient via the extended Hurwitz formula:
///   T^{2k+1+l} = sum_{t=0..k} gamma_t^{2k+l} (dT^{2t}/dz_t) z_{2k+1+l-t}
///              + R_{2k+1+l}(z_{k+l}..z_1),
/// with dT^0/dz_0 = G0^1 and dT^{2t}/dz_t the partial derivative operator.
template <class Scalar>
Vector<Scalar> hurwitz_high_order(const MapJet<Scalar>& jet,
                                  const CurveJet<Scalar>& curve, int k, int l) {
    if (k < 1 || l < 0) throw std::invalid_argument("hurwitz_high_order: bad indices");
    const int total = 2 * k + 1 + l;
    if (!jet.order_available(total))
        throw std::invalid_argument("hurwitz_high_order: insufficient jet order");
    const int m = jet.output_dim();
    std::vector<Vector<Scalar>> z;
    for (int i = 1; i <= total; ++i) z.push_back(curve.coefficient(i));

    Vector<Scalar> out = Vector<Scalar>::Zero(m);
    for (int t = 0; t <= k; ++t) {
        // dT^{2t}/dz_t == w_operator(total=2t, mu=t, parts=t); for t=0 it is G0^1.
        Matrix<Scalar> partial =
            (t == 0) ? w_operator<Scalar>(jet, z, 1, 1, 0)
                     : w_operator<Scalar>(jet, z, 2 * t, t, t);
        out += scalar_cast<Scalar>(hurwitz_gamma(t, k, l)) * (partial * z[total - t - 1]);
    }
    out += r_inhomogeneity<Scalar>(jet, z, total, k + l);
    return out;
}

}  // namespace finecone
