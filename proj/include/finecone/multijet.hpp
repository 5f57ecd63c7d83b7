#pragma once

#include "finecone/scalar.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace finecone {

using MultiIndex = std::vector<int>;

inline int mi_degree(const MultiIndex& a) {
    int d = 0;
    for (int e : a) d += e;
    return d;
}

/// Homogeneous degree-beta piece P_beta of the map, stored as a monomial
/// table. The beta-th derivative of the map at 0 acts multilinearly via
/// iterated directional differentiation of P_beta, so that
/// G0^beta[v,...,v] = beta! * P_beta(v).
template <class Scalar>
class SymForm {
  public:
    SymForm() = default;
    SymForm(int order, int n, int m) : order_(order), n_(n), m_(m) {}

    int order() const { return order_; }
    int input_dim() const { return n_; }
    int output_dim() const { return m_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<MultiIndex, Vector<Scalar>>& terms() const { return terms_; }

    void add_term(const MultiIndex& exponents, const Vector<Scalar>& coeff) {
        if (static_cast<int>(exponents.size()) != n_ || coeff.size() != m_)
            throw std::invalid_argument("SymForm::add_term: shape mismatch");
        if (mi_degree(exponents) != order_)
            throw std::invalid_argument("SymForm::add_term: wrong monomial degree");
        auto it = terms_.find(exponents);
        if (it == terms_.end()) {
            if (!coeff.isZero()) terms_.emplace(exponents, coeff);
        } else {
            it->second += coeff;
            if (it->second.isZero()) terms_.erase(it);
        }
    }

    /// P_beta(v).
    Vector<Scalar> eval(const Vector<Scalar>& v) const {
        Vector<Scalar> out = Vector<Scalar>::Zero(m_);
        for (const auto& [mi, c] : terms_) {
            Scalar w = Scalar(1);
            for (int i = 0; i < n_; ++i)
                for (int e = 0; e < mi[i]; ++e) w *= v(i);
            out += w * c;
        }
        return out;
    }

    /// m x n Jacobian of P_beta at v.
    Matrix<Scalar> jacobian(const Vector<Scalar>& v) const {
        Matrix<Scalar> out = Matrix<Scalar>::Zero(m_, n_);
        for (const auto& [mi, c] : terms_) {
            for (int i = 0; i < n_; ++i) {
                if (mi[i] == 0) continue;
                Scalar w = Scalar(mi[i]);
                for (int j = 0; j < n_; ++j) {
                    int e = mi[j] - (j == i ? 1 : 0);
                    for (int r = 0; r < e; ++r) w *= v(j);
                }
                out.col(i) += w * c;
            }
        }
        return out;
    }

    bool operator==(const SymForm& other) const {
        if (order_ != other.order_ || n_ != other.n_ || m_ != other.m_) return false;
        if (terms_.size() != other.terms_.size()) return false;
        for (const auto& [mi, c] : terms_) {
            auto it = other.terms_.find(mi);
            if (it == other.terms_.end() || it->second != c) return false;
        }
        return true;
    }

  private:
    int order_ = 0;
    int n_ = 0;
    int m_ = 0;
    std::map<MultiIndex, Vector<Scalar>> terms_;
};

namespace detail {

// One directional derivative of a monomial table.
template <class Scalar>
std::map<MultiIndex, Vector<Scalar>> derive_table(
    const std::map<MultiIndex, Vector<Scalar>>& table, const Vector<Scalar>& dir) {
    std::map<MultiIndex, Vector<Scalar>> out;
    for (const auto& [mi, c] : table) {
        for (size_t i = 0; i < mi.size(); ++i) {
            if (mi[i] == 0) continue;
            MultiIndex lower = mi;
            --lower[i];
            Vector<Scalar> add = Scalar(mi[i]) * dir(static_cast<Eigen::Index>(i)) * c;
            auto it = out.find(lower);
            if (it == out.end())
                out.emplace(std::move(lower), std::move(add));
            else
                it->second += add;
        }
    }
    return out;
}

}  // namespace detail

/// Symmetric multilinear value G0^beta[args...]; exactly beta arguments.
template <class Scalar>
Vector<Scalar> apply_form(const SymForm<Scalar>& form,
                          std::span<const Vector<Scalar>> args) {
    if (static_cast<int>(args.size()) != form.order())
        throw std::invalid_argument("apply_form: expected exactly beta arguments");
    for (const auto& a : args)
        if (a.size() != form.input_dim())
            throw std::invalid_argument("apply_form: argument dimension mismatch");
    auto table = form.terms();
    for (const auto& a : args) table = detail::derive_table<Scalar>(table, a);
    MultiIndex zero(form.input_dim(), 0);
    auto it = table.find(zero);
    if (it == table.end()) return Vector<Scalar>::Zero(form.output_dim());
    return it->second;
}

template <class Scalar>
Vector<Scalar> apply_form(const SymForm<Scalar>& form,
                          const std::vector<Vector<Scalar>>& args) {
    return apply_form<Scalar>(form, std::span<const Vector<Scalar>>(args));
}

/// The map G as its exact homogeneous pieces. Input is restricted to
/// polynomials / truncated polynomials; when `exact_polynomial()` holds the
/// stored pieces describe G exactly and every derivative order is available
/// (pieces above the degree vanish identically).
template <class Scalar>
class MapJet {
  public:
    MapJet() = default;
    MapJet(int n, int m) : n_(n), m_(m) {}

    int input_dim() const { return n_; }
    int output_dim() const { return m_; }

    /// Highest order with a nonzero stored piece.
    int degree() const {
        int d = 0;
        for (const auto& [beta, f] : forms_)
            if (!f.is_zero()) d = std::max(d, beta);
        return d;
    }

    bool exact_polynomial() const { return !truncation_order_.has_value(); }
    std::optional<int> truncation_order() const { return truncation_order_; }
    void set_truncation_order(std::optional<int> q) { truncation_order_ = q; }

    /// Order available for compositions / derivatives.
    bool order_available(int order) const {
        return exact_polynomial() || order <= *truncation_order_;
    }

    const SymForm<Scalar>& form(int beta) const {
        if (beta < 1) throw std::invalid_argument("MapJet::form: beta must be positive");
        auto it = forms_.find(beta);
        if (it != forms_.end()) return it->second;
        auto& zero = zero_cache_[beta];
        if (zero.input_dim() != n_) zero = SymForm<Scalar>(beta, n_, m_);
        return zero;
    }

    void add_monomial(int component, const MultiIndex& exponents, const Scalar& coeff) {
        int beta = mi_degree(exponents);
        if (beta < 1)
            throw std::invalid_argument("MapJet: constant terms violate G[0] = 0");
        if (component < 0 || component >= m_)
            throw std::invalid_argument("MapJet: component out of range");
        auto it = forms_.find(beta);
        if (it == forms_.end())
            it = forms_.emplace(beta, SymForm<Scalar>(beta, n_, m_)).first;
        Vector<Scalar> c = Vector<Scalar>::Zero(m_);
        c(component) = coeff;
        it->second.add_term(exponents, c);
    }

    /// G[point]; exact for polynomials, truncated at the jet order otherwise.
    Vector<Scalar> eval(const Vector<Scalar>& point) const {
        if (point.size() != n_) throw std::invalid_argument("MapJet::eval: dimension mismatch");
        Vector<Scalar> out = Vector<Scalar>::Zero(m_);
        for (const auto& [beta, f] : forms_) out += f.eval(point);
        return out;
    }

    /// Jacobian G'[point], m x n.
    Matrix<Scalar> jacobian(const Vector<Scalar>& point) const {
        Matrix<Scalar> out = Matrix<Scalar>::Zero(m_, n_);
        for (const auto& [beta, f] : forms_) out += f.jacobian(point);
        return out;
    }

    template <class Target>
    MapJet<Target> cast() const {
        MapJet<Target> out(n_, m_);
        out.set_truncation_order(truncation_order_);
        for (const auto& [beta, f] : forms_)
            for (const auto& [mi, c] : f.terms())
                for (int j = 0; j < m_; ++j)
                    if (c(j) != Scalar(0)) out.add_monomial(j, mi, Target(c(j)));
        return out;
    }

    bool operator==(const MapJet& other) const {
        if (n_ != other.n_ || m_ != other.m_) return false;
        int d = std::max(degree(), other.degree());
        for (int beta = 1; beta <= d; ++beta)
            if (!(form(beta) == other.form(beta))) return false;
        return true;
    }

  private:
    int n_ = 0;
    int m_ = 0;
    std::map<int, SymForm<Scalar>> forms_;
    std::optional<int> truncation_order_;
    mutable std::map<int, SymForm<Scalar>> zero_cache_;
};

/// Curve coefficients in the factorial convention: the curve denotes
/// z0(eps) = sum_i eps^i * coeff(i) / i!, and leading_index() is the first
/// index with a nonzero coefficient.
template <class Scalar>
class CurveJet {
  public:
    CurveJet() = default;
    explicit CurveJet(int n) : n_(n) {}

    /// Build from plain Taylor coefficients c_i (z0 = sum eps^i c_i).
    static CurveJet from_taylor(const std::vector<Vector<Scalar>>& taylor) {
        if (taylor.empty()) throw std::invalid_argument("CurveJet: empty coefficient list");
        CurveJet c(static_cast<int>(taylor.front().size()));
        Rational fact = 1;
        for (size_t i = 0; i < taylor.size(); ++i) {
            fact *= static_cast<int>(i + 1);
            c.set_coefficient(static_cast<int>(i + 1),
                              scalar_cast<Scalar>(Rational(fact)) * taylor[i]);
        }
        return c;
    }

    int dim() const { return n_; }
    int max_index() const { return static_cast<int>(coeffs_.size()); }

    /// coeff(i) = z-bar_i; zero beyond the stored support (polynomial curve).
    Vector<Scalar> coefficient(int i) const {
        if (i < 1) throw std::invalid_argument("CurveJet: index must be >= 1");
        if (i > max_index()) return Vector<Scalar>::Zero(n_);
        return coeffs_[i - 1];
    }

    void set_coefficient(int i, const Vector<Scalar>& v) {
        if (v.size() != n_) throw std::invalid_argument("CurveJet: dimension mismatch");
        if (i < 1) throw std::invalid_argument("CurveJet: index must be >= 1");
        if (i > max_index()) coeffs_.resize(i, Vector<Scalar>::Zero(n_));
        coeffs_[i - 1] = v;
    }

    /// Smallest i with coeff(i) != 0; zero curve has no leading index.
    std::optional<int> leading_index() const {
        for (int i = 1; i <= max_index(); ++i)
            if (!coefficient(i).isZero()) return i;
        return std::nullopt;
    }

    /// z0(eps) for concrete eps.
    Vector<Scalar> eval(const Scalar& eps) const {
        Vector<Scalar> out = Vector<Scalar>::Zero(n_);
        Scalar power = Scalar(1);
        Rational fact = 1;
        for (int i = 1; i <= max_index(); ++i) {
            power *= eps;
            fact *= i;
            out += power * (Scalar(1) / scalar_cast<Scalar>(Rational(fact))) * coefficient(i);
        }
        return out;
    }

    bool operator==(const CurveJet& other) const {
        if (n_ != other.n_) return false;
        int mx = std::max(max_index(), other.max_index());
        for (int i = 1; i <= mx; ++i)
            if (coefficient(i) != other.coefficient(i)) return false;
        return true;
    }

  private:
    int n_ = 0;
    std::vector<Vector<Scalar>> coeffs_;
};

namespace detail {

// Truncated scalar power series, index = power of eps.
template <class Scalar>
using Series = std::vector<Scalar>;

template <class Scalar>
Series<Scalar> series_mul(const Series<Scalar>& a, const Series<Scalar>& b, int order) {
    Series<Scalar> out(order + 1, Scalar(0));
    for (int i = 0; i <= order; ++i) {
        if (i >= static_cast<int>(a.size())) break;
        if (a[i] == Scalar(0)) continue;
        int jmax = std::min<int>(order - i, static_cast<int>(b.size()) - 1);
        for (int j = 0; j <= jmax; ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

}  // namespace detail

/// Brute-force composition oracle: T^1..T^M with T^i the i-th eps-derivative
/// of G[z0(eps)] at 0, computed by truncated power-series arithmetic over eps
/// (independent of every explicit coefficient-operator formula it checks).
template <class Scalar>
std::vector<Vector<Scalar>> compose_curve(const MapJet<Scalar>& jet,
                                          const CurveJet<Scalar>& curve, int order) {
    if (curve.dim() != jet.input_dim())
        throw std::invalid_argument("compose_curve: curve/map dimension mismatch");
    if (!jet.order_available(order))
        throw std::invalid_argument("compose_curve: insufficient jet order");
    const int n = jet.input_dim(), m = jet.output_dim();

    // Component series of z0(eps), valuation >= 1.
    std::vector<detail::Series<Scalar>> comp(n, detail::Series<Scalar>(order + 1, Scalar(0)));
    for (int i = 1; i <= std::min(order, curve.max_index()); ++i) {
        Vector<Scalar> c = curve.coefficient(i);
        Scalar inv_fact = Scalar(1) / scalar_cast<Scalar>(Rational(factorial(i)));
        for (int j = 0; j < n; ++j) comp[j][i] = c(j) * inv_fact;
    }

    std::vector<detail::Series<Scalar>> result(
        m, detail::Series<Scalar>(order + 1, Scalar(0)));
    for (int beta = 1; beta <= std::min(order, jet.degree()); ++beta) {
        const SymForm<Scalar>& f = jet.form(beta);
        for (const auto& [mi, c] : f.terms()) {
            detail::Series<Scalar> prod(order + 1, Scalar(0));
            prod[0] = Scalar(1);
            for (int v = 0; v < n; ++v)
                for (int e = 0; e < mi[v]; ++e)
                    prod = detail::series_mul<Scalar>(prod, comp[v], order);
            for (int j = 0; j < m; ++j) {
                if (c(j) == Scalar(0)) continue;
                for (int p = beta; p <= order; ++p) result[j][p] += c(j) * prod[p];
            }
        }
    }

    std::vector<Vector<Scalar>> T(order);
    Rational fact = 1;
    for (int i = 1; i <= order; ++i) {
        fact *= i;
        Vector<Scalar> t(m);
        for (int j = 0; j < m; ++j) t(j) = scalar_cast<Scalar>(Rational(fact)) * result[j][i];
        T[i - 1] = t;
    }
    return T;
}

enum class EvalMode { Exact, Float };

/// G[point]; float mode evaluates a binary64 cast of the jet.
inline RatVector eval_map(const MapJet<Rational>& jet, const RatVector& point) {
    return jet.eval(point);
}

inline Eigen::VectorXd eval_map_float(const MapJet<Rational>& jet,
                                      const Eigen::VectorXd& point) {
    return jet.cast<double>().eval(point);
}

}  // namespace finecone
