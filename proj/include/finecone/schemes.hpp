#pragma once

#include "finecone/scalar.hpp"

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace finecone {

namespace detail {

// Memoized triangular d/c schemes. Entries exist for l >= 1, m >= 2l-2;
// the d-scheme is explicit, the c-scheme iterates through it column-wise.
class SchemeTable {
  public:
    static SchemeTable& instance() {
        static SchemeTable t;
        return t;
    }

    Rational d(int m, int l) {
        check(m, l);
        std::lock_guard<std::mutex> lock(mu_);
        return d_unlocked(m, l);
    }

    Rational c(int m, int l) {
        check(m, l);
        std::lock_guard<std::mutex> lock(mu_);
        return c_unlocked(m, l);
    }

    // Test hook: corrupt one d entry to demonstrate identity-suite
    // pinpointing. The c memo is derived from d, so it is dropped.
    void corrupt_d(int m, int l, const Rational& value) {
        std::lock_guard<std::mutex> lock(mu_);
        corrupt_[{m, l}] = value;
        c_memo_.clear();
    }
    void clear_corruption() {
        std::lock_guard<std::mutex> lock(mu_);
        corrupt_.clear();
        c_memo_.clear();
    }

  private:
    static void check(int m, int l) {
        if (l < 1 || m < 2 * l - 2)
            throw std::out_of_range("scheme index out of range (need l >= 1, m >= 2l-2)");
    }

    Rational d_unlocked(int m, int l) {
        if (auto it = corrupt_.find({m, l}); it != corrupt_.end()) return it->second;
        if (m == 2 * l - 2) return Rational(2 * l - 1, l);
        if (m % 2 == 1) {
            int n = (m + 1) / 2;  // m = 2n-1
            return Rational(2 * n, 2 * n + 1 - l);
        }
        int n = m / 2;  // m = 2n
        return Rational(2 * n + 1, 2 * n + 2 - l);
    }

    Rational c_unlocked(int m, int l) {
        if (m == 2 * l - 2) return 1;
        auto key = std::pair<int, int>{m, l};
        if (auto it = c_memo_.find(key); it != c_memo_.end()) return it->second;
        Rational value = c_unlocked(m - 1, l) * d_unlocked(m - 1, l);
        c_memo_.emplace(key, value);
        return value;
    }

    std::mutex mu_;
    std::map<std::pair<int, int>, Rational> c_memo_;
    std::map<std::pair<int, int>, Rational> corrupt_;
};

}  // namespace detail

inline Rational d_coeff(int m, int l) { return detail::SchemeTable::instance().d(m, l); }
inline Rational c_coeff(int m, int l) { return detail::SchemeTable::instance().c(m, l); }

/// Closed binomial form of the c-scheme, used as an exact cross-check.
inline Rational c_coeff_closed(int m, int l) {
    if (l < 1 || m < 2 * l - 2)
        throw std::out_of_range("scheme index out of range");
    return Rational(binomial(m, l - 1)) / Rational(binomial(2 * (l - 1), l - 1));
}

/// Number of scheme columns present in row `order` (= ceil(order/2), but 1
/// for order <= 1).
inline int scheme_row_length(int order) {
    if (order < 1) throw std::out_of_range("scheme row order must be >= 1");
    return std::max(1, (order + 1) / 2);
}

/// Diag[d_{order,1} .. d_{order,row}] as scalars; block expansion over K^n
/// happens lazily at use sites.
inline std::vector<Rational> d_diagonal(int order) {
    int len = scheme_row_length(order);
    std::vector<Rational> out(len);
    for (int l = 1; l <= len; ++l) out[l - 1] = d_coeff(order, l);
    return out;
}

inline std::vector<Rational> c_diagonal(int order) {
    int len = scheme_row_length(order);
    std::vector<Rational> out(len);
    for (int l = 1; l <= len; ++l) out[l - 1] = c_coeff(order, l);
    return out;
}

/// Diag[Gamma_k^k, ..., Gamma_1^k] with Gamma_i^k = C(k+i, i-1).
inline std::vector<Rational> gamma_diagonal(int k) {
    if (k < 1) throw std::out_of_range("gamma_diagonal: k >= 1 required");
    std::vector<Rational> out(k);
    for (int i = k; i >= 1; --i) out[k - i] = Rational(binomial(k + i, i - 1));
    return out;
}

/// gamma_t^{2k+l} = C(2k+1+l, t) / C(2t, t) for 0 <= t <= k, l >= 0.
inline Rational hurwitz_gamma(int t, int k, int l) {
    if (t < 0 || t > k || l < 0)
        throw std::out_of_range("hurwitz_gamma: need 0 <= t <= k, l >= 0");
    return Rational(binomial(2 * k + 1 + l, t)) / Rational(binomial(2 * t, t));
}

/// Test hooks backing the CLI mutation check.
inline void corrupt_scheme_entry(int m, int l, const Rational& value) {
    detail::SchemeTable::instance().corrupt_d(m, l, value);
}
inline void clear_scheme_corruption() {
    detail::SchemeTable::instance().clear_corruption();
}

}  // namespace finecone
