#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <complex>
#include <stdexcept>
#include <string>

namespace finecone {

/// Exact rational scalar used by every discrete decision in the library.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

/// Complex rationals are supported structurally; the degree logic in
/// analysis.hpp and the float continuation layer require the real field.
using ComplexRational = std::complex<Rational>;

enum class FieldKind { Real, Complex };

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RatMatrix = Matrix<Rational>;
using RatVector = Vector<Rational>;

inline Integer factorial(int n) {
    Integer f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline Integer binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    Integer b = 1;
    for (int i = 0; i < k; ++i) {
        b *= (n - i);
        b /= (i + 1);
    }
    return b;
}

/// scalar_cast<S>(r): embed an exact rational into the working scalar.
template <class Scalar>
Scalar scalar_cast(const Rational& r);

template <>
inline Rational scalar_cast<Rational>(const Rational& r) { return r; }

template <>
inline double scalar_cast<double>(const Rational& r) { return r.convert_to<double>(); }

template <>
inline ComplexRational scalar_cast<ComplexRational>(const Rational& r) {
    return ComplexRational(r, Rational(0));
}

template <>
inline std::complex<double> scalar_cast<std::complex<double>>(const Rational& r) {
    return {r.convert_to<double>(), 0.0};
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Eigen::MatrixXd to_double(const RatMatrix& a) {
    Eigen::MatrixXd out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = to_double(a(i, j));
    return out;
}

inline Eigen::VectorXd to_double(const RatVector& v) {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = to_double(v(i));
    return out;
}

/// Parse an exact rational from "p", "-p/q" or decimal text like "1.25".
inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        int frac = static_cast<int>(s.size() - dot - 1);
        Integer num(digits), den = 1;
        for (int i = 0; i < frac; ++i) den *= 10;
        return Rational(num, den);
    }
    return Rational(s);
}

}  // namespace finecone
