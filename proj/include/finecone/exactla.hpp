#pragma once

#include "finecone/scalar.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace finecone {

/// Exact linear algebra over a field scalar (rationals or complex
/// rationals). Pivots are the first nonzero entry in each column, so every
/// basis produced here is deterministic.

template <class Scalar>
struct RrefResult {
    Matrix<Scalar> reduced;
    std::vector<int> pivot_columns;
    int rank() const { return static_cast<int>(pivot_columns.size()); }
};

template <class Scalar>
RrefResult<Scalar> rref(Matrix<Scalar> a) {
    const Eigen::Index rows = a.rows(), cols = a.cols();
    RrefResult<Scalar> out;
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < cols && row < rows; ++col) {
        Eigen::Index pivot = -1;
        for (Eigen::Index r = row; r < rows; ++r) {
            if (a(r, col) != Scalar(0)) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) continue;
        if (pivot != row) a.row(pivot).swap(a.row(row));
        a.row(row) /= a(row, col);
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (r == row || a(r, col) == Scalar(0)) continue;
            a.row(r) -= a(r, col) * a.row(row);
        }
        out.pivot_columns.push_back(static_cast<int>(col));
        ++row;
    }
    out.reduced = std::move(a);
    return out;
}

template <class Scalar>
int rank(const Matrix<Scalar>& a) {
    return rref<Scalar>(a).rank();
}

/// Basis of the nullspace, one column per free variable (unit entry at the
/// free variable, back-substituted pivot entries above).
template <class Scalar>
Matrix<Scalar> kernel_basis(const Matrix<Scalar>& a) {
    auto r = rref<Scalar>(a);
    const Eigen::Index cols = a.cols();
    std::vector<bool> is_pivot(cols, false);
    for (int p : r.pivot_columns) is_pivot[p] = true;
    const Eigen::Index null_dim = cols - r.rank();
    Matrix<Scalar> out = Matrix<Scalar>::Zero(cols, null_dim);
    Eigen::Index k = 0;
    for (Eigen::Index free_col = 0; free_col < cols; ++free_col) {
        if (is_pivot[free_col]) continue;
        out(free_col, k) = Scalar(1);
        for (int prow = 0; prow < r.rank(); ++prow)
            out(r.pivot_columns[prow], k) = -r.reduced(prow, free_col);
        ++k;
    }
    return out;
}

/// Basis of the column space: the pivot columns of the original matrix.
template <class Scalar>
Matrix<Scalar> image_basis(const Matrix<Scalar>& a) {
    auto r = rref<Scalar>(a);
    Matrix<Scalar> out(a.rows(), r.rank());
    for (int i = 0; i < r.rank(); ++i) out.col(i) = a.col(r.pivot_columns[i]);
    return out;
}

/// Solve a x = b exactly; nullopt when inconsistent.
template <class Scalar>
std::optional<Vector<Scalar>> solve_linear(const Matrix<Scalar>& a,
                                           const Vector<Scalar>& b) {
    if (a.rows() != b.size()) throw std::invalid_argument("solve_linear: shape mismatch");
    Matrix<Scalar> aug(a.rows(), a.cols() + 1);
    aug.leftCols(a.cols()) = a;
    aug.col(a.cols()) = b;
    auto r = rref<Scalar>(aug);
    Vector<Scalar> x = Vector<Scalar>::Zero(a.cols());
    for (int i = 0; i < r.rank(); ++i) {
        int p = r.pivot_columns[i];
        if (p == a.cols()) return std::nullopt;  // row (0 .. 0 | 1)
        x(p) = r.reduced(i, a.cols());
    }
    return x;
}

/// Exact inverse of a square matrix.
template <class Scalar>
Matrix<Scalar> invert(const Matrix<Scalar>& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("invert: matrix not square");
    const Eigen::Index n = a.rows();
    Matrix<Scalar> aug(n, 2 * n);
    aug.leftCols(n) = a;
    aug.rightCols(n) = Matrix<Scalar>::Identity(n, n);
    auto r = rref<Scalar>(aug);
    for (int i = 0; i < static_cast<int>(n); ++i)
        if (i >= r.rank() || r.pivot_columns[i] != i)
            throw std::invalid_argument("invert: matrix is singular");
    return r.reduced.rightCols(n);
}

/// A subspace of K^ambient held by an explicit independent column basis.
template <class Scalar>
struct Subspace {
    Matrix<Scalar> basis;  // ambient x dim

    static Subspace zero(int ambient) {
        Subspace s;
        s.basis = Matrix<Scalar>::Zero(ambient, 0);
        return s;
    }
    static Subspace full(int ambient) {
        Subspace s;
        s.basis = Matrix<Scalar>::Identity(ambient, ambient);
        return s;
    }
    static Subspace span_of(const Matrix<Scalar>& vectors) {
        Subspace s;
        s.basis = image_basis<Scalar>(vectors);
        return s;
    }

    int ambient_dim() const { return static_cast<int>(basis.rows()); }
    int dim() const { return static_cast<int>(basis.cols()); }

    bool contains(const Vector<Scalar>& v) const {
        return solve_linear<Scalar>(basis, v).has_value();
    }

    /// Exact coordinates of v in this basis; throws when v is outside.
    Vector<Scalar> coordinates(const Vector<Scalar>& v) const {
        auto x = solve_linear<Scalar>(basis, v);
        if (!x) throw std::invalid_argument("Subspace::coordinates: vector not contained");
        return *x;
    }

    bool equals(const Subspace& other) const {
        if (ambient_dim() != other.ambient_dim() || dim() != other.dim()) return false;
        Matrix<Scalar> joint(basis.rows(), basis.cols() + other.basis.cols());
        joint.leftCols(basis.cols()) = basis;
        joint.rightCols(other.basis.cols()) = other.basis;
        return rank<Scalar>(joint) == dim();
    }

    bool operator==(const Subspace& other) const { return basis == other.basis; }
};

/// Coordinate-level complement: given independent columns K spanning a
/// subspace of K^D, return standard basis vectors (pivot structure of the
/// transposed reduced form) spanning a direct complement.
template <class Scalar>
Matrix<Scalar> complement_coords(const Matrix<Scalar>& k_cols, int ambient) {
    if (k_cols.rows() != ambient)
        throw std::invalid_argument("complement_coords: ambient mismatch");
    auto r = rref<Scalar>(Matrix<Scalar>(k_cols.transpose()));
    std::vector<bool> is_pivot(ambient, false);
    for (int p : r.pivot_columns) is_pivot[p] = true;
    Matrix<Scalar> out = Matrix<Scalar>::Zero(ambient, ambient - r.rank());
    Eigen::Index c = 0;
    for (int j = 0; j < ambient; ++j)
        if (!is_pivot[j]) out(j, c++) = Scalar(1);
    return out;
}

/// Invertible frame [B_1 | ... | B_r] of a direct sum with cached inverse;
/// provides exact block components and projectors.
template <class Scalar>
class DirectSumFrame {
  public:
    DirectSumFrame() = default;
    explicit DirectSumFrame(const std::vector<Matrix<Scalar>>& blocks) {
        Eigen::Index ambient = blocks.empty() ? 0 : blocks.front().rows();
        Eigen::Index total = 0;
        for (const auto& b : blocks) total += b.cols();
        if (total != ambient)
            throw std::invalid_argument("DirectSumFrame: blocks do not fill the space");
        full_.resize(ambient, ambient);
        Eigen::Index off = 0;
        for (const auto& b : blocks) {
            offsets_.push_back(static_cast<int>(off));
            dims_.push_back(static_cast<int>(b.cols()));
            full_.middleCols(off, b.cols()) = b;
            off += b.cols();
        }
        inverse_ = invert<Scalar>(full_);
    }

    int blocks() const { return static_cast<int>(dims_.size()); }
    int block_dim(int i) const { return dims_.at(i); }
    const Matrix<Scalar>& full() const { return full_; }
    const Matrix<Scalar>& inverse() const { return inverse_; }

    /// Coordinates of v in block i's basis.
    Vector<Scalar> block_coordinates(int i, const Vector<Scalar>& v) const {
        return inverse_.middleRows(offsets_.at(i), dims_.at(i)) * v;
    }

    /// Ambient projection of v onto block i along the others.
    Vector<Scalar> project(int i, const Vector<Scalar>& v) const {
        return full_.middleCols(offsets_.at(i), dims_.at(i)) * block_coordinates(i, v);
    }

    Matrix<Scalar> projector(int i) const {
        return full_.middleCols(offsets_.at(i), dims_.at(i)) *
               inverse_.middleRows(offsets_.at(i), dims_.at(i));
    }

  private:
    Matrix<Scalar> full_;
    Matrix<Scalar> inverse_;
    std::vector<int> offsets_;
    std::vector<int> dims_;
};

}  // namespace finecone
