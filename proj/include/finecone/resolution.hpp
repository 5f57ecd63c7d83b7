#pragma once

#include "finecone/coeffsys.hpp"
#include "finecone/exactla.hpp"

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace finecone {

struct CurveDirectionExhausted : std::runtime_error {
    explicit CurveDirectionExhausted(int level)
        : std::runtime_error("curve direction exhausted at stage " + std::to_string(level)),
          stage(level) {}
    int stage;
};

/// Subspace-level wrappers backing (3.1)-(3.3).
template <class Scalar>
Subspace<Scalar> kernel_in(const Matrix<Scalar>& op, const Subspace<Scalar>& within) {
    Subspace<Scalar> out;
    out.basis = within.basis * kernel_basis<Scalar>(Matrix<Scalar>(op * within.basis));
    return out;
}

template <class Scalar>
Subspace<Scalar> range_on(const Matrix<Scalar>& op, const Subspace<Scalar>& on) {
    Subspace<Scalar> out;
    out.basis = image_basis<Scalar>(Matrix<Scalar>(op * on.basis));
    return out;
}

namespace detail {

/// Complement of span(kernel_coords) inside K^D from the pivot structure,
/// tilted so the avoid vector keeps a nonzero kernel component. Returns the
/// complement coordinates plus the avoid vector's kernel part.
template <class Scalar>
struct SplitResult {
    Matrix<Scalar> complement;  // D x (D - dim kernel)
    Vector<Scalar> residual;    // avoid's component inside the kernel (D coords)
};

template <class Scalar>
SplitResult<Scalar> split_with_avoid(const Matrix<Scalar>& kernel_coords,
                                     const Vector<Scalar>& avoid_coords) {
    const int D = static_cast<int>(kernel_coords.rows());
    SplitResult<Scalar> out;
    out.complement = complement_coords<Scalar>(kernel_coords, D);
    out.residual = Vector<Scalar>::Zero(D);
    if (avoid_coords.isZero()) return out;

    const Eigen::Index d = out.complement.cols();
    const Eigen::Index kd = kernel_coords.cols();
    Matrix<Scalar> joint(D, d + kd);
    joint.leftCols(d) = out.complement;
    joint.rightCols(kd) = kernel_coords;
    auto coords = solve_linear<Scalar>(joint, avoid_coords);
    if (!coords) throw std::logic_error("split_with_avoid: direct sum failure");
    Vector<Scalar> a = coords->head(d);
    Vector<Scalar> b = coords->tail(kd);
    if (!b.isZero()) {
        out.residual = kernel_coords * b;
        return out;
    }
    if (kd == 0) return out;  // kernel trivial: the avoid vector is unavoidable
    // Tilt one pivot basis vector by a kernel direction; this expels the
    // avoid vector from the complement and preserves directness.
    Eigen::Index piv = -1;
    for (Eigen::Index i = 0; i < d; ++i)
        if (a(i) != Scalar(0)) {
            piv = i;
            break;
        }
    if (piv < 0) throw std::logic_error("split_with_avoid: zero decomposition");
    out.complement.col(piv) += kernel_coords.col(0) / a(piv);
    out.residual = -kernel_coords.col(0);
    return out;
}

}  // namespace detail

/// Complement of `sub` inside `within`; when an avoid vector is given the
/// complement is chosen (tilted if necessary) so the vector does not lie in
/// it. Throws CurveDirectionExhausted when that is impossible.
template <class Scalar>
Subspace<Scalar> complement_in(const Subspace<Scalar>& sub, const Subspace<Scalar>& within,
                               const std::optional<Vector<Scalar>>& avoid = std::nullopt) {
    Matrix<Scalar> sub_coords(within.dim(), sub.dim());
    for (int c = 0; c < sub.dim(); ++c)
        sub_coords.col(c) = within.coordinates(sub.basis.col(c));
    Vector<Scalar> avoid_coords = Vector<Scalar>::Zero(within.dim());
    if (avoid) avoid_coords = within.coordinates(*avoid);
    auto split = detail::split_with_avoid<Scalar>(sub_coords, avoid_coords);
    if (avoid && !avoid_coords.isZero() && split.residual.isZero())
        throw CurveDirectionExhausted(0);
    Subspace<Scalar> out;
    out.basis = within.basis * split.complement;
    return out;
}

/// One stage of the fine resolution: the raw operator Sbar_i and the induced
/// splittings N_{i-1} = N_i^c + N_i and R_{i-1}^c = R_i + R_i^c.
template <class Scalar>
struct ResolutionLevel {
    Matrix<Scalar> raw_op;            // Sbar_i on all of B, m x n
    Matrix<Scalar> kernel;            // basis of N_i
    Matrix<Scalar> complement;        // basis of N_i^c
    Matrix<Scalar> range;             // basis of R_i = S_i(N_i^c)
    Matrix<Scalar> range_complement;  // basis of R_i^c

    int range_dim() const { return static_cast<int>(range.cols()); }

    bool operator==(const ResolutionLevel& o) const {
        return raw_op == o.raw_op && kernel == o.kernel && complement == o.complement &&
               range == o.range && range_complement == o.range_complement;
    }
};

/// The full chain at a fixed transversality order k. Every field is exact
/// and depends only on z-bar_1..z-bar_k and the first k+1 derivatives.
template <class Scalar>
struct Resolution {
    int n = 0, m = 0;
    int k = 0;
    int l = 0;                                    // leading curve index
    std::vector<Vector<Scalar>> zbar;             // z-bar_1 .. z-bar_k
    std::vector<ResolutionLevel<Scalar>> levels;  // stages 1 .. k+1
    Matrix<Scalar> elim;                          // E^{k+1}, n(k+1) square
    std::map<int, Matrix<Scalar>> kernel_mix;     // M^{2j+1}, j = 1..k
    Matrix<Scalar> cone_mix;                      // Mhat = blockdiag(I, M^{2k+1})
    Matrix<Scalar> p_basis;                       // P_{k+1}
    Vector<Scalar> zl_projection;                 // z-bar_{l,k+1}
    DirectSumFrame<Scalar> domain_frame;          // [N_1^c|...|N_{k+1}^c|N_{k+1}]
    DirectSumFrame<Scalar> range_frame;           // [R_1|...|R_{k+1}|R_{k+1}^c]
    bool transversal = false;
    bool degenerate_regular = false;              // k = 0: G0^1 already surjective

    const Matrix<Scalar>& mix() const { return kernel_mix.at(k); }

    int complement_dim(int stage) const {  // dim N_stage^c, stage = 1..k+1
        return static_cast<int>(levels.at(stage - 1).complement.cols());
    }
    int total_complement_dim() const {
        int d = 0;
        for (const auto& lv : levels) d += static_cast<int>(lv.complement.cols());
        return d;
    }
    int bottom_kernel_dim() const {  // dim N_{k+1}
        return static_cast<int>(levels.back().kernel.cols());
    }

    /// Row block [Sbar_1 | ... | Sbar_{k+1}], m x n(k+1).
    Matrix<Scalar> stage_row() const {
        Matrix<Scalar> out(m, static_cast<Eigen::Index>(n) * (k + 1));
        for (int i = 0; i <= k; ++i)
            out.middleCols(static_cast<Eigen::Index>(n) * i, n) = levels[i].raw_op;
        return out;
    }

    /// [N_1^c | ... | N_{k+1}^c], n x dim(N^c).
    Matrix<Scalar> complement_stack() const {
        Matrix<Scalar> out(n, total_complement_dim());
        Eigen::Index off = 0;
        for (const auto& lv : levels) {
            out.middleCols(off, lv.complement.cols()) = lv.complement;
            off += lv.complement.cols();
        }
        return out;
    }

    /// Leading cone operator on a stack (v_1;...;v_{k+1}):
    ///   (1/(2k+1)!) sum_i c_{2k+1,i} Sbar_i v_i,
    /// the exact eps^{2k+1} coefficient of G[Z_k] - G[z0] in the cone map.
    Matrix<Scalar> leading_operator() const {
        Matrix<Scalar> out(m, static_cast<Eigen::Index>(n) * (k + 1));
        Rational scale = Rational(1) / Rational(factorial(2 * k + 1));
        for (int i = 0; i <= k; ++i)
            out.middleCols(static_cast<Eigen::Index>(n) * i, n) =
                scalar_cast<Scalar>(scale * c_coeff(2 * k + 1, i + 1)) * levels[i].raw_op;
        return out;
    }

    /// Exact bijectivity witness of the leading operator from N^c onto
    /// R_1 + ... + R_{k+1} (full rank on the complement stack).
    bool leading_bijective() const {
        Matrix<Scalar> on_comp = leading_operator_on_complement();
        int range_sum = 0;
        for (const auto& lv : levels) range_sum += lv.range_dim();
        return rank<Scalar>(on_comp) == total_complement_dim() &&
               total_complement_dim() == range_sum;
    }

    /// leading_operator restricted to N^c in the complement bases; square
    /// (m x m) exactly when the cone is transversal.
    Matrix<Scalar> leading_operator_on_complement() const {
        Matrix<Scalar> lead = leading_operator();
        Matrix<Scalar> out(m, total_complement_dim());
        Eigen::Index off = 0;
        for (int i = 0; i <= k; ++i) {
            const auto& u = levels[i].complement;
            out.middleCols(off, u.cols()) =
                lead.middleCols(static_cast<Eigen::Index>(n) * i, n) * u;
            off += u.cols();
        }
        return out;
    }

    bool operator==(const Resolution& o) const {
        return n == o.n && m == o.m && k == o.k && l == o.l && zbar == o.zbar &&
               levels == o.levels && elim == o.elim && kernel_mix == o.kernel_mix &&
               cone_mix == o.cone_mix && p_basis == o.p_basis &&
               zl_projection == o.zl_projection && transversal == o.transversal &&
               degenerate_regular == o.degenerate_regular &&
               domain_frame.full() == o.domain_frame.full() &&
               range_frame.full() == o.range_frame.full();
    }
};

/// Scaled elimination blocks of the closing recursion: conjugate the leading
/// j x j block of E by the c-scheme diagonal at `order` (j = ceil(order/2)),
/// split as (alpha, alpha_bar; lower, lower_bar).
template <class Scalar>
struct ScaledElim {
    Matrix<Scalar> alpha;      // n x n(j-1)
    Matrix<Scalar> alpha_bar;  // n x n
    Matrix<Scalar> lower;      // n(j-1) x n(j-1)
    Matrix<Scalar> lower_bar;  // n(j-1) x n
};

template <class Scalar>
ScaledElim<Scalar> scaled_elim(const Matrix<Scalar>& elim, int n, int order) {
    const int j = scheme_row_length(order);
    if (elim.rows() < static_cast<Eigen::Index>(n) * j)
        throw std::invalid_argument("scaled_elim: elimination matrix too small");
    auto diag = c_diagonal(order);
    Matrix<Scalar> conj(static_cast<Eigen::Index>(n) * j, static_cast<Eigen::Index>(n) * j);
    for (int r = 0; r < j; ++r)
        for (int c = 0; c < j; ++c)
            conj.block(static_cast<Eigen::Index>(n) * r, static_cast<Eigen::Index>(n) * c,
                       n, n) = scalar_cast<Scalar>(diag[c] / diag[r]) *
                               elim.block(static_cast<Eigen::Index>(n) * r,
                                          static_cast<Eigen::Index>(n) * c, n, n);
    ScaledElim<Scalar> out;
    out.alpha = conj.topLeftCorner(n, static_cast<Eigen::Index>(n) * (j - 1));
    out.alpha_bar = conj.topRightCorner(n, n);
    out.lower = conj.bottomLeftCorner(static_cast<Eigen::Index>(n) * (j - 1),
                                      static_cast<Eigen::Index>(n) * (j - 1));
    out.lower_bar = conj.bottomRightCorner(static_cast<Eigen::Index>(n) * (j - 1), n);
    return out;
}

/// Incremental builder: stages are added one at a time so the minimal-k
/// search can stop as soon as the range sum saturates.
template <class Scalar>
class ResolutionBuilder {
  public:
    ResolutionBuilder(const MapJet<Scalar>& jet, const CurveJet<Scalar>& curve)
        : jet_(jet), curve_(curve), n_(jet.input_dim()), m_(jet.output_dim()) {
        if (curve.dim() != n_)
            throw std::invalid_argument("ResolutionBuilder: curve/map dimension mismatch");
        leading_ = curve.leading_index().value_or(0);
        residuals_[0] =
            leading_ > 0 ? curve.coefficient(leading_) : Vector<Scalar>::Zero(n_);
        kernel_mix_[1] = Matrix<Scalar>::Identity(n_, n_);  // M^3
        add_stage();                                        // stage 1: G0^1
    }

    int stages() const { return static_cast<int>(levels_.size()); }
    int range_sum() const {
        int s = 0;
        for (const auto& lv : levels_) s += lv.range_dim();
        return s;
    }
    const std::vector<ResolutionLevel<Scalar>>& levels() const { return levels_; }
    bool saturated() const { return range_sum() == m_; }

    /// Add stage j+1 (j = current stage count).
    void add_stage() {
        const int j = stages();
        Matrix<Scalar> raw;
        if (j == 0) {
            raw = w_operator<Scalar>(jet_, {}, 1, 1, 0);  // G0^1
        } else if (j == 1) {
            raw = Scalar(2) * g2_matrix(curve_.coefficient(1));  // 2 G0^2 z-bar_1
        } else {
            ensure_mix_through(j);
            auto odd = scaled_elim<Scalar>(elim_, n_, 2 * j - 1);
            Matrix<Scalar> column(static_cast<Eigen::Index>(n_) * j, n_);
            column.topRows(n_) = odd.alpha_bar;
            column.bottomRows(static_cast<Eigen::Index>(n_) * (j - 1)) =
                kernel_mix_.at(j - 1) * odd.lower_bar;
            Matrix<Scalar> w_row(m_, static_cast<Eigen::Index>(n_) * j);
            std::vector<Vector<Scalar>> z = curve_prefix(j - 1);
            for (int c = 0; c < j; ++c) {
                int mu = 2 * j - 1 - c;
                w_row.middleCols(static_cast<Eigen::Index>(n_) * c, n_) =
                    w_operator<Scalar>(jet_, z, 2 * j, mu, j - 1);
            }
            Rational quad = Rational(factorial(2 * j)) /
                            (Rational(factorial(j)) * Rational(factorial(j)));
            raw = w_row * column +
                  scalar_cast<Scalar>(quad) * g2_matrix(curve_.coefficient(j));
        }
        split_spaces(raw);
        extend_elimination();
    }

    void ensure_stages(int count) {
        while (stages() < count) add_stage();
    }

    /// Assemble the resolution at transversality order k (stages 1..k+1).
    Resolution<Scalar> finalize(int k) {
        if (k < 0) throw std::invalid_argument("finalize: k >= 0 required");
        ensure_stages(k + 1);
        ensure_mix_through(std::max(k, 1));
        Resolution<Scalar> res;
        res.n = n_;
        res.m = m_;
        res.k = k;
        res.l = leading_;
        res.degenerate_regular = (k == 0);
        for (int i = 1; i <= k; ++i) res.zbar.push_back(curve_.coefficient(i));
        res.levels.assign(levels_.begin(), levels_.begin() + (k + 1));
        res.elim = elim_.topLeftCorner(static_cast<Eigen::Index>(n_) * (k + 1),
                                       static_cast<Eigen::Index>(n_) * (k + 1));
        for (int j = 1; j <= std::max(k, 1); ++j) res.kernel_mix[j] = kernel_mix_.at(j);
        res.cone_mix = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(n_) * (k + 1),
                                            static_cast<Eigen::Index>(n_) * (k + 1));
        res.cone_mix.topLeftCorner(n_, n_) = Matrix<Scalar>::Identity(n_, n_);
        if (k >= 1)
            res.cone_mix.bottomRightCorner(static_cast<Eigen::Index>(n_) * k,
                                           static_cast<Eigen::Index>(n_) * k) =
                kernel_mix_.at(k);

        const auto& last = levels_[k];
        res.transversal = (last.range_complement.cols() == 0);

        // N_{k+1} = P_{k+1} + {z-bar_{l,k+1}}.
        Vector<Scalar> residual = residuals_.at(k + 1);
        res.zl_projection = residual;
        Subspace<Scalar> bottom{last.kernel};
        if (!residual.isZero()) {
            Matrix<Scalar> rc(bottom.dim(), 1);
            rc.col(0) = bottom.coordinates(residual);
            res.p_basis = bottom.basis * complement_coords<Scalar>(rc, bottom.dim());
        } else {
            if (k > 0) throw CurveDirectionExhausted(k + 1);
            res.p_basis = bottom.basis;  // degenerate regular case: no cone
        }

        std::vector<Matrix<Scalar>> dblocks;
        for (int i = 0; i <= k; ++i) dblocks.push_back(res.levels[i].complement);
        dblocks.push_back(last.kernel);
        res.domain_frame = DirectSumFrame<Scalar>(dblocks);
        std::vector<Matrix<Scalar>> rblocks;
        for (int i = 0; i <= k; ++i) rblocks.push_back(res.levels[i].range);
        rblocks.push_back(last.range_complement);
        res.range_frame = DirectSumFrame<Scalar>(rblocks);
        return res;
    }

    /// z-bar_l component surviving into N_stage; zero once exhausted.
    Vector<Scalar> residual_at_stage(int stage) const { return residuals_.at(stage); }

  private:
    std::vector<Vector<Scalar>> curve_prefix(int count) const {
        std::vector<Vector<Scalar>> z;
        for (int i = 1; i <= count; ++i) z.push_back(curve_.coefficient(i));
        return z;
    }

    /// Matrix of v |-> G0^2[w, v].
    Matrix<Scalar> g2_matrix(const Vector<Scalar>& w) const {
        const SymForm<Scalar>& f = jet_.form(2);
        Matrix<Scalar> out = Matrix<Scalar>::Zero(m_, n_);
        if (f.is_zero()) return out;
        std::vector<Vector<Scalar>> args{w, Vector<Scalar>::Zero(n_)};
        for (int c = 0; c < n_; ++c) {
            args[1] = Vector<Scalar>::Zero(n_);
            args[1](c) = Scalar(1);
            out.col(c) = apply_form<Scalar>(f, args);
        }
        return out;
    }

    // Split N_j = N_{j+1}^c + N_{j+1} and R_j^c = R_{j+1} + R_{j+1}^c.
    void split_spaces(const Matrix<Scalar>& raw) {
        const int j = stages();  // building stage j+1
        Matrix<Scalar> nbasis = (j == 0) ? Matrix<Scalar>::Identity(n_, n_)
                                         : levels_[j - 1].kernel;
        Matrix<Scalar> rc_basis = (j == 0) ? Matrix<Scalar>::Identity(m_, m_)
                                           : levels_[j - 1].range_complement;
        const Eigen::Index D = nbasis.cols();
        const Eigen::Index e = rc_basis.cols();

        // Local matrix of S_{j+1} = P_{R_j^c} Sbar|_{N_j} in the running bases.
        Matrix<Scalar> mapped = raw * nbasis;  // m x D
        Matrix<Scalar> local(e, D);
        for (Eigen::Index c = 0; c < D; ++c)
            local.col(c) = range_complement_coords(mapped.col(c));

        ResolutionLevel<Scalar> level;
        level.raw_op = raw;
        Matrix<Scalar> kcoords = kernel_basis<Scalar>(local);

        Vector<Scalar> avoid = Vector<Scalar>::Zero(D);
        const Vector<Scalar>& incoming = residuals_.at(j);
        if (!incoming.isZero()) {
            auto c = solve_linear<Scalar>(nbasis, incoming);
            if (!c) throw std::logic_error("resolution: residual left the chain");
            avoid = *c;
        }
        auto split = detail::split_with_avoid<Scalar>(kcoords, avoid);

        level.kernel = nbasis * kcoords;
        level.complement = nbasis * split.complement;
        Matrix<Scalar> v = raw * level.complement;  // project onto R_j^c
        Matrix<Scalar> range(m_, level.complement.cols());
        for (Eigen::Index c = 0; c < range.cols(); ++c)
            range.col(c) = rc_basis * range_complement_coords(v.col(c));
        level.range = range;
        {
            Matrix<Scalar> rng_coords(e, range.cols());
            for (Eigen::Index c = 0; c < range.cols(); ++c)
                rng_coords.col(c) = range_complement_coords(range.col(c));
            level.range_complement =
                rc_basis * complement_coords<Scalar>(rng_coords, static_cast<int>(e));
        }
        levels_.push_back(level);
        residuals_[j + 1] = nbasis * split.residual;

        // Refresh the running range frame [R_1|..|R_{j+1}|R_{j+1}^c].
        std::vector<Matrix<Scalar>> blocks;
        for (const auto& lv : levels_) blocks.push_back(lv.range);
        blocks.push_back(levels_.back().range_complement);
        range_frame_ = DirectSumFrame<Scalar>(blocks);
    }

    // Coordinates of an ambient vector in the current R_j^c basis (the last
    // block of the running range frame).
    Vector<Scalar> range_complement_coords(const Vector<Scalar>& v) const {
        if (levels_.empty()) return v;  // R_0^c is the ambient space
        return range_frame_.block_coordinates(range_frame_.blocks() - 1, v);
    }

    // S_i^{-1} P_{R_i} x = U_i * (R_i coordinates of x); stage index i >= 1.
    Matrix<Scalar> pullback_through_stage(int i, const Matrix<Scalar>& x) const {
        const auto& lv = levels_.at(i - 1);
        Matrix<Scalar> out(n_, x.cols());
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            out.col(c) = lv.complement * range_frame_.block_coordinates(i - 1, x.col(c));
        return out;
    }

    void extend_elimination() {
        const int j = stages();  // elimination now spans j stages
        Matrix<Scalar> grown = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(n_) * j,
                                                    static_cast<Eigen::Index>(n_) * j);
        if (j > 1)
            grown.topLeftCorner(static_cast<Eigen::Index>(n_) * (j - 1),
                                static_cast<Eigen::Index>(n_) * (j - 1)) = elim_;
        grown.block(static_cast<Eigen::Index>(n_) * (j - 1),
                    static_cast<Eigen::Index>(n_) * (j - 1), n_, n_) =
            Matrix<Scalar>::Identity(n_, n_);
        for (int i = j - 1; i >= 1; --i) {
            Matrix<Scalar> sum = Matrix<Scalar>::Zero(m_, n_);
            for (int v = i + 1; v <= j; ++v)
                sum += levels_[v - 1].raw_op *
                       grown.block(static_cast<Eigen::Index>(n_) * (v - 1),
                                   static_cast<Eigen::Index>(n_) * (j - 1), n_, n_);
            grown.block(static_cast<Eigen::Index>(n_) * (i - 1),
                        static_cast<Eigen::Index>(n_) * (j - 1), n_, n_) =
                -pullback_through_stage(i, sum);
        }
        elim_ = std::move(grown);
    }

    // M^{2t+1} for all t <= j, by the closing recursion with M^3 = I.
    void ensure_mix_through(int j) {
        for (int t = 2; t <= j; ++t) {
            if (kernel_mix_.count(t)) continue;
            auto even = scaled_elim<Scalar>(elim_, n_, 2 * t);
            auto odd = scaled_elim<Scalar>(elim_, n_, 2 * t - 1);
            Matrix<Scalar> ab_even(static_cast<Eigen::Index>(n_) * (t - 1),
                                   static_cast<Eigen::Index>(n_) * t);
            ab_even.leftCols(static_cast<Eigen::Index>(n_) * (t - 1)) = even.lower;
            ab_even.rightCols(n_) = even.lower_bar;
            Matrix<Scalar> mix(static_cast<Eigen::Index>(n_) * t,
                               static_cast<Eigen::Index>(n_) * t);
            mix.topRows(n_).leftCols(static_cast<Eigen::Index>(n_) * (t - 1)) = even.alpha;
            mix.topRows(n_).rightCols(n_) = even.alpha_bar;
            mix.middleRows(n_, n_) = odd.alpha * ab_even;
            if (t > 2)
                mix.bottomRows(static_cast<Eigen::Index>(n_) * (t - 2)) =
                    (kernel_mix_.at(t - 1) * odd.lower * ab_even)
                        .topRows(static_cast<Eigen::Index>(n_) * (t - 2));
            kernel_mix_[t] = std::move(mix);
        }
    }

    const MapJet<Scalar>& jet_;
    CurveJet<Scalar> curve_;
    int n_, m_;
    int leading_;
    std::vector<ResolutionLevel<Scalar>> levels_;
    std::map<int, Vector<Scalar>> residuals_;  // stage -> surviving z-bar_l part
    Matrix<Scalar> elim_;
    std::map<int, Matrix<Scalar>> kernel_mix_;
    DirectSumFrame<Scalar> range_frame_;
};

/// Build the resolution of a fixed order k >= 1.
template <class Scalar>
Resolution<Scalar> build_resolution(const MapJet<Scalar>& jet, const CurveJet<Scalar>& curve,
                                    int k) {
    if (k < 1) throw std::invalid_argument("build_resolution: k >= 1 required");
    auto l = curve.leading_index();
    if (!l) throw std::invalid_argument("build_resolution: zero curve has no leading index");
    if (*l > k)
        throw std::invalid_argument("build_resolution: leading index exceeds k");
    ResolutionBuilder<Scalar> builder(jet, curve);
    return builder.finalize(k);
}

/// Explicit (non-iterative) form of one elimination column entry, used as a
/// cross-check of the iterative recursion:
///   E_{i,k+1} = -S_i^{-1} P_{R_i} (I + sum_v (-1)^v sum_{i<n_1<..<n_v<=k}
///               prod_t Sbar_{n_t} S_{n_t}^{-1} P_{R_{n_t}}) Sbar_{k+1},
/// factors composed with the smaller stage index outermost.
template <class Scalar>
Matrix<Scalar> elimination_entry_explicit(const Resolution<Scalar>& res, int i) {
    const int n = res.n, k = res.k;
    if (i < 1 || i > k + 1) throw std::invalid_argument("elimination entry out of range");
    if (i == k + 1) return Matrix<Scalar>::Identity(n, n);
    auto pullback = [&](int stage, const Matrix<Scalar>& x) {
        const auto& lv = res.levels.at(stage - 1);
        Matrix<Scalar> out(n, x.cols());
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            out.col(c) =
                lv.complement * res.range_frame.block_coordinates(stage - 1, x.col(c));
        return out;
    };
    const Matrix<Scalar>& top = res.levels[k].raw_op;  // Sbar_{k+1}
    Matrix<Scalar> acc = top;
    // Chains i < n_1 < ... < n_v <= k, built from the innermost (largest)
    // factor outward so smaller indices end up outermost.
    std::function<void(int, int, const Matrix<Scalar>&)> prepend =
        [&](int below, int sign, const Matrix<Scalar>& current) {
            for (int nu = i + 1; nu < below; ++nu) {
                Matrix<Scalar> term = res.levels[nu - 1].raw_op * pullback(nu, current);
                acc += Scalar(sign) * term;
                prepend(nu, -sign, term);
            }
        };
    prepend(k + 1, -1, top);
    return Matrix<Scalar>(-pullback(i, acc));
}

}  // namespace finecone
