#pragma once

#include "finecone/analysis.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace finecone {

/// Geometric eps grid, strictly decreasing in magnitude.
struct EpsGrid {
    double hi = 1e-1;
    double lo = 1e-4;
    int points = 25;

    std::vector<double> values(bool negative = false) const {
        if (points < 2 || hi <= 0 || lo <= 0 || lo >= hi)
            throw std::invalid_argument("EpsGrid: need hi > lo > 0 and points >= 2");
        std::vector<double> out(points);
        double ratio = std::pow(lo / hi, 1.0 / (points - 1));
        double v = hi;
        for (int i = 0; i < points; ++i, v *= ratio) out[i] = negative ? -v : v;
        return out;
    }
};

/// Binary64 mirror of an exact resolution, the working state of the
/// continuation layer.
class ConeFrame {
  public:
    ConeFrame() = default;
    ConeFrame(const Resolution<Rational>& res, const MapJet<Rational>& jet,
              const CurveJet<Rational>& curve)
        : n_(res.n), m_(res.m), k_(res.k) {
        for (const auto& lv : res.levels) {
            raw_ops_.push_back(to_double(lv.raw_op));
            complements_.push_back(to_double(lv.complement));
        }
        bottom_kernel_ = to_double(res.levels.back().kernel);
        p_basis_ = to_double(res.p_basis);
        cone_mix_ = to_double(res.cone_mix);
        complement_stack_ = to_double(res.complement_stack());
        lead_full_ = to_double(res.leading_operator());
        lead_on_complement_ = to_double(res.leading_operator_on_complement());
        auto T = compose_curve<Rational>(jet, curve, 2 * k_ + 1);
        t_top_ = to_double(RatVector(T[2 * k_]));
        for (int i = 1; i <= curve.max_index(); ++i)
            taylor_.push_back(to_double(RatVector(curve.coefficient(i))) /
                              to_double(Rational(factorial(i))));
        dims_.clear();
        for (const auto& u : complements_) dims_.push_back(static_cast<int>(u.cols()));
    }

    int n() const { return n_; }
    int m() const { return m_; }
    int k() const { return k_; }
    int block_dim(int i) const { return dims_.at(i); }  // dim N_{i+1}^c, i = 0..k
    int complement_dim() const {
        int d = 0;
        for (int v : dims_) d += v;
        return d;
    }
    const Eigen::MatrixXd& complement_stack() const { return complement_stack_; }
    const Eigen::MatrixXd& bottom_kernel() const { return bottom_kernel_; }
    const Eigen::MatrixXd& p_basis() const { return p_basis_; }
    const Eigen::MatrixXd& lead_full() const { return lead_full_; }
    const Eigen::MatrixXd& lead_on_complement() const { return lead_on_complement_; }
    const Eigen::VectorXd& top_coefficient() const { return t_top_; }

    Eigen::VectorXd curve_point(double eps) const {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n_);
        double p = 1.0;
        for (const auto& c : taylor_) {
            p *= eps;
            z += p * c;
        }
        return z;
    }

    /// [eps^{2k+1}/(2k+1)! I | ... | eps^{k+1}/(k+1)! I] * Mhat, n x n(k+1).
    Eigen::MatrixXd blowup_row(double eps) const {
        Eigen::MatrixXd row(n_, static_cast<Eigen::Index>(n_) * (k_ + 1));
        for (int i = 0; i <= k_; ++i) {
            int power = 2 * k_ + 1 - i;
            double scale = std::pow(eps, power) / to_double(Rational(factorial(power)));
            row.middleCols(static_cast<Eigen::Index>(n_) * i, n_) =
                scale * Eigen::MatrixXd::Identity(n_, n_);
        }
        return row * cone_mix_;
    }

    /// Block column i (0-based) of the blow-up, n x n.
    Eigen::MatrixXd blowup_block(double eps, int i) const {
        return blowup_row(eps).middleCols(static_cast<Eigen::Index>(n_) * i, n_);
    }

    /// Stack (n(k+1)) from complement coordinates y (dim m when transversal)
    /// plus a parameter direction p added to the last block.
    Eigen::VectorXd stack_from(const Eigen::VectorXd& y, const Eigen::VectorXd& p) const {
        Eigen::VectorXd stack =
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_) * (k_ + 1));
        Eigen::Index off = 0;
        for (int i = 0; i <= k_; ++i) {
            if (dims_[i] > 0)
                stack.segment(static_cast<Eigen::Index>(n_) * i, n_) =
                    complements_[i] * y.segment(off, dims_[i]);
            off += dims_[i];
        }
        if (p.size() == n_)
            stack.segment(static_cast<Eigen::Index>(n_) * k_, n_) += p;
        return stack;
    }

    /// d(stack)/dy, n(k+1) x dim(N^c).
    Eigen::MatrixXd stack_jacobian() const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(
            static_cast<Eigen::Index>(n_) * (k_ + 1), complement_dim());
        Eigen::Index off = 0;
        for (int i = 0; i <= k_; ++i) {
            if (dims_[i] > 0)
                out.block(static_cast<Eigen::Index>(n_) * i, off, n_, dims_[i]) =
                    complements_[i];
            off += dims_[i];
        }
        return out;
    }

    Eigen::VectorXd cone_point(double eps, const Eigen::VectorXd& stack) const {
        return curve_point(eps) + blowup_row(eps) * stack;
    }

  private:
    int n_ = 0, m_ = 0, k_ = 0;
    std::vector<Eigen::MatrixXd> raw_ops_;
    std::vector<Eigen::MatrixXd> complements_;
    std::vector<int> dims_;
    Eigen::MatrixXd bottom_kernel_, p_basis_, cone_mix_, complement_stack_;
    Eigen::MatrixXd lead_full_, lead_on_complement_;
    Eigen::VectorXd t_top_;
    std::vector<Eigen::VectorXd> taylor_;
};

/// Point of the cone map Z_k(eps, n^c, p); blocks must lie in their
/// subspaces, which the coordinate parametrization guarantees.
inline Eigen::VectorXd cone_point(const ConeFrame& frame, double eps,
                                  const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& p = Eigen::VectorXd()) {
    return frame.cone_point(eps, frame.stack_from(y, p));
}

/// Explicit eps = 0 limit of the blown-up remainder:
///   (1/(2k+1)!) T^{2k+1} + L (stack with p in the last block).
inline Eigen::VectorXd remainder_at_zero(const ConeFrame& frame, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& p = Eigen::VectorXd()) {
    double scale = to_double(Rational(factorial(2 * frame.k() + 1)));
    return frame.top_coefficient() / scale + frame.lead_full() * frame.stack_from(y, p);
}

/// Blown-up remainder H(eps, n^c, p).
inline Eigen::VectorXd remainder_H(const MapJet<double>& jet, const ConeFrame& frame,
                                   double eps, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& p = Eigen::VectorXd()) {
    if (eps == 0.0) return remainder_at_zero(frame, y, p);
    Eigen::VectorXd g = jet.eval(cone_point(frame, eps, y, p));
    return g * std::pow(eps, -(2 * frame.k() + 1));
}

struct NewtonOptions {
    int max_iterations = 50;
    int max_halvings = 8;
    double tolerance = 1e-12;  // scaled residual target
    // |y| bound: leaving it counts as exiting the cone. Complement
    // coordinates carry factorial scales from the blow-up, so the default is
    // effectively unbounded; configure per problem to model bounded sections.
    double cone_box = 1e30;
};

struct NewtonSample {
    double eps = 0;
    Eigen::VectorXd y;       // complement coordinates
    Eigen::VectorXd z;       // point in B
    double residual = 0;     // ||G[z]||
    int iterations = 0;
    bool converged = false;
    std::string note;
};

struct CurveSamples {
    std::vector<NewtonSample> samples;
    bool all_converged = true;
};

namespace detail {

inline bool newton_solve_point(const MapJet<double>& jet, const ConeFrame& frame,
                               double eps, Eigen::VectorXd& y, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& target, const NewtonOptions& opts,
                               NewtonSample& sample) {
    const int k = frame.k();
    const double inv_pow = std::pow(eps, -(2 * k + 1));
    auto residual = [&](const Eigen::VectorXd& yy) -> Eigen::VectorXd {
        Eigen::VectorXd g = jet.eval(cone_point(frame, eps, yy, p)) - target;
        return g * inv_pow;
    };
    // Damped Newton on the blown-up residual H; the iteration drives ||H||
    // down to its roundoff floor so corrections far below the G-residual
    // scale are still resolved. Acceptance is the scaled G-residual gate.
    Eigen::VectorXd h = residual(y);
    const double h_scale = std::max(1.0, h.norm());
    int it = 0;
    bool exited = false;
    for (; it < opts.max_iterations; ++it) {
        if (h.norm() <= opts.tolerance * h_scale) break;
        Eigen::VectorXd z = cone_point(frame, eps, y, p);
        Eigen::MatrixXd jac = inv_pow * (jet.jacobian(z) * frame.blowup_row(eps) *
                                         frame.stack_jacobian());
        Eigen::VectorXd step = jac.partialPivLu().solve(-h);
        if (!step.allFinite()) {
            sample.note = "singular update";
            break;
        }
        double lambda = 1.0;
        bool accepted = false;
        for (int half = 0; half <= opts.max_halvings; ++half, lambda *= 0.5) {
            Eigen::VectorXd trial = y + lambda * step;
            Eigen::VectorXd ht = residual(trial);
            if (ht.allFinite() && ht.norm() < h.norm()) {
                y = trial;
                h = ht;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            sample.note = "stagnated at the residual floor";
            break;
        }
        if (y.norm() > opts.cone_box) {
            sample.note = "left the cone box";
            exited = true;
            break;
        }
    }
    sample.eps = eps;
    sample.iterations = it;
    sample.y = y;
    sample.z = cone_point(frame, eps, y, p);
    sample.residual = (jet.eval(sample.z) - target).norm();
    if (!exited) {
        Eigen::MatrixXd gz = jet.jacobian(sample.z);
        double scale = std::max(1.0, gz.norm() * sample.z.norm());
        sample.converged = sample.residual <= opts.tolerance * scale;
    }
    return sample.converged;
}

}  // namespace detail

/// eps = 0 base solve of H(0, ., p) = 0 on the complement coordinates.
inline Eigen::VectorXd base_solution(const ConeFrame& frame,
                                     const Eigen::VectorXd& p = Eigen::VectorXd()) {
    Eigen::VectorXd rhs =
        -remainder_at_zero(frame, Eigen::VectorXd::Zero(frame.complement_dim()), p);
    return frame.lead_on_complement().partialPivLu().solve(rhs);
}

/// Newton continuation of the blown-up remainder along the grid (eps
/// homotopy: each point starts from the previous solution).
inline CurveSamples newton_continue(const MapJet<double>& jet, const ConeFrame& frame,
                                    const std::vector<double>& grid,
                                    const Eigen::VectorXd& p = Eigen::VectorXd(),
                                    const NewtonOptions& opts = {}) {
    CurveSamples out;
    Eigen::VectorXd y = base_solution(frame, p);
    Eigen::VectorXd target = Eigen::VectorXd::Zero(frame.m());
    for (double eps : grid) {
        NewtonSample sample;
        detail::newton_solve_point(jet, frame, eps, y, p, target, opts, sample);
        out.all_converged = out.all_converged && sample.converged;
        out.samples.push_back(std::move(sample));
    }
    return out;
}

/// Level set: solve G[Z_k(eps, n^c, n_{k+1})] = G[z0(eps)] for n^c with the
/// bottom-kernel direction n_{k+1} held fixed.
inline NewtonSample level_set(const MapJet<double>& jet, const ConeFrame& frame, double eps,
                              const Eigen::VectorXd& bottom_direction,
                              const NewtonOptions& opts = {}) {
    Eigen::VectorXd target = jet.eval(frame.curve_point(eps));
    Eigen::VectorXd y = Eigen::VectorXd::Zero(frame.complement_dim());
    NewtonSample sample;
    detail::newton_solve_point(jet, frame, eps, y, bottom_direction, target, opts, sample);
    return sample;
}

/// ---- slope fits and traces ------------------------------------------------

struct SlopeFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double rms = std::numeric_limits<double>::quiet_NaN();
    int points = 0;
    double nearest_integer = 0;
    bool accept = false;  // |slope - nearest| < 0.1 and rms below bound
};

inline SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& q,
                          double rms_bound = 0.25) {
    SlopeFit fit;
    std::vector<double> x, yv;
    for (size_t i = 0; i < eps.size() && i < q.size(); ++i) {
        if (q[i] > 0 && std::isfinite(q[i]) && eps[i] != 0)
            x.push_back(std::log(std::abs(eps[i]))), yv.push_back(std::log(q[i]));
    }
    fit.points = static_cast<int>(x.size());
    if (fit.points < 3) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < fit.points; ++i) {
        sx += x[i];
        sy += yv[i];
        sxx += x[i] * x[i];
        sxy += x[i] * yv[i];
    }
    double denom = fit.points * sxx - sx * sx;
    fit.slope = (fit.points * sxy - sx * sy) / denom;
    double icept = (sy - fit.slope * sx) / fit.points;
    double ss = 0;
    for (int i = 0; i < fit.points; ++i) {
        double r = yv[i] - (icept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / fit.points) / std::log(10.0);  // decades
    fit.nearest_integer = std::round(fit.slope);
    fit.accept = std::abs(fit.slope - fit.nearest_integer) < 0.1 && fit.rms < rms_bound;
    return fit;
}

/// Sum of |coefficient| * |point|^alpha over all monomials: the magnitude
/// scale of one float evaluation, used for noise floors.
inline double abs_eval(const MapJet<double>& jet, const Eigen::VectorXd& point) {
    double total = 0;
    for (int beta = 1; beta <= jet.degree(); ++beta) {
        for (const auto& [mi, c] : jet.form(beta).terms()) {
            double w = 1;
            for (size_t i = 0; i < mi.size(); ++i)
                w *= std::pow(std::abs(point(static_cast<Eigen::Index>(i))), mi[i]);
            total += w * c.cwiseAbs().sum();
        }
    }
    return total;
}

struct TraceRow {
    double eps = 0;
    double residual = std::numeric_limits<double>::quiet_NaN();  // ||G[z(eps)]||
    double abs_det = 0;                                          // |det G_{N^c}[z0]|
    double inv_norm = 0;                                         // ||G_{N^c}[z0]^{-1}||
    std::vector<double> block_norms;  // ||G'[z0] A^i|| / ||A^i|| per stage
    double lin_residual = 0;          // ||G[Z]-G[z0]-eps^{2k+1} L stack||
    double lin_scale = 0;             // ||eps^{2k+1} L stack||, the leading term
    double noise_floor = 0;           // roundoff scale of the evaluations
};

struct TraceTable {
    std::vector<TraceRow> rows;
    SlopeFit det_fit;
    SlopeFit inv_fit;
    std::vector<SlopeFit> block_fits;
    SlopeFit lin_fit;

    /// The subtracted leading term cancels the cone map to roundoff: the
    /// remainder law holds with margin and no slope can be fit on the noise.
    bool lin_negligible() const {
        for (const auto& r : rows)
            if (r.lin_residual > std::max(1e-10 * r.lin_scale, 4 * r.noise_floor))
                return false;
        return !rows.empty();
    }

    /// Remainder law of the cone map: the residual decays at least one
    /// eps-order faster than the subtracted leading term. Certified as a
    /// bound: calibrate the constant on the largest grid point, then demand
    /// C |eps|^{2k+2} decay down to the evaluation noise floor.
    bool linearization_law_holds(int k) const {
        if (rows.empty()) return false;
        const TraceRow* top = &rows.front();
        for (const auto& r : rows)
            if (std::abs(r.eps) > std::abs(top->eps)) top = &r;
        // Factor 2 absorbs the drift of the eps^{2k+2} coefficient toward its
        // limit; a one-order violation grows by the full grid span instead.
        double c0 = 2 * top->lin_residual / std::pow(std::abs(top->eps), 2 * k + 2);
        for (const auto& r : rows) {
            double bound =
                c0 * std::pow(std::abs(r.eps), 2 * k + 2) + 4 * r.noise_floor;
            if (r.lin_residual > bound) return false;
        }
        return true;
    }
};

/// Deterministic unit test stack for the linearization-residual column: the
/// first basis vector of every nonzero complement block plus the first
/// parameter direction.
inline Eigen::VectorXd default_test_stack(const ConeFrame& frame) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(frame.complement_dim());
    Eigen::Index off = 0;
    for (int i = 0; i <= frame.k(); ++i) {
        if (frame.block_dim(i) > 0) y(off) = 1.0;
        off += frame.block_dim(i);
    }
    Eigen::VectorXd p;
    if (frame.p_basis().cols() > 0) p = frame.p_basis().col(0);
    return frame.stack_from(y, p);
}

/// Sample every rate law of the cone along the grid and fit the exponents.
inline TraceTable rate_trace(const MapJet<double>& jet, const ConeFrame& frame,
                             const std::vector<double>& grid,
                             const CurveSamples* solved = nullptr) {
    TraceTable table;
    const int k = frame.k();
    Eigen::VectorXd test_stack = default_test_stack(frame);
    for (size_t idx = 0; idx < grid.size(); ++idx) {
        double eps = grid[idx];
        TraceRow row;
        row.eps = eps;
        Eigen::VectorXd z0 = frame.curve_point(eps);
        Eigen::MatrixXd gz = jet.jacobian(z0);
        Eigen::MatrixXd on_comp = gz * frame.complement_stack();
        if (on_comp.rows() == on_comp.cols()) {
            row.abs_det = std::abs(on_comp.determinant());
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(on_comp);
            double smin = svd.singularValues().minCoeff();
            row.inv_norm = smin > 0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
        }
        Eigen::MatrixXd blow = frame.blowup_row(eps);
        for (int i = 0; i <= k; ++i) {
            if (frame.block_dim(i) == 0) {
                row.block_norms.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            // A_eps^i restricted to the complement block.
            Eigen::MatrixXd a_i(frame.n(), frame.block_dim(i));
            {
                Eigen::VectorXd y = Eigen::VectorXd::Zero(frame.complement_dim());
                Eigen::Index off = 0;
                for (int t = 0; t < i; ++t) off += frame.block_dim(t);
                for (int c = 0; c < frame.block_dim(i); ++c) {
                    y.setZero();
                    y(off + c) = 1.0;
                    Eigen::VectorXd stack = frame.stack_from(y, Eigen::VectorXd());
                    a_i.col(c) = blow * stack;
                }
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> num(gz * a_i);
            Eigen::JacobiSVD<Eigen::MatrixXd> den(a_i);
            row.block_norms.push_back(num.singularValues().maxCoeff() /
                                      den.singularValues().maxCoeff());
        }
        {
            Eigen::VectorXd leading =
                std::pow(eps, 2 * k + 1) * (frame.lead_full() * test_stack);
            Eigen::VectorXd zt = frame.cone_point(eps, test_stack);
            Eigen::VectorXd pert = jet.eval(zt) - jet.eval(z0) - leading;
            row.lin_residual = pert.norm();
            row.lin_scale = leading.norm();
            double mach = std::numeric_limits<double>::epsilon();
            row.noise_floor =
                16 * mach * (abs_eval(jet, zt) + abs_eval(jet, z0) + leading.norm());
        }
        if (solved && idx < solved->samples.size())
            row.residual = solved->samples[idx].residual;
        else
            row.residual = jet.eval(z0).norm();
        table.rows.push_back(std::move(row));
    }

    std::vector<double> eps_v, det_v, inv_v, lin_v;
    for (const auto& r : table.rows) {
        eps_v.push_back(r.eps);
        det_v.push_back(r.abs_det);
        inv_v.push_back(r.inv_norm > 0 ? 1.0 / r.inv_norm : 0.0);  // fit sigma_min
        lin_v.push_back(r.lin_residual);
    }
    table.det_fit = fit_slope(eps_v, det_v);
    {
        table.inv_fit = fit_slope(eps_v, inv_v);
        table.inv_fit.slope = -table.inv_fit.slope;  // report the inverse-norm law
        table.inv_fit.nearest_integer = std::round(table.inv_fit.slope);
        table.inv_fit.accept =
            std::abs(table.inv_fit.slope - table.inv_fit.nearest_integer) < 0.1 &&
            table.inv_fit.rms < 0.25;
    }
    for (int i = 0; i <= k; ++i) {
        std::vector<double> b_v;
        for (const auto& r : table.rows) b_v.push_back(r.block_norms[i]);
        table.block_fits.push_back(fit_slope(eps_v, b_v));
    }
    table.lin_fit = fit_slope(eps_v, lin_v);
    return table;
}

/// ---- degree signs -----------------------------------------------------------

struct DegreeSigns {
    int positive_halfcone = 0;  // sign of det along eps > 0 samples
    int negative_halfcone = 0;
    bool constant = false;      // no sign change inside either half-cone
    bool measurable = false;    // determinants above tolerance
};

inline DegreeSigns degree_signs(const MapJet<double>& jet, const ConeFrame& frame,
                                const CurveSamples& pos, const CurveSamples& neg,
                                double tol = 1e-300) {
    DegreeSigns out;
    auto half = [&](const CurveSamples& s, int& sign_out) -> bool {
        int sign = 0;
        bool constant = true, any = false;
        for (const auto& sample : s.samples) {
            Eigen::MatrixXd on_comp =
                jet.jacobian(sample.z) * frame.complement_stack();
            if (on_comp.rows() != on_comp.cols()) return false;
            double det = on_comp.determinant();
            if (std::abs(det) <= tol) continue;
            any = true;
            int sgn = det > 0 ? 1 : -1;
            if (sign == 0) sign = sgn;
            if (sgn != sign) constant = false;
        }
        sign_out = sign;
        return any && constant;
    };
    bool okp = half(pos, out.positive_halfcone);
    bool okn = half(neg, out.negative_halfcone);
    out.constant = okp && okn;
    out.measurable = out.positive_halfcone != 0 && out.negative_halfcone != 0;
    return out;
}

/// ---- identity of order k (I_1) ---------------------------------------------

/// Sequential eps->0 extrapolation (Neville over the smallest grid points)
/// of the Taylor coefficients of a sampled family; used instead of a plain
/// Vandermonde fit, which cannot certify 1e-8 on a geometric grid.
inline std::vector<Eigen::VectorXd> extract_taylor_coefficients(
    std::vector<double> eps, std::vector<Eigen::VectorXd> values, int count,
    int support = 6) {
    if (eps.size() != values.size() || eps.empty())
        throw std::invalid_argument("extract_taylor_coefficients: bad samples");
    // Order by |eps| ascending and keep the extrapolation support.
    std::vector<size_t> idx(eps.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return std::abs(eps[a]) < std::abs(eps[b]); });
    int use = std::min<int>(support, static_cast<int>(idx.size()));
    std::vector<double> xs(use);
    std::vector<Eigen::VectorXd> fs(use);
    for (int i = 0; i < use; ++i) {
        xs[i] = eps[idx[i]];
        fs[i] = values[idx[i]];
    }
    auto neville_at_zero = [&](std::vector<Eigen::VectorXd> f) {
        int n = static_cast<int>(f.size());
        for (int level = 1; level < n; ++level)
            for (int i = 0; i < n - level; ++i)
                f[i] = (xs[i + level] * f[i] - xs[i] * f[i + 1]) / (xs[i + level] - xs[i]);
        return f[0];
    };
    std::vector<Eigen::VectorXd> coeffs;
    for (int order = 1; order <= count; ++order) {
        std::vector<Eigen::VectorXd> g(use);
        for (int i = 0; i < use; ++i) g[i] = fs[i] / xs[i];
        Eigen::VectorXd c = neville_at_zero(g);
        coeffs.push_back(c);
        for (int i = 0; i < use; ++i) fs[i] = g[i] - c;
    }
    return coeffs;
}

struct IdentityCheck {
    bool ok = false;
    double max_coefficient = 0;  // largest |coefficient| through order k
};

/// (I_1): coefficients of z(eps,p) - z0(eps) vanish through order k.
inline IdentityCheck identity_order_check(const ConeFrame& frame,
                                          const CurveSamples& samples,
                                          double bound = 1e-8) {
    IdentityCheck out;
    std::vector<double> eps;
    std::vector<Eigen::VectorXd> diff;
    for (const auto& s : samples.samples) {
        if (!s.converged) continue;
        eps.push_back(s.eps);
        diff.push_back(s.z - frame.curve_point(s.eps));
    }
    if (static_cast<int>(eps.size()) < frame.k() + 2) return out;
    auto coeffs = extract_taylor_coefficients(eps, diff, frame.k());
    for (const auto& c : coeffs)
        out.max_coefficient = std::max(out.max_coefficient, c.cwiseAbs().maxCoeff());
    out.ok = out.max_coefficient < bound;
    return out;
}

}  // namespace finecone
