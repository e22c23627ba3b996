#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "psm/basis_factorization.hpp"
#include "psm/errors.hpp"
#include "psm/program.hpp"

/**
 * Parametric simplex method: starting from a dictionary that is optimal for
 * all large λ, walk λ downward, pivoting at every breakpoint, and emit one
 * PathSegment per dictionary.
 */
namespace psm {

enum class TieBreak { SmallestIndex };

struct SolveOptions
{
    double lambda_target = 0.0;
    std::optional<long> max_pivots;  // default 10·n
    double eps_feas = 1e-9;
    double eps_ratio = 1e-9;
    TieBreak tie_break = TieBreak::SmallestIndex;
    int refactor_limit = 50;
    /** Relative tolerance for accepting incrementally updated dictionaries. */
    double resync_tolerance = 1e-7;
    /** Checked on every emitted segment; returning true ends the path (ReachedTarget). */
    std::function<bool(const PathSegment&)> stop_when;
    /** When set, one tab-separated line per pivot. */
    std::ostream* trace = nullptr;

    void validate() const
    {
        if (!(lambda_target >= 0.0))
            throw Error("lambda_target must be nonnegative");
        if (max_pivots && *max_pivots < 1)
            throw Error("max_pivots must be at least 1");
    }
};

enum class TightKind { None, Nonbasic, Basic };

/** Which dictionary entry attains λ*. `position` indexes into N or B. */
struct TightConstraint
{
    TightKind kind = TightKind::None;
    Index position = -1;
    Index column = -1;
};

struct LambdaStar
{
    double value = -kInf;
    TightConstraint tight;
};

namespace detail {

inline bool nearly_equal(double a, double b, double rel = 1e-11)
{
    return std::abs(a - b) <= rel * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace detail

/**
 * λ* = max( max_{j∈N, z̄_j>0} -z*_j/z̄_j ,  max_{i∈B, x̄_i>0} -x*_i/x̄_i ).
 * Empty maxima give -∞. Ties prefer the nonbasic family, then the smallest
 * column index.
 */
inline LambdaStar compute_lambda_star(const DictionaryState& s, double eps_ratio = 1e-9)
{
    LambdaStar best;
    auto consider = [&](double value, TightKind kind, Index pos, Index col) {
        if (best.tight.kind == TightKind::None) {
            best = {value, {kind, pos, col}};
        } else if (detail::nearly_equal(value, best.value)) {
            const bool prefer_kind = kind == TightKind::Nonbasic && best.tight.kind == TightKind::Basic;
            const bool same_kind_smaller = kind == best.tight.kind && col < best.tight.column;
            if (prefer_kind || same_kind_smaller)
                best.tight = {kind, pos, col};
            best.value = std::max(value, best.value);
        } else if (value > best.value) {
            best = {value, {kind, pos, col}};
        }
    };
    const auto& part = s.partition;
    for (Index k = 0; k < s.zN_pert.size(); ++k)
        if (s.zN_pert(k) > eps_ratio)
            consider(-s.zN_base(k) / s.zN_pert(k), TightKind::Nonbasic, k, part.nonbasic[static_cast<std::size_t>(k)]);
    for (Index r = 0; r < s.xB_pert.size(); ++r)
        if (s.xB_pert(r) > eps_ratio && !s.basic_is_free(r))
            consider(-s.xB_base(r) / s.xB_pert(r), TightKind::Basic, r, part.basic[static_cast<std::size_t>(r)]);
    return best;
}

/** λmax = min over negative perturbations of the same ratios; +∞ if none. */
inline double compute_lambda_max(const DictionaryState& s, double eps_ratio = 1e-9)
{
    double hi = kInf;
    for (Index k = 0; k < s.zN_pert.size(); ++k)
        if (s.zN_pert(k) < -eps_ratio)
            hi = std::min(hi, -s.zN_base(k) / s.zN_pert(k));
    for (Index r = 0; r < s.xB_pert.size(); ++r)
        if (s.xB_pert(r) < -eps_ratio && !s.basic_is_free(r))
            hi = std::min(hi, -s.xB_base(r) / s.xB_pert(r));
    return hi;
}

struct CertificateReport
{
    double primal_residual = 0.0;        // max(‖Ax − b_λ‖∞, max(0, −min x))
    double dual_residual = 0.0;          // max(0, −min z_fresh) and ‖z − z_fresh‖∞
    double complementarity = 0.0;        // max_j |x_j z_j|
    double duality_gap = 0.0;            // |c_λᵀx − b_λᵀy|
    double scale = 0.0;
    bool passed = false;
};

/**
 * Optimality certificate at λ for an equality-form program. `y` are the row
 * multipliers; reduced costs are recomputed from scratch as z = Aᵀy − c_λ.
 * Residuals are compared against 1e-7·(1 + scale) (and (1 + scale)² for the
 * bilinear complementarity and gap terms).
 */
inline CertificateReport verify_certificate(const ParametricProgram& p, const Vector& x, const Vector& z,
                                            const Vector& y, double lambda, double tol = 1e-7)
{
    if (p.kind != ConstraintKind::Equality)
        throw Error("verify_certificate expects an equality-form program; call to_standard_form first");
    if (x.size() != p.cols() || z.size() != p.cols() || y.size() != p.rows())
        throw DimensionMismatch("certificate vectors do not match program dimensions");
    const Vector rhs = p.rhs_at(lambda);
    const Vector obj = p.objective_at(lambda);
    const Vector z_fresh = p.A.transpose() * y - obj;

    CertificateReport r;
    double neg_x = 0.0, neg_z = 0.0;
    for (Index j = 0; j < p.cols(); ++j) {
        if (p.is_free(j)) {
            neg_z = std::max(neg_z, std::abs(z_fresh(j)));  // free columns need z_j = 0
        } else {
            neg_x = std::max(neg_x, -x(j));
            neg_z = std::max(neg_z, -z_fresh(j));
        }
    }
    r.primal_residual = std::max((p.A * x - rhs).lpNorm<Eigen::Infinity>(), neg_x);
    r.dual_residual = std::max(neg_z, (z - z_fresh).lpNorm<Eigen::Infinity>());
    r.complementarity = x.cwiseProduct(z).cwiseAbs().maxCoeff();
    r.duality_gap = std::abs(obj.dot(x) - rhs.dot(y));

    double a_max = 0.0;
    for (Index j = 0; j < p.A.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(p.A, j); it; ++it)
            a_max = std::max(a_max, std::abs(it.value()));
    r.scale = std::max({rhs.lpNorm<Eigen::Infinity>(), obj.lpNorm<Eigen::Infinity>(), x.lpNorm<Eigen::Infinity>(),
                        z.lpNorm<Eigen::Infinity>(), a_max * y.lpNorm<Eigen::Infinity>()});
    const double lin = tol * (1.0 + r.scale);
    const double bil = tol * (1.0 + r.scale) * (1.0 + r.scale);
    r.passed = r.primal_residual <= lin && r.dual_residual <= lin && r.complementarity <= bil && r.duality_gap <= bil;
    return r;
}

/** Certificate of a path segment at λ, using its stored primal, reduced costs and row duals. */
inline CertificateReport verify_segment(const ParametricProgram& p, const PathSegment& seg, double lambda)
{
    Vector x = Vector::Zero(seg.num_cols);
    for (const auto& e : seg.primal)
        x(e.index) = e.value.at(lambda);
    Vector z = Vector::Zero(seg.num_cols);
    for (const auto& e : seg.dual)
        z(e.index) = e.value.at(lambda);
    return verify_certificate(p, x, z, evaluate_row_dual(seg, lambda), lambda);
}

/**
 * One run of the parametric simplex method on an equality-form program.
 * Owns the dictionary and the basis factorization.
 */
class ParametricSimplex
{
public:
    ParametricSimplex(ParametricProgram program, std::vector<Index> initial_basis, SolveOptions options = {})
        : program_(std::move(program)), options_(std::move(options))
    {
        program_.validate();
        options_.validate();
        if (program_.kind != ConstraintKind::Equality)
            throw Error("ParametricSimplex needs an equality-form program; call to_standard_form first");
        if (static_cast<Index>(initial_basis.size()) != program_.rows())
            throw DimensionMismatch("initial basis must contain m columns");
        state_.partition = BasisPartition::from_basic(std::move(initial_basis), program_.cols());
        state_.free_mask = program_.free_mask;
        for (Index j : state_.partition.nonbasic)
            if (program_.is_free(j))
                throw Error("free column " + std::to_string(j) + " must be in the initial basis");
        factor_ = BasisFactorization(program_.A, state_.partition.basic, FactorizationOptions{options_.refactor_limit});
        recompute_state();
        initialize_interval();
    }

    const ParametricProgram& program() const { return program_; }
    const DictionaryState& state() const { return state_; }
    const BasisFactorization& factorization() const { return factor_; }
    const SolveOptions& options() const { return options_; }

    /** Primal step: nonbasic at position `entering_pos` in N enters at λ*. */
    PivotEvent primal_pivot(Index entering_pos, double lambda_star)
    {
        const Index j = state_.partition.nonbasic.at(static_cast<std::size_t>(entering_pos));
        const Vector dx = factor_.solve(column(j));
        const Index r = select_ratio(dx, state_.xB_base, state_.xB_pert, state_.partition.basic, lambda_star);
        if (r < 0)
            throw UnboundedDirection("no basic variable blocks column " + std::to_string(j) + " at λ=" +
                                     std::to_string(lambda_star));
        const Vector dz = dual_direction(r);
        return apply_pivot(PivotKind::Primal, r, entering_pos, dx, dz, lambda_star);
    }

    /** Dual step: basic at position `leaving_pos` in B leaves at λ*. */
    PivotEvent dual_pivot(Index leaving_pos, double lambda_star)
    {
        const Index i = state_.partition.basic.at(static_cast<std::size_t>(leaving_pos));
        const Vector dz = dual_direction(leaving_pos);
        const Index q = select_ratio(dz, state_.zN_base, state_.zN_pert, state_.partition.nonbasic, lambda_star);
        if (q < 0)
            throw InfeasibleProblem("no nonbasic column can replace column " + std::to_string(i) + " at λ=" +
                                    std::to_string(lambda_star));
        const Index j = state_.partition.nonbasic[static_cast<std::size_t>(q)];
        const Vector dx = factor_.solve(column(j));
        return apply_pivot(PivotKind::Dual, leaving_pos, q, dx, dz, lambda_star);
    }

    /** Snapshot of the current dictionary as a path segment on [lo, hi]. */
    PathSegment current_segment(double lo, double hi) const
    {
        PathSegment seg;
        seg.lambda_lo = lo;
        seg.lambda_hi = hi;
        seg.num_cols = program_.cols();
        const auto& part = state_.partition;
        seg.primal.reserve(part.basic.size());
        for (std::size_t r = 0; r < part.basic.size(); ++r)
            seg.primal.push_back({part.basic[r], {state_.xB_base(static_cast<Index>(r)), state_.xB_pert(static_cast<Index>(r))}});
        seg.dual.reserve(part.nonbasic.size());
        for (std::size_t k = 0; k < part.nonbasic.size(); ++k)
            seg.dual.push_back({part.nonbasic[k], {state_.zN_base(static_cast<Index>(k)), state_.zN_pert(static_cast<Index>(k))}});
        auto by_index = [](const SparseAffineEntry& a, const SparseAffineEntry& b) { return a.index < b.index; };
        std::sort(seg.primal.begin(), seg.primal.end(), by_index);
        std::sort(seg.dual.begin(), seg.dual.end(), by_index);
        seg.row_dual_base = factor_.solve_transpose(gather(program_.c, part.basic));
        seg.row_dual_slope = factor_.solve_transpose(gather(program_.c_bar, part.basic));
        seg.basis_hash = part.hash();
        return seg;
    }

    /** Pivot at successive breakpoints until λ* drops to the target or the path ends otherwise. */
    SolutionPath run()
    {
        SolutionPath path;
        const long cap = options_.max_pivots.value_or(10 * static_cast<long>(program_.cols()));
        double hi = state_.lambda_hi;
        while (true) {
            LambdaStar ls = compute_lambda_star(state_, options_.eps_ratio);
            // breakpoints never move up; clamp roundoff
            double lambda_star = std::min(ls.value, hi);
            // roundoff above the target counts as reaching it
            const double snap = 1e-13 * (1.0 + (std::isfinite(hi) ? std::abs(hi) : 0.0));
            if (std::isfinite(lambda_star) && lambda_star > options_.lambda_target &&
                lambda_star - options_.lambda_target <= snap)
                lambda_star = options_.lambda_target;
            state_.lambda_lo = lambda_star;
            state_.lambda_hi = hi;

            if (lambda_star <= options_.lambda_target || ls.tight.kind == TightKind::None) {
                const double lo = std::max(lambda_star, options_.lambda_target);
                path.segments.push_back(current_segment(lo, hi));
                path.terminal_lambda = lo;
                const bool nonpositive = std::isfinite(ls.value) && lambda_star <= 0.0 && options_.lambda_target == 0.0;
                path.termination = nonpositive ? Termination::LambdaNonpositive : Termination::ReachedTarget;
                return path;
            }

            path.segments.push_back(current_segment(lambda_star, hi));
            path.terminal_lambda = lambda_star;
            if (options_.stop_when && options_.stop_when(path.segments.back())) {
                path.termination = Termination::ReachedTarget;
                return path;
            }
            if (static_cast<long>(path.pivots.size()) >= cap) {
                path.termination = Termination::IterationCap;
                return path;
            }

            try {
                PivotEvent ev = pivot_with_retry(ls.tight, lambda_star);
                path.segments.back().entering_index = ev.entering;
                path.segments.back().leaving_index = ev.leaving;
                path.pivots.push_back(ev);
                if (options_.trace)
                    *options_.trace << path.pivots.size() << '\t' << to_string(ev.kind) << '\t' << ev.entering
                                    << '\t' << ev.leaving << '\t' << ev.lambda_star << '\t' << ev.t << '\t' << ev.s
                                    << '\n';
            } catch (const UnboundedDirection& e) {
                path.termination = Termination::Unbounded;
                path.message = e.what();
                return path;
            } catch (const InfeasibleProblem& e) {
                path.termination = Termination::Infeasible;
                path.message = e.what();
                return path;
            } catch (const Error& e) {
                path.termination = Termination::NumericalFailure;
                path.message = e.what();
                return path;
            }
            hi = lambda_star;
        }
    }

private:
    SparseColumn column(Index j) const { return SparseColumn(program_.A.col(j)); }

    static Vector gather(const Vector& v, const std::vector<Index>& idx)
    {
        Vector out(static_cast<Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k)
            out(static_cast<Index>(k)) = v(idx[k]);
        return out;
    }

    /** Δz_N = -(A_B⁻¹A_N)ᵀ e_r, i.e. minus row r of the dictionary. */
    Vector dual_direction(Index r) const
    {
        Vector e = Vector::Zero(program_.rows());
        e(r) = 1.0;
        const Vector rho = factor_.solve_transpose(e);
        const auto& N = state_.partition.nonbasic;
        Vector dz(static_cast<Index>(N.size()));
        for (std::size_t k = 0; k < N.size(); ++k)
            dz(static_cast<Index>(k)) = -program_.A.col(N[k]).dot(rho);
        return dz;
    }

    /**
     * Ratio test shared by both pivot kinds: among entries with a positive
     * direction, maximize direction / (base + λ*·pert). Denominators below
     * eps_feas count as +∞ and win; among those, entries whose value stays at
     * zero below λ* come first, then those growing fastest as λ decreases.
     * Remaining ties go to the smallest column index.
     */
    Index select_ratio(const Vector& dir, const Vector& base, const Vector& pert, const std::vector<Index>& columns,
                       double lambda_star) const
    {
        Index best = -1;
        int best_class = 0;
        double best_key = 0.0;
        for (Index k = 0; k < dir.size(); ++k) {
            const double d = dir(k);
            if (!(d > options_.eps_ratio) || program_.is_free(columns[static_cast<std::size_t>(k)]))
                continue;
            const double value = base(k) + lambda_star * pert(k);
            int cls;
            double key;
            if (value >= options_.eps_feas) {
                cls = 2;
                key = d / value;
            } else if (pert(k) < -options_.eps_ratio) {
                cls = 1;
                key = d / -pert(k);
            } else if (pert(k) <= options_.eps_ratio) {
                cls = 0;
                key = 0.0;
            } else {
                cls = 3;
                key = d / -pert(k);
            }
            const Index col = columns[static_cast<std::size_t>(k)];
            bool better = false;
            if (best < 0 || cls < best_class)
                better = true;
            else if (cls == best_class) {
                if (cls != 0 && !detail::nearly_equal(key, best_key, 1e-12))
                    better = key > best_key;
                else
                    better = col < columns[static_cast<std::size_t>(best)];
            }
            if (better) {
                best = k;
                best_class = cls;
                best_key = key;
            }
        }
        return best;
    }

    PivotEvent apply_pivot(PivotKind kind, Index r, Index q, const Vector& dx, const Vector& dz, double lambda_star)
    {
        auto& part = state_.partition;
        const Index i = part.basic[static_cast<std::size_t>(r)];
        const Index j = part.nonbasic[static_cast<std::size_t>(q)];

        PivotEvent ev;
        ev.kind = kind;
        ev.entering = j;
        ev.leaving = i;
        ev.lambda_star = lambda_star;
        ev.t = state_.xB_base(r) / dx(r);
        ev.t_bar = state_.xB_pert(r) / dx(r);
        ev.s = state_.zN_base(q) / dz(q);
        ev.s_bar = state_.zN_pert(q) / dz(q);

        // factorization first: a degenerate update must leave the dictionary untouched
        factor_.replace_column(r, column(j));

        state_.xB_base -= ev.t * dx;
        state_.xB_pert -= ev.t_bar * dx;
        state_.zN_base -= ev.s * dz;
        state_.zN_pert -= ev.s_bar * dz;
        state_.xB_base(r) = ev.t;
        state_.xB_pert(r) = ev.t_bar;
        state_.zN_base(q) = ev.s;
        state_.zN_pert(q) = ev.s_bar;
        part.basic[static_cast<std::size_t>(r)] = j;
        part.nonbasic[static_cast<std::size_t>(q)] = i;

        resync(lambda_star);
        return ev;
    }

    PivotEvent dispatch(const TightConstraint& tight, double lambda_star)
    {
        return tight.kind == TightKind::Nonbasic ? primal_pivot(tight.position, lambda_star)
                                                 : dual_pivot(tight.position, lambda_star);
    }

    PivotEvent pivot_with_retry(const TightConstraint& tight, double lambda_star)
    {
        try {
            return dispatch(tight, lambda_star);
        } catch (const UpdateDegenerate&) {
            factor_.refactorize();
            recompute_state();
        } catch (const SingularBasis&) {
            factor_.refactorize();
            recompute_state();
        }
        // recomputed dictionary may pick a different tight constraint
        const LambdaStar again = compute_lambda_star(state_, options_.eps_ratio);
        if (again.tight.kind == TightKind::None)
            throw Error("dictionary lost its breakpoint after refactorization");
        return dispatch(again.tight, std::min(again.value, lambda_star));
    }

    /** x*_B, x̄_B, z*_N, z̄_N and ζ* from the current factorization. */
    void fresh_state(Vector& xb, Vector& xbp, Vector& zn, Vector& znp) const
    {
        const auto& part = state_.partition;
        xb = factor_.solve(program_.b);
        xbp = factor_.solve(program_.b_bar);
        const Vector y = factor_.solve_transpose(gather(program_.c, part.basic));
        const Vector ybar = factor_.solve_transpose(gather(program_.c_bar, part.basic));
        const Vector zfull = program_.A.transpose() * y - program_.c;
        const Vector zbar_full = program_.A.transpose() * ybar - program_.c_bar;
        zn = gather(zfull, part.nonbasic);
        znp = gather(zbar_full, part.nonbasic);
    }

    void recompute_state()
    {
        fresh_state(state_.xB_base, state_.xB_pert, state_.zN_base, state_.zN_pert);
        state_.objective_base = gather(program_.c, state_.partition.basic).dot(state_.xB_base);
    }

    /**
     * Compare the updated dictionary against one recomputed from the
     * factorization; on disagreement refactorize and adopt the fresh values.
     * The resulting dictionary must be feasible at λ*.
     */
    void resync(double lambda_star)
    {
        Vector xb, xbp, zn, znp;
        fresh_state(xb, xbp, zn, znp);
        auto close = [&](const Vector& a, const Vector& b) {
            const double scale = 1.0 + std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
            return a.size() == 0 || (a - b).lpNorm<Eigen::Infinity>() <= options_.resync_tolerance * scale;
        };
        if (!(close(xb, state_.xB_base) && close(xbp, state_.xB_pert) && close(zn, state_.zN_base) &&
              close(znp, state_.zN_pert))) {
            factor_.refactorize();
            fresh_state(xb, xbp, zn, znp);
        }
        state_.xB_base = std::move(xb);
        state_.xB_pert = std::move(xbp);
        state_.zN_base = std::move(zn);
        state_.zN_pert = std::move(znp);
        state_.objective_base = gather(program_.c, state_.partition.basic).dot(state_.xB_base);

        Vector xv = state_.xB_base + lambda_star * state_.xB_pert;
        for (Index r = 0; r < xv.size(); ++r)
            if (state_.basic_is_free(r))
                xv(r) = 0.0;
        const Vector zv = state_.zN_base + lambda_star * state_.zN_pert;
        const double scale = 1.0 + std::max(xv.size() ? xv.lpNorm<Eigen::Infinity>() : 0.0,
                                            zv.size() ? zv.lpNorm<Eigen::Infinity>() : 0.0);
        const double tol = options_.resync_tolerance * scale;
        if ((xv.size() && xv.minCoeff() < -tol) || (zv.size() && zv.minCoeff() < -tol))
            throw Error("dictionary after pivot is infeasible at λ*=" + std::to_string(lambda_star));
    }

    /**
     * λmax of the starting dictionary; also rejects dictionaries that are
     * infeasible for every λ (negative entries with zero perturbation, or
     * λmax < λ*).
     */
    void initialize_interval()
    {
        const double eps = options_.eps_ratio;
        auto constant_infeasible = [&](const Vector& base, const Vector& pert, bool basic) {
            for (Index k = 0; k < base.size(); ++k) {
                if (basic && state_.basic_is_free(k))
                    continue;
                if (std::abs(pert(k)) <= eps && base(k) < -options_.eps_feas * (1.0 + std::abs(base(k))))
                    return true;
            }
            return false;
        };
        if (constant_infeasible(state_.xB_base, state_.xB_pert, true) ||
            constant_infeasible(state_.zN_base, state_.zN_pert, false))
            throw InfeasibleAtLargeLambda("starting dictionary is infeasible for every λ");
        const LambdaStar ls = compute_lambda_star(state_, eps);
        const double hi = compute_lambda_max(state_, eps);
        if (hi < ls.value && !detail::nearly_equal(hi, ls.value, 1e-9))
            throw InfeasibleAtLargeLambda("starting dictionary has empty validity interval: λ* = " +
                                          std::to_string(ls.value) + " > λmax = " + std::to_string(hi));
        state_.lambda_lo = ls.value;
        state_.lambda_hi = std::max(hi, ls.value);
    }

    ParametricProgram program_;
    SolveOptions options_;
    DictionaryState state_;
    BasisFactorization factor_;
};

/** Build the starting dictionary for `basis`; see ParametricSimplex. */
inline DictionaryState initialize(const ParametricProgram& p, std::vector<Index> basis, const SolveOptions& opts = {})
{
    return ParametricSimplex(p, std::move(basis), opts).state();
}

/**
 * Solution path of `p` from the largest λ down to `opts.lambda_target`.
 * LessEqual programs are converted to standard form and start from the
 * slack basis; the path is then expressed over the n + m standard-form
 * columns. Equality programs require `initial_basis`.
 */
inline SolutionPath solve_path(const ParametricProgram& p, const SolveOptions& opts = {},
                               std::optional<std::vector<Index>> initial_basis = std::nullopt)
{
    auto [standard, slacks] = to_standard_form(p);
    if (!initial_basis) {
        if (p.kind != ConstraintKind::LessEqual)
            throw Error("equality programs need an initial basis");
        initial_basis = slack_basis(slacks);
    }
    ParametricSimplex engine(std::move(standard), std::move(*initial_basis), opts);
    return engine.run();
}

/**
 * Basis optimal for the fixed value λ = `lambda_fixed`, reached by a
 * self-dual homotopy from `start_basis`: the right-hand side is perturbed by
 * μ·A_B·1 and the nonbasic costs by -μ, so the start is optimal for large μ,
 * and the same engine walks μ down to 0. Useful when `start_basis` is
 * primal feasible but not dual feasible.
 */
inline std::vector<Index> find_optimal_basis(const ParametricProgram& p, double lambda_fixed,
                                             std::vector<Index> start_basis, const SolveOptions& opts = {})
{
    if (p.kind != ConstraintKind::Equality)
        throw Error("find_optimal_basis expects an equality-form program");
    ParametricProgram aux = p;
    aux.b = p.rhs_at(lambda_fixed);
    aux.c = p.objective_at(lambda_fixed);
    const BasisPartition part = BasisPartition::from_basic(start_basis, p.cols());
    aux.b_bar = Vector::Zero(p.rows());
    for (Index j : part.basic)
        aux.b_bar += Vector(p.A.col(j));
    aux.c_bar = Vector::Zero(p.cols());
    for (Index j : part.nonbasic)
        aux.c_bar(j) = -1.0;

    SolveOptions aux_opts = opts;
    aux_opts.lambda_target = 0.0;
    aux_opts.stop_when = nullptr;
    aux_opts.trace = nullptr;
    ParametricSimplex engine(std::move(aux), std::move(start_basis), aux_opts);
    const SolutionPath path = engine.run();
    if (path.termination == Termination::Unbounded)
        throw UnboundedDirection("program is unbounded at λ=" + std::to_string(lambda_fixed));
    if (path.termination == Termination::Infeasible)
        throw InfeasibleProblem("program is infeasible at λ=" + std::to_string(lambda_fixed));
    if (path.termination != Termination::ReachedTarget && path.termination != Termination::LambdaNonpositive)
        throw Error(std::string("self-dual start failed: ") + to_string(path.termination));
    return engine.state().partition.basic;
}

}  // namespace psm
