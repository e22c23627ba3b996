#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "psm/engine.hpp"
#include "psm/errors.hpp"
#include "psm/program.hpp"

/**
 * Sparse-learning problems as parametric LPs: the Dantzig selector, the
 * ℓ1-constrained SVM and differential-network estimation. Each builder has a
 * matching recover_* that maps a solution path back to model parameters.
 */
namespace psm {

/** Solution path in the parameters of the original model. */
struct OriginalSegment
{
    double lambda_lo = -kInf;
    double lambda_hi = kInf;
    std::vector<SparseAffineEntry> coefficients;  // nonzero entries of θ (or vec Δ), sorted
    Affine intercept;                             // SVM θ₀; zero for the other models
    std::vector<Index> support;                   // nonzero coefficients at lambda_lo
};

struct PathInOriginalCoords
{
    Index dimension = 0;
    std::vector<OriginalSegment> segments;  // decreasing λ
    Termination termination = Termination::ReachedTarget;
    double terminal_lambda = kInf;

    const OriginalSegment* find(double lambda) const
    {
        const OriginalSegment* hit = nullptr;
        for (const auto& seg : segments) {
            const double slack = 1e-12 * (1.0 + std::abs(lambda));
            if (lambda >= seg.lambda_lo - slack && lambda <= seg.lambda_hi + slack)
                hit = &seg;
        }
        return hit;
    }

    Vector coefficients_at(double lambda) const
    {
        const OriginalSegment* seg = find(lambda);
        if (!seg)
            throw OutOfRange("λ=" + std::to_string(lambda) + " is not covered by the path");
        Vector theta = Vector::Zero(dimension);
        for (const auto& e : seg->coefficients)
            theta(e.index) = e.value.at(lambda);
        return theta;
    }

    double intercept_at(double lambda) const
    {
        const OriginalSegment* seg = find(lambda);
        if (!seg)
            throw OutOfRange("λ=" + std::to_string(lambda) + " is not covered by the path");
        return seg->intercept.at(lambda);
    }

    const OriginalSegment& terminal() const
    {
        if (segments.empty())
            throw Error("empty path");
        return segments.back();
    }
};

namespace detail {

inline const SparseAffineEntry* lookup(const std::vector<SparseAffineEntry>& entries, Index col)
{
    auto it = std::lower_bound(entries.begin(), entries.end(), col,
                               [](const SparseAffineEntry& e, Index c) { return e.index < c; });
    return (it != entries.end() && it->index == col) ? &*it : nullptr;
}

inline void check_split(const Affine& pos, const Affine& neg, double lambda, Index j)
{
    if (!std::isfinite(lambda))
        return;
    const double a = pos.at(lambda);
    const double b = neg.at(lambda);
    if (std::abs(a * b) > 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b))))
        throw ComplementarityViolation("positive and negative parts of coordinate " + std::to_string(j) +
                                       " are both nonzero at λ=" + std::to_string(lambda));
}

/**
 * θ_j = x[pos + j] − x[neg + j] for j < count, with the complementarity of
 * the two halves checked at both ends of every segment.
 */
inline std::vector<SparseAffineEntry> split_difference(const PathSegment& seg, Index pos, Index neg, Index count)
{
    std::vector<SparseAffineEntry> out;
    for (Index j = 0; j < count; ++j) {
        const SparseAffineEntry* p = lookup(seg.primal, pos + j);
        const SparseAffineEntry* n = lookup(seg.primal, neg + j);
        if (!p && !n)
            continue;
        const Affine a = p ? p->value : Affine{};
        const Affine b = n ? n->value : Affine{};
        if (p && n) {
            check_split(a, b, seg.lambda_lo, j);
            check_split(a, b, seg.lambda_hi, j);
        }
        out.push_back({j, {a.base - b.base, a.slope - b.slope}});
    }
    return out;
}

inline std::vector<Index> support_at(const std::vector<SparseAffineEntry>& coefs, double lambda)
{
    double scale = 0.0;
    for (const auto& e : coefs)
        scale = std::max(scale, std::abs(e.value.at(lambda)));
    std::vector<Index> support;
    for (const auto& e : coefs)
        if (std::abs(e.value.at(lambda)) > 1e-9 * (1.0 + scale))
            support.push_back(e.index);
    return support;
}

inline PathInOriginalCoords recover_split_path(const SolutionPath& path, Index pos, Index neg, Index count)
{
    PathInOriginalCoords out;
    out.dimension = count;
    out.termination = path.termination;
    out.terminal_lambda = path.terminal_lambda;
    for (const auto& seg : path.segments) {
        OriginalSegment o;
        o.lambda_lo = seg.lambda_lo;
        o.lambda_hi = seg.lambda_hi;
        o.coefficients = split_difference(seg, pos, neg, count);
        o.support = support_at(o.coefficients, seg.lambda_lo);
        out.segments.push_back(std::move(o));
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------- Dantzig selector

struct DantzigInstance
{
    DenseMatrix X;  // n × d design
    Vector y;       // n responses

    void validate() const
    {
        if (X.rows() < 1 || X.cols() < 1)
            throw DimensionMismatch("design matrix must be at least 1×1");
        if (y.size() != X.rows())
            throw DimensionMismatch("response length does not match the design rows");
    }
};

/**
 * min ‖θ‖₁ s.t. ‖Xᵀ(y − Xθ)‖∞ ≤ λ with θ = θ⁺ − θ⁻:
 * rows [G −G; −G G](θ⁺, θ⁻) ≤ (Xᵀy, −Xᵀy) + λ1, G = XᵀX, objective −1.
 */
inline ParametricProgram build_dantzig(const DantzigInstance& inst)
{
    inst.validate();
    const Index d = inst.X.cols();
    const DenseMatrix G = inst.X.transpose() * inst.X;
    const Vector Xty = inst.X.transpose() * inst.y;
    DenseMatrix A(2 * d, 2 * d);
    A << G, -G, -G, G;
    Vector b(2 * d);
    b << Xty, -Xty;
    return ParametricProgram::from_dense(A, std::move(b), Vector::Ones(2 * d), -Vector::Ones(2 * d),
                                         Vector::Zero(2 * d), ConstraintKind::LessEqual);
}

/** θ(λ) from a path of build_dantzig's program (standard-form columns). */
inline PathInOriginalCoords recover_dantzig(const SolutionPath& path, Index d)
{
    return detail::recover_split_path(path, 0, d, d);
}

inline SolutionPath solve_dantzig(const DantzigInstance& inst, const SolveOptions& opts = {})
{
    return solve_path(build_dantzig(inst), opts);
}

// ---------------------------------------------------------------- ℓ1 SVM

struct SvmInstance
{
    DenseMatrix X;  // n × d, one sample per row
    Vector labels;  // ±1

    void validate() const
    {
        if (X.rows() < 1 || X.cols() < 1)
            throw DimensionMismatch("feature matrix must be at least 1×1");
        if (labels.size() != X.rows())
            throw DimensionMismatch("label count does not match the number of samples");
        for (Index i = 0; i < labels.size(); ++i)
            if (labels(i) != 1.0 && labels(i) != -1.0)
                throw Error("labels must be +1 or -1");
    }
};

/** Column layout of the SVM program: t⁺, t⁻, θ⁺, θ⁻, θ₀⁺, θ₀⁻, w. */
struct SvmLayout
{
    Index n = 0;
    Index d = 0;

    Index t_pos(Index i) const { return i; }
    Index t_neg(Index i) const { return n + i; }
    Index theta_pos(Index k) const { return 2 * n + k; }
    Index theta_neg(Index k) const { return 2 * n + d + k; }
    Index b0_pos() const { return 2 * n + 2 * d; }
    Index b0_neg() const { return 2 * n + 2 * d + 1; }
    Index w() const { return 2 * n + 2 * d + 2; }
    Index cols() const { return 2 * n + 2 * d + 3; }
};

struct SvmProgram
{
    ParametricProgram program;
    std::vector<Index> initial_basis;
    SvmLayout layout;
};

/**
 * min Σ t⁺_i s.t. t⁺_i − t⁻_i + y_i x_iᵀ(θ⁺ − θ⁻) + y_i(θ₀⁺ − θ₀⁻) = 1 and
 * 1ᵀθ⁺ + 1ᵀθ⁻ + w = λ. Starting basis {t⁺, w}.
 */
inline SvmProgram build_svm(const SvmInstance& inst)
{
    inst.validate();
    SvmLayout L{inst.X.rows(), inst.X.cols()};
    const Index n = L.n;
    const Index d = L.d;
    std::vector<Eigen::Triplet<double>> trip;
    for (Index i = 0; i < n; ++i) {
        const double yi = inst.labels(i);
        trip.emplace_back(static_cast<int>(i), static_cast<int>(L.t_pos(i)), 1.0);
        trip.emplace_back(static_cast<int>(i), static_cast<int>(L.t_neg(i)), -1.0);
        for (Index k = 0; k < d; ++k) {
            const double z = yi * inst.X(i, k);
            if (z != 0.0) {
                trip.emplace_back(static_cast<int>(i), static_cast<int>(L.theta_pos(k)), z);
                trip.emplace_back(static_cast<int>(i), static_cast<int>(L.theta_neg(k)), -z);
            }
        }
        trip.emplace_back(static_cast<int>(i), static_cast<int>(L.b0_pos()), yi);
        trip.emplace_back(static_cast<int>(i), static_cast<int>(L.b0_neg()), -yi);
    }
    for (Index k = 0; k < d; ++k) {
        trip.emplace_back(static_cast<int>(n), static_cast<int>(L.theta_pos(k)), 1.0);
        trip.emplace_back(static_cast<int>(n), static_cast<int>(L.theta_neg(k)), 1.0);
    }
    trip.emplace_back(static_cast<int>(n), static_cast<int>(L.w()), 1.0);

    SvmProgram out;
    out.layout = L;
    auto& p = out.program;
    p.kind = ConstraintKind::Equality;
    p.A.resize(n + 1, L.cols());
    p.A.setFromTriplets(trip.begin(), trip.end());
    p.A.makeCompressed();
    p.b = Vector::Ones(n + 1);
    p.b(n) = 0.0;
    p.b_bar = Vector::Zero(n + 1);
    p.b_bar(n) = 1.0;
    p.c = Vector::Zero(L.cols());
    p.c.head(n).setConstant(-1.0);
    p.c_bar = Vector::Zero(L.cols());
    p.validate();
    for (Index i = 0; i < n; ++i)
        out.initial_basis.push_back(L.t_pos(i));
    out.initial_basis.push_back(L.w());
    return out;
}

inline PathInOriginalCoords recover_svm(const SolutionPath& path, const SvmLayout& L)
{
    PathInOriginalCoords out = detail::recover_split_path(path, L.theta_pos(0), L.theta_neg(0), L.d);
    for (std::size_t s = 0; s < path.segments.size(); ++s) {
        const auto& seg = path.segments[s];
        const SparseAffineEntry* p = detail::lookup(seg.primal, L.b0_pos());
        const SparseAffineEntry* n = detail::lookup(seg.primal, L.b0_neg());
        const Affine a = p ? p->value : Affine{};
        const Affine b = n ? n->value : Affine{};
        out.segments[s].intercept = {a.base - b.base, a.slope - b.slope};
    }
    return out;
}

/** sign(θ₀ + θᵀz), with 0 mapped to +1. */
inline double svm_predict(const Vector& theta, double theta0, const Vector& z)
{
    return theta0 + theta.dot(z) >= 0.0 ? 1.0 : -1.0;
}

/**
 * Solve the SVM path. The basis {t⁺, w} is primal feasible for all λ ≥ 0
 * but usually not dual feasible; in that case an optimal basis at
 * λ = `anchor_lambda` is found first and the path starts there.
 */
inline SolutionPath solve_svm(const SvmProgram& svm, const SolveOptions& opts = {}, double anchor_lambda = 100.0)
{
    try {
        return ParametricSimplex(svm.program, svm.initial_basis, opts).run();
    } catch (const InfeasibleAtLargeLambda&) {
    }
    std::vector<Index> basis = find_optimal_basis(svm.program, anchor_lambda, svm.initial_basis, opts);
    return ParametricSimplex(svm.program, std::move(basis), opts).run();
}

// ---------------------------------------------------------------- differential network

/**
 * General form min ‖D‖₁ s.t. ‖X D Z − Y‖∞ ≤ λ with X m₁×d₁, Z d₂×m₂,
 * Y m₁×m₂. The differential network uses X = S_X, Z = S_Y, Y = S_X − S_Y.
 */
struct DiffNetInstance
{
    DenseMatrix X;
    DenseMatrix Z;
    DenseMatrix Y;

    static DiffNetInstance from_covariances(const DenseMatrix& S_X, const DenseMatrix& S_Y)
    {
        if (S_X.rows() != S_X.cols() || S_Y.rows() != S_Y.cols() || S_X.rows() != S_Y.rows())
            throw DimensionMismatch("covariance matrices must be square and of equal size");
        return {S_X, S_Y, S_X - S_Y};
    }

    void validate() const
    {
        if (X.rows() < 1 || X.cols() < 1 || Z.rows() < 1 || Z.cols() < 1)
            throw DimensionMismatch("empty diff-net factor");
        if (Y.rows() != X.rows() || Y.cols() != Z.cols())
            throw DimensionMismatch("Y must be m1×m2 with X m1×d1 and Z d2×m2");
    }
};

/**
 * Column layout: vec(D⁺), vec(D⁻) (d₁d₂ each), vec(C) (m₁d₂, free),
 * w (2m₁m₂). Row layout: C-definition rows (m₁d₂), upper bounds (m₁m₂),
 * lower bounds (m₁m₂). vec is column-major.
 */
struct DiffNetLayout
{
    Index m1 = 0, d1 = 0, d2 = 0, m2 = 0;

    Index d_pos(Index k) const { return k; }
    Index d_neg(Index k) const { return d1 * d2 + k; }
    Index c_col(Index k) const { return 2 * d1 * d2 + k; }
    Index w_col(Index k) const { return 2 * d1 * d2 + m1 * d2 + k; }
    Index rows() const { return m1 * d2 + 2 * m1 * m2; }
    Index cols() const { return 2 * d1 * d2 + m1 * d2 + 2 * m1 * m2; }
};

struct DiffNetProgram
{
    ParametricProgram program;
    std::vector<Index> initial_basis;
    DiffNetLayout layout;
};

/**
 * X⁰(D⁺ − D⁻) − C = 0,  Z⁰C + w₁ = vec Y + λ1,  −Z⁰C + w₂ = −vec Y + λ1,
 * with X⁰ = I ⊗ X and Z⁰ = Zᵀ ⊗ I, so X⁰vec D = vec(XD), Z⁰vec C = vec(CZ).
 * The C columns are free; the starting basis is {C, w}.
 */
inline DiffNetProgram build_diffnet(const DiffNetInstance& inst)
{
    inst.validate();
    DiffNetLayout L{inst.X.rows(), inst.X.cols(), inst.Z.rows(), inst.Z.cols()};
    const Index m1 = L.m1, d1 = L.d1, d2 = L.d2, m2 = L.m2;
    const Index r_upper = m1 * d2;
    const Index r_lower = m1 * d2 + m1 * m2;

    std::vector<Eigen::Triplet<double>> trip;
    auto put = [&](Index r, Index c, double v) {
        if (v != 0.0)
            trip.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    };
    // (XD)(a, c) = Σ_r X(a, r) D(r, c)
    for (Index c = 0; c < d2; ++c)
        for (Index a = 0; a < m1; ++a) {
            const Index row = a + c * m1;
            for (Index r = 0; r < d1; ++r) {
                put(row, L.d_pos(r + c * d1), inst.X(a, r));
                put(row, L.d_neg(r + c * d1), -inst.X(a, r));
            }
            put(row, L.c_col(row), -1.0);
        }
    // (CZ)(a, s) = Σ_c C(a, c) Z(c, s)
    for (Index s = 0; s < m2; ++s)
        for (Index a = 0; a < m1; ++a) {
            const Index k = a + s * m1;
            for (Index c = 0; c < d2; ++c) {
                put(r_upper + k, L.c_col(a + c * m1), inst.Z(c, s));
                put(r_lower + k, L.c_col(a + c * m1), -inst.Z(c, s));
            }
            put(r_upper + k, L.w_col(k), 1.0);
            put(r_lower + k, L.w_col(m1 * m2 + k), 1.0);
        }

    DiffNetProgram out;
    out.layout = L;
    auto& p = out.program;
    p.kind = ConstraintKind::Equality;
    p.A.resize(L.rows(), L.cols());
    p.A.setFromTriplets(trip.begin(), trip.end());
    p.A.makeCompressed();
    const Eigen::Map<const Vector> vecY(inst.Y.data(), m1 * m2);
    p.b = Vector::Zero(L.rows());
    p.b.segment(r_upper, m1 * m2) = vecY;
    p.b.segment(r_lower, m1 * m2) = -vecY;
    p.b_bar = Vector::Zero(L.rows());
    p.b_bar.tail(2 * m1 * m2).setOnes();
    p.c = Vector::Zero(L.cols());
    p.c.head(2 * d1 * d2).setConstant(-1.0);
    p.c_bar = Vector::Zero(L.cols());
    p.free_mask.assign(static_cast<std::size_t>(L.cols()), 0);
    for (Index k = 0; k < m1 * d2; ++k)
        p.free_mask[static_cast<std::size_t>(L.c_col(k))] = 1;
    p.validate();

    for (Index k = 0; k < m1 * d2; ++k)
        out.initial_basis.push_back(L.c_col(k));
    for (Index k = 0; k < 2 * m1 * m2; ++k)
        out.initial_basis.push_back(L.w_col(k));
    return out;
}

/** vec(Δ)(λ), column-major d₁×d₂, from Δ = D⁺ − D⁻. */
inline PathInOriginalCoords recover_diffnet(const SolutionPath& path, const DiffNetLayout& L)
{
    return detail::recover_split_path(path, L.d_pos(0), L.d_neg(0), L.d1 * L.d2);
}

inline SolutionPath solve_diffnet(const DiffNetProgram& net, const SolveOptions& opts = {})
{
    return ParametricSimplex(net.program, net.initial_basis, opts).run();
}

/** Number of nonzero entries of Δ in a segment of a diff-net path, at lambda_lo. */
inline Index diffnet_nonzeros(const PathSegment& seg, const DiffNetLayout& L)
{
    const auto coefs = detail::split_difference(seg, L.d_pos(0), L.d_neg(0), L.d1 * L.d2);
    return static_cast<Index>(detail::support_at(coefs, seg.lambda_lo).size());
}

}  // namespace psm
