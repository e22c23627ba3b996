#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "psm/errors.hpp"

/**
 * Data model for parametric linear programs
 *
 *     max (c + λ c̄)ᵀ x   s.t.   A x = b + λ b̄  (or A x ≤ b + λ b̄),   x ≥ 0,
 *
 * the simplex dictionaries that describe one piece of their solution path,
 * and the piecewise-affine solution path itself.
 */
namespace psm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseColumn = Eigen::SparseVector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ConstraintKind { Equality, LessEqual };

inline const char* to_string(ConstraintKind kind)
{
    return kind == ConstraintKind::Equality ? "equality" : "less_equal";
}

struct ParametricProgram
{
    SparseMatrix A;
    Vector b;
    Vector b_bar;
    Vector c;
    Vector c_bar;
    ConstraintKind kind = ConstraintKind::Equality;
    /** Columns exempt from x ≥ 0; empty means none. Free columns must stay basic. */
    std::vector<char> free_mask;

    Index rows() const { return A.rows(); }
    bool is_free(Index j) const { return !free_mask.empty() && free_mask[static_cast<std::size_t>(j)]; }
    Index cols() const { return A.cols(); }

    Vector rhs_at(double lambda) const { return b + lambda * b_bar; }
    Vector objective_at(double lambda) const { return c + lambda * c_bar; }

    void validate() const
    {
        if (A.rows() <= 0 || A.cols() <= 0)
            throw DimensionMismatch("program needs at least one row and one column");
        if (b.size() != A.rows() || b_bar.size() != A.rows())
            throw DimensionMismatch("rhs length does not match the number of rows");
        if (c.size() != A.cols() || c_bar.size() != A.cols())
            throw DimensionMismatch("objective length does not match the number of columns");
        if (!free_mask.empty() && static_cast<Index>(free_mask.size()) != A.cols())
            throw DimensionMismatch("free mask length does not match the number of columns");
    }

    static ParametricProgram from_dense(const DenseMatrix& A, Vector b, Vector b_bar, Vector c,
                                        Vector c_bar, ConstraintKind kind)
    {
        ParametricProgram p;
        p.A = A.sparseView();
        p.A.makeCompressed();
        p.b = std::move(b);
        p.b_bar = std::move(b_bar);
        p.c = std::move(c);
        p.c_bar = std::move(c_bar);
        p.kind = kind;
        p.validate();
        return p;
    }
};

/** Which columns of a standard-form program are slacks added by to_standard_form(). */
struct SlackInfo
{
    Index original_cols = 0;
    Index num_slacks = 0;

    bool is_slack(Index j) const { return j >= original_cols && j < original_cols + num_slacks; }
    Index slack_of_row(Index i) const { return original_cols + i; }
};

/**
 * Convert `Ax ≤ b + λb̄` into `[A | I] (x, s) = b + λb̄`. Equality programs
 * pass through unchanged with an empty SlackInfo.
 */
inline std::pair<ParametricProgram, SlackInfo> to_standard_form(const ParametricProgram& p)
{
    p.validate();
    if (p.kind == ConstraintKind::Equality)
        return {p, SlackInfo{p.cols(), 0}};

    const Index m = p.rows();
    const Index n = p.cols();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(p.A.nonZeros() + m));
    for (Index j = 0; j < n; ++j)
        for (SparseMatrix::InnerIterator it(p.A, j); it; ++it)
            triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(j), it.value());
    for (Index i = 0; i < m; ++i)
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(n + i), 1.0);

    ParametricProgram out;
    out.A.resize(m, n + m);
    out.A.setFromTriplets(triplets.begin(), triplets.end());
    out.A.makeCompressed();
    out.b = p.b;
    out.b_bar = p.b_bar;
    out.c = Vector::Zero(n + m);
    out.c.head(n) = p.c;
    out.c_bar = Vector::Zero(n + m);
    out.c_bar.head(n) = p.c_bar;
    out.kind = ConstraintKind::Equality;
    if (!p.free_mask.empty()) {
        out.free_mask = p.free_mask;
        out.free_mask.resize(static_cast<std::size_t>(n + m), 0);
    }
    return {std::move(out), SlackInfo{n, m}};
}

/** Index list of the slack columns of a converted program; the natural starting basis. */
inline std::vector<Index> slack_basis(const SlackInfo& info)
{
    std::vector<Index> basis(static_cast<std::size_t>(info.num_slacks));
    for (Index i = 0; i < info.num_slacks; ++i)
        basis[static_cast<std::size_t>(i)] = info.slack_of_row(i);
    return basis;
}

struct BasisPartition
{
    std::vector<Index> basic;
    std::vector<Index> nonbasic;

    /** Build the partition with `nonbasic` in increasing column order. */
    static BasisPartition from_basic(std::vector<Index> basic, Index num_cols)
    {
        std::vector<char> in_basis(static_cast<std::size_t>(num_cols), 0);
        for (Index j : basic) {
            if (j < 0 || j >= num_cols)
                throw DimensionMismatch("basis index out of range");
            if (in_basis[static_cast<std::size_t>(j)])
                throw SingularBasis("basis lists column " + std::to_string(j) + " twice");
            in_basis[static_cast<std::size_t>(j)] = 1;
        }
        BasisPartition part;
        part.basic = std::move(basic);
        for (Index j = 0; j < num_cols; ++j)
            if (!in_basis[static_cast<std::size_t>(j)])
                part.nonbasic.push_back(j);
        return part;
    }

    bool is_valid(Index num_cols) const
    {
        if (static_cast<Index>(basic.size() + nonbasic.size()) != num_cols)
            return false;
        std::vector<char> seen(static_cast<std::size_t>(num_cols), 0);
        for (const auto* set : {&basic, &nonbasic})
            for (Index j : *set) {
                if (j < 0 || j >= num_cols || seen[static_cast<std::size_t>(j)])
                    return false;
                seen[static_cast<std::size_t>(j)] = 1;
            }
        return true;
    }

    /** Order-independent fingerprint of the basic set (FNV-1a over sorted indices). */
    std::uint64_t hash() const
    {
        std::vector<Index> sorted = basic;
        std::sort(sorted.begin(), sorted.end());
        std::uint64_t h = 1469598103934665603ULL;
        for (Index j : sorted) {
            h ^= static_cast<std::uint64_t>(j) + 0x9e3779b97f4a7c15ULL;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

/**
 * A perturbed dictionary: basic values x*_B + λ x̄_B, nonbasic reduced
 * costs z*_N + λ z̄_N, and the interval on which both stay nonnegative.
 * Vector entries follow the order of `partition.basic` / `partition.nonbasic`.
 */
struct DictionaryState
{
    BasisPartition partition;
    Vector xB_base;
    Vector xB_pert;
    Vector zN_base;
    Vector zN_pert;
    double lambda_lo = -kInf;
    double lambda_hi = kInf;
    double objective_base = 0.0;
    std::vector<char> free_mask;  // per column; free basic entries never bound λ

    bool basic_is_free(Index r) const
    {
        return !free_mask.empty() && free_mask[static_cast<std::size_t>(partition.basic[static_cast<std::size_t>(r)])];
    }
};

/** x(λ) = base + λ·slope */
struct Affine
{
    double base = 0.0;
    double slope = 0.0;

    double at(double lambda) const { return base + lambda * slope; }
};

struct SparseAffineEntry
{
    Index index = 0;
    Affine value;
};

enum class PivotKind { Primal, Dual };

inline const char* to_string(PivotKind kind) { return kind == PivotKind::Primal ? "primal" : "dual"; }

struct PivotEvent
{
    PivotKind kind = PivotKind::Primal;
    Index entering = -1;
    Index leaving = -1;
    double lambda_star = 0.0;
    double t = 0.0;      // primal step, base part
    double t_bar = 0.0;  // primal step, perturbation part
    double s = 0.0;      // dual step, base part
    double s_bar = 0.0;  // dual step, perturbation part
};

/**
 * One piece of the solution path: a basis that is optimal for every
 * λ in [lambda_lo, lambda_hi].
 */
struct PathSegment
{
    double lambda_lo = -kInf;
    double lambda_hi = kInf;
    Index num_cols = 0;
    std::vector<SparseAffineEntry> primal;  // basic columns, sorted by index
    std::vector<SparseAffineEntry> dual;    // nonbasic reduced costs, sorted by index
    Vector row_dual_base;                   // y(λ) = row_dual_base + λ row_dual_slope
    Vector row_dual_slope;
    std::optional<Index> entering_index;    // pivot that ended this segment
    std::optional<Index> leaving_index;
    std::uint64_t basis_hash = 0;

    bool contains(double lambda, double tol = 1e-12) const
    {
        const double slack = tol * (1.0 + std::abs(lambda));
        return lambda >= lambda_lo - slack && lambda <= lambda_hi + slack;
    }
};

inline Vector evaluate_primal(const PathSegment& seg, double lambda)
{
    if (!seg.contains(lambda))
        throw OutOfRange("λ=" + std::to_string(lambda) + " outside [" + std::to_string(seg.lambda_lo) +
                         ", " + std::to_string(seg.lambda_hi) + "]");
    Vector x = Vector::Zero(seg.num_cols);
    for (const auto& e : seg.primal)
        x(e.index) = e.value.at(lambda);
    return x;
}

/** Full reduced-cost vector z(λ); zero on basic columns. */
inline Vector evaluate_dual(const PathSegment& seg, double lambda)
{
    if (!seg.contains(lambda))
        throw OutOfRange("λ outside segment");
    Vector z = Vector::Zero(seg.num_cols);
    for (const auto& e : seg.dual)
        z(e.index) = e.value.at(lambda);
    return z;
}

inline Vector evaluate_row_dual(const PathSegment& seg, double lambda)
{
    return seg.row_dual_base + lambda * seg.row_dual_slope;
}

enum class Termination {
    ReachedTarget,
    LambdaNonpositive,
    Unbounded,
    Infeasible,
    IterationCap,
    NumericalFailure,
};

inline const char* to_string(Termination t)
{
    switch (t) {
    case Termination::ReachedTarget: return "ReachedTarget";
    case Termination::LambdaNonpositive: return "LambdaNonpositive";
    case Termination::Unbounded: return "Unbounded";
    case Termination::Infeasible: return "Infeasible";
    case Termination::IterationCap: return "IterationCap";
    case Termination::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

struct SolutionPath
{
    std::vector<PathSegment> segments;  // ordered by decreasing λ
    std::vector<PivotEvent> pivots;
    double terminal_lambda = kInf;
    Termination termination = Termination::ReachedTarget;
    std::string message;

    std::size_t pivot_count() const { return pivots.size(); }

    /** Segment containing λ; when λ is a breakpoint the lower-λ segment wins. */
    const PathSegment* find(double lambda) const
    {
        const PathSegment* hit = nullptr;
        for (const auto& seg : segments)
            if (seg.contains(lambda))
                hit = &seg;
        return hit;
    }
};

}  // namespace psm
