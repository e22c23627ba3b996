#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psm/errors.hpp"
#include "psm/program.hpp"

/**
 * Brute-force reference solver for small parametric LPs. Enumerates every
 * basis of the standard-form program with dense full-pivot LU; shares no
 * code with the pivoting engine.
 */
namespace psm::oracle {

enum class Status { Optimal, Infeasible, Unbounded };

inline const char* to_string(Status s)
{
    switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    }
    return "?";
}

struct Result
{
    Status status = Status::Infeasible;
    Vector x;  // standard-form optimum (Optimal only)
    double value = -kInf;
    std::vector<Index> basis;
};

struct Limits
{
    Index max_cols = 24;
    double max_subsets = 200000;
};

/**
 * Caches, for every invertible column subset, the affine basic solution
 * x_B(λ) and the extreme rays of {x ≥ 0 : Ax = 0} it generates, so repeated
 * queries at many λ only cost a scan.
 */
class VertexEnumerator
{
public:
    explicit VertexEnumerator(const ParametricProgram& program, Limits limits = {})
    {
        auto [p, slacks] = to_standard_form(program);
        (void)slacks;
        A_ = DenseMatrix(p.A);
        b_ = p.b;
        b_bar_ = p.b_bar;
        c_ = p.c;
        c_bar_ = p.c_bar;
        const Index n = A_.cols();
        if (n > limits.max_cols)
            throw SizeGuard("oracle limited to " + std::to_string(limits.max_cols) + " columns, got " +
                            std::to_string(n));

        // independent rows: pivot columns of a rank-revealing QR of Aᵀ
        Eigen::ColPivHouseholderQR<DenseMatrix> qr(A_.transpose());
        qr.setThreshold(1e-10);
        rank_ = qr.rank();
        for (Index k = 0; k < rank_; ++k)
            rows_.push_back(qr.colsPermutation().indices()(k));
        std::sort(rows_.begin(), rows_.end());

        if (binomial(n, rank_) > limits.max_subsets)
            throw SizeGuard("oracle would enumerate C(" + std::to_string(n) + ", " + std::to_string(rank_) +
                            ") bases");
        enumerate();
    }

    Index rank() const { return rank_; }
    std::size_t vertex_count() const { return vertices_.size(); }

    Result optimum(double lambda) const
    {
        const Vector rhs = b_ + lambda * b_bar_;
        const Vector obj = c_ + lambda * c_bar_;
        const double rhs_scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();

        Result best;
        for (const auto& v : vertices_) {
            const Vector xb = v.base + lambda * v.slope;
            if (xb.size() && xb.minCoeff() < -1e-9 * rhs_scale)
                continue;
            Vector x = Vector::Zero(A_.cols());
            for (std::size_t k = 0; k < v.columns.size(); ++k)
                x(v.columns[k]) = std::max(0.0, xb(static_cast<Index>(k)));
            if ((A_ * x - rhs).lpNorm<Eigen::Infinity>() > 1e-8 * rhs_scale)
                continue;  // violates a dependent row
            const double value = obj.dot(x);
            if (best.status != Status::Optimal || value > best.value + 1e-12 * (1.0 + std::abs(value))) {
                best.status = Status::Optimal;
                best.value = value;
                best.x = std::move(x);
                best.basis = v.columns;
            }
        }
        if (best.status != Status::Optimal)
            return best;
        for (const auto& ray : rays_) {
            if (obj.dot(ray) > 1e-9 * (1.0 + obj.lpNorm<Eigen::Infinity>())) {
                best.status = Status::Unbounded;
                best.value = kInf;
                return best;
            }
        }
        return best;
    }

    /** Standard-form objective (c + λc̄)ᵀx. */
    double objective(const Vector& x, double lambda) const { return (c_ + lambda * c_bar_).dot(x); }

private:
    struct Vertex
    {
        std::vector<Index> columns;
        Vector base;
        Vector slope;
    };

    static double binomial(Index n, Index k)
    {
        double r = 1.0;
        for (Index i = 1; i <= k; ++i)
            r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
        return r;
    }

    void enumerate()
    {
        const Index n = A_.cols();
        const Index r = rank_;
        DenseMatrix Ar(r, n);
        Vector br(r), bbr(r);
        for (Index k = 0; k < r; ++k) {
            Ar.row(k) = A_.row(rows_[static_cast<std::size_t>(k)]);
            br(k) = b_(rows_[static_cast<std::size_t>(k)]);
            bbr(k) = b_bar_(rows_[static_cast<std::size_t>(k)]);
        }
        std::vector<Index> subset(static_cast<std::size_t>(r));
        for (Index k = 0; k < r; ++k)
            subset[static_cast<std::size_t>(k)] = k;

        std::vector<char> in_subset(static_cast<std::size_t>(n));
        while (true) {
            DenseMatrix B(r, r);
            for (Index k = 0; k < r; ++k)
                B.col(k) = Ar.col(subset[static_cast<std::size_t>(k)]);
            Eigen::FullPivLU<DenseMatrix> lu(B);
            lu.setThreshold(1e-10);
            if (r == 0 || lu.isInvertible()) {
                Vertex v;
                v.columns = subset;
                v.base = r ? Vector(lu.solve(br)) : Vector();
                v.slope = r ? Vector(lu.solve(bbr)) : Vector();
                vertices_.push_back(std::move(v));

                std::fill(in_subset.begin(), in_subset.end(), 0);
                for (Index j : subset)
                    in_subset[static_cast<std::size_t>(j)] = 1;
                for (Index j = 0; j < n; ++j) {
                    if (in_subset[static_cast<std::size_t>(j)])
                        continue;
                    const Vector d = r ? Vector(-lu.solve(Ar.col(j))) : Vector();
                    if (d.size() && d.minCoeff() < -1e-10)
                        continue;
                    Vector ray = Vector::Zero(n);
                    ray(j) = 1.0;
                    for (Index k = 0; k < r; ++k)
                        ray(subset[static_cast<std::size_t>(k)]) = std::max(0.0, d(k));
                    rays_.push_back(std::move(ray));
                }
            }
            // next combination in lexicographic order
            Index k = r - 1;
            while (k >= 0 && subset[static_cast<std::size_t>(k)] == n - r + k)
                --k;
            if (k < 0)
                break;
            ++subset[static_cast<std::size_t>(k)];
            for (Index l = k + 1; l < r; ++l)
                subset[static_cast<std::size_t>(l)] = subset[static_cast<std::size_t>(l - 1)] + 1;
        }
    }

    DenseMatrix A_;
    Vector b_, b_bar_, c_, c_bar_;
    Index rank_ = 0;
    std::vector<Index> rows_;
    std::vector<Vertex> vertices_;
    std::vector<Vector> rays_;
};

inline Result brute_force_optimum(const ParametricProgram& p, double lambda, Limits limits = {})
{
    return VertexEnumerator(p, limits).optimum(lambda);
}

struct PathCheckReport
{
    bool passed = true;
    double worst_gap = 0.0;  // relative objective gap
    double worst_lambda = 0.0;
    long samples = 0;
    long support_mismatches = 0;  // reported, not asserted
    std::string detail;
};

/**
 * Compare path objectives against the oracle at `samples_per_segment`
 * evenly spaced λ per segment (both endpoints included). An unbounded
 * first segment is sampled on [lo, lo + max(1, |lo|)].
 */
inline PathCheckReport check_path_against_oracle(const VertexEnumerator& oracle, const SolutionPath& path,
                                                 int samples_per_segment, double tol = 1e-7)
{
    PathCheckReport rep;
    const int S = std::max(samples_per_segment, 2);
    for (const auto& seg : path.segments) {
        const double lo = seg.lambda_lo;
        const double hi = std::isfinite(seg.lambda_hi) ? seg.lambda_hi : lo + std::max(1.0, std::abs(lo));
        for (int k = 0; k < S; ++k) {
            const double lambda = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(S - 1);
            Vector x = Vector::Zero(seg.num_cols);
            for (const auto& e : seg.primal)
                x(e.index) = e.value.at(lambda);
            const double psm_value = oracle.objective(x, lambda);
            const Result ref = oracle.optimum(lambda);
            ++rep.samples;
            if (ref.status != Status::Optimal) {
                rep.passed = false;
                std::ostringstream os;
                os << "oracle reports " << to_string(ref.status) << " at λ=" << lambda << "; ";
                rep.detail += os.str();
                rep.worst_gap = kInf;
                rep.worst_lambda = lambda;
                continue;
            }
            const double gap = std::abs(psm_value - ref.value) / (1.0 + std::abs(ref.value));
            if (gap > rep.worst_gap) {
                rep.worst_gap = gap;
                rep.worst_lambda = lambda;
            }
            if (gap > tol)
                rep.passed = false;
            std::vector<Index> psm_support;
            for (const auto& e : seg.primal)
                if (std::abs(e.value.at(lambda)) > 1e-9)
                    psm_support.push_back(e.index);
            std::vector<Index> ref_support;
            for (Index j = 0; j < ref.x.size(); ++j)
                if (std::abs(ref.x(j)) > 1e-9)
                    ref_support.push_back(j);
            if (psm_support != ref_support)
                ++rep.support_mismatches;
        }
    }
    return rep;
}

inline PathCheckReport check_path_against_oracle(const ParametricProgram& p, const SolutionPath& path,
                                                 int samples_per_segment, double tol = 1e-7)
{
    return check_path_against_oracle(VertexEnumerator(p), path, samples_per_segment, tol);
}

}  // namespace psm::oracle
