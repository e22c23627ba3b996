#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "psm/errors.hpp"
#include "psm/program.hpp"

namespace psm {

struct FactorizationOptions
{
    int refactor_limit = 50;
    double pivot_tolerance = 1e-11;  // relative to ‖A_B‖∞
    double growth_limit = 1e4;       // refactorize instead of logging an eta with |θ|‖p‖∞ above this
};

/**
 * LU factorization of a basis matrix A_B with product-form column updates.
 *
 * Replacing column k of A_B by a_j is the rank-one change A_B' = A_B + u e_kᵀ,
 * u = a_j - a_k. With p = A_B⁻¹u and θ = 1/(1 + p_k), the Sherman–Morrison
 * identity gives
 *
 *     A_B'⁻¹ = (I - θ p e_kᵀ) A_B⁻¹,
 *
 * whose left factor differs from the identity only in column k. Each update
 * stores (k, p, θ); solves apply the stored factors after the base LU, and
 * transpose solves apply their transposes in reverse before it. After
 * `refactor_limit` updates, or when an update would have a large growth
 * factor, the basis is refactorized from scratch. While updates are logged,
 * solves take one step of iterative refinement against the stored columns.
 */
class BasisFactorization
{
public:
    BasisFactorization() = default;

    BasisFactorization(const SparseMatrix& A, std::span<const Index> basic, FactorizationOptions options = {})
        : options_(options)
    {
        if (static_cast<Index>(basic.size()) != A.rows())
            throw DimensionMismatch("basis must have exactly m = " + std::to_string(A.rows()) + " columns");
        columns_.reserve(basic.size());
        for (Index j : basic) {
            if (j < 0 || j >= A.cols())
                throw DimensionMismatch("basis column out of range");
            columns_.emplace_back(A.col(j));
        }
        refactorize();
    }

    Index size() const { return static_cast<Index>(columns_.size()); }
    int updates_since_refactor() const { return static_cast<int>(updates_.size()); }
    int total_refactorizations() const { return refactorizations_; }

    /** Current basis matrix, columns in basis-position order. */
    SparseMatrix basis_matrix() const
    {
        const Index m = size();
        std::vector<Eigen::Triplet<double>> triplets;
        for (Index k = 0; k < m; ++k)
            for (SparseColumn::InnerIterator it(columns_[static_cast<std::size_t>(k)]); it; ++it)
                triplets.emplace_back(static_cast<int>(it.index()), static_cast<int>(k), it.value());
        SparseMatrix B(m, m);
        B.setFromTriplets(triplets.begin(), triplets.end());
        B.makeCompressed();
        return B;
    }

    /** A_B⁻¹ v for the current (post-update) basis. */
    Vector solve(const Vector& v) const
    {
        check_length(v);
        Vector w = raw_solve(v);
        if (!updates_.empty())
            w += raw_solve(v - multiply(w));
        return w;
    }

    /** A_B⁻ᵀ v for the current (post-update) basis. */
    Vector solve_transpose(const Vector& v) const
    {
        check_length(v);
        Vector w = raw_solve_transpose(v);
        if (!updates_.empty())
            w += raw_solve_transpose(v - multiply_transpose(w));
        return w;
    }

    /**
     * Replace the column at basis position k. Throws UpdateDegenerate (and
     * leaves the factorization untouched) when |1 + p_k| is below tolerance.
     */
    void replace_column(Index position, const SparseColumn& new_column)
    {
        if (position < 0 || position >= size())
            throw DimensionMismatch("basis position out of range");
        if (new_column.size() != size())
            throw DimensionMismatch("replacement column has wrong length");

        const Vector u = Vector(new_column) - Vector(columns_[static_cast<std::size_t>(position)]);
        Vector p = solve(u);
        const double pivot = 1.0 + p(position);
        if (!std::isfinite(pivot) || std::abs(pivot) < options_.pivot_tolerance * (1.0 + p.lpNorm<Eigen::Infinity>()))
            throw UpdateDegenerate("column replacement at position " + std::to_string(position) +
                                   " makes the basis singular (1 + p_k = " + std::to_string(pivot) + ")");

        SparseColumn previous = std::move(columns_[static_cast<std::size_t>(position)]);
        columns_[static_cast<std::size_t>(position)] = new_column;
        const double growth = p.lpNorm<Eigen::Infinity>() / std::abs(pivot);
        if (updates_since_refactor() >= options_.refactor_limit || growth > options_.growth_limit) {
            try {
                refactorize();
            } catch (const SingularBasis& e) {
                columns_[static_cast<std::size_t>(position)] = std::move(previous);
                throw UpdateDegenerate(std::string("refactorization after update failed: ") + e.what());
            }
            return;
        }
        updates_.push_back(EtaUpdate{position, std::move(p), 1.0 / pivot});
    }

    void replace_column(Index position, const Vector& new_column)
    {
        replace_column(position, SparseColumn(new_column.sparseView()));
    }

    /** Discard all logged updates and factorize the current basis from scratch. */
    void refactorize()
    {
        const SparseMatrix B = basis_matrix();
        const double norm = infinity_norm(B);
        auto lu = std::make_unique<LU>();
        lu->analyzePattern(B);
        lu->factorize(B);
        if (lu->info() != Eigen::Success)
            throw SingularBasis("basis factorization failed: " + lu->lastErrorMessage());
        const double threshold = options_.pivot_tolerance * norm;
        const auto& store = lu->matrixL().m_mapL;  // U's diagonal lives in L's supernodes
        for (Index j = 0; j < B.cols(); ++j) {
            double pivot = 0.0;
            for (typename LU::SCMatrix::InnerIterator it(store, j); it; ++it)
                if (it.row() == j) {
                    pivot = it.value();
                    break;
                }
            if (!(std::abs(pivot) >= threshold) || norm == 0.0)
                throw SingularBasis("basis pivot " + std::to_string(j) + " has magnitude " +
                                    std::to_string(std::abs(pivot)) + " below threshold " +
                                    std::to_string(threshold));
        }
        lu_ = std::move(lu);
        updates_.clear();
        ++refactorizations_;
    }

    /** Cheap estimate of ‖A_B‖∞ ‖A_B⁻¹‖∞; diagnostics only. */
    double condition_estimate() const
    {
        const Vector ones = Vector::Ones(size());
        return infinity_norm(basis_matrix()) * solve(ones).lpNorm<Eigen::Infinity>();
    }

private:
    using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

    struct EtaUpdate
    {
        Index position;
        Vector p;
        double theta;
    };

    Vector raw_solve(const Vector& v) const
    {
        Vector w = lu_->solve(v);
        for (const auto& eta : updates_) {
            const double wk = w(eta.position);
            if (wk != 0.0)
                w -= (eta.theta * wk) * eta.p;
        }
        return w;
    }

    Vector raw_solve_transpose(const Vector& v) const
    {
        Vector w = v;
        for (auto it = updates_.rbegin(); it != updates_.rend(); ++it)
            w(it->position) -= it->theta * it->p.dot(w);
        return lu_->transpose().solve(w);
    }

    /** A_B w from the stored columns. */
    Vector multiply(const Vector& w) const
    {
        Vector out = Vector::Zero(size());
        for (Index k = 0; k < size(); ++k)
            if (w(k) != 0.0)
                for (SparseColumn::InnerIterator it(columns_[static_cast<std::size_t>(k)]); it; ++it)
                    out(it.index()) += it.value() * w(k);
        return out;
    }

    Vector multiply_transpose(const Vector& w) const
    {
        Vector out(size());
        for (Index k = 0; k < size(); ++k) {
            double sum = 0.0;
            for (SparseColumn::InnerIterator it(columns_[static_cast<std::size_t>(k)]); it; ++it)
                sum += it.value() * w(it.index());
            out(k) = sum;
        }
        return out;
    }

    static double infinity_norm(const SparseMatrix& B)
    {
        Vector row_sums = Vector::Zero(B.rows());
        for (Index j = 0; j < B.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(B, j); it; ++it)
                row_sums(it.row()) += std::abs(it.value());
        return row_sums.size() ? row_sums.maxCoeff() : 0.0;
    }

    void check_length(const Vector& v) const
    {
        if (v.size() != size())
            throw DimensionMismatch("right-hand side has wrong length");
    }

    FactorizationOptions options_;
    std::vector<SparseColumn> columns_;
    std::shared_ptr<LU> lu_;
    std::vector<EtaUpdate> updates_;
    int refactorizations_ = 0;
};

}  // namespace psm
