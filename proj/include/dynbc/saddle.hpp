#pragma once

#include "dynbc/sparse.hpp"

#include <memory>

namespace dynbc {

/// Block operator [[V, Bᵀ], [B, 0]] with V of size n×n and B of size m×n.
struct SaddleOperator {
    SparseMatrix V;
    SparseMatrix B;

    std::size_t n() const { return V.rows(); }
    std::size_t m() const { return B.rows(); }
    std::size_t size() const { return n() + m(); }

    SparseMatrix assemble() const;
    /// ‖K z − r‖ / ‖r‖ for the assembled operator K.
    double backward_error(const Vector& z, const Vector& rhs) const;
};

/// Reusable sparse LU factorization of a saddle operator.
///
/// The fill-reducing column permutation (COLAMD) is computed once, so
/// repeated solves with the same right-hand side are bit-identical. Solves
/// are const and may run concurrently.
class Factorization {
public:
    Vector solve(const Vector& rhs) const;
    std::size_t size() const noexcept { return size_; }

private:
    friend Factorization factorize(const SaddleOperator& op);
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    std::size_t size_ = 0;
};

/// Throws SingularSystemError with block "B" when the constraint rows are
/// linearly dependent, or "V" when V is singular on ker B.
Factorization factorize(const SaddleOperator& op);

/// Convenience: factorize and solve once.
Vector solve(const SaddleOperator& op, const Vector& rhs);
Vector solve(const Factorization& fact, const Vector& rhs);

struct SchurOptions {
    double tol = 1e-12;
    std::size_t max_iterations = 0;  // 0: 10 * m + 50
};

/// Solves B V⁻¹ Bᵀ λ = B V⁻¹ r₁ − r₂ by conjugate gradients, then
/// back-substitutes x = V⁻¹ (r₁ − Bᵀ λ). Requires V symmetric positive
/// definite; otherwise throws InvalidArgument advising the direct path.
Vector schur_solve(const SaddleOperator& op, const Vector& rhs, const SchurOptions& options = {});

}  // namespace dynbc
