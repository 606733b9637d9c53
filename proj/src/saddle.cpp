#include "dynbc/saddle.hpp"

#include "dynbc/error.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>

namespace dynbc {

using ColSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

SparseMatrix SaddleOperator::assemble() const {
    if (V.rows() != V.cols()) throw InvalidArgument("SaddleOperator: V-block must be square");
    if (m() > 0 && B.cols() != n()) throw InvalidArgument("SaddleOperator: B must have as many columns as V");
    const SparseMatrix Bt = B.transpose();
    return block_matrix({{&V, &Bt}, {&B, nullptr}}, {n(), m()}, {n(), m()});
}

double SaddleOperator::backward_error(const Vector& z, const Vector& rhs) const {
    const Vector r = assemble() * z - rhs;
    const double scale = rhs.norm();
    return scale == 0.0 ? r.norm() : r.norm() / scale;
}

struct Factorization::Impl {
    SparseMatrix K;
    Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>> lu;
};

Factorization factorize(const SaddleOperator& op) {
    if (op.m() > 0 && row_rank(op.B) < op.m())
        throw SingularSystemError("B", "saddle operator singular: constraint block B is rank deficient (redundant constraints)");
    auto impl = std::make_shared<Factorization::Impl>();
    impl->K = op.assemble();
    ColSparse k = impl->K.to_eigen();
    k.makeCompressed();
    impl->lu.analyzePattern(k);
    impl->lu.factorize(k);
    if (impl->lu.info() != Eigen::Success)
        throw SingularSystemError("V", "saddle operator singular: V-block is singular on ker B (" + impl->lu.lastErrorMessage() + ")");
    Factorization f;
    f.size_ = op.size();
    f.impl_ = std::move(impl);
    return f;
}

Vector Factorization::solve(const Vector& rhs) const {
    if (!impl_) throw Error("Factorization::solve: empty factorization");
    if (static_cast<std::size_t>(rhs.size()) != size_)
        throw InvalidArgument("Factorization::solve: right-hand side has size " + std::to_string(rhs.size()) +
                              ", expected " + std::to_string(size_));
    Vector z = impl_->lu.solve(rhs);
    const double scale = rhs.norm();
    // Iterative refinement in working precision.
    for (int it = 0; it < 3; ++it) {
        const Vector r = rhs - impl_->K * z;
        if (!std::isfinite(r.norm())) throw SingularSystemError("V", "saddle solve produced non-finite values");
        if (r.norm() <= 1e-14 * scale) break;
        z += impl_->lu.solve(r);
    }
    const double err = (impl_->K * z - rhs).norm();
    if (!(err <= 1e-8 * std::max(scale, 1e-300)) && scale > 0.0)
        throw SingularSystemError("V", "saddle solve failed to converge: backward error " + std::to_string(err / scale));
    return z;
}

Vector solve(const Factorization& fact, const Vector& rhs) { return fact.solve(rhs); }

Vector solve(const SaddleOperator& op, const Vector& rhs) { return factorize(op).solve(rhs); }

Vector schur_solve(const SaddleOperator& op, const Vector& rhs, const SchurOptions& options) {
    const std::size_t n = op.n();
    const std::size_t m = op.m();
    if (static_cast<std::size_t>(rhs.size()) != n + m) throw InvalidArgument("schur_solve: right-hand side size mismatch");
    if (!op.V.is_symmetric(1e-12)) throw InvalidArgument("schur_solve: V-block is not symmetric; use the direct factorization");

    ColSparse v = op.V.to_eigen();
    Eigen::SimplicialLDLT<ColSparse> ldlt(v);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
        throw InvalidArgument("schur_solve: V-block is not positive definite; use the direct factorization");

    const Vector r1 = rhs.head(n);
    const Vector r2 = rhs.tail(m);
    const Vector v_r1 = ldlt.solve(r1);
    if (m == 0) {
        Vector z(n);
        z = v_r1;
        return z;
    }

    const auto apply_schur = [&](const Vector& q) -> Vector {
        const Vector w = ldlt.solve(op.B.transpose_times(q));
        return op.B * w;
    };

    const Vector b = op.B * v_r1 - r2;
    Vector lambda = Vector::Zero(m);
    Vector r = b;
    Vector d = r;
    double rr = r.squaredNorm();
    const double stop = options.tol * options.tol * std::max(b.squaredNorm(), 1e-300);
    const std::size_t max_it = options.max_iterations ? options.max_iterations : 10 * m + 50;
    std::size_t it = 0;
    while (rr > stop && it < max_it) {
        const Vector sd = apply_schur(d);
        const double curvature = d.dot(sd);
        if (!(curvature > 0.0)) throw InvalidArgument("schur_solve: Schur complement is not positive definite (B rank deficient?)");
        const double step = rr / curvature;
        lambda += step * d;
        r -= step * sd;
        const double rr_new = r.squaredNorm();
        d = r + (rr_new / rr) * d;
        rr = rr_new;
        ++it;
    }
    if (rr > stop) throw Error("schur_solve: conjugate gradients did not converge in " + std::to_string(max_it) + " iterations");

    Vector z(n + m);
    z.head(n) = ldlt.solve(r1 - op.B.transpose_times(lambda));
    z.tail(m) = lambda;
    return z;
}

}  // namespace dynbc
