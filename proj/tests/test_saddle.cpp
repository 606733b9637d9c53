#include "dynbc/error.hpp"
#include "dynbc/manufactured.hpp"
#include "dynbc/saddle.hpp"
#include "dynbc/time_integration.hpp"

#include <gtest/gtest.h>

using namespace dynbc;

namespace {

SaddleOperator toy() {
    return {SparseMatrix::identity(2), SparseMatrix::from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}})};
}

PdaeSystem wentzell_1d(std::size_t n, double alpha = 1.0) {
    CoefficientSet c;
    c.alpha = [alpha](const BoundaryPoint&) { return alpha; };
    return build_wentzell_pdae(build_interval_mesh(n, 0.0, 1.0), std::nullopt, c, [](const Point&, double) { return 0.0; },
                               [](const BoundaryPoint&, double) { return 0.0; });
}

}  // namespace

TEST(Saddle, ToyExactSolve) {
    const SaddleOperator op = toy();
    Vector rhs(3);
    rhs << 1.0, 0.0, 0.0;
    const Vector z = solve(op, rhs);
    EXPECT_NEAR(z[0], 0.5, 1e-15);
    EXPECT_NEAR(z[1], 0.5, 1e-15);
    EXPECT_NEAR(z[2], 0.5, 1e-15);
    EXPECT_LE(op.backward_error(z, rhs), 1e-15);
    EXPECT_TRUE(op.assemble().is_symmetric());
}

TEST(Saddle, WentzellStepMatrixResidual) {
    const PdaeSystem sys = wentzell_1d(4);
    const Stepper stepper(sys, Scheme::implicit_euler, 0.1);
    const SaddleOperator& op = stepper.saddle_operator();
    EXPECT_TRUE(op.V.is_symmetric());
    Vector rhs = Vector::LinSpaced(static_cast<Eigen::Index>(op.size()), -1.0, 2.0);
    const Factorization f = factorize(op);
    const Vector z = f.solve(rhs);
    EXPECT_LE(op.backward_error(z, rhs), 1e-12);
    // Reuse gives bit-identical results.
    const Vector z2 = f.solve(rhs);
    EXPECT_EQ(z, z2);
    EXPECT_EQ(z, solve(f, rhs));
}

TEST(Saddle, DuplicatedMultiplierRowNamesB) {
    SaddleOperator op{SparseMatrix::identity(3),
                      SparseMatrix::from_triplets(2, 3, {{0, 0, 1.0}, {0, 1, -1.0}, {1, 0, 1.0}, {1, 1, -1.0}})};
    try {
        factorize(op);
        FAIL() << "expected SingularSystemError";
    } catch (const SingularSystemError& e) {
        EXPECT_EQ(e.block(), "B");
    }
}

TEST(Saddle, SingularOnKernelNamesV) {
    SaddleOperator op{SparseMatrix(2, 2), SparseMatrix::from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}})};
    try {
        factorize(op);
        FAIL() << "expected SingularSystemError";
    } catch (const SingularSystemError& e) {
        EXPECT_EQ(e.block(), "V");
    }
}

TEST(Saddle, DimensionMismatch) {
    const Factorization f = factorize(toy());
    EXPECT_THROW(f.solve(Vector::Ones(2)), InvalidArgument);
    EXPECT_THROW(schur_solve(toy(), Vector::Ones(4)), InvalidArgument);
}

TEST(Schur, ToyMatchesDirect) {
    Vector rhs(3);
    rhs << 0.3, -1.2, 0.7;
    EXPECT_LE((schur_solve(toy(), rhs) - solve(toy(), rhs)).norm(), 1e-12);
}

TEST(Schur, WentzellMatchingThreeMeshes) {
    for (const char* id : {"wentzell_1d_trig", "wentzell_2d_cos"}) {
        const ManufacturedCase mc = make_manufactured_case(id);
        for (std::size_t n : {4u, 8u, 16u}) {
            const BulkMesh mesh = preset_mesh(mc, n);
            const PdaeSystem sys = build_system(mc, mesh);
            const Stepper stepper(sys, Scheme::implicit_euler, 0.01);
            const SaddleOperator& op = stepper.saddle_operator();
            Vector rhs = Vector::LinSpaced(static_cast<Eigen::Index>(op.size()), 0.5, -0.25);
            rhs.head(sys.n_u) += sys.E.to_dense().topLeftCorner(sys.n_u, sys.n_u) * interpolate(mesh, mc.u0());
            const Vector direct = solve(op, rhs);
            const Vector schur = schur_solve(op, rhs);
            EXPECT_LE((direct - schur).norm() / direct.norm(), 1e-9) << id << " n=" << n;
        }
    }
}

TEST(Schur, IndefiniteVBlockAdvisesDirect) {
    // α strongly negative with a large step: V = E/τ + A is indefinite.
    const PdaeSystem sys = wentzell_1d(4, -50.0);
    const Stepper stepper(sys, Scheme::implicit_euler, 1.0);
    const SaddleOperator& op = stepper.saddle_operator();
    const Vector rhs = Vector::Ones(static_cast<Eigen::Index>(op.size()));
    try {
        schur_solve(op, rhs);
        FAIL() << "expected InvalidArgument";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("direct"), std::string::npos);
    }
    // The direct path still solves it.
    EXPECT_LE(op.backward_error(solve(op, rhs), rhs), 1e-12);
}
