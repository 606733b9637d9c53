#include "dynbc/error.hpp"
#include "dynbc/time_integration.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace dynbc;

namespace {

const BulkData zero_f = [](const Point&, double) { return 0.0; };
const BoundaryData zero_g = [](const BoundaryPoint&, double) { return 0.0; };

// ẏ = −y as a one-dimensional unconstrained system.
PdaeSystem scalar_decay() {
    PdaeSystem s;
    s.formulation = Formulation::homogeneous_dirichlet;
    s.E = SparseMatrix::identity(1);
    s.A = SparseMatrix::identity(1);
    s.B = SparseMatrix(0, 1);
    s.n_u = 1;
    s.load = [](double) { return Vector::Zero(1); };
    s.constraint_data = [](double) { return Vector(); };
    return s;
}

// E = I, A = 0, B = [1, −1].
PdaeSystem projection_toy() {
    PdaeSystem s;
    s.formulation = Formulation::wentzell;
    s.E = SparseMatrix::identity(2);
    s.A = SparseMatrix(2, 2);
    s.B = SparseMatrix::from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}});
    s.n_u = 2;
    s.n_lambda = 1;
    s.load = [](double) { return Vector::Zero(2); };
    s.constraint_data = [](double) { return Vector::Zero(1); };
    return s;
}

double scalar_error(Scheme scheme, double tau) {
    const PdaeSystem s = scalar_decay();
    InitialState init;
    init.u0 = Vector::Ones(1);
    const Trajectory traj = integrate(s, init, {scheme, tau, 1.0});
    return std::abs(traj.states.back()[0] - std::exp(-1.0));
}

}  // namespace

TEST(RadauTableau, SelfCheck) {
    const RadauTableau& t = radau_iia_2();
    EXPECT_NO_THROW(check_radau_tableau(t));
    EXPECT_DOUBLE_EQ(t.c[0], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(t.c[1], 1.0);
    // Stiffly accurate: last row of A equals b.
    EXPECT_DOUBLE_EQ(t.a[1][0], t.b[0]);
    EXPECT_DOUBLE_EQ(t.a[1][1], t.b[1]);
    // w is the inverse of a.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double s = 0.0;
            for (int k = 0; k < 2; ++k) s += t.a[i][k] * t.w[k][j];
            EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-15);
        }
    // Algebraic stability matrix b_i a_ij + b_j a_ji − b_i b_j has eigenvalues {0, 1/8}.
    double m[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m[i][j] = t.b[i] * t.a[i][j] + t.b[j] * t.a[j][i] - t.b[i] * t.b[j];
    const double tr = m[0][0] + m[1][1], det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    EXPECT_NEAR(det, 0.0, 1e-15);
    EXPECT_NEAR(tr, 0.125, 1e-15);
}

TEST(RadauTableau, RejectsBrokenTableau) {
    RadauTableau t = radau_iia_2();
    t.b[0] = 0.7;
    EXPECT_THROW(check_radau_tableau(t), Error);
    RadauTableau u = radau_iia_2();
    u.a[0][1] = 0.5;  // indefinite algebraic stability matrix
    EXPECT_THROW(check_radau_tableau(u), Error);
}

TEST(StabilityFunction, RadauRationalApproximation) {
    const std::complex<double> z(-0.1, 0.0);
    const std::complex<double> expected = (1.0 + z / 3.0) / (1.0 - 2.0 * z / 3.0 + z * z / 6.0);
    EXPECT_NEAR(std::abs(stability_function(Scheme::radau_iia_2, z) - expected), 0.0, 1e-15);
    // Local error z⁴/72 + O(z⁵).
    EXPECT_NEAR(std::abs(stability_function(Scheme::radau_iia_2, z) - std::exp(z)), 1e-4 / 72.0, 2e-7);
    EXPECT_NEAR(std::abs(stability_function(Scheme::implicit_euler, z) - 1.0 / 1.1), 0.0, 1e-15);
}

TEST(StabilityFunction, OneStepMatchesRationalFunction) {
    const PdaeSystem s = scalar_decay();
    const StepResult r = step_radau_iia(s, Vector::Ones(1), 0.0, 0.1);
    EXPECT_NEAR(r.x[0], stability_function(Scheme::radau_iia_2, {-0.1, 0.0}).real(), 1e-15);
    const StepResult e = step_implicit_euler(s, Vector::Ones(1), 0.0, 0.1);
    EXPECT_NEAR(e.x[0], 1.0 / 1.1, 1e-15);
}

TEST(StabilityFunction, StiffDecay) {
    const std::complex<double> z(-1e6, 0.0);
    EXPECT_LT(std::abs(stability_function(Scheme::implicit_euler, z)), 1.0);
    EXPECT_LT(std::abs(stability_function(Scheme::radau_iia_2, z)), 1.0);
    PdaeSystem s = scalar_decay();
    s.A = SparseMatrix::identity(1) * 1e6;
    for (Scheme sc : {Scheme::implicit_euler, Scheme::radau_iia_2}) {
        const Stepper st(s, sc, 1.0);
        EXPECT_LT(std::abs(st.step(Vector::Ones(1), 0.0).x[0]), 1.0);
    }
}

TEST(ScalarConvergence, GlobalOrders) {
    const std::vector<double> taus{0.2, 0.1, 0.05};
    for (std::size_t k = 0; k + 1 < taus.size(); ++k) {
        const double radau = std::log2(scalar_error(Scheme::radau_iia_2, taus[k]) / scalar_error(Scheme::radau_iia_2, taus[k + 1]));
        EXPECT_GT(radau, 2.8);
        EXPECT_LT(radau, 3.2);
        const double euler =
            std::log2(scalar_error(Scheme::implicit_euler, taus[k]) / scalar_error(Scheme::implicit_euler, taus[k + 1]));
        EXPECT_GT(euler, 0.9);
        EXPECT_LT(euler, 1.1);
    }
}

TEST(ImplicitEuler, ProjectionToy) {
    const PdaeSystem s = projection_toy();
    const double tau = 0.25;
    Vector x(2);
    x << 1.0, 0.0;
    const StepResult r = step_implicit_euler(s, x, 0.0, tau);
    EXPECT_NEAR(r.x[0], 0.5, 1e-15);
    EXPECT_NEAR(r.x[1], 0.5, 1e-15);
    EXPECT_NEAR(r.lambda[0], 0.5 / tau, 1e-14);
}

TEST(Steppers, ZeroStateZeroStep) {
    const PdaeSystem sys = build_wentzell_pdae(build_square_mesh(3), std::nullopt, {}, zero_f, zero_g);
    const Vector z = Vector::Zero(static_cast<Eigen::Index>(sys.size()));
    EXPECT_EQ(step_implicit_euler(sys, z, 0.0, 0.1).x, z);
    EXPECT_EQ(step_radau_iia(sys, z, 0.0, 0.1).x, z);
}

TEST(Steppers, DirichletRampIsExactAtEveryStep) {
    const BulkMesh mesh = build_interval_mesh(6, 0.0, 1.0);
    const PdaeSystem sys = build_dirichlet_pdae(mesh, {}, zero_f, [](const BoundaryPoint&, double t) { return t; });
    for (Scheme s : {Scheme::implicit_euler, Scheme::radau_iia_2}) {
        const Trajectory traj = integrate(sys, consistent_init(sys, Vector::Zero(7)), {s, 0.05, 0.5});
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            EXPECT_NEAR(traj.states[k][0], traj.times[k], 1e-14);
            EXPECT_NEAR(traj.states[k][6], traj.times[k], 1e-14);
        }
    }
}

TEST(Steppers, RadauImposesConstraintAtStageTimes) {
    // With g = sin(5t) any stage error in the constraint shows up in the end values.
    const BulkMesh mesh = build_square_mesh(4);
    const PdaeSystem sys =
        build_dirichlet_pdae(mesh, {}, zero_f, [](const BoundaryPoint& bp, double t) { return std::sin(5.0 * t) + bp.x.y; });
    const Trajectory traj = integrate(sys, consistent_init(sys, interpolate(mesh, [](const Point& x) { return x.y; })),
                                      {Scheme::radau_iia_2, 0.1, 1.0});
    for (double r : traj.constraint_residual) EXPECT_LE(r, 1e-12);
}

TEST(Integrate, TimeGridAndDiagnostics) {
    const PdaeSystem sys = build_wentzell_pdae(build_interval_mesh(4, 0.0, 1.0), std::nullopt, {}, zero_f, zero_g);
    const Trajectory traj = integrate(sys, consistent_init(sys, Vector::Ones(5)), {Scheme::implicit_euler, 0.1, 0.5});
    ASSERT_EQ(traj.times.size(), 6u);
    EXPECT_EQ(traj.states.size(), 6u);
    EXPECT_EQ(traj.multipliers.size(), 6u);
    EXPECT_EQ(traj.multipliers[0].size(), 0);
    EXPECT_EQ(traj.multipliers[1].size(), 2);
    EXPECT_EQ(traj.energy.size(), 6u);
    EXPECT_EQ(traj.constraint_residual.size(), 6u);
    for (std::size_t k = 1; k < traj.times.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
    EXPECT_DOUBLE_EQ(traj.times.back(), 0.5);
    EXPECT_TRUE(traj.warnings.empty());
}

TEST(Integrate, ConfigValidation) {
    EXPECT_THROW((StepperConfig{Scheme::implicit_euler, 0.0, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((StepperConfig{Scheme::implicit_euler, 0.1, -1.0}.validate()), InvalidArgument);
    EXPECT_THROW((StepperConfig{Scheme::implicit_euler, 2.0, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((StepperConfig{Scheme::implicit_euler, 0.3, 1.0}.validate()), InvalidArgument);
    EXPECT_EQ((StepperConfig{Scheme::implicit_euler, 0.1, 0.5}.num_steps()), 5u);
    EXPECT_EQ(scheme_from_string(to_string(Scheme::radau_iia_2)), Scheme::radau_iia_2);
    EXPECT_THROW(scheme_from_string("bdf2"), InvalidArgument);
}

TEST(Integrate, InconsistentInitialDataWarns) {
    const PdaeSystem sys = projection_toy();
    InitialState init;
    init.u0 = Vector(2);
    init.u0 << 1.0, 0.0;
    init.consistency_residual = 1.0;
    const Trajectory traj = integrate(sys, init, {Scheme::implicit_euler, 0.1, 0.2});
    EXPECT_FALSE(traj.warnings.empty());
    EXPECT_LE(traj.constraint_residual[1], 1e-14);
}

TEST(Integrate, StepErrorsCarryIndexAndTime) {
    PdaeSystem sys = scalar_decay();
    sys.load = [](double t) -> Vector {
        if (t > 0.25) throw Error("load unavailable");
        return Vector::Zero(1);
    };
    InitialState init;
    init.u0 = Vector::Ones(1);
    try {
        integrate(sys, init, {Scheme::implicit_euler, 0.1, 0.5});
        FAIL() << "expected Error";
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("step 3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("load unavailable"), std::string::npos);
    }
}

// Energy is non-increasing for implicit Euler with zero data and α ≥ 0.
TEST(EnergyProperty, RandomInitialStates) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    CoefficientSet c;
    c.alpha = [](const BoundaryPoint& bp) { return 0.5 + 0.5 * std::cos(bp.s); };
    const BulkMesh sq = build_square_mesh(4);
    CoefficientSet cn = c;
    cn.beta = 0.5;
    const std::vector<PdaeSystem> systems{
        build_homogeneous_dirichlet(sq, c, zero_f), build_dirichlet_pdae(sq, c, zero_f, zero_g),
        build_wentzell_pdae(sq, std::nullopt, c, zero_f, zero_g), build_nonlocal_pdae(sq, std::nullopt, cn, zero_f, zero_g)};
    for (const auto& sys : systems) {
        for (int trial = 0; trial < 10; ++trial) {
            Vector u0(25);
            for (auto& v : u0) v = d(rng);
            const Trajectory traj = integrate(sys, consistent_init(sys, u0), {Scheme::implicit_euler, 0.02, 0.2});
            for (std::size_t k = 1; k < traj.energy.size(); ++k)
                EXPECT_LE(traj.energy[k], traj.energy[k - 1] * (1.0 + 1e-12)) << to_string(sys.formulation);
        }
    }
}
