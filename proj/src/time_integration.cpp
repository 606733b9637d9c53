#include "dynbc/time_integration.hpp"

#include "dynbc/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace dynbc {

std::string to_string(Scheme s) {
    return s == Scheme::implicit_euler ? "implicit_euler" : "radau_iia_2";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "implicit_euler") return Scheme::implicit_euler;
    if (name == "radau_iia_2" || name == "radau_iia") return Scheme::radau_iia_2;
    throw InvalidArgument("unknown scheme '" + name + "'");
}

void StepperConfig::validate() const {
    if (!(tau > 0.0)) throw InvalidArgument("StepperConfig: tau must be positive");
    if (!(t_end > 0.0)) throw InvalidArgument("StepperConfig: t_end must be positive");
    if (tau > t_end * (1.0 + 1e-12)) throw InvalidArgument("StepperConfig: tau must not exceed t_end");
    (void)num_steps();
}

std::size_t StepperConfig::num_steps() const {
    const double ratio = t_end / tau;
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
        throw InvalidArgument("StepperConfig: t_end must be an integer multiple of tau (uniform steps only)");
    return static_cast<std::size_t>(n);
}

const RadauTableau& radau_iia_2() {
    static const RadauTableau tab = [] {
        RadauTableau t;
        t.a = {{{5.0 / 12.0, -1.0 / 12.0}, {3.0 / 4.0, 1.0 / 4.0}}};
        t.b = {3.0 / 4.0, 1.0 / 4.0};
        t.c = {1.0 / 3.0, 1.0};
        const double det = t.a[0][0] * t.a[1][1] - t.a[0][1] * t.a[1][0];
        t.w = {{{t.a[1][1] / det, -t.a[0][1] / det}, {-t.a[1][0] / det, t.a[0][0] / det}}};
        check_radau_tableau(t);
        return t;
    }();
    return tab;
}

void check_radau_tableau(const RadauTableau& t) {
    const auto fail = [](const std::string& what) { throw Error("Radau IIA tableau check failed: " + what); };
    constexpr double tol = 1e-14;
    double sb = 0.0, sbc = 0.0, sbc2 = 0.0;
    for (int i = 0; i < 2; ++i) {
        sb += t.b[i];
        sbc += t.b[i] * t.c[i];
        sbc2 += t.b[i] * t.c[i] * t.c[i];
        if (std::abs(t.a[i][0] + t.a[i][1] - t.c[i]) > tol) fail("row sums of A differ from c");
    }
    if (std::abs(sb - 1.0) > tol) fail("sum b_i != 1");
    if (std::abs(sbc - 0.5) > tol) fail("sum b_i c_i != 1/2");
    if (std::abs(sbc2 - 1.0 / 3.0) > tol) fail("sum b_i c_i^2 != 1/3");
    Eigen::Matrix2d m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = t.b[i] * t.a[i][j] + t.b[j] * t.a[j][i] - t.b[i] * t.b[j];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    if (es.eigenvalues().minCoeff() < -tol) fail("algebraic stability matrix is not positive semidefinite");
}

std::complex<double> stability_function(Scheme scheme, std::complex<double> z) {
    if (scheme == Scheme::implicit_euler) return 1.0 / (1.0 - z);
    // R(z) = 1 + z bᵀ (I − z A)⁻¹ 1
    const auto& t = radau_iia_2();
    const std::complex<double> m00 = 1.0 - z * t.a[0][0], m01 = -z * t.a[0][1];
    const std::complex<double> m10 = -z * t.a[1][0], m11 = 1.0 - z * t.a[1][1];
    const std::complex<double> det = m00 * m11 - m01 * m10;
    const std::complex<double> y0 = (m11 - m01) / det;
    const std::complex<double> y1 = (m00 - m10) / det;
    return 1.0 + z * (t.b[0] * y0 + t.b[1] * y1);
}

namespace {

SaddleOperator make_operator(const PdaeSystem& sys, Scheme scheme, double tau) {
    if (scheme == Scheme::implicit_euler) return {sys.E * (1.0 / tau) + sys.A, sys.B};
    // Stage equations multiplied by W = A_rk⁻¹:
    //   (1/τ) Σ_j w_ij E (X_j − x) + A X_i + Bᵀ Λ_i = F(t + c_i τ),  B X_i = g(t + c_i τ).
    const auto& tab = radau_iia_2();
    const SparseMatrix v00 = sys.E * (tab.w[0][0] / tau) + sys.A;
    const SparseMatrix v01 = sys.E * (tab.w[0][1] / tau);
    const SparseMatrix v10 = sys.E * (tab.w[1][0] / tau);
    const SparseMatrix v11 = sys.E * (tab.w[1][1] / tau) + sys.A;
    const std::size_t n = sys.size();
    SaddleOperator op;
    op.V = block_matrix({{&v00, &v01}, {&v10, &v11}}, {n, n}, {n, n});
    op.B = block_diagonal(sys.B, sys.B);
    if (sys.n_lambda == 0) op.B = SparseMatrix(0, 2 * n);
    return op;
}

}  // namespace

Stepper::Stepper(const PdaeSystem& sys, Scheme scheme, double tau)
    : sys_(sys), scheme_(scheme), tau_(tau), op_(make_operator(sys, scheme, tau)), fact_(factorize(op_)) {}

StepResult Stepper::step(const Vector& x, double t) const {
    const std::size_t n = sys_.size();
    const std::size_t m = sys_.n_lambda;
    if (static_cast<std::size_t>(x.size()) != n) throw InvalidArgument("Stepper::step: state has wrong size");
    if (scheme_ == Scheme::implicit_euler) {
        Vector rhs(n + m);
        rhs.head(n) = sys_.E * x / tau_ + sys_.load(t + tau_);
        rhs.tail(m) = sys_.constraint_data(t + tau_);
        const Vector z = fact_.solve(rhs);
        return {z.head(n), z.tail(m)};
    }
    const auto& tab = radau_iia_2();
    const Vector ex = sys_.E * x / tau_;
    Vector rhs(2 * n + 2 * m);
    rhs.segment(0, n) = sys_.load(t + tab.c[0] * tau_) + (tab.w[0][0] + tab.w[0][1]) * ex;
    rhs.segment(n, n) = sys_.load(t + tab.c[1] * tau_) + (tab.w[1][0] + tab.w[1][1]) * ex;
    rhs.segment(2 * n, m) = sys_.constraint_data(t + tab.c[0] * tau_);
    rhs.segment(2 * n + m, m) = sys_.constraint_data(t + tab.c[1] * tau_);
    const Vector z = fact_.solve(rhs);
    // Stiffly accurate: the new state is the last stage.
    return {z.segment(n, n), z.segment(2 * n + m, m)};
}

StepResult step_implicit_euler(const PdaeSystem& sys, const Vector& x, double t, double tau) {
    return Stepper(sys, Scheme::implicit_euler, tau).step(x, t);
}

StepResult step_radau_iia(const PdaeSystem& sys, const Vector& x, double t, double tau) {
    return Stepper(sys, Scheme::radau_iia_2, tau).step(x, t);
}

Trajectory integrate(const PdaeSystem& sys, const InitialState& init, const StepperConfig& cfg) {
    cfg.validate();
    const std::size_t steps = cfg.num_steps();
    Trajectory traj;
    if (init.consistency_residual > 1e-10) {
        std::ostringstream w;
        w << "initial data inconsistent: constraint residual " << init.consistency_residual;
        traj.warnings.push_back(w.str());
    }
    Vector x = init.stacked();
    if (static_cast<std::size_t>(x.size()) != sys.size()) throw InvalidArgument("integrate: initial state has wrong size");

    traj.times.push_back(0.0);
    traj.states.push_back(x);
    traj.multipliers.emplace_back();
    traj.constraint_residual.push_back(sys.constraint_residual(x, 0.0));
    traj.energy.push_back(sys.energy(x));

    const Stepper stepper(sys, cfg.scheme, cfg.tau);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * cfg.tau;
        const double t_next = static_cast<double>(k + 1) * cfg.tau;
        StepResult r;
        try {
            r = stepper.step(x, t);
        } catch (const SingularSystemError& e) {
            throw SingularSystemError(e.block(), "step " + std::to_string(k + 1) + " (t = " + std::to_string(t_next) + "): " + e.what());
        } catch (const Error& e) {
            throw Error("step " + std::to_string(k + 1) + " (t = " + std::to_string(t_next) + "): " + e.what());
        }
        x = std::move(r.x);
        traj.times.push_back(t_next);
        traj.states.push_back(x);
        traj.multipliers.push_back(std::move(r.lambda));
        traj.constraint_residual.push_back(sys.constraint_residual(x, t_next));
        traj.energy.push_back(sys.energy(x));
    }
    return traj;
}

}  // namespace dynbc
