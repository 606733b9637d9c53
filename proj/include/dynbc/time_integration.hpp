#pragma once

#include "dynbc/pdae.hpp"
#include "dynbc/saddle.hpp"

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace dynbc {

enum class Scheme { implicit_euler, radau_iia_2 };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct StepperConfig {
    Scheme scheme = Scheme::implicit_euler;
    double tau = 0.01;
    double t_end = 1.0;
    double solver_tol = 1e-12;

    void validate() const;
    std::size_t num_steps() const;
};

/// Two-stage Radau IIA tableau.
struct RadauTableau {
    std::array<std::array<double, 2>, 2> a;
    std::array<double, 2> b;
    std::array<double, 2> c;
    /// Inverse of `a`.
    std::array<std::array<double, 2>, 2> w;
};

const RadauTableau& radau_iia_2();

/// Order conditions up to three and algebraic stability (the matrix
/// b_i a_ij + b_j a_ji − b_i b_j is positive semidefinite). Throws on failure.
void check_radau_tableau(const RadauTableau& tab);

/// Stability function R(z) of the scheme for y' = λ y, z = τ λ.
std::complex<double> stability_function(Scheme scheme, std::complex<double> z);

struct StepResult {
    Vector x;
    Vector lambda;
};

/// Time stepper with a cached factorization for fixed τ.
class Stepper {
public:
    Stepper(const PdaeSystem& sys, Scheme scheme, double tau);

    StepResult step(const Vector& x, double t) const;

    /// The saddle operator solved at every step.
    const SaddleOperator& saddle_operator() const noexcept { return op_; }

private:
    const PdaeSystem& sys_;
    Scheme scheme_;
    double tau_;
    SaddleOperator op_;
    Factorization fact_;
};

/// One implicit Euler step: the constraint is imposed at t + τ.
StepResult step_implicit_euler(const PdaeSystem& sys, const Vector& x, double t, double tau);
/// One two-stage Radau IIA step: the constraint is imposed at both stage times.
StepResult step_radau_iia(const PdaeSystem& sys, const Vector& x, double t, double tau);

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    /// One entry per time; the entry at t = 0 is empty.
    std::vector<Vector> multipliers;
    std::vector<double> constraint_residual;
    std::vector<double> energy;
    std::vector<std::string> warnings;
};

Trajectory integrate(const PdaeSystem& sys, const InitialState& init, const StepperConfig& cfg);

}  // namespace dynbc
