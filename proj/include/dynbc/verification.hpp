#pragma once

#include "dynbc/manufactured.hpp"
#include "dynbc/pdae.hpp"
#include "dynbc/time_integration.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dynbc {

// ---------------------------------------------------------------------------
// Norm matrices

/// Discrete norms on a boundary mesh. The fractional matrices come from the
/// generalized eigenproblem (M_Γ + K_Γ) v = μ M_Γ v with VᵀM_ΓV = I:
/// X_s = M_Γ V diag(μ^s) Vᵀ M_Γ, s = ±1/2.
struct SurfaceNorms {
    DenseMatrix mass;
    DenseMatrix h1;
    DenseMatrix half;
    DenseMatrix minus_half;
};

SurfaceNorms surface_norms(const BoundaryMesh& bmesh);

struct NormMatrices {
    SparseMatrix X_bulk;  ///< M + K with κ = 1
    SurfaceNorms trace;   ///< on the mesh carrying p
    SurfaceNorms multiplier;

    /// Block norm of the state space: diag(X_bulk, X_surf) with the H^{1/2}
    /// surface norm for Wentzell, H¹ for nonlocal, none for Dirichlet.
    DenseMatrix X_V(Formulation formulation) const;
    const DenseMatrix& N_Q() const { return multiplier.minus_half; }
};

NormMatrices make_norm_matrices(const PdaeSystem& sys);

/// β_h = sqrt(λ_min(N_Q⁻¹ B X_V⁻¹ Bᵀ)) by a dense generalized eigensolve.
double estimate_discrete_infsup(const DenseMatrix& B, const DenseMatrix& X_V, const DenseMatrix& N_Q);
/// Same with the norms implied by the system's formulation.
double estimate_discrete_infsup(const PdaeSystem& sys);
/// Inf-sup constant of the coupling between the bulk trace on `mesh` and an
/// arbitrary multiplier mesh. Unlike the system builders this accepts
/// rank-deficient pairings (β_h = 0).
double estimate_pairing_infsup(const BulkMesh& mesh, const BoundaryMesh& multiplier_mesh, Formulation formulation);

struct GardingResult {
    double c = 0.0;        ///< largest c with xᵀAx ≥ c xᵀX_V x on ker B
    double c_prime = 0.0;  ///< shift needed when c ≤ 0: xᵀAx ≥ c0 xᵀX_V x − c' xᵀE x
    std::size_t kernel_dim = 0;
};

/// Dense check of the Gårding inequality on ker B.
GardingResult garding_on_kernel(const PdaeSystem& sys);

// ---------------------------------------------------------------------------
// Errors

/// ‖u_h − u‖_{L²(Ω)} for the P1 function with nodal values `u_nodes`.
double l2_error_bulk(const BulkMesh& mesh, const Vector& u_nodes, const ScalarField& exact);
/// ‖p_h − p‖_{L²(Γ)} (counting measure on the two endpoints in 1D).
double l2_error_boundary(const BoundaryMesh& bmesh, const Vector& p, const BoundaryField& exact);

struct MultiplierComparison {
    double error_plus = 0.0;   ///< ‖λ_h − I_h(κ∂_n u)‖_{L²(Γ)}
    double error_minus = 0.0;  ///< ‖−λ_h − I_h(κ∂_n u)‖_{L²(Γ)}
    int sign = 1;
    double error = 0.0;
};

/// Compares the multiplier at the final time with the exact normal flux.
MultiplierComparison compare_multiplier_to_flux(const ManufacturedCase& mc, const PdaeSystem& sys, const Trajectory& traj);

// ---------------------------------------------------------------------------
// Studies

/// Multiplier pairing used by a study level.
struct MultiplierChoice {
    enum class Kind { matching, independent } kind = Kind::matching;
    /// Independent mesh: m = round(ratio × number of trace segments), shifted by offset_fraction · L/m.
    double ratio = 1.0;
    double offset_fraction = 0.0;
};

struct StudyOptions {
    Scheme scheme = Scheme::radau_iia_2;
    double t_end = 0.5;
    /// τ = tau_coefficient · h^tau_power, rounded so that t_end / τ is an integer.
    double tau_coefficient = 0.1;
    double tau_power = 1.0;
    MultiplierChoice multiplier;
};

double study_tau(const StudyOptions& opt, double h);
std::optional<BoundaryMesh> make_multiplier_mesh(const BulkMesh& mesh, const MultiplierChoice& choice);

struct LevelResult {
    std::size_t n = 0;
    double h = 0.0;
    double tau = 0.0;
    std::size_t steps = 0;
    double err_u = 0.0;
    double err_p = 0.0;
    double max_constraint_residual = 0.0;
    MultiplierComparison multiplier;
};

struct EocTable {
    std::string preset;
    std::string formulation;
    std::string scheme;
    std::vector<LevelResult> levels;
    std::vector<double> eoc_u;
    std::vector<double> eoc_p;
    std::vector<double> eoc_lambda;
    bool monotone = true;
    std::vector<std::string> warnings;

    /// One row per consecutive pair of levels.
    std::string eoc_csv() const;
    /// One row per level.
    std::string levels_csv() const;
    std::string to_json() const;
};

double eoc(double coarse_error, double fine_error, double ratio = 2.0);

EocTable run_convergence_study(const ManufacturedCase& mc, const std::vector<std::size_t>& levels, const StudyOptions& opt);

struct TemporalStudy {
    std::vector<double> taus;
    std::vector<double> errors;  ///< E-norm distance to the reference at t_end
    std::vector<double> eocs;
};

/// Temporal errors on a fixed mesh, measured against a Radau IIA reference
/// solution with step `tau_ref` on the same mesh (spatial error cancels).
TemporalStudy run_temporal_study(const ManufacturedCase& mc, std::size_t n, const std::vector<double>& taus, Scheme scheme,
                                 double t_end, double tau_ref);

/// Reduced ODE on ker B = {(u, T u)} for matching meshes: Pᵀ E P u̇ + Pᵀ A P u = Pᵀ load with P = [I; T].
PdaeSystem kernel_system(const PdaeSystem& sys);

/// max_t ‖x_pdae(t) − P u_ker(t)‖_E over the trajectory. Throws for non-matching meshes.
double compare_with_kernel_formulation(const PdaeSystem& sys, const InitialState& init, const StepperConfig& cfg);
double compare_with_kernel_formulation(const ManufacturedCase& mc, const BulkMesh& mesh, const StepperConfig& cfg);

/// Largest strong-form residual of the preset at `samples` pseudo-random
/// space-time points, with derivatives taken by central finite differences.
double strong_form_residual(const ManufacturedCase& mc, std::size_t samples = 20, unsigned seed = 7);

}  // namespace dynbc
