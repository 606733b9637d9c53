#pragma once

#include "dynbc/assembly.hpp"
#include "dynbc/mesh.hpp"
#include "dynbc/sparse.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace dynbc {

enum class Formulation { homogeneous_dirichlet, dirichlet, wentzell, nonlocal };

std::string to_string(Formulation f);
Formulation formulation_from_string(const std::string& name);

/// Semi-discrete constrained system
///
///     E ẋ + A x + Bᵀ λ = load(t),    B x = constraint_data(t),
///
/// with x = [u; p] (or x = u when there is no boundary variable).
struct PdaeSystem {
    Formulation formulation = Formulation::wentzell;
    SparseMatrix E;
    SparseMatrix A;
    SparseMatrix B;
    std::function<Vector(double)> load;
    std::function<Vector(double)> constraint_data;
    std::size_t n_u = 0;
    std::size_t n_p = 0;
    std::size_t n_lambda = 0;

    // Discretization the system was built from.
    std::shared_ptr<const BulkMesh> mesh;
    std::shared_ptr<const BoundaryMesh> trace_mesh;
    std::shared_ptr<const BoundaryMesh> multiplier_mesh;
    /// Nodal trace T (trace vertices × bulk nodes).
    SparseMatrix trace;
    /// Bulk nodes carrying unknowns (all nodes, or interior nodes for the
    /// homogeneous Dirichlet system).
    std::vector<int> free_nodes;

    std::size_t size() const { return n_u + n_p; }
    bool matching() const;

    /// Bulk vector on all mesh nodes from the u-block of x (zero on
    /// eliminated boundary nodes).
    Vector bulk_values(const Vector& x) const;
    Vector boundary_values(const Vector& x) const { return x.segment(n_u, n_p); }

    double energy(const Vector& x) const { return 0.5 * x.dot(E * x); }
    double constraint_residual(const Vector& x, double t) const;

    /// Shared structural check: block sizes, symmetry of E and A, data sizes.
    void validate_structure() const;

    /// Dimensions, block nnz and (optionally) the consistency residual as JSON.
    std::string summary_json(std::optional<double> consistency_residual = std::nullopt) const;
};

/// Eliminates boundary nodes (test functions in H¹₀); no constraint.
PdaeSystem build_homogeneous_dirichlet(const BulkMesh& mesh, const CoefficientSet& coeffs, BulkData f);

/// Dirichlet data as an explicit constraint M_Γ T u = M_Γ g(t).
PdaeSystem build_dirichlet_pdae(const BulkMesh& mesh, const CoefficientSet& coeffs, BulkData f, BoundaryData g);

/// Locally reacting (β = 0) dynamic boundary condition.
PdaeSystem build_wentzell_pdae(const BulkMesh& mesh, const std::optional<BoundaryMesh>& multiplier_mesh,
                               const CoefficientSet& coeffs, BulkData f, BoundaryData g);

/// Dynamic boundary condition with surface diffusion β > 0 (square only).
PdaeSystem build_nonlocal_pdae(const BulkMesh& mesh, const std::optional<BoundaryMesh>& multiplier_mesh,
                               const CoefficientSet& coeffs, BulkData f, BoundaryData g);

struct InitialState {
    Vector u0;
    Vector p0;
    double consistency_residual = 0.0;
    bool projected = false;

    Vector stacked() const;
};

/// Consistent initial data. Without p0_raw the boundary value is p0 = T u0;
/// with p0_raw, or when the Dirichlet trace of u0 misses g(0), (u0, p0) is
/// projected E-orthogonally onto {B x = constraint_data(0)}.
InitialState consistent_init(const PdaeSystem& sys, const Vector& u0_raw, const std::optional<Vector>& p0_raw = std::nullopt,
                             double tol = 1e-10);

}  // namespace dynbc
