#pragma once

#include "dynbc/mesh.hpp"
#include "dynbc/sparse.hpp"

#include <functional>

namespace dynbc {

using ScalarField = std::function<double(const Point&)>;
using BoundaryField = std::function<double(const BoundaryPoint&)>;
using BulkData = std::function<double(const Point&, double)>;
using BoundaryData = std::function<double(const BoundaryPoint&, double)>;

/// Diffusion κ ≥ c_κ > 0 in the bulk, reaction α on Γ, surface diffusion β ≥ 0.
struct CoefficientSet {
    ScalarField kappa = [](const Point&) { return 1.0; };
    double c_kappa = 1.0;
    BoundaryField alpha = [](const BoundaryPoint&) { return 0.0; };
    double beta = 0.0;

    void validate() const;
};

/// Pairing of the trace mesh (where p lives) with the multiplier mesh.
struct CouplingSpec {
    BoundaryMesh trace_mesh;
    BoundaryMesh multiplier_mesh;

    bool matching() const { return trace_mesh.same_partition(multiplier_mesh); }
};

SparseMatrix assemble_mass_bulk(const BulkMesh& mesh);
SparseMatrix assemble_stiffness_bulk(const BulkMesh& mesh, const ScalarField& kappa);

/// Boundary mass; the identity for the two-point boundary of an interval.
SparseMatrix assemble_mass_boundary(const BoundaryMesh& bmesh);
/// Weak Laplace–Beltrami operator on the closed curve; zero in 1D.
SparseMatrix assemble_stiffness_boundary(const BoundaryMesh& bmesh);
/// ∫_Γ α φ_i φ_j ds.
SparseMatrix assemble_alpha_boundary(const BoundaryMesh& bmesh, const BoundaryField& alpha);

/// Nodal trace: (T u)_j = u at bulk node of trace vertex j.
SparseMatrix assemble_trace_matrix(const BulkMesh& mesh, const BoundaryMesh& bmesh);

/// C_ij = ∫_Γ χ_i φ_j ds for hats χ_i on `rows` and φ_j on `cols`, integrated
/// exactly on the merged breakpoint partition of both meshes.
SparseMatrix assemble_cross_mass(const BoundaryMesh& rows, const BoundaryMesh& cols);

/// B = [-C T | C] with C the multiplier/trace cross mass (C = M_Γ when matching).
SparseMatrix assemble_coupling(const CouplingSpec& spec, const SparseMatrix& trace_matrix);

/// ∫_Ω f(·, t) φ_i dx.
Vector assemble_load(const BulkMesh& mesh, const BulkData& f, double t);
/// ∫_Γ g(·, t) φ_j ds (point values in 1D).
Vector assemble_load(const BoundaryMesh& bmesh, const BoundaryData& g, double t);

Vector interpolate(const BulkMesh& mesh, const ScalarField& fn);
Vector interpolate(const BoundaryMesh& bmesh, const BoundaryField& fn);

}  // namespace dynbc
