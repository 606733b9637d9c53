#pragma once

#include "dynbc/assembly.hpp"
#include "dynbc/pdae.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace dynbc {

/// Closed-form solution of the bulk–surface problem together with the data
/// it induces:
///
///     u_t − ∇·(κ∇u) = f  in Ω,
///     u_t − β Δ_Γ u + κ ∂_n u + α u = g  on Γ   (dynamic boundary),
///     u = g  on Γ                                (Dirichlet presets).
struct ManufacturedCase {
    std::string name;
    Formulation formulation;
    int dim;
    CoefficientSet coeffs;
    double t_end = 0.5;

    std::function<double(const Point&, double)> exact_u;
    std::function<double(const Point&, double)> u_t;
    std::function<Point(const Point&, double)> grad_u;
    /// Hessian entries (u_xx, u_xy, u_yy).
    std::function<std::array<double, 3>(const Point&, double)> hessian_u;
    /// ∇κ, needed for the bulk residual with variable κ.
    std::function<Point(const Point&)> grad_kappa;

    BulkData f;
    BoundaryData g;

    double exact_p(const BoundaryPoint& bp, double t) const { return exact_u(bp.x, t); }
    /// κ ∂_n u on Γ.
    double normal_flux(const BoundaryPoint& bp, double t) const;
    /// Second derivative of u along the boundary tangent.
    double laplace_beltrami(const BoundaryPoint& bp, double t) const;

    ScalarField u0() const {
        return [u = exact_u](const Point& x) { return u(x, 0.0); };
    }
};

/// Catalog ids in stable order.
const std::vector<std::string>& preset_catalog();

/// One-line description of each preset.
std::string preset_description(const std::string& id);

ManufacturedCase make_manufactured_case(const std::string& id);

/// Builds the system matching the preset's formulation on `mesh`.
PdaeSystem build_system(const ManufacturedCase& mc, const BulkMesh& mesh,
                        const std::optional<BoundaryMesh>& multiplier_mesh = std::nullopt);

/// Mesh of the preset's geometry with n elements per side.
BulkMesh preset_mesh(const ManufacturedCase& mc, std::size_t n);

}  // namespace dynbc
