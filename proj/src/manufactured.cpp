#include "dynbc/manufactured.hpp"

#include "dynbc/error.hpp"

#include <cmath>

namespace dynbc {

namespace {

constexpr double kPi = M_PI;

/// Fills f and g from the closed forms.
void derive_data(ManufacturedCase& mc) {
    const ManufacturedCase snapshot = mc;
    mc.f = [mc = snapshot](const Point& x, double t) {
        const auto h = mc.hessian_u(x, t);
        const double lap = h[0] + (mc.dim == 2 ? h[2] : 0.0);
        const Point gu = mc.grad_u(x, t);
        const Point gk = mc.grad_kappa(x);
        return mc.u_t(x, t) - mc.coeffs.kappa(x) * lap - (gk.x * gu.x + gk.y * gu.y);
    };
    if (mc.formulation == Formulation::dirichlet || mc.formulation == Formulation::homogeneous_dirichlet) {
        mc.g = [u = snapshot.exact_u](const BoundaryPoint& bp, double t) { return u(bp.x, t); };
        return;
    }
    mc.g = [mc = snapshot](const BoundaryPoint& bp, double t) {
        return mc.u_t(bp.x, t) - mc.coeffs.beta * mc.laplace_beltrami(bp, t) + mc.normal_flux(bp, t) +
               mc.coeffs.alpha(bp) * mc.exact_u(bp.x, t);
    };
}

ManufacturedCase dirichlet_1d_poly() {
    ManufacturedCase mc;
    mc.name = "dirichlet_1d_poly";
    mc.formulation = Formulation::dirichlet;
    mc.dim = 1;
    mc.exact_u = [](const Point& x, double t) { return std::exp(-t) * (x.x * x.x + 1.0); };
    mc.u_t = [](const Point& x, double t) { return -std::exp(-t) * (x.x * x.x + 1.0); };
    mc.grad_u = [](const Point& x, double t) { return Point{2.0 * x.x * std::exp(-t), 0.0}; };
    mc.hessian_u = [](const Point&, double t) { return std::array<double, 3>{2.0 * std::exp(-t), 0.0, 0.0}; };
    return mc;
}

ManufacturedCase wentzell_1d_trig() {
    ManufacturedCase mc;
    mc.name = "wentzell_1d_trig";
    mc.formulation = Formulation::wentzell;
    mc.dim = 1;
    mc.coeffs.alpha = [](const BoundaryPoint&) { return 1.0; };
    mc.exact_u = [](const Point& x, double t) { return std::exp(-t) * std::sin(kPi * x.x + kPi / 4.0); };
    mc.u_t = [](const Point& x, double t) { return -std::exp(-t) * std::sin(kPi * x.x + kPi / 4.0); };
    mc.grad_u = [](const Point& x, double t) {
        return Point{kPi * std::exp(-t) * std::cos(kPi * x.x + kPi / 4.0), 0.0};
    };
    mc.hessian_u = [](const Point& x, double t) {
        return std::array<double, 3>{-kPi * kPi * std::exp(-t) * std::sin(kPi * x.x + kPi / 4.0), 0.0, 0.0};
    };
    return mc;
}

ManufacturedCase square_cos(const std::string& name, Formulation formulation, double beta) {
    ManufacturedCase mc;
    mc.name = name;
    mc.formulation = formulation;
    mc.dim = 2;
    mc.coeffs.alpha = [](const BoundaryPoint&) { return 0.5; };
    mc.coeffs.beta = beta;
    mc.exact_u = [](const Point& x, double t) { return std::exp(-t) * std::cos(kPi * x.x) * std::cos(kPi * x.y); };
    mc.u_t = [](const Point& x, double t) { return -std::exp(-t) * std::cos(kPi * x.x) * std::cos(kPi * x.y); };
    mc.grad_u = [](const Point& x, double t) {
        const double e = std::exp(-t);
        return Point{-kPi * e * std::sin(kPi * x.x) * std::cos(kPi * x.y), -kPi * e * std::cos(kPi * x.x) * std::sin(kPi * x.y)};
    };
    mc.hessian_u = [](const Point& x, double t) {
        const double e = std::exp(-t);
        const double cc = std::cos(kPi * x.x) * std::cos(kPi * x.y);
        const double ss = std::sin(kPi * x.x) * std::sin(kPi * x.y);
        return std::array<double, 3>{-kPi * kPi * e * cc, kPi * kPi * e * ss, -kPi * kPi * e * cc};
    };
    return mc;
}

}  // namespace

double ManufacturedCase::normal_flux(const BoundaryPoint& bp, double t) const {
    const Point gu = grad_u(bp.x, t);
    return coeffs.kappa(bp.x) * (bp.normal.x * gu.x + bp.normal.y * gu.y);
}

double ManufacturedCase::laplace_beltrami(const BoundaryPoint& bp, double t) const {
    if (dim == 1) return 0.0;
    // Straight edges: Δ_Γ u = tᵀ H t with the unit tangent t.
    const Point tan{-bp.normal.y, bp.normal.x};
    const auto h = hessian_u(bp.x, t);
    return tan.x * tan.x * h[0] + 2.0 * tan.x * tan.y * h[1] + tan.y * tan.y * h[2];
}

const std::vector<std::string>& preset_catalog() {
    static const std::vector<std::string> ids{"dirichlet_1d_poly", "wentzell_1d_trig", "wentzell_2d_cos", "nonlocal_2d_cos"};
    return ids;
}

std::string preset_description(const std::string& id) {
    if (id == "dirichlet_1d_poly") return "u = exp(-t)(x^2+1) on [0,1], kappa=1, Dirichlet constraint";
    if (id == "wentzell_1d_trig") return "u = exp(-t) sin(pi x + pi/4) on [0,1], kappa=1, alpha=1, beta=0";
    if (id == "wentzell_2d_cos") return "u = exp(-t) cos(pi x) cos(pi y) on [0,1]^2, kappa=1, alpha=1/2, beta=0";
    if (id == "nonlocal_2d_cos") return "u = exp(-t) cos(pi x) cos(pi y) on [0,1]^2, kappa=1, alpha=1/2, beta=1";
    throw InvalidArgument("unknown preset '" + id + "'");
}

ManufacturedCase make_manufactured_case(const std::string& id) {
    ManufacturedCase mc;
    if (id == "dirichlet_1d_poly") mc = dirichlet_1d_poly();
    else if (id == "wentzell_1d_trig") mc = wentzell_1d_trig();
    else if (id == "wentzell_2d_cos") mc = square_cos(id, Formulation::wentzell, 0.0);
    else if (id == "nonlocal_2d_cos") mc = square_cos(id, Formulation::nonlocal, 1.0);
    else throw InvalidArgument("unknown preset '" + id + "'");
    mc.coeffs.kappa = [](const Point&) { return 1.0; };
    mc.coeffs.c_kappa = 1.0;
    mc.grad_kappa = [](const Point&) { return Point{}; };
    derive_data(mc);
    return mc;
}

PdaeSystem build_system(const ManufacturedCase& mc, const BulkMesh& mesh, const std::optional<BoundaryMesh>& multiplier_mesh) {
    switch (mc.formulation) {
        case Formulation::homogeneous_dirichlet: return build_homogeneous_dirichlet(mesh, mc.coeffs, mc.f);
        case Formulation::dirichlet: return build_dirichlet_pdae(mesh, mc.coeffs, mc.f, mc.g);
        case Formulation::wentzell: return build_wentzell_pdae(mesh, multiplier_mesh, mc.coeffs, mc.f, mc.g);
        case Formulation::nonlocal: return build_nonlocal_pdae(mesh, multiplier_mesh, mc.coeffs, mc.f, mc.g);
    }
    throw InvalidArgument("build_system: unknown formulation");
}

BulkMesh preset_mesh(const ManufacturedCase& mc, std::size_t n) {
    return mc.dim == 1 ? build_interval_mesh(n, 0.0, 1.0) : build_square_mesh(n);
}

}  // namespace dynbc
