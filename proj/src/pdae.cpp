#include "dynbc/pdae.hpp"

#include "dynbc/error.hpp"
#include "dynbc/saddle.hpp"

#include <json.hpp>

#include <algorithm>

namespace dynbc {

std::string to_string(Formulation f) {
    switch (f) {
        case Formulation::homogeneous_dirichlet: return "homogeneous_dirichlet";
        case Formulation::dirichlet: return "dirichlet_pdae";
        case Formulation::wentzell: return "wentzell";
        case Formulation::nonlocal: return "nonlocal";
    }
    return "unknown";
}

Formulation formulation_from_string(const std::string& name) {
    if (name == "homogeneous_dirichlet") return Formulation::homogeneous_dirichlet;
    if (name == "dirichlet_pdae" || name == "dirichlet") return Formulation::dirichlet;
    if (name == "wentzell") return Formulation::wentzell;
    if (name == "nonlocal") return Formulation::nonlocal;
    throw InvalidArgument("unknown formulation '" + name + "'");
}

bool PdaeSystem::matching() const {
    return trace_mesh && multiplier_mesh && trace_mesh->same_partition(*multiplier_mesh);
}

Vector PdaeSystem::bulk_values(const Vector& x) const {
    Vector u = Vector::Zero(mesh->num_nodes());
    for (std::size_t i = 0; i < free_nodes.size(); ++i) u[free_nodes[i]] = x[i];
    return u;
}

double PdaeSystem::constraint_residual(const Vector& x, double t) const {
    if (n_lambda == 0) return 0.0;
    return (B * x - constraint_data(t)).norm();
}

void PdaeSystem::validate_structure() const {
    const std::size_t n = size();
    if (E.rows() != n || E.cols() != n) throw InvalidArgument("PdaeSystem: E must be square of size n_u + n_p");
    if (A.rows() != n || A.cols() != n) throw InvalidArgument("PdaeSystem: A must be square of size n_u + n_p");
    if (B.rows() != n_lambda || (n_lambda > 0 && B.cols() != n))
        throw InvalidArgument("PdaeSystem: B must be n_lambda x (n_u + n_p)");
    if (!E.is_symmetric(1e-14)) throw InvalidArgument("PdaeSystem: E is not symmetric");
    if (!A.is_symmetric(1e-14)) throw InvalidArgument("PdaeSystem: A is not symmetric");
    if (!load || static_cast<std::size_t>(load(0.0).size()) != n) throw InvalidArgument("PdaeSystem: load has wrong size");
    if (!constraint_data || static_cast<std::size_t>(constraint_data(0.0).size()) != n_lambda)
        throw InvalidArgument("PdaeSystem: constraint data has wrong size");
}

std::string PdaeSystem::summary_json(std::optional<double> consistency_residual) const {
    nlohmann::ordered_json j;
    j["formulation"] = to_string(formulation);
    j["n_u"] = n_u;
    j["n_p"] = n_p;
    j["n_lambda"] = n_lambda;
    j["nnz"] = {{"E", E.nnz()}, {"A", A.nnz()}, {"B", B.nnz()}};
    j["matching"] = matching();
    if (consistency_residual) j["consistency_residual"] = *consistency_residual;
    return j.dump(2);
}

namespace {

void require_full_row_rank(const SparseMatrix& B) {
    if (B.rows() > 0 && row_rank(B) < B.rows())
        throw SingularSystemError("B", "constraint matrix B does not have full row rank");
}

PdaeSystem build_coupled(Formulation formulation, const BulkMesh& mesh, const std::optional<BoundaryMesh>& mult,
                         const CoefficientSet& coeffs, BulkData f, BoundaryData g) {
    coeffs.validate();
    auto bulk = std::make_shared<const BulkMesh>(mesh);
    auto trace = std::make_shared<const BoundaryMesh>(extract_boundary_mesh(mesh));
    auto multiplier = std::make_shared<const BoundaryMesh>(mult ? *mult : *trace);

    PdaeSystem sys;
    sys.formulation = formulation;
    sys.mesh = bulk;
    sys.trace_mesh = trace;
    sys.multiplier_mesh = multiplier;
    sys.trace = assemble_trace_matrix(mesh, *trace);
    sys.free_nodes.resize(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) sys.free_nodes[i] = static_cast<int>(i);

    const SparseMatrix M = assemble_mass_bulk(mesh);
    const SparseMatrix K = assemble_stiffness_bulk(mesh, coeffs.kappa);
    const SparseMatrix Mg = assemble_mass_boundary(*trace);
    SparseMatrix Ag = assemble_alpha_boundary(*trace, coeffs.alpha);
    if (formulation == Formulation::nonlocal) Ag = Ag + assemble_stiffness_boundary(*trace) * coeffs.beta;

    sys.E = block_diagonal(M, Mg);
    sys.A = block_diagonal(K, Ag);
    sys.B = assemble_coupling({*trace, *multiplier}, sys.trace);
    sys.n_u = mesh.num_nodes();
    sys.n_p = trace->num_vertices();
    sys.n_lambda = multiplier->num_vertices();
    require_full_row_rank(sys.B);

    const std::size_t nu = sys.n_u, np = sys.n_p, nl = sys.n_lambda;
    sys.load = [bulk, trace, f = std::move(f), g = std::move(g), nu, np](double t) {
        Vector v(nu + np);
        v.head(nu) = f ? assemble_load(*bulk, f, t) : Vector::Zero(nu);
        v.tail(np) = g ? assemble_load(*trace, g, t) : Vector::Zero(np);
        return v;
    };
    sys.constraint_data = [nl](double) { return Vector::Zero(nl); };
    sys.validate_structure();
    return sys;
}

}  // namespace

PdaeSystem build_homogeneous_dirichlet(const BulkMesh& mesh, const CoefficientSet& coeffs, BulkData f) {
    coeffs.validate();
    auto bulk = std::make_shared<const BulkMesh>(mesh);
    PdaeSystem sys;
    sys.formulation = Formulation::homogeneous_dirichlet;
    sys.mesh = bulk;
    const auto& bnodes = mesh.boundary_node_ids();
    std::vector<int> index(mesh.num_nodes(), -1);
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
        if (!std::binary_search(bnodes.begin(), bnodes.end(), static_cast<int>(i))) {
            index[i] = static_cast<int>(sys.free_nodes.size());
            sys.free_nodes.push_back(static_cast<int>(i));
        }
    const std::size_t ni = sys.free_nodes.size();
    std::vector<Triplet> r;
    for (std::size_t k = 0; k < ni; ++k) r.push_back({static_cast<int>(k), sys.free_nodes[k], 1.0});
    const SparseMatrix R = SparseMatrix::from_triplets(ni, mesh.num_nodes(), std::move(r));
    const SparseMatrix Rt = R.transpose();

    sys.E = R * assemble_mass_bulk(mesh) * Rt;
    sys.A = R * assemble_stiffness_bulk(mesh, coeffs.kappa) * Rt;
    sys.B = SparseMatrix(0, ni);
    sys.n_u = ni;
    sys.load = [bulk, R, f = std::move(f), ni](double t) -> Vector {
        if (!f) return Vector::Zero(ni);
        return R * assemble_load(*bulk, f, t);
    };
    sys.constraint_data = [](double) { return Vector(); };
    sys.validate_structure();
    return sys;
}

PdaeSystem build_dirichlet_pdae(const BulkMesh& mesh, const CoefficientSet& coeffs, BulkData f, BoundaryData g) {
    coeffs.validate();
    auto bulk = std::make_shared<const BulkMesh>(mesh);
    auto trace = std::make_shared<const BoundaryMesh>(extract_boundary_mesh(mesh));
    PdaeSystem sys;
    sys.formulation = Formulation::dirichlet;
    sys.mesh = bulk;
    sys.trace_mesh = trace;
    sys.multiplier_mesh = trace;
    sys.trace = assemble_trace_matrix(mesh, *trace);
    sys.free_nodes.resize(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) sys.free_nodes[i] = static_cast<int>(i);

    const SparseMatrix Mg = assemble_mass_boundary(*trace);
    sys.E = assemble_mass_bulk(mesh);
    sys.A = assemble_stiffness_bulk(mesh, coeffs.kappa);
    sys.B = Mg * sys.trace;
    sys.n_u = mesh.num_nodes();
    sys.n_lambda = trace->num_vertices();
    require_full_row_rank(sys.B);

    // Nodal Dirichlet data; evaluated eagerly so a bad g fails at build time.
    const auto nodal_g = [trace, g](double t) {
        Vector v(trace->num_vertices());
        for (std::size_t j = 0; j < trace->num_vertices(); ++j) {
            v[j] = g(trace->vertex_point(j), t);
            if (!std::isfinite(v[j]))
                throw InvalidArgument("build_dirichlet_pdae: g is not evaluable at boundary node " + std::to_string(j));
        }
        return v;
    };
    if (!g) throw InvalidArgument("build_dirichlet_pdae: boundary data g is required");
    (void)nodal_g(0.0);

    const std::size_t nu = sys.n_u;
    sys.load = [bulk, f = std::move(f), nu](double t) -> Vector {
        if (!f) return Vector::Zero(nu);
        return assemble_load(*bulk, f, t);
    };
    sys.constraint_data = [Mg, nodal_g](double t) -> Vector { return Mg * nodal_g(t); };
    sys.validate_structure();
    return sys;
}

PdaeSystem build_wentzell_pdae(const BulkMesh& mesh, const std::optional<BoundaryMesh>& multiplier_mesh,
                               const CoefficientSet& coeffs, BulkData f, BoundaryData g) {
    if (coeffs.beta != 0.0) throw InvalidArgument("build_wentzell_pdae: requires beta = 0 (use build_nonlocal_pdae)");
    return build_coupled(Formulation::wentzell, mesh, multiplier_mesh, coeffs, std::move(f), std::move(g));
}

PdaeSystem build_nonlocal_pdae(const BulkMesh& mesh, const std::optional<BoundaryMesh>& multiplier_mesh,
                               const CoefficientSet& coeffs, BulkData f, BoundaryData g) {
    if (!(coeffs.beta > 0.0)) throw InvalidArgument("build_nonlocal_pdae: requires beta > 0");
    if (mesh.dim() != 2) throw InvalidArgument("build_nonlocal_pdae: beta>0 requires square geometry (no surface diffusion on points)");
    return build_coupled(Formulation::nonlocal, mesh, multiplier_mesh, coeffs, std::move(f), std::move(g));
}

Vector InitialState::stacked() const {
    Vector x(u0.size() + p0.size());
    x << u0, p0;
    return x;
}

InitialState consistent_init(const PdaeSystem& sys, const Vector& u0_raw, const std::optional<Vector>& p0_raw, double tol) {
    InitialState init;
    if (static_cast<std::size_t>(u0_raw.size()) == sys.mesh->num_nodes() && sys.n_u != sys.mesh->num_nodes()) {
        init.u0.resize(sys.n_u);
        for (std::size_t i = 0; i < sys.n_u; ++i) init.u0[i] = u0_raw[sys.free_nodes[i]];
    } else if (static_cast<std::size_t>(u0_raw.size()) == sys.n_u) {
        init.u0 = u0_raw;
    } else {
        throw InvalidArgument("consistent_init: u0 has wrong size");
    }
    if (sys.n_p > 0) {
        if (p0_raw) {
            if (static_cast<std::size_t>(p0_raw->size()) != sys.n_p) throw InvalidArgument("consistent_init: p0 has wrong size");
            init.p0 = *p0_raw;
        } else {
            init.p0 = sys.trace * init.u0;
        }
    } else {
        init.p0 = Vector();
    }

    Vector x = init.stacked();
    init.consistency_residual = sys.constraint_residual(x, 0.0);
    const bool project = sys.n_lambda > 0 && ((sys.n_p > 0 && p0_raw) || init.consistency_residual > tol);
    if (project) {
        const SaddleOperator op{sys.E, sys.B};
        Vector rhs(sys.size() + sys.n_lambda);
        rhs << sys.E * x, sys.constraint_data(0.0);
        const Vector z = solve(op, rhs);
        x = z.head(sys.size());
        init.u0 = x.head(sys.n_u);
        init.p0 = x.segment(sys.n_u, sys.n_p);
        init.consistency_residual = sys.constraint_residual(x, 0.0);
        init.projected = true;
    }
    return init;
}

}  // namespace dynbc
