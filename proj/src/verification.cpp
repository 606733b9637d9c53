#include "dynbc/verification.hpp"

#include "dynbc/error.hpp"
#include "dynbc/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace dynbc {

// ---------------------------------------------------------------------------
// Norms

SurfaceNorms surface_norms(const BoundaryMesh& bmesh) {
    SurfaceNorms s;
    s.mass = assemble_mass_boundary(bmesh).to_dense();
    s.h1 = s.mass + assemble_stiffness_boundary(bmesh).to_dense();
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(s.h1, s.mass);
    if (es.info() != Eigen::Success) throw Error("surface_norms: generalized eigensolve failed");
    const DenseMatrix& V = es.eigenvectors();  // VᵀMV = I
    const Vector mu = es.eigenvalues();
    const DenseMatrix MV = s.mass * V;
    s.half = MV * mu.array().sqrt().matrix().asDiagonal() * MV.transpose();
    s.minus_half = MV * mu.array().rsqrt().matrix().asDiagonal() * MV.transpose();
    return s;
}

DenseMatrix NormMatrices::X_V(Formulation formulation) const {
    const DenseMatrix xb = X_bulk.to_dense();
    if (formulation == Formulation::dirichlet || formulation == Formulation::homogeneous_dirichlet) return xb;
    const DenseMatrix& xs = formulation == Formulation::nonlocal ? trace.h1 : trace.half;
    const auto nb = xb.rows();
    const auto ns = xs.rows();
    DenseMatrix x = DenseMatrix::Zero(nb + ns, nb + ns);
    x.topLeftCorner(nb, nb) = xb;
    x.bottomRightCorner(ns, ns) = xs;
    return x;
}

NormMatrices make_norm_matrices(const PdaeSystem& sys) {
    if (!sys.trace_mesh) throw InvalidArgument("make_norm_matrices: system has no boundary meshes");
    NormMatrices n;
    n.X_bulk = assemble_mass_bulk(*sys.mesh) + assemble_stiffness_bulk(*sys.mesh, [](const Point&) { return 1.0; });
    n.trace = surface_norms(*sys.trace_mesh);
    n.multiplier = surface_norms(*sys.multiplier_mesh);
    return n;
}

double estimate_discrete_infsup(const DenseMatrix& B, const DenseMatrix& X_V, const DenseMatrix& N_Q) {
    if (B.cols() != X_V.rows() || B.rows() != N_Q.rows())
        throw InvalidArgument("estimate_discrete_infsup: dimension mismatch");
    Eigen::LLT<DenseMatrix> xv(X_V);
    if (xv.info() != Eigen::Success) throw InvalidArgument("estimate_discrete_infsup: X_V is not positive definite");
    Eigen::LLT<DenseMatrix> nq(N_Q);
    if (nq.info() != Eigen::Success) throw InvalidArgument("estimate_discrete_infsup: N_Q is not positive definite");
    const DenseMatrix S = B * xv.solve(B.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(0.5 * (S + S.transpose()), N_Q, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("estimate_discrete_infsup: eigensolve failed");
    return std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0));
}

double estimate_discrete_infsup(const PdaeSystem& sys) {
    const NormMatrices n = make_norm_matrices(sys);
    return estimate_discrete_infsup(sys.B.to_dense(), n.X_V(sys.formulation), n.N_Q());
}

double estimate_pairing_infsup(const BulkMesh& mesh, const BoundaryMesh& multiplier_mesh, Formulation formulation) {
    if (formulation != Formulation::wentzell && formulation != Formulation::nonlocal)
        throw InvalidArgument("estimate_pairing_infsup: needs a dynamic boundary formulation");
    const BoundaryMesh trace = extract_boundary_mesh(mesh);
    const SparseMatrix B = assemble_coupling(CouplingSpec{trace, multiplier_mesh}, assemble_trace_matrix(mesh, trace));
    NormMatrices n;
    n.X_bulk = assemble_mass_bulk(mesh) + assemble_stiffness_bulk(mesh, [](const Point&) { return 1.0; });
    n.trace = surface_norms(trace);
    n.multiplier = surface_norms(multiplier_mesh);
    return estimate_discrete_infsup(B.to_dense(), n.X_V(formulation), n.N_Q());
}

GardingResult garding_on_kernel(const PdaeSystem& sys) {
    const DenseMatrix A = sys.A.to_dense();
    const DenseMatrix E = sys.E.to_dense();
    DenseMatrix X;
    if (sys.formulation == Formulation::homogeneous_dirichlet) {
        const DenseMatrix full =
            (assemble_mass_bulk(*sys.mesh) + assemble_stiffness_bulk(*sys.mesh, [](const Point&) { return 1.0; })).to_dense();
        X.resize(sys.n_u, sys.n_u);
        for (std::size_t i = 0; i < sys.n_u; ++i)
            for (std::size_t j = 0; j < sys.n_u; ++j) X(i, j) = full(sys.free_nodes[i], sys.free_nodes[j]);
    } else {
        X = make_norm_matrices(sys).X_V(sys.formulation);
    }

    DenseMatrix Z;
    if (sys.n_lambda == 0) {
        Z = DenseMatrix::Identity(sys.size(), sys.size());
    } else {
        Eigen::JacobiSVD<DenseMatrix> svd(sys.B.to_dense(), Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double tol = 1e-12 * sv(0) * static_cast<double>(sys.size());
        Eigen::Index rank = 0;
        while (rank < sv.size() && sv(rank) > tol) ++rank;
        Z = svd.matrixV().rightCols(sys.size() - rank);
    }
    GardingResult r;
    r.kernel_dim = static_cast<std::size_t>(Z.cols());
    const DenseMatrix Ak = Z.transpose() * A * Z;
    const DenseMatrix Xk = Z.transpose() * X * Z;
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(0.5 * (Ak + Ak.transpose()), 0.5 * (Xk + Xk.transpose()),
                                                             Eigen::EigenvaluesOnly);
    r.c = es.eigenvalues().minCoeff();
    if (r.c <= 0.0) {
        // Shift by the mass: smallest c' with A + c' E ≥ ½ X on the kernel.
        const DenseMatrix Ek = Z.transpose() * E * Z;
        Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> shifted(0.5 * (Ak + Ak.transpose()) - 0.5 * Xk,
                                                                      0.5 * (Ek + Ek.transpose()), Eigen::EigenvaluesOnly);
        r.c_prime = std::max(0.0, -shifted.eigenvalues().minCoeff());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Errors

double l2_error_bulk(const BulkMesh& mesh, const Vector& u, const ScalarField& exact) {
    if (static_cast<std::size_t>(u.size()) != mesh.num_nodes()) throw InvalidArgument("l2_error_bulk: size mismatch");
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto el = mesh.element(e);
        const double m = mesh.element_measure(e);
        if (mesh.dim() == 1) {
            const auto& rule = gauss_line(5);
            const double x0 = mesh.node(el[0]).x;
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const double xi = rule.points[q];
                const double uh = (1.0 - xi) * u[el[0]] + xi * u[el[1]];
                const double d = uh - exact({x0 + xi * m, 0.0});
                sum += rule.weights[q] * m * d * d;
            }
        } else {
            const auto& rule = triangle_degree5();
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const auto& w = rule.points[q];
                Point x;
                double uh = 0.0;
                for (int k = 0; k < 3; ++k) {
                    x.x += w[k] * mesh.node(el[k]).x;
                    x.y += w[k] * mesh.node(el[k]).y;
                    uh += w[k] * u[el[k]];
                }
                const double d = uh - exact(x);
                sum += rule.weights[q] * m * d * d;
            }
        }
    }
    return std::sqrt(sum);
}

double l2_error_boundary(const BoundaryMesh& bmesh, const Vector& p, const BoundaryField& exact) {
    if (static_cast<std::size_t>(p.size()) != bmesh.num_vertices()) throw InvalidArgument("l2_error_boundary: size mismatch");
    double sum = 0.0;
    if (bmesh.dim() == 1) {
        for (std::size_t j = 0; j < 2; ++j) {
            const double d = p[j] - exact(bmesh.vertex_point(j));
            sum += d * d;
        }
        return std::sqrt(sum);
    }
    const auto& rule = gauss_line(5);
    for (std::size_t k = 0; k < bmesh.num_segments(); ++k) {
        const auto [i, j] = bmesh.segment(k);
        const double h = bmesh.segment_length(k);
        const double s0 = bmesh.arc_coords()[k];
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double xi = rule.points[q];
            const double d = (1.0 - xi) * p[i] + xi * p[j] - exact(bmesh.at(s0 + xi * h));
            sum += rule.weights[q] * h * d * d;
        }
    }
    return std::sqrt(sum);
}

MultiplierComparison compare_multiplier_to_flux(const ManufacturedCase& mc, const PdaeSystem& sys, const Trajectory& traj) {
    if (sys.n_lambda == 0 || traj.multipliers.size() < 2) throw InvalidArgument("compare_multiplier_to_flux: no multiplier available");
    const double t = traj.times.back();
    const Vector& lambda = traj.multipliers.back();
    const BoundaryMesh& qm = *sys.multiplier_mesh;
    const Vector flux = interpolate(qm, [&](const BoundaryPoint& bp) { return mc.normal_flux(bp, t); });
    const SparseMatrix Mq = assemble_mass_boundary(qm);
    const auto norm = [&](const Vector& v) { return std::sqrt(std::max(0.0, v.dot(Mq * v))); };
    MultiplierComparison c;
    c.error_plus = norm(lambda - flux);
    c.error_minus = norm(-lambda - flux);
    c.sign = c.error_plus <= c.error_minus ? 1 : -1;
    c.error = std::min(c.error_plus, c.error_minus);
    return c;
}

// ---------------------------------------------------------------------------
// Studies

double eoc(double coarse_error, double fine_error, double ratio) {
    return std::log(coarse_error / fine_error) / std::log(ratio);
}

double study_tau(const StudyOptions& opt, double h) {
    const double raw = opt.tau_coefficient * std::pow(h, opt.tau_power);
    const double steps = std::max(1.0, std::ceil(opt.t_end / raw - 1e-9));
    return opt.t_end / steps;
}

std::optional<BoundaryMesh> make_multiplier_mesh(const BulkMesh& mesh, const MultiplierChoice& choice) {
    if (choice.kind == MultiplierChoice::Kind::matching) return std::nullopt;
    if (mesh.dim() != 2) throw InvalidArgument("independent multiplier meshes require the square geometry");
    const BoundaryMesh trace = extract_boundary_mesh(mesh);
    const auto m = static_cast<std::size_t>(std::llround(choice.ratio * static_cast<double>(trace.num_segments())));
    const double offset = choice.offset_fraction * trace.length() / static_cast<double>(m);
    return build_independent_boundary_mesh(trace, m, offset);
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

std::string EocTable::eoc_csv() const {
    std::ostringstream os;
    os << "n_coarse,n_fine,h_coarse,h_fine,err_u_coarse,err_u_fine,eoc_u,err_p_coarse,err_p_fine,eoc_p,err_lambda_coarse,err_lambda_fine,eoc_lambda\n";
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        const auto& a = levels[k];
        const auto& b = levels[k + 1];
        os << a.n << ',' << b.n << ',' << fmt(a.h) << ',' << fmt(b.h) << ',' << fmt(a.err_u) << ',' << fmt(b.err_u) << ','
           << fmt(eoc_u[k]) << ',' << fmt(a.err_p) << ',' << fmt(b.err_p) << ',' << fmt(eoc_p[k]) << ','
           << fmt(a.multiplier.error) << ',' << fmt(b.multiplier.error) << ',' << fmt(eoc_lambda[k]) << '\n';
    }
    return os.str();
}

std::string EocTable::levels_csv() const {
    std::ostringstream os;
    os << "n,h,tau,steps,err_u,err_p,err_lambda,lambda_sign,max_constraint_residual\n";
    for (const auto& l : levels)
        os << l.n << ',' << fmt(l.h) << ',' << fmt(l.tau) << ',' << l.steps << ',' << fmt(l.err_u) << ',' << fmt(l.err_p) << ','
           << fmt(l.multiplier.error) << ',' << l.multiplier.sign << ',' << fmt(l.max_constraint_residual) << '\n';
    return os.str();
}

std::string EocTable::to_json() const {
    nlohmann::ordered_json j;
    j["preset"] = preset;
    j["formulation"] = formulation;
    j["scheme"] = scheme;
    j["levels"] = nlohmann::ordered_json::array();
    for (const auto& l : levels)
        j["levels"].push_back({{"n", l.n},
                               {"h", l.h},
                               {"tau", l.tau},
                               {"steps", l.steps},
                               {"err_u", l.err_u},
                               {"err_p", l.err_p},
                               {"err_lambda", l.multiplier.error},
                               {"lambda_sign", l.multiplier.sign},
                               {"max_constraint_residual", l.max_constraint_residual}});
    j["eoc_u"] = eoc_u;
    j["eoc_p"] = eoc_p;
    j["eoc_lambda"] = eoc_lambda;
    j["monotone"] = monotone;
    j["warnings"] = warnings;
    return j.dump(2);
}

EocTable run_convergence_study(const ManufacturedCase& mc, const std::vector<std::size_t>& levels, const StudyOptions& opt) {
    if (levels.size() < 3) throw InvalidArgument("run_convergence_study: at least three mesh levels are required");
    EocTable table;
    table.preset = mc.name;
    table.formulation = to_string(mc.formulation);
    table.scheme = to_string(opt.scheme);
    for (std::size_t n : levels) {
        const BulkMesh mesh = preset_mesh(mc, n);
        const PdaeSystem sys = build_system(mc, mesh, make_multiplier_mesh(mesh, opt.multiplier));
        const InitialState init = consistent_init(sys, interpolate(mesh, mc.u0()));
        StepperConfig cfg{opt.scheme, study_tau(opt, 1.0 / static_cast<double>(n)), opt.t_end};
        const Trajectory traj = integrate(sys, init, cfg);

        LevelResult r;
        r.n = n;
        r.h = 1.0 / static_cast<double>(n);
        r.tau = cfg.tau;
        r.steps = cfg.num_steps();
        const double t = traj.times.back();
        const Vector& x = traj.states.back();
        r.err_u = l2_error_bulk(mesh, sys.bulk_values(x), [&](const Point& p) { return mc.exact_u(p, t); });
        if (sys.n_p > 0)
            r.err_p = l2_error_boundary(*sys.trace_mesh, sys.boundary_values(x), [&](const BoundaryPoint& bp) { return mc.exact_p(bp, t); });
        for (double res : traj.constraint_residual) r.max_constraint_residual = std::max(r.max_constraint_residual, res);
        if (sys.n_lambda > 0) r.multiplier = compare_multiplier_to_flux(mc, sys, traj);
        table.levels.push_back(r);
    }
    for (std::size_t k = 0; k + 1 < table.levels.size(); ++k) {
        const auto& a = table.levels[k];
        const auto& b = table.levels[k + 1];
        const double ratio = a.h / b.h;
        table.eoc_u.push_back(eoc(a.err_u, b.err_u, ratio));
        table.eoc_p.push_back(a.err_p > 0.0 && b.err_p > 0.0 ? eoc(a.err_p, b.err_p, ratio) : 0.0);
        table.eoc_lambda.push_back(a.multiplier.error > 0.0 && b.multiplier.error > 0.0
                                       ? eoc(a.multiplier.error, b.multiplier.error, ratio)
                                       : 0.0);
        if (b.err_u > a.err_u || b.err_p > a.err_p) {
            table.monotone = false;
            table.warnings.push_back("non-monotone error sequence between n=" + std::to_string(a.n) + " and n=" + std::to_string(b.n));
        }
    }
    return table;
}

TemporalStudy run_temporal_study(const ManufacturedCase& mc, std::size_t n, const std::vector<double>& taus, Scheme scheme,
                                 double t_end, double tau_ref) {
    const BulkMesh mesh = preset_mesh(mc, n);
    const PdaeSystem sys = build_system(mc, mesh);
    const InitialState init = consistent_init(sys, interpolate(mesh, mc.u0()));
    const Vector ref = integrate(sys, init, {Scheme::radau_iia_2, tau_ref, t_end}).states.back();
    TemporalStudy study;
    study.taus = taus;
    for (double tau : taus) {
        const Vector x = integrate(sys, init, {scheme, tau, t_end}).states.back();
        const Vector d = x - ref;
        study.errors.push_back(std::sqrt(d.dot(sys.E * d)));
    }
    for (std::size_t k = 0; k + 1 < taus.size(); ++k)
        study.eocs.push_back(eoc(study.errors[k], study.errors[k + 1], taus[k] / taus[k + 1]));
    return study;
}

namespace {

SparseMatrix kernel_basis(const PdaeSystem& sys) {
    const SparseMatrix I = SparseMatrix::identity(sys.n_u);
    return block_matrix({{&I}, {&sys.trace}}, {sys.n_u, sys.n_p}, {sys.n_u});
}

}  // namespace

PdaeSystem kernel_system(const PdaeSystem& sys) {
    if (sys.formulation != Formulation::wentzell && sys.formulation != Formulation::nonlocal)
        throw InvalidArgument("kernel_system: only defined for the coupled formulations");
    if (!sys.matching()) throw InvalidArgument("kernel_system: reduction to ker B requires matching meshes");
    const SparseMatrix P = kernel_basis(sys);
    const SparseMatrix Pt = P.transpose();
    PdaeSystem red;
    red.formulation = sys.formulation;
    red.E = Pt * sys.E * P;
    red.A = Pt * sys.A * P;
    red.B = SparseMatrix(0, sys.n_u);
    red.n_u = sys.n_u;
    red.mesh = sys.mesh;
    red.free_nodes = sys.free_nodes;
    red.load = [Pt, load = sys.load](double t) -> Vector { return Pt * load(t); };
    red.constraint_data = [](double) { return Vector(); };
    return red;
}

double compare_with_kernel_formulation(const PdaeSystem& sys, const InitialState& init, const StepperConfig& cfg) {
    const PdaeSystem red = kernel_system(sys);
    const SparseMatrix P = kernel_basis(sys);
    const Trajectory full = integrate(sys, init, cfg);
    InitialState rinit;
    rinit.u0 = init.u0;
    const Trajectory reduced = integrate(red, rinit, cfg);
    double dev = 0.0;
    for (std::size_t k = 0; k < full.states.size(); ++k) {
        const Vector d = full.states[k] - P * reduced.states[k];
        dev = std::max(dev, std::sqrt(std::max(0.0, d.dot(sys.E * d))));
    }
    return dev;
}

double compare_with_kernel_formulation(const ManufacturedCase& mc, const BulkMesh& mesh, const StepperConfig& cfg) {
    const PdaeSystem sys = build_system(mc, mesh);
    return compare_with_kernel_formulation(sys, consistent_init(sys, interpolate(mesh, mc.u0())), cfg);
}

// ---------------------------------------------------------------------------
// Strong-form residual by extrapolated finite differences

namespace {

/// Ridders' extrapolation of a central difference quotient `dq(h)` of order h².
double ridders(const std::function<double(double)>& dq, double h0) {
    constexpr int ntab = 10;
    constexpr double con = 1.4, con2 = con * con;
    double a[ntab][ntab];
    double best = 0.0, err = 1e300;
    double h = h0;
    a[0][0] = dq(h);
    best = a[0][0];
    for (int i = 1; i < ntab; ++i) {
        h /= con;
        a[0][i] = dq(h);
        double fac = con2;
        for (int j = 1; j <= i; ++j) {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= con2;
            const double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
            if (e <= err) {
                err = e;
                best = a[j][i];
            }
        }
        if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * err) break;
    }
    return best;
}

double d1(const std::function<double(double)>& fn, double x0) {
    return ridders([&](double h) { return (fn(x0 + h) - fn(x0 - h)) / (2.0 * h); }, 0.1);
}

double d2(const std::function<double(double)>& fn, double x0) {
    return ridders([&](double h) { return (fn(x0 + h) - 2.0 * fn(x0) + fn(x0 - h)) / (h * h); }, 0.2);
}

}  // namespace

double strong_form_residual(const ManufacturedCase& mc, std::size_t samples, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto u = mc.exact_u;
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = unit(rng);
        // Bulk point.
        const Point x{unit(rng), mc.dim == 2 ? unit(rng) : 0.0};
        const double ut = d1([&](double s) { return u(x, s); }, t);
        // κ ∇u then divergence, all by differences.
        const auto flux_x = [&](double xs) {
            const Point p{xs, x.y};
            return mc.coeffs.kappa(p) * d1([&](double z) { return u({z, x.y}, t); }, xs);
        };
        double div = d1(flux_x, x.x);
        if (mc.dim == 2) {
            const auto flux_y = [&](double ys) {
                const Point p{x.x, ys};
                return mc.coeffs.kappa(p) * d1([&](double z) { return u({x.x, z}, t); }, ys);
            };
            div += d1(flux_y, x.y);
        }
        worst = std::max(worst, std::abs(ut - div - mc.f(x, t)));

        // Boundary point: a random location on Γ.
        BoundaryPoint bp;
        if (mc.dim == 1) {
            const bool right = unit(rng) < 0.5;
            bp.x = {right ? 1.0 : 0.0, 0.0};
            bp.s = bp.x.x;
            bp.normal = {right ? 1.0 : -1.0, 0.0};
        } else {
            const double s = 4.0 * unit(rng);
            const int edge = std::min(3, static_cast<int>(s));
            const double r = s - edge;
            const Point pts[4] = {{r, 0.0}, {1.0, r}, {1.0 - r, 1.0}, {0.0, 1.0 - r}};
            const Point normals[4] = {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
            bp.x = pts[edge];
            bp.s = s;
            bp.normal = normals[edge];
        }
        double residual;
        if (mc.formulation == Formulation::dirichlet || mc.formulation == Formulation::homogeneous_dirichlet) {
            residual = u(bp.x, t) - mc.g(bp, t);
        } else {
            const Point tan{-bp.normal.y, bp.normal.x};
            const auto along = [&](double h) { return u({bp.x.x + h * tan.x, bp.x.y + h * tan.y}, t); };
            const auto across = [&](double h) { return u({bp.x.x + h * bp.normal.x, bp.x.y + h * bp.normal.y}, t); };
            const double pt = d1([&](double s) { return u(bp.x, s); }, t);
            const double lb = mc.dim == 2 ? d2(along, 0.0) : 0.0;
            const double dn = mc.coeffs.kappa(bp.x) * d1(across, 0.0);
            residual = pt - mc.coeffs.beta * lb + dn + mc.coeffs.alpha(bp) * u(bp.x, t) - mc.g(bp, t);
        }
        worst = std::max(worst, std::abs(residual));
    }
    return worst;
}

}  // namespace dynbc
