#include "dynbc/assembly.hpp"

#include "dynbc/error.hpp"
#include "dynbc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dynbc {

namespace {

constexpr int kLinePoints = 5;

Point bary(const BulkMesh& mesh, std::span<const int> el, const std::array<double, 3>& w) {
    Point p;
    for (int k = 0; k < 3; ++k) {
        p.x += w[k] * mesh.node(el[k]).x;
        p.y += w[k] * mesh.node(el[k]).y;
    }
    return p;
}

/// Gradients of the three barycentric functions on a triangle.
std::array<Point, 3> triangle_gradients(const BulkMesh& mesh, std::span<const int> el, double area) {
    std::array<Point, 3> g;
    for (int k = 0; k < 3; ++k) {
        const Point& b = mesh.node(el[(k + 1) % 3]);
        const Point& c = mesh.node(el[(k + 2) % 3]);
        g[k] = {(b.y - c.y) / (2.0 * area), (c.x - b.x) / (2.0 * area)};
    }
    return g;
}

void check_kappa(double value, const Point& x) {
    if (!(value > 0.0))
        throw InvalidArgument("assemble_stiffness_bulk: kappa must be positive, got " + std::to_string(value) +
                              " at (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ")");
}

}  // namespace

void CoefficientSet::validate() const {
    if (!(c_kappa > 0.0)) throw InvalidArgument("CoefficientSet: c_kappa must be positive");
    if (!(beta >= 0.0)) throw InvalidArgument("CoefficientSet: beta must be nonnegative");
    if (!kappa || !alpha) throw InvalidArgument("CoefficientSet: kappa and alpha must be set");
}

SparseMatrix assemble_mass_bulk(const BulkMesh& mesh) {
    std::vector<Triplet> t;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto el = mesh.element(e);
        const double m = mesh.element_measure(e);
        const int nl = mesh.dim() + 1;
        const double diag = mesh.dim() == 1 ? m / 3.0 : m / 6.0;
        const double off = mesh.dim() == 1 ? m / 6.0 : m / 12.0;
        for (int a = 0; a < nl; ++a)
            for (int b = 0; b < nl; ++b) t.push_back({el[a], el[b], a == b ? diag : off});
    }
    return SparseMatrix::from_triplets(mesh.num_nodes(), mesh.num_nodes(), std::move(t));
}

SparseMatrix assemble_stiffness_bulk(const BulkMesh& mesh, const ScalarField& kappa) {
    std::vector<Triplet> t;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto el = mesh.element(e);
        const double m = mesh.element_measure(e);
        if (mesh.dim() == 1) {
            const double x0 = mesh.node(el[0]).x;
            const auto& rule = gauss_line(3);
            double integral = 0.0;
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const Point x{x0 + rule.points[q] * m, 0.0};
                const double k = kappa(x);
                check_kappa(k, x);
                integral += rule.weights[q] * k * m;
            }
            const double v = integral / (m * m);
            t.push_back({el[0], el[0], v});
            t.push_back({el[0], el[1], -v});
            t.push_back({el[1], el[0], -v});
            t.push_back({el[1], el[1], v});
        } else {
            const auto& rule = triangle_degree5();
            double integral = 0.0;
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const Point x = bary(mesh, el, rule.points[q]);
                const double k = kappa(x);
                check_kappa(k, x);
                integral += rule.weights[q] * k * m;
            }
            const auto g = triangle_gradients(mesh, el, m);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    t.push_back({el[a], el[b], integral * (g[a].x * g[b].x + g[a].y * g[b].y)});
        }
    }
    return SparseMatrix::from_triplets(mesh.num_nodes(), mesh.num_nodes(), std::move(t));
}

SparseMatrix assemble_mass_boundary(const BoundaryMesh& bmesh) {
    if (bmesh.dim() == 1) return SparseMatrix::identity(2);
    std::vector<Triplet> t;
    for (std::size_t k = 0; k < bmesh.num_segments(); ++k) {
        const auto [i, j] = bmesh.segment(k);
        const double h = bmesh.segment_length(k);
        const int a = static_cast<int>(i), b = static_cast<int>(j);
        t.push_back({a, a, h / 3.0});
        t.push_back({a, b, h / 6.0});
        t.push_back({b, a, h / 6.0});
        t.push_back({b, b, h / 3.0});
    }
    const auto n = bmesh.num_vertices();
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix assemble_stiffness_boundary(const BoundaryMesh& bmesh) {
    if (bmesh.dim() == 1) return SparseMatrix(2, 2);
    std::vector<Triplet> t;
    for (std::size_t k = 0; k < bmesh.num_segments(); ++k) {
        const auto [i, j] = bmesh.segment(k);
        const double v = 1.0 / bmesh.segment_length(k);
        const int a = static_cast<int>(i), b = static_cast<int>(j);
        t.push_back({a, a, v});
        t.push_back({a, b, -v});
        t.push_back({b, a, -v});
        t.push_back({b, b, v});
    }
    const auto n = bmesh.num_vertices();
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix assemble_alpha_boundary(const BoundaryMesh& bmesh, const BoundaryField& alpha) {
    std::vector<Triplet> t;
    if (bmesh.dim() == 1) {
        for (int j = 0; j < 2; ++j) t.push_back({j, j, alpha(bmesh.vertex_point(j))});
        return SparseMatrix::from_triplets(2, 2, std::move(t));
    }
    const auto& rule = gauss_line(kLinePoints);
    for (std::size_t k = 0; k < bmesh.num_segments(); ++k) {
        const auto [i, j] = bmesh.segment(k);
        const double h = bmesh.segment_length(k);
        const double s0 = bmesh.arc_coords()[k];
        double m00 = 0.0, m01 = 0.0, m11 = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double xi = rule.points[q];
            const double a = alpha(bmesh.at(s0 + xi * h)) * rule.weights[q] * h;
            m00 += a * (1.0 - xi) * (1.0 - xi);
            m01 += a * (1.0 - xi) * xi;
            m11 += a * xi * xi;
        }
        const int a = static_cast<int>(i), b = static_cast<int>(j);
        t.push_back({a, a, m00});
        t.push_back({a, b, m01});
        t.push_back({b, a, m01});
        t.push_back({b, b, m11});
    }
    const auto n = bmesh.num_vertices();
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix assemble_trace_matrix(const BulkMesh& mesh, const BoundaryMesh& bmesh) {
    const auto& ids = bmesh.bulk_node_ids();
    if (!ids || bmesh.dim() != mesh.dim())
        throw InvalidArgument("assemble_trace_matrix: boundary mesh is not induced by the bulk mesh");
    std::vector<Triplet> t;
    for (std::size_t j = 0; j < ids->size(); ++j) {
        const int node = (*ids)[j];
        if (node < 0 || static_cast<std::size_t>(node) >= mesh.num_nodes())
            throw InvalidArgument("assemble_trace_matrix: boundary mesh is not induced by the bulk mesh");
        const Point p = bmesh.vertex_point(j).x;
        const Point& q = mesh.node(node);
        if (std::hypot(p.x - q.x, p.y - q.y) > 1e-12)
            throw InvalidArgument("assemble_trace_matrix: boundary mesh is not induced by the bulk mesh");
        if (!std::binary_search(mesh.boundary_node_ids().begin(), mesh.boundary_node_ids().end(), node))
            throw InvalidArgument("assemble_trace_matrix: trace vertex is not a boundary node");
        t.push_back({static_cast<int>(j), node, 1.0});
    }
    return SparseMatrix::from_triplets(ids->size(), mesh.num_nodes(), std::move(t));
}

SparseMatrix assemble_cross_mass(const BoundaryMesh& rows, const BoundaryMesh& cols) {
    if (rows.dim() != cols.dim()) throw InvalidArgument("assemble_cross_mass: meshes of different dimension");
    if (rows.dim() == 1) {
        if (rows.num_vertices() != 2 || cols.num_vertices() != 2)
            throw InvalidArgument("assemble_cross_mass: 1D boundary must have two points");
        return SparseMatrix::identity(2);
    }
    const double L = rows.length();
    if (std::abs(L - cols.length()) > 1e-12 * L)
        throw InvalidArgument("assemble_cross_mass: meshes parametrize curves of different length");

    std::vector<double> breaks;
    for (double s : rows.arc_coords()) breaks.push_back(std::fmod(s, L));
    for (double s : cols.arc_coords()) breaks.push_back(std::fmod(s, L));
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> merged;
    for (double s : breaks)
        if (merged.empty() || s - merged.back() > 1e-14 * L) merged.push_back(s);
    if (merged.size() > 1 && merged.front() + L - merged.back() <= 1e-14 * L) merged.pop_back();

    // Both hat bases are linear on every merged piece; two Gauss points are exact.
    const auto& rule = gauss_line(2);
    std::vector<Triplet> t;
    for (std::size_t k = 0; k < merged.size(); ++k) {
        const double a = merged[k];
        const double b = k + 1 < merged.size() ? merged[k + 1] : merged.front() + L;
        const double h = b - a;
        const double mid = 0.5 * (a + b);
        const auto [rs, rloc] = rows.locate(mid);
        const auto [cs, cloc] = cols.locate(mid);
        const auto rseg = rows.segment(rs);
        const auto cseg = cols.segment(cs);
        const double r0 = rows.arc_coords()[rs];
        const double c0 = cols.arc_coords()[cs];
        const double rh = rows.segment_length(rs);
        const double ch = cols.segment_length(cs);
        // Arc coordinate of `mid` relative to the segment starts, unwrapped.
        const double rmid = r0 + rloc * rh;
        const double cmid = c0 + cloc * ch;
        double v[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double ds = (rule.points[q] - 0.5) * h;
            const double xr = (rmid + ds - r0) / rh;
            const double xc = (cmid + ds - c0) / ch;
            const double phr[2] = {1.0 - xr, xr};
            const double phc[2] = {1.0 - xc, xc};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) v[i][j] += rule.weights[q] * h * phr[i] * phc[j];
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                t.push_back({static_cast<int>(rseg[i]), static_cast<int>(cseg[j]), v[i][j]});
    }
    return SparseMatrix::from_triplets(rows.num_vertices(), cols.num_vertices(), std::move(t));
}

SparseMatrix assemble_coupling(const CouplingSpec& spec, const SparseMatrix& trace_matrix) {
    const auto& trace = spec.trace_mesh;
    const auto& mult = spec.multiplier_mesh;
    if (trace.dim() != mult.dim()) throw InvalidArgument("assemble_coupling: trace and multiplier meshes differ in dimension");
    if (std::abs(trace.length() - mult.length()) > 1e-12 * trace.length())
        throw InvalidArgument("assemble_coupling: trace and multiplier meshes have different total length");
    if (trace_matrix.rows() != trace.num_vertices())
        throw InvalidArgument("assemble_coupling: trace matrix does not map onto the trace mesh");
    const SparseMatrix C = spec.matching() ? assemble_mass_boundary(trace) : assemble_cross_mass(mult, trace);
    return hstack(C * trace_matrix * -1.0, C);
}

Vector assemble_load(const BulkMesh& mesh, const BulkData& f, double t) {
    Vector load = Vector::Zero(mesh.num_nodes());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto el = mesh.element(e);
        const double m = mesh.element_measure(e);
        if (mesh.dim() == 1) {
            const auto& rule = gauss_line(kLinePoints);
            const double x0 = mesh.node(el[0]).x;
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const double xi = rule.points[q];
                const double v = f({x0 + xi * m, 0.0}, t) * rule.weights[q] * m;
                load[el[0]] += v * (1.0 - xi);
                load[el[1]] += v * xi;
            }
        } else {
            const auto& rule = triangle_degree5();
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const auto& w = rule.points[q];
                const double v = f(bary(mesh, el, w), t) * rule.weights[q] * m;
                for (int k = 0; k < 3; ++k) load[el[k]] += v * w[k];
            }
        }
    }
    return load;
}

Vector assemble_load(const BoundaryMesh& bmesh, const BoundaryData& g, double t) {
    Vector load = Vector::Zero(bmesh.num_vertices());
    if (bmesh.dim() == 1) {
        for (int j = 0; j < 2; ++j) load[j] = g(bmesh.vertex_point(j), t);
        return load;
    }
    const auto& rule = gauss_line(kLinePoints);
    for (std::size_t k = 0; k < bmesh.num_segments(); ++k) {
        const auto [i, j] = bmesh.segment(k);
        const double h = bmesh.segment_length(k);
        const double s0 = bmesh.arc_coords()[k];
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double xi = rule.points[q];
            const double v = g(bmesh.at(s0 + xi * h), t) * rule.weights[q] * h;
            load[i] += v * (1.0 - xi);
            load[j] += v * xi;
        }
    }
    return load;
}

Vector interpolate(const BulkMesh& mesh, const ScalarField& fn) {
    Vector v(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) v[i] = fn(mesh.node(i));
    return v;
}

Vector interpolate(const BoundaryMesh& bmesh, const BoundaryField& fn) {
    Vector v(bmesh.num_vertices());
    for (std::size_t j = 0; j < bmesh.num_vertices(); ++j) v[j] = fn(bmesh.vertex_point(j));
    return v;
}

}  // namespace dynbc
