#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dynbc {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Simplicial mesh of the interval (dim 1) or of the unit square (dim 2).
///
/// Elements are stored as index triples; for dim 1 only the first two
/// entries are used. Boundary facets likewise use one entry (dim 1, the
/// endpoint) or two (dim 2, an edge).
class BulkMesh {
public:
    BulkMesh(int dim, std::vector<Point> nodes, std::vector<std::array<int, 3>> elements);

    int dim() const noexcept { return dim_; }
    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_elements() const noexcept { return elements_.size(); }
    std::size_t num_boundary_facets() const noexcept { return facets_.size(); }

    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    const Point& node(std::size_t i) const { return nodes_[i]; }

    /// Node indices of element `e` (dim + 1 entries).
    std::span<const int> element(std::size_t e) const {
        return {elements_[e].data(), static_cast<std::size_t>(dim_ + 1)};
    }
    /// Node indices of boundary facet `f` (dim entries).
    std::span<const int> boundary_facet(std::size_t f) const {
        return {facets_[f].data(), static_cast<std::size_t>(dim_)};
    }
    /// Element that owns boundary facet `f`.
    std::size_t facet_element(std::size_t f) const { return facet_elements_[f]; }

    const std::vector<int>& boundary_node_ids() const noexcept { return boundary_nodes_; }

    /// Signed measure (length or area) of element `e`.
    double element_measure(std::size_t e) const;
    Point element_centroid(std::size_t e) const;
    /// Total measure of the domain.
    double measure() const;
    /// Maximal element diameter.
    double mesh_size() const;

    /// Throws InvalidArgument if an invariant is violated.
    void validate() const;

private:
    int dim_;
    std::vector<Point> nodes_;
    std::vector<std::array<int, 3>> elements_;
    std::vector<std::array<int, 2>> facets_;
    std::vector<std::size_t> facet_elements_;
    std::vector<int> boundary_nodes_;
};

/// A point on the boundary, with arc coordinate and outward unit normal.
struct BoundaryPoint {
    Point x;
    double s = 0.0;
    Point normal;
};

/// P1 mesh of the boundary curve, parametrized by arc length.
///
/// For dim 2 the curve is closed: vertex j is joined to vertex (j+1) mod n
/// and arc coordinates lie in [0, L). For dim 1 the boundary consists of the
/// two endpoints; there are no segments, `normals` holds one normal per
/// vertex and `arc_coords` holds the endpoint coordinates.
class BoundaryMesh {
public:
    int dim() const noexcept { return dim_; }
    std::size_t num_vertices() const noexcept { return arc_.size(); }
    /// Number of segments (0 for dim 1).
    std::size_t num_segments() const noexcept { return dim_ == 2 ? arc_.size() : 0; }

    const std::vector<double>& arc_coords() const noexcept { return arc_; }
    /// Total curve length for dim 2; 2 (point count) for dim 1.
    double length() const noexcept { return length_; }

    std::array<std::size_t, 2> segment(std::size_t k) const {
        return {k, (k + 1) % arc_.size()};
    }
    double segment_length(std::size_t k) const;
    /// Outward normal of segment k (dim 2) or of vertex k (dim 1).
    const Point& normal(std::size_t k) const { return normals_[k]; }
    const std::vector<Point>& normals() const noexcept { return normals_; }

    /// Point on Γ at arc coordinate s (taken modulo L).
    Point embed(double s) const;
    /// Boundary point (embedding, arc coordinate, normal) at s.
    BoundaryPoint at(double s) const;
    /// Boundary point of vertex j (dim 1: the endpoint).
    BoundaryPoint vertex_point(std::size_t j) const;

    /// Segment containing arc coordinate s and the local coordinate in [0, 1].
    std::pair<std::size_t, double> locate(double s) const;

    /// Bulk node index of every vertex, present only for trace meshes.
    const std::optional<std::vector<int>>& bulk_node_ids() const noexcept { return bulk_ids_; }
    bool is_trace_mesh() const noexcept { return bulk_ids_.has_value(); }

    /// Same vertex positions on the curve (used to detect matching meshes).
    bool same_partition(const BoundaryMesh& other, double tol = 1e-12) const;

    void validate() const;

private:
    friend BoundaryMesh extract_boundary_mesh(const BulkMesh& mesh);
    friend BoundaryMesh build_independent_boundary_mesh(const BoundaryMesh& curve, std::size_t m,
                                                        double offset);
    friend BoundaryMesh build_independent_boundary_mesh(double length, std::size_t m, double offset);

    int dim_ = 2;
    std::vector<double> arc_;
    double length_ = 0.0;
    std::vector<Point> normals_;
    std::optional<std::vector<int>> bulk_ids_;
    // Closed polyline carrying the geometry: corner arc coordinates and points.
    std::vector<double> curve_arc_;
    std::vector<Point> curve_pts_;
    std::vector<Point> curve_normals_;
};

BulkMesh build_interval_mesh(std::size_t n_elems, double a, double b);
BulkMesh build_square_mesh(std::size_t n_per_side);

BoundaryMesh extract_boundary_mesh(const BulkMesh& mesh);

/// Uniform periodic mesh of [0, L) with m segments shifted by `offset`,
/// placed on the geometry of `curve` (usually the trace mesh).
BoundaryMesh build_independent_boundary_mesh(const BoundaryMesh& curve, std::size_t m, double offset);
/// Same, on a circle of circumference L (no reference geometry available).
BoundaryMesh build_independent_boundary_mesh(double length, std::size_t m, double offset);

/// Bulk mesh with nodes relabelled by `perm` (new index of old node i is perm[i]).
BulkMesh renumber_nodes(const BulkMesh& mesh, std::span<const int> perm);

/// JSON document {nodes, elements, boundary_facets, arc_coords}.
std::string mesh_to_json(const BulkMesh& mesh, const BoundaryMesh& boundary);

}  // namespace dynbc
