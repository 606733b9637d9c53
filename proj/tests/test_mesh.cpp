#include "dynbc/error.hpp"
#include "dynbc/mesh.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace dynbc;

TEST(IntervalMesh, TwoElements) {
    const BulkMesh m = build_interval_mesh(2, 0.0, 1.0);
    ASSERT_EQ(m.num_nodes(), 3u);
    EXPECT_DOUBLE_EQ(m.node(0).x, 0.0);
    EXPECT_DOUBLE_EQ(m.node(1).x, 0.5);
    EXPECT_DOUBLE_EQ(m.node(2).x, 1.0);
    EXPECT_EQ(m.boundary_node_ids(), (std::vector<int>{0, 2}));
}

TEST(IntervalMesh, SingleElement) {
    const BulkMesh m = build_interval_mesh(1, 0.0, 1.0);
    EXPECT_EQ(m.num_elements(), 1u);
    EXPECT_EQ(m.boundary_node_ids(), (std::vector<int>{0, 1}));
}

TEST(IntervalMesh, ShiftedInterval) {
    const BulkMesh m = build_interval_mesh(4, -1.0, 1.0);
    ASSERT_EQ(m.num_nodes(), 5u);
    for (std::size_t i = 0; i + 1 < m.num_nodes(); ++i) EXPECT_NEAR(m.node(i + 1).x - m.node(i).x, 0.5, 1e-15);
    EXPECT_NEAR(m.measure(), 2.0, 1e-15);
}

TEST(IntervalMesh, RejectsBadInput) {
    EXPECT_THROW(build_interval_mesh(0, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(build_interval_mesh(3, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(build_interval_mesh(3, 2.0, 1.0), InvalidArgument);
}

TEST(SquareMesh, Counts) {
    const BulkMesh m1 = build_square_mesh(1);
    EXPECT_EQ(m1.num_nodes(), 4u);
    EXPECT_EQ(m1.num_elements(), 2u);
    EXPECT_EQ(m1.num_boundary_facets(), 4u);

    const BulkMesh m2 = build_square_mesh(2);
    EXPECT_EQ(m2.num_nodes(), 9u);
    EXPECT_EQ(m2.num_elements(), 8u);
    EXPECT_EQ(m2.num_boundary_facets(), 8u);
    EXPECT_EQ(m2.boundary_node_ids().size(), 8u);
}

TEST(SquareMesh, BoundaryLengthFour) {
    const BulkMesh m = build_square_mesh(4);
    EXPECT_EQ(m.num_nodes(), 25u);
    EXPECT_EQ(m.num_elements(), 32u);
    double total = 0.0;
    for (std::size_t f = 0; f < m.num_boundary_facets(); ++f) {
        const auto e = m.boundary_facet(f);
        total += std::hypot(m.node(e[1]).x - m.node(e[0]).x, m.node(e[1]).y - m.node(e[0]).y);
    }
    EXPECT_NEAR(total, 4.0, 1e-12);
}

TEST(SquareMesh, RejectsZero) { EXPECT_THROW(build_square_mesh(0), InvalidArgument); }

TEST(BoundaryMesh, IntervalEndpoints) {
    const BoundaryMesh b = extract_boundary_mesh(build_interval_mesh(3, 0.0, 1.0));
    ASSERT_EQ(b.num_vertices(), 2u);
    EXPECT_EQ(b.num_segments(), 0u);
    EXPECT_DOUBLE_EQ(b.normal(0).x, -1.0);
    EXPECT_DOUBLE_EQ(b.normal(1).x, 1.0);
    EXPECT_DOUBLE_EQ(b.vertex_point(0).x.x, 0.0);
    EXPECT_DOUBLE_EQ(b.vertex_point(1).x.x, 1.0);
}

TEST(BoundaryMesh, SquarePerimeter) {
    const BoundaryMesh b = extract_boundary_mesh(build_square_mesh(2));
    EXPECT_NEAR(b.length(), 4.0, 1e-14);
    ASSERT_EQ(b.num_segments(), 8u);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(b.segment_length(k), 0.5, 1e-14);
}

TEST(BoundaryMesh, ArcCoordinatesN4) {
    const BoundaryMesh b = extract_boundary_mesh(build_square_mesh(4));
    ASSERT_EQ(b.num_vertices(), 16u);
    for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(b.arc_coords()[j], 0.25 * static_cast<double>(j), 1e-14);
    // Anchor at the lexicographically smallest node, counter-clockwise.
    EXPECT_NEAR(b.embed(0.0).x, 0.0, 1e-15);
    EXPECT_NEAR(b.embed(0.0).y, 0.0, 1e-15);
    EXPECT_NEAR(b.embed(0.25).x, 0.25, 1e-15);
    EXPECT_NEAR(b.embed(0.25).y, 0.0, 1e-15);
}

TEST(BoundaryMesh, NormalsUnitAndOutward) {
    const BulkMesh m = build_square_mesh(3);
    const BoundaryMesh b = extract_boundary_mesh(m);
    for (std::size_t k = 0; k < b.num_segments(); ++k) {
        const Point& n = b.normal(k);
        EXPECT_NEAR(std::hypot(n.x, n.y), 1.0, 1e-12);
        const Point mid = b.embed(b.arc_coords()[k] + 0.5 * b.segment_length(k));
        // Outward: away from the centre of the square.
        EXPECT_GT(n.x * (mid.x - 0.5) + n.y * (mid.y - 0.5), 0.0);
    }
}

TEST(BoundaryMesh, RejectsDisconnectedBoundary) {
    // Two triangles touching at a single vertex: the boundary is not one simple closed curve.
    std::vector<Point> nodes{{0, 0}, {1, 0}, {0, 1}, {2, 1}, {1, 2}};
    const BulkMesh m(2, nodes, {{{0, 1, 2}}, {{1, 3, 4}}});
    EXPECT_THROW(extract_boundary_mesh(m), InvalidArgument);

    // Separate components.
    std::vector<Point> nodes2{{0, 0}, {1, 0}, {0, 1}, {3, 0}, {4, 0}, {3, 1}};
    const BulkMesh m2(2, nodes2, {{{0, 1, 2}}, {{3, 4, 5}}});
    EXPECT_THROW(extract_boundary_mesh(m2), InvalidArgument);
}

TEST(IndependentBoundaryMesh, UniformNodes) {
    const BoundaryMesh b = build_independent_boundary_mesh(4.0, 8, 0.0);
    ASSERT_EQ(b.num_vertices(), 8u);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(b.arc_coords()[j], 0.5 * static_cast<double>(j), 1e-14);
}

TEST(IndependentBoundaryMesh, ShiftedNodes) {
    const BoundaryMesh b = build_independent_boundary_mesh(4.0, 8, 0.1);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(b.arc_coords()[j], 0.1 + 0.5 * static_cast<double>(j), 1e-14);
}

TEST(IndependentBoundaryMesh, NonMatchingSixSegments) {
    const BoundaryMesh b = build_independent_boundary_mesh(4.0, 6, 0.0);
    ASSERT_EQ(b.num_segments(), 6u);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(b.segment_length(k), 2.0 / 3.0, 1e-14);
    for (std::size_t n : {1u, 2u, 4u, 8u}) {
        const BoundaryMesh trace = extract_boundary_mesh(build_square_mesh(n));
        EXPECT_FALSE(trace.same_partition(b));
    }
}

TEST(IndependentBoundaryMesh, OnSquareGeometry) {
    const BoundaryMesh trace = extract_boundary_mesh(build_square_mesh(2));
    const BoundaryMesh b = build_independent_boundary_mesh(trace, 8, 0.0);
    EXPECT_TRUE(trace.same_partition(b));
    EXPECT_FALSE(b.is_trace_mesh());
    const Point p = b.embed(1.5);
    EXPECT_NEAR(p.x, 1.0, 1e-14);
    EXPECT_NEAR(p.y, 0.5, 1e-14);
}

TEST(IndependentBoundaryMesh, RejectsBadInput) {
    EXPECT_THROW(build_independent_boundary_mesh(4.0, 1, 0.0), InvalidArgument);
    EXPECT_THROW(build_independent_boundary_mesh(4.0, 8, 0.5), InvalidArgument);
    EXPECT_THROW(build_independent_boundary_mesh(4.0, 8, -0.1), InvalidArgument);
}

// Invariants hold over three refinement levels.
TEST(MeshProperties, RefinementPreservesInvariants) {
    for (std::size_t n : {2u, 4u, 8u}) {
        const BulkMesh sq = build_square_mesh(n);
        EXPECT_NO_THROW(sq.validate());
        const BoundaryMesh b = extract_boundary_mesh(sq);
        EXPECT_NO_THROW(b.validate());
        EXPECT_EQ(sq.num_boundary_facets(), 4 * n);
        double sum = 0.0;
        for (std::size_t k = 0; k < b.num_segments(); ++k) sum += b.segment_length(k);
        EXPECT_NEAR(sum, b.length(), 1e-12 * b.length());
        EXPECT_NEAR(sq.measure(), 1.0, 1e-12);
        for (std::size_t e = 0; e < sq.num_elements(); ++e) EXPECT_GT(sq.element_measure(e), 0.0);
        std::vector<int> from_facets;
        for (std::size_t f = 0; f < sq.num_boundary_facets(); ++f)
            for (int v : sq.boundary_facet(f)) from_facets.push_back(v);
        std::sort(from_facets.begin(), from_facets.end());
        from_facets.erase(std::unique(from_facets.begin(), from_facets.end()), from_facets.end());
        EXPECT_EQ(from_facets, sq.boundary_node_ids());

        const BulkMesh iv = build_interval_mesh(n, 0.0, 1.0);
        EXPECT_NO_THROW(iv.validate());
        EXPECT_NO_THROW(extract_boundary_mesh(iv).validate());
    }
}

TEST(MeshProperties, ExtractionInvariantUnderRenumbering) {
    std::mt19937 rng(42);
    for (std::size_t n : {2u, 3u, 5u}) {
        const BulkMesh m = build_square_mesh(n);
        const BoundaryMesh b = extract_boundary_mesh(m);
        std::vector<int> perm(m.num_nodes());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const BulkMesh r = renumber_nodes(m, perm);
        EXPECT_NO_THROW(r.validate());
        const BoundaryMesh rb = extract_boundary_mesh(r);
        ASSERT_EQ(rb.num_vertices(), b.num_vertices());
        EXPECT_TRUE(rb.same_partition(b));
        for (std::size_t j = 0; j < b.num_vertices(); ++j) {
            const Point p = b.vertex_point(j).x;
            const Point q = rb.vertex_point(j).x;
            EXPECT_NEAR(p.x, q.x, 1e-15);
            EXPECT_NEAR(p.y, q.y, 1e-15);
            EXPECT_EQ(perm[(*b.bulk_node_ids())[j]], (*rb.bulk_node_ids())[j]);
        }
        // Renumbering back restores the original mesh.
        std::vector<int> inverse(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = static_cast<int>(i);
        const BulkMesh back = renumber_nodes(r, inverse);
        EXPECT_EQ(mesh_to_json(back, extract_boundary_mesh(back)), mesh_to_json(m, b));
    }
}

TEST(MeshJson, StableKeyOrder) {
    const BulkMesh m = build_square_mesh(1);
    const std::string text = mesh_to_json(m, extract_boundary_mesh(m));
    const auto j = nlohmann::ordered_json::parse(text);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"nodes", "elements", "boundary_facets", "arc_coords"}));
    EXPECT_EQ(j["nodes"].size(), 4u);
    EXPECT_EQ(j["elements"].size(), 2u);
    EXPECT_EQ(j["boundary_facets"].size(), 4u);
    EXPECT_EQ(j["arc_coords"].size(), 4u);
}
