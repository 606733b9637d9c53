#pragma once

#include <array>
#include <span>
#include <vector>

namespace dynbc {

/// Quadrature rule on the reference interval [0, 1]; weights sum to 1.
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
};

/// Quadrature rule on the reference triangle (0,0),(1,0),(0,1) in
/// barycentric form; weights sum to 1 (multiply by the area).
struct TriangleRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
};

/// Gauss–Legendre with n points (1 <= n <= 5), exact to degree 2n - 1.
const LineRule& gauss_line(int n);

/// Edge-midpoint rule, exact to degree 2.
const TriangleRule& triangle_degree2();
/// Seven-point rule, exact to degree 5.
const TriangleRule& triangle_degree5();

}  // namespace dynbc
