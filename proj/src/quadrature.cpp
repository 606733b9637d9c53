#include "dynbc/quadrature.hpp"

#include "dynbc/error.hpp"

#include <cmath>

namespace dynbc {

namespace {

LineRule to_unit(std::vector<double> x, std::vector<double> w) {
    LineRule r;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.points.push_back(0.5 * (x[i] + 1.0));
        r.weights.push_back(0.5 * w[i]);
    }
    return r;
}

}  // namespace

const LineRule& gauss_line(int n) {
    static const std::array<LineRule, 5> rules = [] {
        const double s3 = 1.0 / std::sqrt(3.0);
        const double s35 = std::sqrt(3.0 / 5.0);
        const double a4 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
        const double b4 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
        const double wa4 = (18.0 + std::sqrt(30.0)) / 36.0;
        const double wb4 = (18.0 - std::sqrt(30.0)) / 36.0;
        const double a5 = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double b5 = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double wa5 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
        const double wb5 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
        return std::array<LineRule, 5>{
            to_unit({0.0}, {2.0}),
            to_unit({-s3, s3}, {1.0, 1.0}),
            to_unit({-s35, 0.0, s35}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}),
            to_unit({-b4, -a4, a4, b4}, {wb4, wa4, wa4, wb4}),
            to_unit({-b5, -a5, 0.0, a5, b5}, {wb5, wa5, 128.0 / 225.0, wa5, wb5}),
        };
    }();
    if (n < 1 || n > 5) throw InvalidArgument("gauss_line: supported orders are 1..5");
    return rules[n - 1];
}

const TriangleRule& triangle_degree2() {
    static const TriangleRule rule{
        {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}},
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
    };
    return rule;
}

const TriangleRule& triangle_degree5() {
    static const TriangleRule rule = [] {
        const double r15 = std::sqrt(15.0);
        const double a1 = (6.0 - r15) / 21.0;
        const double b1 = (9.0 + 2.0 * r15) / 21.0;
        const double a2 = (6.0 + r15) / 21.0;
        const double b2 = (9.0 - 2.0 * r15) / 21.0;
        const double w1 = (155.0 - r15) / 1200.0;
        const double w2 = (155.0 + r15) / 1200.0;
        TriangleRule r;
        r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                    {a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1},
                    {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}};
        // Weights for unit-area normalization (reference area 1/2 rules times 2).
        r.weights = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return rule;
}

}  // namespace dynbc
