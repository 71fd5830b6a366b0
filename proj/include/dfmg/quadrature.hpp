#pragma once

#include <array>
#include <span>

namespace dfmg::quadrature {

struct TrianglePoint {
  std::array<double, 3> barycentric;
  double weight;  // weights sum to 1; multiply by |T|
};

struct LinePoint {
  double t;       // position in [0, 1] along the edge
  double weight;  // weights sum to 1; multiply by edge length
};

/// Symmetric 6-point rule, exact for polynomials of degree 4.
std::span<const TrianglePoint> triangle_degree4();

/// Centroid rule, exact for degree 1.
std::span<const TrianglePoint> triangle_degree1();

/// Cheapest rule exact for the requested degree (0..4); throws above 4.
std::span<const TrianglePoint> triangle_rule(int degree);

/// 3-point Gauss-Legendre on an edge, exact for degree 5.
std::span<const LinePoint> edge_gauss3();

}  // namespace dfmg::quadrature
