#include "dfmg/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dfmg::quadrature {

namespace {

// Dunavant degree-4 rule
constexpr double kA1 = 0.44594849091596488632;
constexpr double kB1 = 1.0 - 2.0 * kA1;
constexpr double kW1 = 0.22338158967801146570;
constexpr double kA2 = 0.09157621350977074346;
constexpr double kB2 = 1.0 - 2.0 * kA2;
constexpr double kW2 = 1.0 / 3.0 - kW1;

constexpr std::array<TrianglePoint, 6> kDegree4{{
    {{kA1, kA1, kB1}, kW1},
    {{kA1, kB1, kA1}, kW1},
    {{kB1, kA1, kA1}, kW1},
    {{kA2, kA2, kB2}, kW2},
    {{kA2, kB2, kA2}, kW2},
    {{kB2, kA2, kA2}, kW2},
}};

constexpr std::array<TrianglePoint, 1> kDegree1{{{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1.0}}};

const std::array<LinePoint, 3> kGauss3{{
    {0.5 * (1.0 - std::sqrt(0.6)), 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.5 * (1.0 + std::sqrt(0.6)), 5.0 / 18.0},
}};

}  // namespace

std::span<const TrianglePoint> triangle_degree4() { return kDegree4; }
std::span<const TrianglePoint> triangle_degree1() { return kDegree1; }

std::span<const TrianglePoint> triangle_rule(int degree) {
  if (degree < 0 || degree > 4) {
    throw std::invalid_argument("triangle_rule: no rule of degree " + std::to_string(degree));
  }
  return degree <= 1 ? triangle_degree1() : triangle_degree4();
}

std::span<const LinePoint> edge_gauss3() { return kGauss3; }

}  // namespace dfmg::quadrature
