#include "dfmg/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace dfmg {

PhysicalParams ManufacturedProblem::params() const {
  PhysicalParams p;
  p.mu = 1.0;
  p.rho = 1.0;
  p.beta = beta;
  p.permeability = Permeability::identity();
  p.f = f;
  p.g = g;
  p.g_N = g_N;
  return p;
}

ManufacturedProblem make_problem(ProblemId id, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("make_problem: beta must be nonnegative");
  ManufacturedProblem pb;
  pb.id = id;
  pb.beta = beta;
  pb.exact_p = [](const Point& x) { return x.x() * x.x() * x.x() + x.y() * x.y() * x.y(); };
  pb.exact_grad_p = [](const Point& x) { return Vec2(3.0 * x.x() * x.x(), 3.0 * x.y() * x.y()); };
  pb.g = [](const Point&) { return 0.0; };

  if (id == ProblemId::Problem1) {
    pb.name = "problem1";
    pb.exact_u = [](const Point& x) { return Vec2(x.x() + x.y(), x.x() - x.y()); };
    pb.f = [beta](const Point& x) {
      const double s = 1.0 + beta * std::sqrt(2.0 * x.x() * x.x() + 2.0 * x.y() * x.y());
      return Vec2(s * (x.x() + x.y()) + 3.0 * x.x() * x.x(), s * (x.x() - x.y()) + 3.0 * x.y() * x.y());
    };
    pb.g_N = [](const Point& x, Side side) {
      switch (side) {
        case Side::XPlus:
          return 1.0 + x.y();
        case Side::XMinus:
          return 1.0 - x.y();
        case Side::YPlus:
          return x.x() - 1.0;
        case Side::YMinus:
          return -x.x() - 1.0;
      }
      return 0.0;
    };
  } else {
    pb.name = "problem2";
    pb.exact_u = [](const Point& x) {
      return Vec2((x.x() + 1.0) * (x.x() + 1.0) / 4.0, -(x.x() + 1.0) * (x.y() + 1.0) / 2.0);
    };
    pb.f = [beta](const Point& x) {
      const double a = x.x() + 1.0;
      const double b = x.y() + 1.0;
      const double s = 1.0 + beta * a / 4.0 * std::sqrt(a * a + 4.0 * b * b);
      return Vec2(a * a / 4.0 * s + 3.0 * x.x() * x.x(), -a * b / 2.0 * s + 3.0 * x.y() * x.y());
    };
    pb.g_N = [](const Point& x, Side side) {
      switch (side) {
        case Side::XPlus:
          return 1.0;
        case Side::XMinus:
          return 0.0;
        case Side::YPlus:
          return -x.x() - 1.0;
        case Side::YMinus:
          return 0.0;
      }
      return 0.0;
    };
  }
  return pb;
}

ManufacturedProblem make_problem(std::string_view name, double beta) {
  if (name == "problem1" || name == "1") return make_problem(ProblemId::Problem1, beta);
  if (name == "problem2" || name == "2") return make_problem(ProblemId::Problem2, beta);
  throw std::invalid_argument("make_problem: unknown problem '" + std::string(name) + "'");
}

}  // namespace dfmg
