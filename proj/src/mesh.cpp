#include "dfmg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace dfmg {

std::string_view to_string(Side side) {
  switch (side) {
    case Side::XPlus:
      return "x+";
    case Side::XMinus:
      return "x-";
    case Side::YPlus:
      return "y+";
    case Side::YMinus:
      return "y-";
  }
  return "?";
}

Point outward_normal(Side side) {
  switch (side) {
    case Side::XPlus:
      return {1.0, 0.0};
    case Side::XMinus:
      return {-1.0, 0.0};
    case Side::YPlus:
      return {0.0, 1.0};
    case Side::YMinus:
      return {0.0, -1.0};
  }
  return {0.0, 0.0};
}

double MeshLevel::signed_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Point e1 = vertices[tri[1]] - vertices[tri[0]];
  const Point e2 = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Point MeshLevel::centroid(std::size_t t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double MeshLevel::max_edge_length() const {
  double longest = 0.0;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      longest = std::max(longest, (vertices[tri[(k + 1) % 3]] - vertices[tri[k]]).norm());
    }
  }
  return longest;
}

double MeshLevel::min_angle() const {
  double smallest = std::numbers::pi;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      const Point a = vertices[tri[(k + 1) % 3]] - vertices[tri[k]];
      const Point b = vertices[tri[(k + 2) % 3]] - vertices[tri[k]];
      const double c = a.dot(b) / (a.norm() * b.norm());
      smallest = std::min(smallest, std::acos(std::clamp(c, -1.0, 1.0)));
    }
  }
  return smallest;
}

Side boundary_side_of(const Box& domain, const Point& a, const Point& b) {
  const Point mid = 0.5 * (a + b);
  const double tol = 1e-12 * std::max(domain.x_max - domain.x_min, domain.y_max - domain.y_min);
  const auto on = [tol](double v, double target) { return std::abs(v - target) <= tol; };
  // both endpoints and the midpoint must sit on the same side
  if (on(a.x(), domain.x_max) && on(b.x(), domain.x_max) && on(mid.x(), domain.x_max)) return Side::XPlus;
  if (on(a.x(), domain.x_min) && on(b.x(), domain.x_min) && on(mid.x(), domain.x_min)) return Side::XMinus;
  if (on(a.y(), domain.y_max) && on(b.y(), domain.y_max) && on(mid.y(), domain.y_max)) return Side::YPlus;
  if (on(a.y(), domain.y_min) && on(b.y(), domain.y_min) && on(mid.y(), domain.y_min)) return Side::YMinus;
  throw std::invalid_argument("boundary_side_of: edge does not lie on the domain boundary");
}

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Boundary edges are the edges seen by exactly one triangle; the orientation
// of that triangle gives the counterclockwise vertex order.
std::vector<BoundaryEdge> find_boundary_edges(const MeshLevel& mesh) {
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(3 * mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) ++count[edge_key(tri[k], tri[(k + 1) % 3])];
  }
  std::vector<BoundaryEdge> edges;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      if (count[edge_key(a, b)] == 1) {
        const Side side = boundary_side_of(mesh.domain, mesh.vertices[a], mesh.vertices[b]);
        edges.push_back({{a, b}, outward_normal(side), side});
      }
    }
  }
  return edges;
}

}  // namespace

MeshLevel build_uniform_square_mesh(const Box& domain, int n) {
  if (n < 1) throw std::invalid_argument("build_uniform_square_mesh: n must be >= 1");
  if (!(domain.x_max > domain.x_min) || !(domain.y_max > domain.y_min)) {
    throw std::invalid_argument("build_uniform_square_mesh: empty domain");
  }
  MeshLevel mesh;
  mesh.domain = domain;
  mesh.level_index = 1;
  const double dx = (domain.x_max - domain.x_min) / n;
  const double dy = (domain.y_max - domain.y_min) / n;
  mesh.h = std::max(dx, dy);

  mesh.vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    // endpoints set exactly so that boundary vertices sit on the box
    const double y = (j == n) ? domain.y_max : domain.y_min + j * dy;
    for (int i = 0; i <= n; ++i) {
      const double x = (i == n) ? domain.x_max : domain.x_min + i * dx;
      mesh.vertices.emplace_back(x, y);
    }
  }
  const auto index = [n](int i, int j) { return j * (n + 1) + i; };
  mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int ll = index(i, j);
      const int lr = index(i + 1, j);
      const int ur = index(i + 1, j + 1);
      const int ul = index(i, j + 1);
      mesh.triangles.push_back({ll, lr, ur});
      mesh.triangles.push_back({ll, ur, ul});
    }
  }
  mesh.boundary_edges = find_boundary_edges(mesh);
  return mesh;
}

Refinement refine_regular(const MeshLevel& coarse) {
  Refinement out;
  MeshLevel& fine = out.fine;
  fine.domain = coarse.domain;
  fine.level_index = coarse.level_index + 1;
  fine.h = 0.5 * coarse.h;
  fine.vertices = coarse.vertices;

  out.vertex_embedding.resize(coarse.num_vertices());
  for (std::size_t v = 0; v < coarse.num_vertices(); ++v) out.vertex_embedding[v] = static_cast<int>(v);

  std::unordered_map<std::uint64_t, int> midpoint_of;
  midpoint_of.reserve(3 * coarse.num_triangles());
  const auto midpoint = [&](int a, int b) {
    const auto [it, inserted] = midpoint_of.try_emplace(edge_key(a, b), static_cast<int>(fine.vertices.size()));
    if (inserted) {
      fine.vertices.push_back(0.5 * (coarse.vertices[a] + coarse.vertices[b]));
      out.edge_midpoints.push_back({std::min(a, b), std::max(a, b), it->second});
    }
    return it->second;
  };

  fine.triangles.reserve(4 * coarse.num_triangles());
  out.child_map.reserve(coarse.num_triangles());
  for (const auto& tri : coarse.triangles) {
    const int a = tri[0];
    const int b = tri[1];
    const int c = tri[2];
    const int ab = midpoint(a, b);
    const int bc = midpoint(b, c);
    const int ca = midpoint(c, a);
    const int first = static_cast<int>(fine.triangles.size());
    fine.triangles.push_back({a, ab, ca});
    fine.triangles.push_back({ab, b, bc});
    fine.triangles.push_back({ca, bc, c});
    fine.triangles.push_back({ab, bc, ca});
    out.child_map.push_back({first, first + 1, first + 2, first + 3});
  }

  fine.boundary_edges.reserve(2 * coarse.boundary_edges.size());
  for (const auto& edge : coarse.boundary_edges) {
    const int m = midpoint_of.at(edge_key(edge.vertices[0], edge.vertices[1]));
    fine.boundary_edges.push_back({{edge.vertices[0], m}, edge.normal, edge.side});
    fine.boundary_edges.push_back({{m, edge.vertices[1]}, edge.normal, edge.side});
  }
  return out;
}

MeshHierarchy::MeshHierarchy(const Box& domain, int base_subdivisions, int num_levels) {
  if (num_levels < 1) throw std::invalid_argument("MeshHierarchy: need at least one level");
  levels_.reserve(num_levels);
  levels_.push_back(build_uniform_square_mesh(domain, base_subdivisions));
  for (int k = 1; k < num_levels; ++k) {
    Refinement r = refine_regular(levels_.back());
    levels_.push_back(std::move(r.fine));
    r.fine = MeshLevel{};
    refinements_.push_back(std::move(r));
  }
}

void write_mesh(std::ostream& os, const MeshLevel& mesh) {
  os << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  os << std::setprecision(17);
  for (const auto& v : mesh.vertices) os << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace dfmg
