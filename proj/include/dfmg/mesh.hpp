#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace dfmg {

using Point = Eigen::Vector2d;

/// Axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Box {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
};

enum class Side { XPlus, XMinus, YPlus, YMinus };

std::string_view to_string(Side side);

struct BoundaryEdge {
  std::array<int, 2> vertices;
  Point normal;  // outward unit normal
  Side side;
};

/// One level of a nested uniform triangulation.
///
/// Triangles are stored counterclockwise. `h` is the grid spacing per axis
/// direction (the customary label of a uniform mesh), not the longest edge;
/// see max_edge_length() for the latter.
struct MeshLevel {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  Box domain;
  int level_index = 1;
  double h = 0.0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double signed_area(std::size_t t) const;
  Point centroid(std::size_t t) const;
  double max_edge_length() const;
  double min_angle() const;
};

struct EdgeMidpoint {
  int a;
  int b;
  int midpoint;  // fine vertex index
};

/// Output of one red-refinement step.
struct Refinement {
  MeshLevel fine;
  /// coarse triangle -> its 4 children on the fine level
  std::vector<std::array<int, 4>> child_map;
  /// coarse vertex -> fine vertex
  std::vector<int> vertex_embedding;
  /// coarse edge (a < b) -> fine vertex at its midpoint
  std::vector<EdgeMidpoint> edge_midpoints;
};

/// Uniform triangulation with n x n squares, each split along the diagonal
/// from lower-left to upper-right. Throws std::invalid_argument for n == 0.
MeshLevel build_uniform_square_mesh(const Box& domain, int n);

/// Regular (red) refinement: edge midpoints are joined. Coarse vertices keep
/// their indices on the fine level; midpoints are appended after them.
Refinement refine_regular(const MeshLevel& coarse);

/// Side of the box an edge lies on, decided by the edge midpoint so that
/// corner-touching edges resolve unambiguously. Throws std::invalid_argument
/// for edges not on the boundary.
Side boundary_side_of(const Box& domain, const Point& a, const Point& b);

Point outward_normal(Side side);

/// Nested family T_1 ⊂ ... ⊂ T_L.
class MeshHierarchy {
 public:
  MeshHierarchy(const Box& domain, int base_subdivisions, int num_levels);

  int num_levels() const { return static_cast<int>(levels_.size()); }
  const MeshLevel& level(int k) const { return levels_.at(k); }
  const MeshLevel& finest() const { return levels_.back(); }
  /// Refinement data mapping level k-1 to level k (k >= 1).
  const Refinement& refinement(int k) const { return refinements_.at(k - 1); }

 private:
  std::vector<MeshLevel> levels_;
  // refinements_[k-1].fine is moved into levels_[k]; only the maps remain.
  std::vector<Refinement> refinements_;
};

/// Plain-text dump: "x y" per vertex line, then "i j k" per triangle line.
void write_mesh(std::ostream& os, const MeshLevel& mesh);

}  // namespace dfmg
