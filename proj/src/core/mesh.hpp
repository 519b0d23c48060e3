#pragma once

#include "common.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hmfem {

/// A triangle stores its vertices so that v[0] is the peak (newest vertex);
/// the refinement edge is the edge v[1]-v[2].
struct Triangle {
  std::array<std::size_t, 3> v{};
  int generation = 0;
};

enum class BoundaryKind : std::uint8_t { Interior, Dirichlet, Neumann };

struct BoundaryLabel {
  BoundaryKind kind = BoundaryKind::Dirichlet;
  int component = 0;  // j in N<j>; unused for Dirichlet

  static BoundaryLabel dirichlet() { return {BoundaryKind::Dirichlet, 0}; }
  static BoundaryLabel neumann(int j) { return {BoundaryKind::Neumann, j}; }
  std::string to_string() const;
  static BoundaryLabel parse(const std::string& token);
  bool operator==(const BoundaryLabel&) const = default;
};

struct BoundarySegment {
  std::size_t a = 0;
  std::size_t b = 0;
  BoundaryLabel label;
};

/// Edge with endpoints ordered counterclockwise as seen from `plus`.
/// The unit normal n_e is the tangent rotated by -pi/2 and therefore points
/// from `plus` into `minus`, or outward on the boundary.
struct Edge {
  std::array<std::size_t, 2> v{};
  BoundaryKind kind = BoundaryKind::Interior;
  int component = 0;
  std::size_t plus = npos;
  std::size_t minus = npos;

  bool interior() const { return kind == BoundaryKind::Interior; }
};

/// Conforming triangulation. Immutable once built; refinement returns a new
/// mesh that remembers, per triangle, the index of its ancestor in the mesh
/// it was refined from.
class Mesh {
 public:
  /// Builds connectivity, normalizes orientation to counterclockwise (keeping
  /// v[0] as the peak) and validates conformity and boundary labels.
  static Mesh build(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
                    const std::vector<BoundarySegment>& boundary);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_interior_edges() const;
  std::size_t num_boundary_edges() const { return num_edges() - num_interior_edges(); }
  bool has_dirichlet() const;
  bool has_neumann() const;

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Vec2& vertex(std::size_t i) const { return vertices_[i]; }
  const Triangle& triangle(std::size_t t) const { return triangles_[t]; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }

  /// Edge ids of triangle t; entry i is the edge opposite local vertex i, so
  /// entry 0 is the refinement edge.
  const std::array<std::size_t, 3>& triangle_edges(std::size_t t) const { return tri_edges_[t]; }

  /// Ancestor of t in the mesh this one was refined from (npos for an initial mesh).
  std::size_t parent(std::size_t t) const { return parents_.empty() ? npos : parents_[t]; }
  bool has_parents() const { return !parents_.empty(); }

  double area(std::size_t t) const;
  /// h_T = |T|^{1/2}
  double element_size(std::size_t t) const { return std::sqrt(area(t)); }
  double edge_length(std::size_t e) const { return (vertices_[edges_[e].v[1]] - vertices_[edges_[e].v[0]]).norm(); }
  Vec2 tangent(std::size_t e) const;
  Vec2 normal(std::size_t e) const;
  /// +1 if t is the plus side of e, -1 if minus.
  double side_sign(std::size_t e, std::size_t t) const { return edges_[e].plus == t ? 1.0 : -1.0; }
  std::array<Vec2, 3> corners(std::size_t t) const;
  double diameter() const;

  std::vector<BoundarySegment> boundary_segments() const;

 private:
  friend Mesh with_parents(Mesh, std::vector<std::size_t>);

  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<std::size_t, 3>> tri_edges_;
  std::vector<std::size_t> parents_;
};

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

/// Rotates each triangle's vertex list so the longest edge becomes the
/// refinement edge. Used for user meshes without a newest-vertex assignment.
void assign_longest_edge_peaks(const std::vector<Vec2>& vertices, std::vector<Triangle>& triangles);

/// Newest-vertex bisection of every marked triangle plus the closure needed
/// to remove hanging nodes.
Mesh bisect(const Mesh& mesh, std::span<const std::size_t> marked);

/// Two rounds of bisection of all triangles (each triangle becomes four).
Mesh uniform_refine(const Mesh& mesh);

/// max over triangles of circumradius / inradius.
double shape_regularity(const Mesh& mesh);
double min_angle(const Mesh& mesh);

/// [-1,1]^2 minus [0,1]x[-1,0]: three unit squares cut by the diagonals that
/// meet at the re-entrant corner, all boundary edges Dirichlet.
Mesh l_shaped_initial_mesh();

void write_mesh(std::ostream& os, const Mesh& mesh);
void write_mesh(const std::string& path, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
Mesh read_mesh(const std::string& path);

}  // namespace hmfem
