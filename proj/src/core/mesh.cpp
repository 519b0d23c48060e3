#include "mesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace hmfem {
namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

[[noreturn]] void mesh_error(const std::string& msg) { throw Error(ErrorKind::Mesh, msg); }

}  // namespace

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

std::string BoundaryLabel::to_string() const {
  if (kind == BoundaryKind::Dirichlet) return "D";
  if (kind == BoundaryKind::Neumann) return "N" + std::to_string(component);
  return "I";
}

BoundaryLabel BoundaryLabel::parse(const std::string& token) {
  if (token == "D") return dirichlet();
  if (token.size() >= 2 && token[0] == 'N') {
    try {
      std::size_t used = 0;
      int j = std::stoi(token.substr(1), &used);
      if (used == token.size() - 1 && j >= 0) return neumann(j);
    } catch (const std::exception&) {
    }
  }
  mesh_error("invalid boundary label '" + token + "' (expected D or N<j>)");
}

Mesh Mesh::build(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
                 const std::vector<BoundarySegment>& boundary) {
  if (triangles.empty()) mesh_error("mesh has no triangles");
  for (const auto& p : vertices) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) mesh_error("non-finite vertex coordinate");
  }

  Eigen::AlignedBox2d box;
  for (const auto& p : vertices) box.extend(p);
  const double diam = box.isEmpty() ? 0.0 : box.diagonal().norm();
  // points closer than coordinate roundoff are treated as one
  const double tol = 1e-30 * diam * diam;

  {
    std::vector<std::size_t> order(vertices.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::pair(vertices[a].x(), vertices[a].y()) < std::pair(vertices[b].x(), vertices[b].y());
    });
    for (std::size_t k = 1; k < order.size(); ++k) {
      if ((vertices[order[k]] - vertices[order[k - 1]]).squaredNorm() <= tol) {
        mesh_error("duplicate vertices " + std::to_string(order[k - 1]) + " and " + std::to_string(order[k]));
      }
    }
  }

  for (std::size_t t = 0; t < triangles.size(); ++t) {
    auto& tri = triangles[t];
    for (auto v : tri.v) {
      if (v >= vertices.size()) mesh_error("triangle " + std::to_string(t) + " references missing vertex");
    }
    if (tri.v[0] == tri.v[1] || tri.v[1] == tri.v[2] || tri.v[0] == tri.v[2]) {
      mesh_error("triangle " + std::to_string(t) + " has repeated vertices");
    }
    const double a = signed_area(vertices[tri.v[0]], vertices[tri.v[1]], vertices[tri.v[2]]);
    const Vec2 &p0 = vertices[tri.v[0]], &p1 = vertices[tri.v[1]], &p2 = vertices[tri.v[2]];
    const double longest = std::max({(p1 - p0).squaredNorm(), (p2 - p1).squaredNorm(), (p0 - p2).squaredNorm()});
    if (std::abs(a) <= 1e-14 * longest) mesh_error("triangle " + std::to_string(t) + " has zero area");
    if (a < 0) std::swap(tri.v[1], tri.v[2]);
  }

  Mesh m;
  m.vertices_ = std::move(vertices);
  m.triangles_ = std::move(triangles);
  m.tri_edges_.resize(m.triangles_.size());

  std::unordered_map<std::uint64_t, std::size_t> lookup;
  lookup.reserve(m.triangles_.size() * 2);
  for (std::size_t t = 0; t < m.triangles_.size(); ++t) {
    const auto& v = m.triangles_[t].v;
    for (int i = 0; i < 3; ++i) {
      const std::size_t a = v[(i + 1) % 3];
      const std::size_t b = v[(i + 2) % 3];
      auto [it, inserted] = lookup.try_emplace(edge_key(a, b), m.edges_.size());
      if (inserted) {
        Edge e;
        e.v = {a, b};
        e.plus = t;
        m.edges_.push_back(e);
      } else {
        Edge& e = m.edges_[it->second];
        if (e.minus != npos) mesh_error("edge (" + std::to_string(a) + "," + std::to_string(b) + ") has more than two triangles");
        if (e.v[0] != b || e.v[1] != a) mesh_error("overlapping triangles along edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
        e.minus = t;
      }
      m.tri_edges_[t][i] = it->second;
    }
  }

  std::vector<bool> labelled(m.edges_.size(), false);
  for (const auto& seg : boundary) {
    auto it = lookup.find(edge_key(seg.a, seg.b));
    if (it == lookup.end()) {
      mesh_error("boundary segment (" + std::to_string(seg.a) + "," + std::to_string(seg.b) + ") is not a mesh edge");
    }
    Edge& e = m.edges_[it->second];
    if (e.minus != npos) {
      mesh_error("boundary segment (" + std::to_string(seg.a) + "," + std::to_string(seg.b) + ") is an interior edge");
    }
    if (seg.label.kind == BoundaryKind::Interior) mesh_error("boundary segment labelled interior");
    if (labelled[it->second]) mesh_error("boundary segment listed twice");
    labelled[it->second] = true;
    e.kind = seg.label.kind;
    e.component = seg.label.component;
  }
  for (std::size_t i = 0; i < m.edges_.size(); ++i) {
    if (m.edges_[i].minus == npos && !labelled[i]) {
      mesh_error("boundary edge (" + std::to_string(m.edges_[i].v[0]) + "," + std::to_string(m.edges_[i].v[1]) +
                 ") has no label (hanging vertex or missing boundary entry)");
    }
  }
  return m;
}

Mesh with_parents(Mesh mesh, std::vector<std::size_t> parents) {
  mesh.parents_ = std::move(parents);
  return mesh;
}

std::size_t Mesh::num_interior_edges() const {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.interior(); }));
}

bool Mesh::has_dirichlet() const {
  return std::any_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.kind == BoundaryKind::Dirichlet; });
}

bool Mesh::has_neumann() const {
  return std::any_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.kind == BoundaryKind::Neumann; });
}

double Mesh::area(std::size_t t) const {
  const auto& v = triangles_[t].v;
  return signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
}

Vec2 Mesh::tangent(std::size_t e) const {
  return (vertices_[edges_[e].v[1]] - vertices_[edges_[e].v[0]]).normalized();
}

Vec2 Mesh::normal(std::size_t e) const {
  const Vec2 t = tangent(e);
  return {t.y(), -t.x()};
}

std::array<Vec2, 3> Mesh::corners(std::size_t t) const {
  const auto& v = triangles_[t].v;
  return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
}

double Mesh::diameter() const {
  Eigen::AlignedBox2d box;
  for (const auto& p : vertices_) box.extend(p);
  return box.diagonal().norm();
}

std::vector<BoundarySegment> Mesh::boundary_segments() const {
  std::vector<BoundarySegment> out;
  for (const auto& e : edges_) {
    if (!e.interior()) out.push_back({e.v[0], e.v[1], BoundaryLabel{e.kind, e.component}});
  }
  return out;
}

void assign_longest_edge_peaks(const std::vector<Vec2>& vertices, std::vector<Triangle>& triangles) {
  for (auto& tri : triangles) {
    int best = 0;
    double best_len = -1.0;
    for (int i = 0; i < 3; ++i) {
      const double len = (vertices[tri.v[(i + 1) % 3]] - vertices[tri.v[(i + 2) % 3]]).squaredNorm();
      if (len > best_len * (1.0 + 1e-12)) {
        best_len = len;
        best = i;
      }
    }
    std::rotate(tri.v.begin(), tri.v.begin() + best, tri.v.end());
  }
}

Mesh bisect(const Mesh& mesh, std::span<const std::size_t> marked) {
  const std::size_t nt = mesh.num_triangles();
  std::vector<char> edge_marked(mesh.num_edges(), 0);
  std::vector<std::size_t> queue;

  auto mark_edge = [&](std::size_t e) {
    if (edge_marked[e]) return;
    edge_marked[e] = 1;
    const Edge& ed = mesh.edge(e);
    queue.push_back(ed.plus);
    if (ed.minus != npos) queue.push_back(ed.minus);
  };

  for (std::size_t t : marked) {
    if (t >= nt) throw Error(ErrorKind::Argument, "marked triangle id " + std::to_string(t) + " out of range");
    mark_edge(mesh.triangle_edges(t)[0]);
  }

  // Closure: a triangle with any marked edge must have its refinement edge marked.
  const std::size_t bound = 10 * nt;
  std::size_t steps = 0;
  while (!queue.empty()) {
    if (++steps > bound) {
      throw Error(ErrorKind::Mesh, "bisection closure exceeded depth bound; incompatible newest-vertex assignment");
    }
    const std::size_t t = queue.back();
    queue.pop_back();
    const auto& te = mesh.triangle_edges(t);
    if (!edge_marked[te[0]] && (edge_marked[te[1]] || edge_marked[te[2]])) mark_edge(te[0]);
  }

  std::vector<Vec2> vertices = mesh.vertices();
  std::vector<std::size_t> midpoint(mesh.num_edges(), npos);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!edge_marked[e]) continue;
    const Edge& ed = mesh.edge(e);
    midpoint[e] = vertices.size();
    vertices.push_back(0.5 * (mesh.vertex(ed.v[0]) + mesh.vertex(ed.v[1])));
  }

  std::vector<Triangle> triangles;
  std::vector<std::size_t> parents;
  triangles.reserve(nt + 2 * marked.size());
  auto emit = [&](std::size_t a, std::size_t b, std::size_t c, int gen, std::size_t parent) {
    triangles.push_back(Triangle{{a, b, c}, gen});
    parents.push_back(parent);
  };

  for (std::size_t t = 0; t < nt; ++t) {
    const Triangle& tri = mesh.triangle(t);
    const auto& te = mesh.triangle_edges(t);
    const auto [v0, v1, v2] = tri.v;
    const int g = tri.generation;
    if (!edge_marked[te[0]]) {
      emit(v0, v1, v2, g, t);
      continue;
    }
    const std::size_t m = midpoint[te[0]];
    // child (m, v0, v1): refinement edge v0-v1 is the parent's edge opposite v2
    if (edge_marked[te[2]]) {
      const std::size_t m1 = midpoint[te[2]];
      emit(m1, m, v0, g + 2, t);
      emit(m1, v1, m, g + 2, t);
    } else {
      emit(m, v0, v1, g + 1, t);
    }
    // child (m, v2, v0): refinement edge v2-v0 is the parent's edge opposite v1
    if (edge_marked[te[1]]) {
      const std::size_t m2 = midpoint[te[1]];
      emit(m2, m, v2, g + 2, t);
      emit(m2, v0, m, g + 2, t);
    } else {
      emit(m, v2, v0, g + 1, t);
    }
  }

  std::vector<BoundarySegment> boundary;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    if (ed.interior()) continue;
    const BoundaryLabel label{ed.kind, ed.component};
    if (edge_marked[e]) {
      boundary.push_back({ed.v[0], midpoint[e], label});
      boundary.push_back({midpoint[e], ed.v[1], label});
    } else {
      boundary.push_back({ed.v[0], ed.v[1], label});
    }
  }

  return with_parents(Mesh::build(std::move(vertices), std::move(triangles), boundary), std::move(parents));
}

Mesh uniform_refine(const Mesh& mesh) {
  auto all = [](std::size_t n) {
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    return ids;
  };
  const Mesh once = bisect(mesh, all(mesh.num_triangles()));
  Mesh twice = bisect(once, all(once.num_triangles()));
  std::vector<std::size_t> parents(twice.num_triangles());
  for (std::size_t t = 0; t < parents.size(); ++t) parents[t] = once.parent(twice.parent(t));
  return with_parents(std::move(twice), std::move(parents));
}

double shape_regularity(const Mesh& mesh) {
  double worst = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = mesh.corners(t);
    const double a = (p[1] - p[2]).norm();
    const double b = (p[2] - p[0]).norm();
    const double c = (p[0] - p[1]).norm();
    const double area = mesh.area(t);
    const double s = 0.5 * (a + b + c);
    const double circum = a * b * c / (4.0 * area);
    const double in = area / s;
    worst = std::max(worst, circum / in);
  }
  return worst;
}

double min_angle(const Mesh& mesh) {
  double smallest = std::numbers::pi;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = mesh.corners(t);
    for (int i = 0; i < 3; ++i) {
      const Vec2 u = p[(i + 1) % 3] - p[i];
      const Vec2 w = p[(i + 2) % 3] - p[i];
      const double ang = std::atan2(std::abs(u.x() * w.y() - u.y() * w.x()), u.dot(w));
      smallest = std::min(smallest, ang);
    }
  }
  return smallest;
}

Mesh l_shaped_initial_mesh() {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}};
  // Peak first; the refinement edge of every triangle is the diagonal through (0,0).
  std::vector<Triangle> t = {
      {{1, 2, 0}, 0}, {{3, 0, 2}, 0},  // [0,1]x[0,1], diagonal (0,0)-(1,1)
      {{3, 4, 0}, 0}, {{5, 0, 4}, 0},  // [-1,0]x[0,1], diagonal (0,0)-(-1,1)
      {{5, 6, 0}, 0}, {{7, 0, 6}, 0},  // [-1,0]x[-1,0], diagonal (0,0)-(-1,-1)
  };
  std::vector<BoundarySegment> b;
  const std::size_t ring[] = {0, 1, 2, 3, 4, 5, 6, 7};
  for (std::size_t i = 0; i < 8; ++i) b.push_back({ring[i], ring[(i + 1) % 8], BoundaryLabel::dirichlet()});
  return Mesh::build(std::move(v), std::move(t), b);
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto boundary = mesh.boundary_segments();
  os << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << boundary.size() << '\n';
  os << std::setprecision(17);
  for (const auto& p : mesh.vertices()) os << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles()) os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  for (const auto& s : boundary) os << s.a << ' ' << s.b << ' ' << s.label.to_string() << '\n';
}

void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_mesh(os, mesh);
  if (!os) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

Mesh read_mesh(std::istream& is) {
  std::size_t nv = 0, nt = 0, nb = 0;
  if (!(is >> nv >> nt >> nb)) mesh_error("mesh file: bad header (expected 'nv nt nb')");
  std::vector<Vec2> v(nv);
  for (auto& p : v) {
    if (!(is >> p.x() >> p.y())) mesh_error("mesh file: truncated vertex list");
  }
  std::vector<Triangle> t(nt);
  for (auto& tri : t) {
    if (!(is >> tri.v[0] >> tri.v[1] >> tri.v[2])) mesh_error("mesh file: truncated triangle list");
  }
  std::vector<BoundarySegment> b(nb);
  for (auto& s : b) {
    std::string label;
    if (!(is >> s.a >> s.b >> label)) mesh_error("mesh file: truncated boundary list");
    s.label = BoundaryLabel::parse(label);
  }
  return Mesh::build(std::move(v), std::move(t), b);
}

Mesh read_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open mesh file '" + path + "'");
  return read_mesh(is);
}

}  // namespace hmfem
