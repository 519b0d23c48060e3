#include "spaces.hpp"

namespace hmfem {

void SpaceConfig::validate() const {
  if (r < 0 || r > 9) throw Error(ErrorKind::Config, "degree parameter r=" + std::to_string(r) + " outside 0..9");
}

AffineMap AffineMap::of(const Mesh& mesh, std::size_t t) {
  const auto p = mesh.corners(t);
  AffineMap m;
  m.origin = p[0];
  m.jacobian.col(0) = p[1] - p[0];
  m.jacobian.col(1) = p[2] - p[0];
  m.det = m.jacobian.determinant();
  m.inverse = m.jacobian.inverse();
  return m;
}

DofMap::DofMap(const Mesh& mesh, SpaceConfig cfg) : cfg_(cfg), nt_(mesh.num_triangles()) {
  cfg_.validate();
  multiplier_slot_.assign(mesh.num_edges(), npos);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge(e).kind == BoundaryKind::Dirichlet) continue;
    multiplier_slot_[e] = multiplier_edges_.size();
    multiplier_edges_.push_back(e);
  }
}

}  // namespace hmfem
