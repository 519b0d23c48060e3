#pragma once

#include "basis.hpp"
#include "mesh.hpp"

#include <memory>

namespace hmfem {

/// Degree parameter r: stresses in P_{r+3}(T,S), displacements in
/// P_{r+2}(T,R^2), multipliers in P_{r+3}(e,R^2).
struct SpaceConfig {
  int r = 0;

  int stress_degree() const { return r + 3; }
  int displacement_degree() const { return r + 2; }
  int multiplier_degree() const { return r + 3; }
  std::size_t stress_scalar_dim() const { return triangle_dim(stress_degree()); }
  std::size_t displacement_scalar_dim() const { return triangle_dim(displacement_degree()); }
  std::size_t multiplier_scalar_dim() const { return static_cast<std::size_t>(multiplier_degree() + 1); }
  std::size_t local_stress_size() const { return 3 * stress_scalar_dim(); }
  std::size_t local_displacement_size() const { return 2 * displacement_scalar_dim(); }
  std::size_t local_size() const { return local_stress_size() + local_displacement_size(); }
  std::size_t edge_multiplier_size() const { return 2 * multiplier_scalar_dim(); }

  void validate() const;
};

/// Affine map x = origin + J * xhat from the reference triangle onto T,
/// with origin at the peak vertex v[0].
struct AffineMap {
  Vec2 origin;
  Mat2 jacobian;
  Mat2 inverse;
  double det = 0.0;

  static AffineMap of(const Mesh& mesh, std::size_t t);
  Vec2 to_physical(const Vec2& ref) const { return origin + jacobian * ref; }
  Vec2 to_reference(const Vec2& x) const { return inverse * (x - origin); }
  /// Factor making reference-orthonormal functions orthonormal on T.
  double scale() const { return 1.0 / std::sqrt(det); }
};

/// Unknown numbering. X holds one contiguous block per triangle (ascending
/// id): the three stress components (xx, xy, yy) each with
/// stress_scalar_dim coefficients, then the two displacement components.
/// Lambda holds one block per interior or Neumann edge (ascending edge id):
/// two components each with multiplier_scalar_dim coefficients.
class DofMap {
 public:
  DofMap() = default;
  DofMap(const Mesh& mesh, SpaceConfig cfg);

  const SpaceConfig& config() const { return cfg_; }
  std::size_t num_triangles() const { return nt_; }
  std::size_t n_sigma() const { return nt_ * cfg_.local_stress_size(); }
  std::size_t n_u() const { return nt_ * cfg_.local_displacement_size(); }
  std::size_t n_x() const { return nt_ * cfg_.local_size(); }
  std::size_t n_lambda() const { return multiplier_edges_.size() * cfg_.edge_multiplier_size(); }

  std::size_t element_offset(std::size_t t) const { return t * cfg_.local_size(); }
  std::size_t stress_offset(std::size_t t) const { return element_offset(t); }
  std::size_t displacement_offset(std::size_t t) const { return element_offset(t) + cfg_.local_stress_size(); }

  /// Position of e among multiplier edges, npos for Dirichlet edges.
  std::size_t multiplier_index(std::size_t e) const { return multiplier_slot_[e]; }
  std::size_t multiplier_offset(std::size_t e) const {
    const std::size_t k = multiplier_slot_[e];
    return k == npos ? npos : k * cfg_.edge_multiplier_size();
  }
  const std::vector<std::size_t>& multiplier_edges() const { return multiplier_edges_; }

 private:
  SpaceConfig cfg_;
  std::size_t nt_ = 0;
  std::vector<std::size_t> multiplier_edges_;
  std::vector<std::size_t> multiplier_slot_;
};

}  // namespace hmfem
