#pragma once

#include "assembly.hpp"

namespace hmfem {

/// Stress value with first and second derivatives at a point.
struct StressJet {
  Sym2 value;
  Sym2 dx, dy;
  Sym2 dxx, dxy, dyy;
};

/// Discrete (sigma_h, u_h, lambda_h) tied to a mesh and dof map.
class FEFields {
 public:
  FEFields() = default;
  FEFields(std::shared_ptr<const Mesh> mesh, DofMap dofs, Eigen::VectorXd x, Eigen::VectorXd lambda);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& lambda() const { return lambda_; }

  /// Coefficients of stress component c (0 xx, 1 xy, 2 yy) on t.
  Eigen::VectorXd stress_coefficients(std::size_t t, int c) const;
  Eigen::VectorXd displacement_coefficients(std::size_t t, int d) const;

  Sym2 stress(std::size_t t, const Vec2& x) const;
  StressJet stress_jet(std::size_t t, const Vec2& x) const;
  Vec2 displacement(std::size_t t, const Vec2& x) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  DofMap dofs_;
  Eigen::VectorXd x_;
  Eigen::VectorXd lambda_;
};

}  // namespace hmfem
