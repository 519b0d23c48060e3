#include "fields.hpp"

namespace hmfem {

FEFields::FEFields(std::shared_ptr<const Mesh> mesh, DofMap dofs, Eigen::VectorXd x, Eigen::VectorXd lambda)
    : mesh_(std::move(mesh)), dofs_(std::move(dofs)), x_(std::move(x)), lambda_(std::move(lambda)) {
  if (static_cast<std::size_t>(x_.size()) != dofs_.n_x()) throw Error(ErrorKind::Argument, "field vector length mismatch");
}

Eigen::VectorXd FEFields::stress_coefficients(std::size_t t, int c) const {
  const auto n = static_cast<Eigen::Index>(dofs_.config().stress_scalar_dim());
  return x_.segment(static_cast<Eigen::Index>(dofs_.stress_offset(t)) + c * n, n);
}

Eigen::VectorXd FEFields::displacement_coefficients(std::size_t t, int d) const {
  const auto n = static_cast<Eigen::Index>(dofs_.config().displacement_scalar_dim());
  return x_.segment(static_cast<Eigen::Index>(dofs_.displacement_offset(t)) + d * n, n);
}

Sym2 FEFields::stress(std::size_t t, const Vec2& x) const {
  const AffineMap map = AffineMap::of(*mesh_, t);
  const Eigen::VectorXd psi = reference_basis(dofs_.config().stress_degree()).values(map.to_reference(x)) * map.scale();
  return {psi.dot(stress_coefficients(t, 0)), psi.dot(stress_coefficients(t, 1)), psi.dot(stress_coefficients(t, 2))};
}

StressJet FEFields::stress_jet(std::size_t t, const Vec2& x) const {
  const AffineMap map = AffineMap::of(*mesh_, t);
  const BasisTabulation tab = reference_basis(dofs_.config().stress_degree()).tabulate(map.to_reference(x));
  const double s = map.scale();
  const Mat2& gi = map.inverse;  // d xhat_i / d x_j = gi(i, j)
  StressJet j;
  double* fields[6][3] = {{&j.value.xx, &j.value.xy, &j.value.yy}, {&j.dx.xx, &j.dx.xy, &j.dx.yy},
                          {&j.dy.xx, &j.dy.xy, &j.dy.yy},          {&j.dxx.xx, &j.dxx.xy, &j.dxx.yy},
                          {&j.dxy.xx, &j.dxy.xy, &j.dxy.yy},       {&j.dyy.xx, &j.dyy.xy, &j.dyy.yy}};
  for (int c = 0; c < 3; ++c) {
    const Eigen::VectorXd coef = stress_coefficients(t, c) * s;
    const double v = tab.value.dot(coef);
    const double rx = tab.dx.dot(coef), ry = tab.dy.dot(coef);
    const double rxx = tab.dxx.dot(coef), rxy = tab.dxy.dot(coef), ryy = tab.dyy.dot(coef);
    *fields[0][c] = v;
    *fields[1][c] = rx * gi(0, 0) + ry * gi(1, 0);
    *fields[2][c] = rx * gi(0, 1) + ry * gi(1, 1);
    Mat2 h;
    h << rxx, rxy, rxy, ryy;
    const Mat2 hp = gi.transpose() * h * gi;
    *fields[3][c] = hp(0, 0);
    *fields[4][c] = hp(0, 1);
    *fields[5][c] = hp(1, 1);
  }
  return j;
}

Vec2 FEFields::displacement(std::size_t t, const Vec2& x) const {
  const AffineMap map = AffineMap::of(*mesh_, t);
  const Eigen::VectorXd psi =
      reference_basis(dofs_.config().displacement_degree()).values(map.to_reference(x)) * map.scale();
  return {psi.dot(displacement_coefficients(t, 0)), psi.dot(displacement_coefficients(t, 1))};
}

}  // namespace hmfem
