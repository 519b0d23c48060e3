#include "material.hpp"

#include <cmath>

namespace hmfem {

void MaterialParams::validate() const {
  if (!(mu > 0) || !std::isfinite(mu)) throw Error(ErrorKind::Config, "Lame parameter mu must be positive");
  if (!(lambda > 0) || !std::isfinite(lambda)) throw Error(ErrorKind::Config, "Lame parameter lambda must be positive");
}

Sym2 compliance_apply(const Sym2& tau, const MaterialParams& m) {
  const double c = m.lambda / (2.0 * m.mu + 2.0 * m.lambda);
  const double tr = tau.trace();
  const double s = 1.0 / (2.0 * m.mu);
  return {s * (tau.xx - c * tr), s * tau.xy, s * (tau.yy - c * tr)};
}

Sym2 stiffness_apply(const Sym2& sigma, const MaterialParams& m) {
  const double tr = sigma.trace();
  return {2.0 * m.mu * sigma.xx + m.lambda * tr, 2.0 * m.mu * sigma.xy, 2.0 * m.mu * sigma.yy + m.lambda * tr};
}

Eigen::Matrix3d compliance_components(const MaterialParams& m) {
  const double c = m.lambda / (2.0 * m.mu + 2.0 * m.lambda);
  const double s = 1.0 / (2.0 * m.mu);
  Eigen::Matrix3d k;
  k << s * (1.0 - c), 0.0, -s * c,
       0.0, 2.0 * s, 0.0,
       -s * c, 0.0, s * (1.0 - c);
  return k;
}

}  // namespace hmfem
