#pragma once

#include "common.hpp"

namespace hmfem {

/// Lame parameters; both must be strictly positive.
struct MaterialParams {
  double mu = 1.0;
  double lambda = 1.0;

  void validate() const;
};

/// A tau = (tau - lambda / (2 mu + 2 lambda) tr(tau) I) / (2 mu)
Sym2 compliance_apply(const Sym2& tau, const MaterialParams& m);
/// C sigma = 2 mu sigma + lambda tr(sigma) I
Sym2 stiffness_apply(const Sym2& sigma, const MaterialParams& m);

/// K(c,d) = E_c : A E_d for the component basis E_xx, E_xy = [[0,1],[1,0]], E_yy.
Eigen::Matrix3d compliance_components(const MaterialParams& m);

}  // namespace hmfem
