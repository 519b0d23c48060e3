#pragma once

#include "material.hpp"

#include <array>
#include <functional>

namespace hmfem {

using VectorField = std::function<Vec2(const Vec2&)>;
/// J(i,j) = d g_i / d x_j
using GradientField = std::function<Mat2(const Vec2&)>;
/// H[i] = Hessian of component i
using HessianField = std::function<std::array<Mat2, 2>(const Vec2&)>;
/// Traction at x on a Neumann edge with outward unit normal n and label index j.
using TractionField = std::function<Vec2(const Vec2& x, const Vec2& n, int j)>;

/// Load, boundary data and material. The Dirichlet derivatives are used by
/// the estimator for the tangential derivatives of g_D along boundary edges.
struct ProblemData {
  VectorField f;
  VectorField g_D;
  GradientField grad_g_D;
  HessianField hess_g_D;
  TractionField g_N;
  MaterialParams material;
};

}  // namespace hmfem
