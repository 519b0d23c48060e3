#pragma once

#include "common.hpp"

#include <vector>

namespace hmfem {

enum class QuadratureKind { Triangle, Edge };

/// Quadrature rule on the reference triangle {(x,y): x,y >= 0, x+y <= 1}
/// (weights sum to 1/2) or on the reference edge [0,1] (weights sum to 1).
/// Triangle points are stored as reference coordinates; `barycentric` holds
/// (1-x-y, x, y).
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::Triangle;
  int exactness = 0;
  std::vector<Vec2> points;                  // triangle rules
  std::vector<Eigen::Vector3d> barycentric;  // triangle rules
  std::vector<double> abscissae;             // edge rules
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Cached, exactness-verified rule. Throws for exactness outside [0, 30].
const QuadratureRule& quadrature(QuadratureKind kind, int exactness);
inline const QuadratureRule& triangle_rule(int exactness) { return quadrature(QuadratureKind::Triangle, exactness); }
inline const QuadratureRule& edge_rule(int exactness) { return quadrature(QuadratureKind::Edge, exactness); }

/// n-point Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
double reference_monomial_integral(int a, int b);

/// Composite rule: the reference triangle split into 4^levels congruent
/// subtriangles by repeated midpoint subdivision, each carrying `base`.
QuadratureRule composite_triangle_rule(const QuadratureRule& base, int levels);

}  // namespace hmfem
