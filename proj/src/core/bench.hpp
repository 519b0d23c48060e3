#pragma once

#include "fields.hpp"
#include "problem.hpp"

#include <optional>
#include <span>
#include <vector>

namespace hmfem {

/// Displacement field with its first and second derivatives; stress, load
/// and Dirichlet data are derived from it.
struct ExactSolution {
  VectorField u;
  GradientField grad_u;
  HessianField hess_u;
  MaterialParams material;
  std::optional<Vec2> singular_point;

  /// epsilon(u) = (grad u + grad u^T) / 2
  Sym2 strain(const Vec2& x) const;
  /// sigma = C epsilon(u)
  Sym2 sigma(const Vec2& x) const;
  /// f = div sigma = mu lap u + (lambda + mu) grad div u
  Vec2 f(const Vec2& x) const;

  /// f, g_D = u with its derivatives, and g_N = sigma n.
  ProblemData problem_data() const;
};

/// Bivariate polynomial sum c x^a y^b.
struct Poly2 {
  struct Term {
    double c;
    int a, b;
  };
  std::vector<Term> terms;

  double operator()(const Vec2& x) const;
  Poly2 dx() const;
  Poly2 dy() const;
  int degree() const;
};

/// Exact solution with polynomial displacement components.
ExactSolution polynomial_solution(Poly2 u1, Poly2 u2, const MaterialParams& m);

/// u of degree r+4, so sigma lies in P_{r+3} and f in P_{r+2}:
/// u = (x^{r+4} + y^2, x y + x^r y^4 [r > 0]).
ExactSolution manufactured_polynomial(int r, const MaterialParams& m);

/// Characteristic residual R(z) = (l+3m)^2 sin^2(z w) - (l+m)^2 z^2 sin^2(w).
double lshape_characteristic(double z, double lambda, double mu, double omega);

/// Smallest root of the characteristic equation in (0,1): sign-change
/// bracketing followed by bisection.
double find_z(double lambda, double mu, double omega);

/// Corner-singular solution of the L-shaped benchmark,
/// u = (x^2-1)(y^2-1) r^z Phi(theta) / (lambda+mu)^2 with theta in [0, 3pi/2].
ExactSolution lshape_exact(const MaterialParams& m);

/// Per-element squared A-norm of sigma - sigma_h. Elements touching the
/// singular point use a composite rule with 4^levels subtriangles.
std::vector<double> error_A_norm_sq(const FEFields& fields, const ExactSolution& exact, int singular_levels = 3);
double error_A_norm(const FEFields& fields, const ExactSolution& exact, int singular_levels = 3);
/// ||sigma||_A of the exact solution on the mesh (same quadrature).
double exact_A_norm(const Mesh& mesh, const ExactSolution& exact, int r, int singular_levels = 3);

/// Least-squares slope of log(err) against log(nt) over the last `window` points.
double rate(std::span<const double> nt, std::span<const double> err, std::size_t window);

}  // namespace hmfem
