#pragma once

#include "fields.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace hmfem {

/// Per-element squared indicators and their totals.
struct EstimatorReport {
  std::vector<double> eta2;
  std::vector<double> osc2;
  std::vector<double> bar_eta2;  // eta2 + osc2
  double eta = 0.0;
  double osc = 0.0;
  double bar_eta = 0.0;

  /// (sum over `subset` of bar_eta2)^{1/2}
  double bar_eta_on(std::span<const std::size_t> subset) const;
  double osc_on(std::span<const std::size_t> subset) const;
};

EstimatorReport make_report(std::vector<double> eta2, std::vector<double> osc2);

/// Row-wise rot of a symmetric field from its first derivatives:
/// (dx tau_xy - dy tau_xx, dx tau_yy - dy tau_xy).
Vec2 rot(const Sym2& dx, const Sym2& dy);
/// rot rot tau = dyy tau_xx - 2 dxy tau_xy + dxx tau_yy.
double rot_rot(const Sym2& dxx, const Sym2& dxy, const Sym2& dyy);
/// rot rot A sigma_h at a point of t.
double rot_rot_compliance(const FEFields& fields, std::size_t t, const Vec2& x, const MaterialParams& m);

struct EstimatorOptions {
  /// Evaluate jumps with the roles of the two sides of every interior edge
  /// exchanged (normal and tangent reversed). The squared terms do not change.
  bool swap_sides = false;
};

/// Squared element indicators eta_h^2(sigma_h, T) for every triangle. Every
/// interior edge term counts fully for both adjacent triangles.
std::vector<double> indicators_sq(const FEFields& fields, const ProblemData& data, EstimatorOptions opts = {});

/// Squared edge contribution of edge e (interior or Dirichlet; 0 for Neumann).
double edge_term_sq(const FEFields& fields, std::size_t e, const ProblemData& data, EstimatorOptions opts = {});
/// h_T^4 ||rot rot A sigma_h||_T^2
double element_term_sq(const FEFields& fields, std::size_t t, const MaterialParams& m);

/// osc_h(f,T)^2 = h_T^2 ||f - P_h f||_T^2 with P_h the L2 projection onto P_{r+2}.
double oscillation_sq(const Mesh& mesh, std::size_t t, const VectorField& f, SpaceConfig cfg);
std::vector<double> oscillation_sq(const Mesh& mesh, const VectorField& f, SpaceConfig cfg);

EstimatorReport estimate(const FEFields& fields, const ProblemData& data);

/// "elem,eta2,osc2" table.
void write_indicators(std::ostream& os, const EstimatorReport& report);

}  // namespace hmfem
