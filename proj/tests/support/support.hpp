#pragma once

#include <random>
#include <vector>

#include "adapt.hpp"
#include "assembly.hpp"
#include "bench.hpp"
#include "estimator.hpp"
#include "mesh.hpp"
#include "solver.hpp"

namespace hmfem::testing {

/// (0,0),(1,0),(0,1) scaled by s, all edges Dirichlet.
inline Mesh reference_triangle(double s = 1.0) {
  return Mesh::build({{0, 0}, {s, 0}, {0, s}}, {Triangle{{0, 1, 2}}},
                     {{0, 1, BoundaryLabel::dirichlet()}, {1, 2, BoundaryLabel::dirichlet()},
                      {2, 0, BoundaryLabel::dirichlet()}});
}

/// Unit square cut by the diagonal (1,0)-(0,1); the diagonal is the
/// refinement edge of both triangles. `neumann` labels the bottom edge N0.
inline Mesh unit_square(bool neumann = false) {
  const BoundaryLabel bottom = neumann ? BoundaryLabel::neumann(0) : BoundaryLabel::dirichlet();
  return Mesh::build({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {Triangle{{0, 1, 3}}, Triangle{{2, 3, 1}}},
                     {{0, 1, bottom}, {1, 2, BoundaryLabel::dirichlet()}, {2, 3, BoundaryLabel::dirichlet()},
                      {3, 0, BoundaryLabel::dirichlet()}});
}

/// `rounds` bisections of a random subset (about a third) of the triangles.
inline Mesh random_refinement(Mesh mesh, int rounds, std::mt19937_64& rng) {
  for (int k = 0; k < rounds; ++k) {
    std::vector<std::size_t> marked;
    std::bernoulli_distribution pick(1.0 / 3.0);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      if (pick(rng)) marked.push_back(t);
    }
    if (marked.empty()) marked.push_back(0);
    mesh = bisect(mesh, marked);
  }
  return mesh;
}

/// Coefficients of the L2 projection of u onto P_{r+2}(T)^2 in the layout of
/// FEFields::displacement_coefficients (component-major).
inline Eigen::VectorXd project_displacement(const Mesh& mesh, std::size_t t, const VectorField& u, SpaceConfig cfg) {
  const ReferenceBasis& basis = reference_basis(cfg.displacement_degree());
  const QuadratureRule& rule = triangle_rule(2 * cfg.displacement_degree() + 8);
  const AffineMap map = AffineMap::of(mesh, t);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd psi = basis.values(rule.points[q]) * map.scale();
    const Vec2 v = u(map.to_physical(rule.points[q]));
    const double w = rule.weights[q] * map.det;
    c.head(n) += w * v.x() * psi;
    c.tail(n) += w * v.y() * psi;
  }
  return c;
}

/// max over triangles of |u_h - P_h u| coefficients, relative to max |P_h u|.
inline double displacement_projection_defect(const FEFields& fields, const VectorField& u) {
  double diff = 0.0, scale = 0.0;
  const Mesh& mesh = fields.mesh();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::VectorXd p = project_displacement(mesh, t, u, fields.dofs().config());
    Eigen::VectorXd h(p.size());
    h << fields.displacement_coefficients(t, 0), fields.displacement_coefficients(t, 1);
    diff = std::max(diff, (h - p).cwiseAbs().maxCoeff());
    scale = std::max(scale, p.cwiseAbs().maxCoeff());
  }
  return diff / std::max(scale, 1e-300);
}

/// Assembles and solves in one go.
struct Solved {
  SaddleSystem system;
  FEFields fields;
  SolveReport report;
};

inline Solved solve(std::shared_ptr<const Mesh> mesh, SpaceConfig cfg, const ProblemData& data,
                    PcgOptions opts = {}) {
  Solved s{assemble(std::move(mesh), cfg, data), {}, {}};
  s.fields = solve_system(s.system, opts, s.report);
  return s;
}

/// Multiplier coefficients of the L2(e) projection of u on edge e (basis:
/// Legendre polynomials in the arc parameter from v[0] to v[1], scaled by
/// |e|^{-1/2}), component-major.
inline Eigen::VectorXd project_multiplier(const Mesh& mesh, std::size_t e, const VectorField& u, SpaceConfig cfg) {
  const int k = cfg.multiplier_degree();
  const QuadratureRule& rule = edge_rule(2 * k + 8);
  const Edge& ed = mesh.edge(e);
  const Vec2 a = mesh.vertex(ed.v[0]), b = mesh.vertex(ed.v[1]);
  const double len = mesh.edge_length(e);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * (k + 1));
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double s = rule.abscissae[q];
    const Eigen::VectorXd l = legendre_values(k, s) / std::sqrt(len);
    const Vec2 v = u(a + s * (b - a));
    c.head(k + 1) += rule.weights[q] * len * v.x() * l;
    c.tail(k + 1) += rule.weights[q] * len * v.y() * l;
  }
  return c;
}

/// Global multiplier vector of -P_e u on every multiplier edge: the traces the
/// hybridized system assigns to a smooth displacement.
inline Eigen::VectorXd multiplier_trace(const Mesh& mesh, const DofMap& dofs, const VectorField& u) {
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.n_lambda()));
  for (std::size_t e : dofs.multiplier_edges()) {
    lam.segment(static_cast<Eigen::Index>(dofs.multiplier_offset(e)),
                static_cast<Eigen::Index>(dofs.config().edge_multiplier_size())) = -project_multiplier(mesh, e, u, dofs.config());
  }
  return lam;
}

/// Row 2 of the saddle system, elementwise: max_T |D_T s_T - F_u,T| / max_T |F_u,T|.
inline double divergence_defect(const Solved& s) {
  const SaddleSystem& sys = s.system;
  const std::size_t ns = sys.config().local_stress_size();
  const std::size_t nu = sys.config().local_displacement_size();
  double res = 0.0, scale = 0.0;
  for (std::size_t t = 0; t < sys.mesh->num_triangles(); ++t) {
    const auto off = static_cast<Eigen::Index>(sys.dofs.element_offset(t));
    const Eigen::VectorXd st = s.fields.x().segment(off, static_cast<Eigen::Index>(ns));
    const Eigen::VectorXd rhs = sys.F.segment(off + static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nu));
    res = std::max(res, (sys.divergence[t] * st - rhs).cwiseAbs().maxCoeff());
    scale = std::max({scale, rhs.cwiseAbs().maxCoeff(), sys.divergence[t].cwiseAbs().rowwise().sum().maxCoeff() * st.cwiseAbs().maxCoeff()});
  }
  return res / std::max(scale, 1e-300);
}

/// Row 3: max over multiplier basis functions of |int_e mu . [sigma_h] n_e - G|,
/// relative to the Euclidean norm of the stress coefficients.
inline double normal_jump_defect(const Solved& s) {
  if (s.system.dofs.n_lambda() == 0) return 0.0;
  const Eigen::VectorXd r = s.system.apply_Bt(s.fields.x()) - s.system.G;
  double norm2 = 0.0;
  for (std::size_t t = 0; t < s.system.mesh->num_triangles(); ++t) {
    norm2 += s.fields.x()
                 .segment(static_cast<Eigen::Index>(s.system.dofs.stress_offset(t)),
                          static_cast<Eigen::Index>(s.system.config().local_stress_size()))
                 .squaredNorm();
  }
  return r.cwiseAbs().maxCoeff() / std::max(std::sqrt(norm2), 1e-300);
}

/// u of degree r+5: sigma is not in the discrete space, while all data are
/// polynomials integrated exactly by the assembly rules.
inline ExactSolution smooth_polynomial(int r, const MaterialParams& m) {
  const int k = r + 5;
  return polynomial_solution(Poly2{{{1.0, k, 0}, {0.5, 2, k - 2}, {-0.3, 1, 1}}},
                             Poly2{{{0.7, k - 2, 2}, {-1.0, 0, k}, {0.2, 1, 0}}}, m);
}

struct OrthogonalityDefects {
  double stress = 0.0;    // max relative |(A(s_h - s_H), t_H) + (div t_H, u_h - u_H)|
  double displacement = 0.0;  // max relative |(div(s_h - s_H), v_H)|
};

/// Galerkin orthogonality between the solution on `coarse` and on one AFEM
/// refinement of it, tested with `samples` random coarse functions: normal
/// continuous stresses t_H and broken displacements v_H. Each defect is
/// relative to its Cauchy-Schwarz bound.
inline OrthogonalityDefects galerkin_orthogonality(std::shared_ptr<const Mesh> coarse, const AfemConfig& cfg,
                                                   const AfemProblem& problem, int samples, std::mt19937_64& rng) {
  const AfemStep step = afem_step(coarse, cfg, problem, 0);
  auto fine = std::make_shared<const Mesh>(refine(*coarse, step, RefinementMode::Adaptive));
  const SpaceConfig space = cfg.space;
  const Solved sh = solve(fine, space, problem.data, cfg.pcg);
  const FEFields& H = step.fields;
  const FEFields& h = sh.fields;
  const MaterialParams& mat = problem.data.material;

  // normal-continuous coarse stresses: orthogonal complement of range(B_H)
  const SaddleSystem sys = assemble(coarse, space, problem.data);
  const auto nx = static_cast<Eigen::Index>(sys.dofs.n_x());
  const auto nl = static_cast<Eigen::Index>(sys.dofs.n_lambda());
  Eigen::MatrixXd b(nx, nl);
  for (Eigen::Index j = 0; j < nl; ++j) b.col(j) = sys.apply_B(Eigen::VectorXd::Unit(nl, j));
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> qr(b);
  std::normal_distribution<double> gauss;
  const QuadratureRule& rule = triangle_rule(2 * space.stress_degree() + 2);

  auto div = [](const StressJet& j) { return Vec2(j.dx.xx + j.dy.xy, j.dx.xy + j.dy.yy); };
  OrthogonalityDefects out;
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd tau0 = Eigen::VectorXd::Zero(nx), v = Eigen::VectorXd::Zero(nx);
    for (std::size_t t = 0; t < coarse->num_triangles(); ++t) {
      const auto so = static_cast<Eigen::Index>(sys.dofs.stress_offset(t));
      const auto uo = static_cast<Eigen::Index>(sys.dofs.displacement_offset(t));
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(space.local_stress_size()); ++i) tau0(so + i) = gauss(rng);
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(space.local_displacement_size()); ++i) v(uo + i) = gauss(rng);
    }
    const Eigen::VectorXd tau = tau0 - b * qr.solve(tau0);
    const FEFields T(coarse, sys.dofs, tau, Eigen::VectorXd::Zero(nl));
    const FEFields V(coarse, sys.dofs, v, Eigen::VectorXd::Zero(nl));
    double e1 = 0, a_err = 0, a_tau = 0, d_tau = 0, u_err = 0;
    double e2 = 0, d_err = 0, v_norm = 0;
    for (std::size_t t = 0; t < fine->num_triangles(); ++t) {
      const std::size_t p = fine->parent(t);
      const AffineMap map = AffineMap::of(*fine, t);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2 x = map.to_physical(rule.points[q]);
        const double w = rule.weights[q] * map.det;
        const StressJet jh = h.stress_jet(t, x), jH = H.stress_jet(p, x), jt = T.stress_jet(p, x);
        const Sym2 ds = jh.value - jH.value;
        const Vec2 du = h.displacement(t, x) - H.displacement(p, x);
        const Vec2 vt = V.displacement(p, x);
        e1 += w * (compliance_apply(ds, mat).dot(jt.value) + div(jt).dot(du));
        a_err += w * compliance_apply(ds, mat).dot(ds);
        a_tau += w * compliance_apply(jt.value, mat).dot(jt.value);
        d_tau += w * div(jt).squaredNorm();
        u_err += w * du.squaredNorm();
        const Vec2 dd = div(jh) - div(jH);
        e2 += w * dd.dot(vt);
        d_err += w * dd.squaredNorm();
        v_norm += w * vt.squaredNorm();
      }
    }
    const double bound1 = std::sqrt(a_err * a_tau) + std::sqrt(d_tau * u_err);
    const double bound2 = std::sqrt(d_err * v_norm);
    out.stress = std::max(out.stress, std::abs(e1) / std::max(bound1, 1e-300));
    out.displacement = std::max(out.displacement, bound2 > 0 ? std::abs(e2) / bound2 : 0.0);
  }
  return out;
}

/// Minimal-cardinality Dorfler set size by exhaustive search over subsets.
inline std::size_t exhaustive_min_cardinality(const std::vector<double>& v, double theta) {
  double total = 0.0;
  for (double x : v) total += x;
  const double goal = theta * theta * total;
  const std::size_t n = v.size();
  std::size_t best = n + 1;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double sum = 0.0;
    std::size_t card = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        sum += v[i];
        ++card;
      }
    }
    if (sum >= goal && card < best) best = card;
  }
  return best;
}

}  // namespace hmfem::testing

namespace hmfem::testing {

/// Stress coefficients of the elementwise L2 projection of s onto P_{r+3}(T,S)
/// for every triangle, laid out as FEFields::x() (displacements zero).
inline Eigen::VectorXd project_stress(const Mesh& mesh, const DofMap& dofs, const std::function<Sym2(const Vec2&)>& s) {
  const SpaceConfig cfg = dofs.config();
  const ReferenceBasis& basis = reference_basis(cfg.stress_degree());
  const QuadratureRule& rule = triangle_rule(2 * cfg.stress_degree() + 8);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.n_x()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const AffineMap map = AffineMap::of(mesh, t);
    const auto off = static_cast<Eigen::Index>(dofs.stress_offset(t));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd psi = basis.values(rule.points[q]) * map.scale();
      const Sym2 v = s(map.to_physical(rule.points[q]));
      const double w = rule.weights[q] * map.det;
      x.segment(off, n) += w * v.xx * psi;
      x.segment(off + n, n) += w * v.xy * psi;
      x.segment(off + 2 * n, n) += w * v.yy * psi;
    }
  }
  return x;
}

inline FEFields stress_field(std::shared_ptr<const Mesh> mesh, SpaceConfig cfg, const std::function<Sym2(const Vec2&)>& s) {
  DofMap dofs(*mesh, cfg);
  Eigen::VectorXd x = project_stress(*mesh, dofs, s);
  const auto nl = static_cast<Eigen::Index>(dofs.n_lambda());
  return FEFields(std::move(mesh), std::move(dofs), std::move(x), Eigen::VectorXd::Zero(nl));
}

}  // namespace hmfem::testing
