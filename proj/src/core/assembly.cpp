#include "assembly.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>

namespace hmfem {
namespace {

void require_finite(const Vec2& v, const char* what) {
  if (!std::isfinite(v.x()) || !std::isfinite(v.y())) {
    throw Error(ErrorKind::Numerical, std::string(what) + " returned a non-finite value at a quadrature point");
  }
}

// Applies K (x) I to a local stress vector.
Eigen::VectorXd kron_apply(const Eigen::Matrix3d& k, const Eigen::Ref<const Eigen::VectorXd>& s, std::size_t n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * n);
  const auto ni = static_cast<Eigen::Index>(n);
  for (int c = 0; c < 3; ++c) {
    for (int d = 0; d < 3; ++d) {
      if (k(c, d) != 0.0) out.segment(c * ni, ni) += k(c, d) * s.segment(d * ni, ni);
    }
  }
  return out;
}

// Edge parametrization x(s) = a + s (b - a) following the stored edge orientation.
struct EdgeGeometry {
  Vec2 a, b;
  double length;
  Vec2 normal;
  Vec2 at(double s) const { return a + s * (b - a); }
};

EdgeGeometry edge_geometry(const Mesh& mesh, std::size_t e) {
  const Edge& ed = mesh.edge(e);
  return {mesh.vertex(ed.v[0]), mesh.vertex(ed.v[1]), mesh.edge_length(e), mesh.normal(e)};
}

// Endpoints of edge e in the reference coordinates of triangle t, taken from
// the local vertex numbers rather than by inverting the affine map.
std::array<Vec2, 2> reference_edge(const Mesh& mesh, std::size_t e, std::size_t t) {
  static const Vec2 corner[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  const Edge& ed = mesh.edge(e);
  const Triangle& tri = mesh.triangle(t);
  std::array<Vec2, 2> out;
  for (int k = 0; k < 2; ++k) {
    const auto* it = std::find(tri.v.begin(), tri.v.end(), ed.v[k]);
    if (it == tri.v.end()) throw Error(ErrorKind::Argument, "edge is not a side of the triangle");
    out[k] = corner[it - tri.v.begin()];
  }
  return out;
}

}  // namespace

Eigen::Matrix<double, 3, 2> normal_components(const Vec2& n) {
  Eigen::Matrix<double, 3, 2> nc;
  nc << n.x(), 0.0, n.y(), n.x(), 0.0, n.y();
  return nc;
}

const ReferenceElement& ReferenceElement::get(SpaceConfig cfg) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<ReferenceElement>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[cfg.r];
  if (slot) return *slot;
  cfg.validate();
  auto ref = std::make_unique<ReferenceElement>();
  ref->cfg = cfg;
  ref->stress = &reference_basis(cfg.stress_degree());
  ref->displacement = &reference_basis(cfg.displacement_degree());
  const auto ns = static_cast<Eigen::Index>(cfg.stress_scalar_dim());
  const auto nu = static_cast<Eigen::Index>(cfg.displacement_scalar_dim());
  const QuadratureRule& exact = triangle_rule(2 * cfg.stress_degree());
  ref->gx = Eigen::MatrixXd::Zero(nu, ns);
  ref->gy = Eigen::MatrixXd::Zero(nu, ns);
  for (std::size_t q = 0; q < exact.size(); ++q) {
    const BasisTabulation s = ref->stress->tabulate(exact.points[q], false);
    const Eigen::VectorXd u = ref->displacement->values(exact.points[q]);
    ref->gx += exact.weights[q] * u * s.dx.transpose();
    ref->gy += exact.weights[q] * u * s.dy.transpose();
  }
  ref->volume_rule = &triangle_rule(2 * cfg.stress_degree() + 2);
  ref->volume_disp_values.resize(static_cast<Eigen::Index>(ref->volume_rule->size()), nu);
  for (std::size_t q = 0; q < ref->volume_rule->size(); ++q) {
    ref->volume_disp_values.row(static_cast<Eigen::Index>(q)) = ref->displacement->values(ref->volume_rule->points[q]).transpose();
  }
  ref->edge_rule = &hmfem::edge_rule(2 * (cfg.r + 4));
  slot = std::move(ref);
  return *slot;
}

Eigen::MatrixXd local_divergence(const Mesh& mesh, std::size_t t, const ReferenceElement& ref) {
  const AffineMap map = AffineMap::of(mesh, t);
  // grad psi = J^{-T} grad_ref psi (the 1/sqrt(det) scalings cancel against det)
  const Eigen::MatrixXd gx = map.inverse(0, 0) * ref.gx + map.inverse(1, 0) * ref.gy;
  const Eigen::MatrixXd gy = map.inverse(0, 1) * ref.gx + map.inverse(1, 1) * ref.gy;
  const auto ns = gx.cols();
  const auto nu = gx.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * nu, 3 * ns);
  // div(psi E_xx) = (dx psi, 0), div(psi E_xy) = (dy psi, dx psi), div(psi E_yy) = (0, dy psi)
  d.block(0, 0, nu, ns) = gx;
  d.block(0, ns, nu, ns) = gy;
  d.block(nu, ns, nu, ns) = gx;
  d.block(nu, 2 * ns, nu, ns) = gy;
  return d;
}

Eigen::MatrixXd local_block(const Mesh& mesh, std::size_t t, SpaceConfig cfg, const MaterialParams& m) {
  const ReferenceElement& ref = ReferenceElement::get(cfg);
  const Eigen::MatrixXd d = local_divergence(mesh, t, ref);
  const auto ns = static_cast<Eigen::Index>(cfg.stress_scalar_dim());
  const auto nsl = 3 * ns;
  const auto n = static_cast<Eigen::Index>(cfg.local_size());
  const Eigen::Matrix3d k = compliance_components(m);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < 3; ++c) {
    for (int e = 0; e < 3; ++e) {
      a.block(c * ns, e * ns, ns, ns).diagonal().setConstant(k(c, e));
    }
  }
  a.block(0, nsl, nsl, n - nsl) = d.transpose();
  a.block(nsl, 0, n - nsl, nsl) = d;
  return a;
}

namespace {

Eigen::MatrixXd edge_trace(const Mesh& mesh, std::size_t e, std::size_t t, const ReferenceElement& ref) {
  const EdgeGeometry g = edge_geometry(mesh, e);
  const AffineMap map = AffineMap::of(mesh, t);
  const QuadratureRule& rule = *ref.edge_rule;
  const int k = ref.cfg.multiplier_degree();
  Eigen::MatrixXd tr = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ref.cfg.stress_scalar_dim()), k + 1);
  const double lscale = 1.0 / std::sqrt(g.length);
  const auto [ra, rb] = reference_edge(mesh, e, t);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double s = rule.abscissae[q];
    const Eigen::VectorXd psi = ref.stress->values(ra + s * (rb - ra)) * map.scale();
    const Eigen::VectorXd l = legendre_values(k, s) * lscale;
    tr += (rule.weights[q] * g.length) * psi * l.transpose();
  }
  return tr;
}

Eigen::MatrixXd expand_coupling(const Eigen::MatrixXd& trace, const Vec2& n, double sign) {
  const auto ns = trace.rows();
  const auto nl = trace.cols();
  const auto nc = normal_components(n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3 * ns, 2 * nl);
  for (int c = 0; c < 3; ++c) {
    for (int d = 0; d < 2; ++d) {
      if (nc(c, d) != 0.0) b.block(c * ns, d * nl, ns, nl) = (sign * nc(c, d)) * trace;
    }
  }
  return b;
}

}  // namespace

Eigen::MatrixXd local_edge_coupling(const Mesh& mesh, std::size_t e, std::size_t t, SpaceConfig cfg) {
  const Edge& ed = mesh.edge(e);
  if (ed.kind == BoundaryKind::Dirichlet) throw Error(ErrorKind::Argument, "edge coupling requested on a Dirichlet edge");
  if (ed.plus != t && ed.minus != t) throw Error(ErrorKind::Argument, "triangle is not adjacent to edge");
  const ReferenceElement& ref = ReferenceElement::get(cfg);
  return expand_coupling(edge_trace(mesh, e, t, ref), mesh.normal(e), mesh.side_sign(e, t));
}

Eigen::VectorXd local_rhs(const Mesh& mesh, std::size_t t, const ProblemData& data, SpaceConfig cfg) {
  const ReferenceElement& ref = ReferenceElement::get(cfg);
  const AffineMap map = AffineMap::of(mesh, t);
  const auto ns = static_cast<Eigen::Index>(cfg.stress_scalar_dim());
  const auto nu = static_cast<Eigen::Index>(cfg.displacement_scalar_dim());
  const auto nsl = 3 * ns;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.local_size()));

  if (data.f) {
    const QuadratureRule& rule = *ref.volume_rule;
    const double jac = map.det * map.scale();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 fv = data.f(map.to_physical(rule.points[q]));
      require_finite(fv, "load f");
      const auto row = ref.volume_disp_values.row(static_cast<Eigen::Index>(q));
      rhs.segment(nsl, nu) += (rule.weights[q] * jac * fv.x()) * row.transpose();
      rhs.segment(nsl + nu, nu) += (rule.weights[q] * jac * fv.y()) * row.transpose();
    }
  }

  for (std::size_t e : mesh.triangle_edges(t)) {
    if (mesh.edge(e).kind != BoundaryKind::Dirichlet || !data.g_D) continue;
    const EdgeGeometry g = edge_geometry(mesh, e);
    const auto nc = normal_components(g.normal);
    const QuadratureRule& rule = *ref.edge_rule;
    const auto [ra, rb] = reference_edge(mesh, e, t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = rule.abscissae[q];
      const Vec2 x = g.at(s);
      const Vec2 gd = data.g_D(x);
      require_finite(gd, "Dirichlet data g_D");
      const Eigen::VectorXd psi = ref.stress->values(ra + s * (rb - ra)) * map.scale();
      const double w = rule.weights[q] * g.length;
      for (int c = 0; c < 3; ++c) {
        const double proj = nc(c, 0) * gd.x() + nc(c, 1) * gd.y();
        if (proj != 0.0) rhs.segment(c * ns, ns) += (w * proj) * psi;
      }
    }
  }
  return rhs;
}

Eigen::VectorXd local_neumann_rhs(const Mesh& mesh, std::size_t e, const ProblemData& data, SpaceConfig cfg) {
  const Edge& ed = mesh.edge(e);
  if (ed.kind != BoundaryKind::Neumann) throw Error(ErrorKind::Argument, "Neumann data requested on a non-Neumann edge");
  const ReferenceElement& ref = ReferenceElement::get(cfg);
  const int k = cfg.multiplier_degree();
  const auto nl = static_cast<Eigen::Index>(k + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * nl);
  if (!data.g_N) return rhs;
  const EdgeGeometry g = edge_geometry(mesh, e);
  const QuadratureRule& rule = *ref.edge_rule;
  const double lscale = 1.0 / std::sqrt(g.length);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double s = rule.abscissae[q];
    const Vec2 gn = data.g_N(g.at(s), g.normal, ed.component);
    require_finite(gn, "traction g_N");
    const Eigen::VectorXd l = legendre_values(k, s) * (lscale * rule.weights[q] * g.length);
    rhs.head(nl) += gn.x() * l;
    rhs.tail(nl) += gn.y() * l;
  }
  return rhs;
}

double compatibility_defect(const Mesh& mesh, const ProblemData& data, SpaceConfig cfg) {
  if (mesh.has_dirichlet()) return 0.0;
  const ReferenceElement& ref = ReferenceElement::get(cfg);
  auto rigid = [](int i, const Vec2& x) -> Vec2 {
    if (i == 0) return {1.0, 0.0};
    if (i == 1) return {0.0, 1.0};
    return {-x.y(), x.x()};
  };
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    double net = 0.0, scale = 0.0;
    if (data.f) {
      for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const AffineMap map = AffineMap::of(mesh, t);
        const QuadratureRule& rule = *ref.volume_rule;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Vec2 x = map.to_physical(rule.points[q]);
          const Vec2 fv = data.f(x);
          const double w = rule.weights[q] * map.det;
          net += w * fv.dot(rigid(i, x));
          scale += w * fv.norm() * rigid(i, x).norm();
        }
      }
    }
    if (data.g_N) {
      for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const Edge& ed = mesh.edge(e);
        if (ed.kind != BoundaryKind::Neumann) continue;
        const EdgeGeometry g = edge_geometry(mesh, e);
        const QuadratureRule& rule = *ref.edge_rule;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Vec2 x = g.at(rule.abscissae[q]);
          const Vec2 gn = data.g_N(x, g.normal, ed.component);
          const double w = rule.weights[q] * g.length;
          net -= w * gn.dot(rigid(i, x));
          scale += w * gn.norm() * rigid(i, x).norm();
        }
      }
    }
    if (scale > 0.0) worst = std::max(worst, std::abs(net) / scale);
  }
  return worst;
}

SaddleSystem assemble(std::shared_ptr<const Mesh> mesh_ptr, SpaceConfig cfg, const ProblemData& data) {
  data.material.validate();
  const Mesh& mesh = *mesh_ptr;
  const ReferenceElement& ref = ReferenceElement::get(cfg);
  SaddleSystem sys;
  sys.mesh = mesh_ptr;
  sys.dofs = DofMap(mesh, cfg);
  sys.material = data.material;
  sys.compliance = compliance_components(data.material);

  const std::size_t nt = mesh.num_triangles();
  const auto nloc = static_cast<Eigen::Index>(cfg.local_size());
  sys.divergence.resize(nt);
  sys.F = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dofs.n_x()));
  for (std::size_t t = 0; t < nt; ++t) {
    sys.divergence[t] = local_divergence(mesh, t, ref);
    sys.F.segment(static_cast<Eigen::Index>(sys.dofs.element_offset(t)), nloc) = local_rhs(mesh, t, data, cfg);
  }

  const auto& medges = sys.dofs.multiplier_edges();
  const auto nlm = static_cast<Eigen::Index>(cfg.edge_multiplier_size());
  sys.coupling.resize(medges.size());
  sys.G = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dofs.n_lambda()));
  for (std::size_t k = 0; k < medges.size(); ++k) {
    const std::size_t e = medges[k];
    const Edge& ed = mesh.edge(e);
    sys.coupling[k].push_back(EdgeSide{ed.plus, 1.0, edge_trace(mesh, e, ed.plus, ref)});
    if (ed.minus != npos) sys.coupling[k].push_back(EdgeSide{ed.minus, -1.0, edge_trace(mesh, e, ed.minus, ref)});
    if (ed.kind == BoundaryKind::Neumann) {
      sys.G.segment(static_cast<Eigen::Index>(k) * nlm, nlm) = local_neumann_rhs(mesh, e, data, cfg);
    }
  }

  const double defect = compatibility_defect(mesh, data, cfg);
  if (defect > 1e-10) {
    sys.warnings.push_back("pure traction problem: load and traction are not balanced against rigid motions (relative defect " +
                           std::to_string(defect) + ")");
  }
  return sys;
}

Eigen::MatrixXd SaddleSystem::local_block(std::size_t t) const {
  const auto ns = static_cast<Eigen::Index>(config().stress_scalar_dim());
  const auto nsl = 3 * ns;
  const auto n = static_cast<Eigen::Index>(config().local_size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < 3; ++c) {
    for (int e = 0; e < 3; ++e) a.block(c * ns, e * ns, ns, ns).diagonal().setConstant(compliance(c, e));
  }
  a.block(0, nsl, nsl, n - nsl) = divergence[t].transpose();
  a.block(nsl, 0, n - nsl, nsl) = divergence[t];
  return a;
}

Eigen::MatrixXd SaddleSystem::coupling_block(std::size_t slot, std::size_t side) const {
  const EdgeSide& s = coupling[slot][side];
  return expand_coupling(s.trace, mesh->normal(dofs.multiplier_edges()[slot]), s.sign);
}

Eigen::VectorXd SaddleSystem::apply_A(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  const std::size_t ns = config().stress_scalar_dim();
  const auto nsl = static_cast<Eigen::Index>(3 * ns);
  const auto nul = static_cast<Eigen::Index>(config().local_displacement_size());
  for (std::size_t t = 0; t < divergence.size(); ++t) {
    const auto off = static_cast<Eigen::Index>(dofs.element_offset(t));
    const auto xs = x.segment(off, nsl);
    const auto xu = x.segment(off + nsl, nul);
    y.segment(off, nsl) = kron_apply(compliance, xs, ns) + divergence[t].transpose() * xu;
    y.segment(off + nsl, nul) = divergence[t] * xs;
  }
  return y;
}

Eigen::VectorXd SaddleSystem::apply_B(const Eigen::VectorXd& lambda) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.n_x()));
  const auto nlm = static_cast<Eigen::Index>(config().edge_multiplier_size());
  const auto nsl = static_cast<Eigen::Index>(config().local_stress_size());
  for (std::size_t k = 0; k < coupling.size(); ++k) {
    for (std::size_t side = 0; side < coupling[k].size(); ++side) {
      const auto off = static_cast<Eigen::Index>(dofs.stress_offset(coupling[k][side].triangle));
      y.segment(off, nsl) += coupling_block(k, side) * lambda.segment(static_cast<Eigen::Index>(k) * nlm, nlm);
    }
  }
  return y;
}

Eigen::VectorXd SaddleSystem::apply_Bt(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.n_lambda()));
  const auto nlm = static_cast<Eigen::Index>(config().edge_multiplier_size());
  const auto nsl = static_cast<Eigen::Index>(config().local_stress_size());
  for (std::size_t k = 0; k < coupling.size(); ++k) {
    for (std::size_t side = 0; side < coupling[k].size(); ++side) {
      const auto off = static_cast<Eigen::Index>(dofs.stress_offset(coupling[k][side].triangle));
      y.segment(static_cast<Eigen::Index>(k) * nlm, nlm) += coupling_block(k, side).transpose() * x.segment(off, nsl);
    }
  }
  return y;
}

void SaddleSystem::write_triplets(std::ostream& os) const {
  os << std::setprecision(17);
  const std::size_t nx = dofs.n_x();
  for (std::size_t t = 0; t < divergence.size(); ++t) {
    const Eigen::MatrixXd a = local_block(t);
    const std::size_t off = dofs.element_offset(t);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (a(i, j) != 0.0) os << off + i << ' ' << off + j << ' ' << a(i, j) << '\n';
      }
    }
  }
  const std::size_t nlm = config().edge_multiplier_size();
  for (std::size_t k = 0; k < coupling.size(); ++k) {
    for (std::size_t side = 0; side < coupling[k].size(); ++side) {
      const Eigen::MatrixXd b = coupling_block(k, side);
      const std::size_t roff = dofs.stress_offset(coupling[k][side].triangle);
      const std::size_t coff = nx + k * nlm;
      for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
          if (b(i, j) == 0.0) continue;
          os << roff + i << ' ' << coff + j << ' ' << b(i, j) << '\n';
          os << coff + j << ' ' << roff + i << ' ' << b(i, j) << '\n';
        }
      }
    }
  }
}

}  // namespace hmfem
