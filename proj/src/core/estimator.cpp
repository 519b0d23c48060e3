#include "estimator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace hmfem {

namespace {

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

int edge_exactness(SpaceConfig cfg) { return 2 * (cfg.r + 4) + 4; }

}  // namespace

double EstimatorReport::bar_eta_on(std::span<const std::size_t> subset) const {
  double s = 0.0;
  for (std::size_t t : subset) s += bar_eta2.at(t);
  return std::sqrt(s);
}

double EstimatorReport::osc_on(std::span<const std::size_t> subset) const {
  double s = 0.0;
  for (std::size_t t : subset) s += osc2.at(t);
  return std::sqrt(s);
}

EstimatorReport make_report(std::vector<double> eta2, std::vector<double> osc2) {
  if (eta2.size() != osc2.size()) throw Error(ErrorKind::Argument, "indicator lists differ in length");
  EstimatorReport rep;
  rep.bar_eta2.resize(eta2.size());
  for (std::size_t i = 0; i < eta2.size(); ++i) {
    if (!(eta2[i] >= 0.0) || !(osc2[i] >= 0.0)) throw Error(ErrorKind::Numerical, "negative or non-finite indicator");
    rep.bar_eta2[i] = eta2[i] + osc2[i];
  }
  rep.eta = std::sqrt(sum(eta2));
  rep.osc = std::sqrt(sum(osc2));
  rep.bar_eta = std::sqrt(sum(rep.bar_eta2));
  rep.eta2 = std::move(eta2);
  rep.osc2 = std::move(osc2);
  return rep;
}

Vec2 rot(const Sym2& dx, const Sym2& dy) { return {dx.xy - dy.xx, dx.yy - dy.xy}; }

double rot_rot(const Sym2& dxx, const Sym2& dxy, const Sym2& dyy) { return dyy.xx - 2.0 * dxy.xy + dxx.yy; }

double rot_rot_compliance(const FEFields& fields, std::size_t t, const Vec2& x, const MaterialParams& m) {
  const StressJet j = fields.stress_jet(t, x);
  return rot_rot(compliance_apply(j.dxx, m), compliance_apply(j.dxy, m), compliance_apply(j.dyy, m));
}

double element_term_sq(const FEFields& fields, std::size_t t, const MaterialParams& m) {
  const Mesh& mesh = fields.mesh();
  const int r = fields.dofs().config().r;
  const QuadratureRule& rule = triangle_rule(2 * (r + 1));
  const AffineMap map = AffineMap::of(mesh, t);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double v = rot_rot_compliance(fields, t, map.to_physical(rule.points[q]), m);
    acc += rule.weights[q] * v * v;
  }
  const double h2 = mesh.area(t);  // h_T^2
  return h2 * h2 * acc * map.det;
}

double edge_term_sq(const FEFields& fields, std::size_t e, const ProblemData& data, EstimatorOptions opts) {
  const Mesh& mesh = fields.mesh();
  const Edge& ed = mesh.edge(e);
  if (ed.kind == BoundaryKind::Neumann) return 0.0;
  const MaterialParams& m = data.material;
  const QuadratureRule& rule = edge_rule(edge_exactness(fields.dofs().config()));
  const Vec2 a = mesh.vertex(ed.v[0]);
  const Vec2 b = mesh.vertex(ed.v[1]);
  const double he = mesh.edge_length(e);
  Vec2 t = mesh.tangent(e);
  Vec2 n = mesh.normal(e);
  double sign = 1.0;
  if (opts.swap_sides && ed.interior()) {
    t = -t;
    n = -n;
    sign = -1.0;
  }
  // A sigma_h, its tangential derivative and rot on one side
  struct Side {
    Sym2 v, dt;
    Vec2 rot;
  };
  auto side = [&](std::size_t tri, const Vec2& x) {
    const StressJet j = fields.stress_jet(tri, x);
    const Sym2 dx = compliance_apply(j.dx, m), dy = compliance_apply(j.dy, m);
    return Side{compliance_apply(j.value, m), t.x() * dx + t.y() * dy, rot(dx, dy)};
  };
  if (!ed.interior() && (!data.grad_g_D || !data.hess_g_D)) {
    throw Error(ErrorKind::Argument, "estimator needs first and second derivatives of the Dirichlet data");
  }
  double first = 0.0, second = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 x = a + rule.abscissae[q] * (b - a);
    double j1, j2;
    if (ed.interior()) {
      const Side p = side(ed.plus, x), mi = side(ed.minus, x);
      const Sym2 jump = sign * (p.v - mi.v);
      const Sym2 jump_dt = sign * (p.dt - mi.dt);
      const Vec2 jump_rot = sign * (p.rot - mi.rot);
      j1 = t.dot(jump.apply(t));
      j2 = n.dot(jump_dt.apply(t)) - jump_rot.dot(t);
    } else {
      const Side p = side(ed.plus, x);
      const Mat2 g = data.grad_g_D(x);
      const auto hs = data.hess_g_D(x);
      const Vec2 d2g(t.dot(hs[0] * t), t.dot(hs[1] * t));
      j1 = t.dot(p.v.apply(t) - g * t);
      j2 = n.dot(p.dt.apply(t)) - p.rot.dot(t) - n.dot(d2g);
    }
    first += rule.weights[q] * j1 * j1;
    second += rule.weights[q] * j2 * j2;
  }
  // weights sum to 1 on [0,1]; ds = he dsigma
  return he * he * first + he * he * he * he * second;
}

std::vector<double> indicators_sq(const FEFields& fields, const ProblemData& data, EstimatorOptions opts) {
  const Mesh& mesh = fields.mesh();
  std::vector<double> out(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) out[t] = element_term_sq(fields, t, data.material);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const double v = edge_term_sq(fields, e, data, opts);
    const Edge& ed = mesh.edge(e);
    out[ed.plus] += v;
    if (ed.minus != npos) out[ed.minus] += v;
  }
  return out;
}

double oscillation_sq(const Mesh& mesh, std::size_t t, const VectorField& f, SpaceConfig cfg) {
  const QuadratureRule& rule = triangle_rule(2 * (cfg.r + 3) + 6);
  const ReferenceBasis& basis = reference_basis(cfg.displacement_degree());
  const AffineMap map = AffineMap::of(mesh, t);
  const auto nq = static_cast<Eigen::Index>(rule.size());
  const auto nb = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd psi(nq, nb);
  Eigen::MatrixXd fv(nq, 2);
  Eigen::VectorXd w(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    psi.row(q) = basis.values(rule.points[qi]).transpose();
    const Vec2 v = f(map.to_physical(rule.points[qi]));
    if (!std::isfinite(v.x()) || !std::isfinite(v.y())) {
      throw Error(ErrorKind::Numerical, "load returned a non-finite value at a quadrature point");
    }
    fv.row(q) = v.transpose();
    w(q) = rule.weights[qi];
  }
  // coefficients in the reference-orthonormal basis (reference measure)
  const Eigen::MatrixXd coef = psi.transpose() * w.asDiagonal() * fv;
  const Eigen::MatrixXd res = fv - psi * coef;
  const double norm2 = (w.asDiagonal() * res.cwiseProduct(res)).sum() * map.det;
  return mesh.area(t) * norm2;
}

std::vector<double> oscillation_sq(const Mesh& mesh, const VectorField& f, SpaceConfig cfg) {
  std::vector<double> out(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) out[t] = oscillation_sq(mesh, t, f, cfg);
  return out;
}

EstimatorReport estimate(const FEFields& fields, const ProblemData& data) {
  return make_report(indicators_sq(fields, data), oscillation_sq(fields.mesh(), data.f, fields.dofs().config()));
}

void write_indicators(std::ostream& os, const EstimatorReport& report) {
  os << "elem,eta2,osc2\n" << std::setprecision(17);
  for (std::size_t t = 0; t < report.eta2.size(); ++t) os << t << ',' << report.eta2[t] << ',' << report.osc2[t] << '\n';
}

}  // namespace hmfem
