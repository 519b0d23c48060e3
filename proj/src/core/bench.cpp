#include "bench.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hmfem {

Sym2 ExactSolution::strain(const Vec2& x) const { return Sym2::from_matrix(grad_u(x)); }

Sym2 ExactSolution::sigma(const Vec2& x) const { return stiffness_apply(strain(x), material); }

Vec2 ExactSolution::f(const Vec2& x) const {
  const auto h = hess_u(x);
  const Vec2 lap(h[0].trace(), h[1].trace());
  const Vec2 grad_div(h[0](0, 0) + h[1](0, 1), h[0](1, 0) + h[1](1, 1));
  return material.mu * lap + (material.lambda + material.mu) * grad_div;
}

ProblemData ExactSolution::problem_data() const {
  ProblemData d;
  const ExactSolution self = *this;
  d.f = [self](const Vec2& x) { return self.f(x); };
  d.g_D = u;
  d.grad_g_D = grad_u;
  d.hess_g_D = hess_u;
  d.g_N = [self](const Vec2& x, const Vec2& n, int) { return self.sigma(x).apply(n); };
  d.material = material;
  return d;
}

double Poly2::operator()(const Vec2& x) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.c * std::pow(x.x(), t.a) * std::pow(x.y(), t.b);
  return s;
}

Poly2 Poly2::dx() const {
  Poly2 p;
  for (const auto& t : terms) {
    if (t.a > 0) p.terms.push_back({t.c * t.a, t.a - 1, t.b});
  }
  return p;
}

Poly2 Poly2::dy() const {
  Poly2 p;
  for (const auto& t : terms) {
    if (t.b > 0) p.terms.push_back({t.c * t.b, t.a, t.b - 1});
  }
  return p;
}

int Poly2::degree() const {
  int d = 0;
  for (const auto& t : terms) d = std::max(d, t.a + t.b);
  return d;
}

ExactSolution polynomial_solution(Poly2 u1, Poly2 u2, const MaterialParams& m) {
  ExactSolution ex;
  ex.material = m;
  const Poly2 g[2][2] = {{u1.dx(), u1.dy()}, {u2.dx(), u2.dy()}};
  const Poly2 h[2][3] = {{u1.dx().dx(), u1.dx().dy(), u1.dy().dy()}, {u2.dx().dx(), u2.dx().dy(), u2.dy().dy()}};
  ex.u = [u1, u2](const Vec2& x) { return Vec2(u1(x), u2(x)); };
  ex.grad_u = [g0 = g[0][0], g1 = g[0][1], g2 = g[1][0], g3 = g[1][1]](const Vec2& x) {
    Mat2 j;
    j << g0(x), g1(x), g2(x), g3(x);
    return j;
  };
  ex.hess_u = [a0 = h[0][0], a1 = h[0][1], a2 = h[0][2], b0 = h[1][0], b1 = h[1][1], b2 = h[1][2]](const Vec2& x) {
    std::array<Mat2, 2> out;
    out[0] << a0(x), a1(x), a1(x), a2(x);
    out[1] << b0(x), b1(x), b1(x), b2(x);
    return out;
  };
  return ex;
}

ExactSolution manufactured_polynomial(int r, const MaterialParams& m) {
  if (r < 0) throw Error(ErrorKind::Argument, "manufactured solution needs r >= 0");
  Poly2 u1{{{1.0, r + 4, 0}, {1.0, 0, 2}}};
  Poly2 u2{{{1.0, 1, 1}}};
  if (r > 0) u2.terms.push_back({1.0, r, 4});
  return polynomial_solution(std::move(u1), std::move(u2), m);
}

double lshape_characteristic(double z, double lambda, double mu, double omega) {
  const double a = (lambda + 3.0 * mu) * std::sin(z * omega);
  const double b = (lambda + mu) * z * std::sin(omega);
  return a * a - b * b;
}

double find_z(double lambda, double mu, double omega) {
  MaterialParams{mu, lambda}.validate();
  auto res = [&](double z) { return lshape_characteristic(z, lambda, mu, omega); };
  constexpr int kIntervals = 400;
  double lo = 0.0, hi = 0.0;
  bool found = false;
  double prev_z = 1.0 / kIntervals;
  double prev = res(prev_z);
  for (int i = 2; i <= kIntervals; ++i) {
    const double zi = static_cast<double>(i) / kIntervals;
    const double ri = res(zi);
    if (prev == 0.0) {
      return prev_z;
    }
    if ((prev > 0) != (ri > 0)) {
      lo = prev_z;
      hi = zi;
      found = true;
      break;
    }
    prev_z = zi;
    prev = ri;
  }
  if (!found) throw Error(ErrorKind::Numerical, "no sign change of the characteristic equation in (0,1)");
  double rlo = res(lo);
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double rm = res(mid);
    if (rm == 0.0) return mid;
    if ((rm > 0) == (rlo > 0)) {
      lo = mid;
      rlo = rm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// sum of c * sin(k theta) or c * cos(k theta)
struct Trig {
  struct Term {
    double c, k;
    bool sine;
  };
  std::vector<Term> terms;

  double operator()(double t) const {
    double s = 0.0;
    for (const auto& tm : terms) s += tm.c * (tm.sine ? std::sin(tm.k * t) : std::cos(tm.k * t));
    return s;
  }
  Trig derivative() const {
    Trig d;
    for (const auto& tm : terms) d.terms.push_back({tm.sine ? tm.c * tm.k : -tm.c * tm.k, tm.k, !tm.sine});
    return d;
  }
};

}  // namespace

ExactSolution lshape_exact(const MaterialParams& m) {
  m.validate();
  const double omega = 1.5 * std::numbers::pi;
  const double z = find_z(m.lambda, m.mu, omega);
  const double L = m.lambda + m.mu;
  const double a1 = (z + 2.0) * L + 4.0 * m.mu;
  const double a2 = (2.0 - z) * L + 4.0 * m.mu;
  const double c1 = z * L * std::sin((z - 2.0) * omega) + a2 * std::sin(z * omega);
  const double c2 = z * L * (std::cos((z - 2.0) * omega) - std::cos(z * omega));
  // Phi = c1 Phi_1 - c2 Phi_2
  Trig phi[2];
  phi[0].terms = {{c1 * a1, z, true}, {-c1 * z * L, z - 2.0, true}, {-c2 * z * L, z - 2.0, false}, {c2 * z * L, z, false}};
  phi[1].terms = {{c1 * z * L, z, false}, {-c1 * z * L, z - 2.0, false}, {c2 * a2, z, true}, {c2 * z * L, z - 2.0, true}};
  const Trig dphi[2] = {phi[0].derivative(), phi[1].derivative()};
  const Trig ddphi[2] = {dphi[0].derivative(), dphi[1].derivative()};
  const double scale = 1.0 / (L * L);

  struct Polar {
    double r, c, s, theta;
  };
  auto polar = [](const Vec2& x) {
    const double r = x.norm();
    if (r == 0.0) throw Error(ErrorKind::Numerical, "L-shape exact solution evaluated at the re-entrant corner");
    double th = std::atan2(x.y(), x.x());
    if (th < 0.0) th += 2.0 * std::numbers::pi;
    return Polar{r, x.x() / r, x.y() / r, th};
  };
  // cutoff q = (x^2-1)(y^2-1) / (lambda+mu)^2 with gradient and Hessian
  auto cutoff = [scale](const Vec2& x, Vec2& grad, Mat2& hess) {
    const double ax = x.x() * x.x() - 1.0, ay = x.y() * x.y() - 1.0;
    grad = scale * Vec2(2.0 * x.x() * ay, 2.0 * x.y() * ax);
    hess << 2.0 * ay, 4.0 * x.x() * x.y(), 4.0 * x.x() * x.y(), 2.0 * ax;
    hess *= scale;
    return scale * ax * ay;
  };
  // singular factor v_i = r^z Phi_i(theta): value, Cartesian gradient and Hessian
  struct Jet {
    double v;
    Vec2 g;
    Mat2 h;
  };
  auto singular = [=](const Vec2& x, int i) {
    const Polar p = polar(x);
    const double rz = std::pow(p.r, z);
    const double f0 = phi[i](p.theta), f1 = dphi[i](p.theta), f2 = ddphi[i](p.theta);
    const double vr = z * rz / p.r * f0;
    const double vt = rz * f1;
    const double vrr = z * (z - 1.0) * rz / (p.r * p.r) * f0;
    const double vrt = z * rz / p.r * f1;
    const double vtt = rz * f2;
    const double c = p.c, s = p.s, r = p.r;
    Jet j;
    j.v = rz * f0;
    j.g = Vec2(c * vr - s / r * vt, s * vr + c / r * vt);
    const double hxx = c * c * vrr - 2.0 * c * s / r * vrt + s * s / (r * r) * vtt + s * s / r * vr + 2.0 * c * s / (r * r) * vt;
    const double hyy = s * s * vrr + 2.0 * c * s / r * vrt + c * c / (r * r) * vtt + c * c / r * vr - 2.0 * c * s / (r * r) * vt;
    const double hxy = c * s * vrr + (c * c - s * s) / r * vrt - c * s / (r * r) * vtt - c * s / r * vr -
                       (c * c - s * s) / (r * r) * vt;
    j.h << hxx, hxy, hxy, hyy;
    return j;
  };

  ExactSolution ex;
  ex.material = m;
  ex.singular_point = Vec2(0.0, 0.0);
  ex.u = [=](const Vec2& x) {
    Vec2 gq;
    Mat2 hq;
    const double q = cutoff(x, gq, hq);
    return Vec2(q * singular(x, 0).v, q * singular(x, 1).v);
  };
  ex.grad_u = [=](const Vec2& x) {
    Vec2 gq;
    Mat2 hq;
    const double q = cutoff(x, gq, hq);
    Mat2 j;
    for (int i = 0; i < 2; ++i) {
      const Jet v = singular(x, i);
      j.row(i) = (q * v.g + v.v * gq).transpose();
    }
    return j;
  };
  ex.hess_u = [=](const Vec2& x) {
    Vec2 gq;
    Mat2 hq;
    const double q = cutoff(x, gq, hq);
    std::array<Mat2, 2> out;
    for (int i = 0; i < 2; ++i) {
      const Jet v = singular(x, i);
      out[i] = q * v.h + gq * v.g.transpose() + v.g * gq.transpose() + v.v * hq;
    }
    return out;
  };
  return ex;
}

namespace {

bool touches(const Mesh& mesh, std::size_t t, const Vec2& p) {
  const double tol = 1e-14 * std::max(1.0, mesh.diameter());
  for (const auto& c : mesh.corners(t)) {
    if ((c - p).norm() <= tol) return true;
  }
  return false;
}

}  // namespace

std::vector<double> error_A_norm_sq(const FEFields& fields, const ExactSolution& exact, int singular_levels) {
  const Mesh& mesh = fields.mesh();
  const int r = fields.dofs().config().r;
  const QuadratureRule& base = triangle_rule(2 * (r + 3) + 4);
  const QuadratureRule composite = composite_triangle_rule(base, singular_levels);
  const int degree = fields.dofs().config().stress_degree();
  const ReferenceBasis& basis = reference_basis(degree);
  std::vector<double> out(mesh.num_triangles(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const bool singular = exact.singular_point && touches(mesh, t, *exact.singular_point);
    const QuadratureRule& rule = singular ? composite : base;
    const AffineMap map = AffineMap::of(mesh, t);
    Eigen::VectorXd coef[3];
    for (int c = 0; c < 3; ++c) coef[c] = fields.stress_coefficients(t, c) * map.scale();
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd psi = basis.values(rule.points[q]);
      const Sym2 sh{psi.dot(coef[0]), psi.dot(coef[1]), psi.dot(coef[2])};
      const Sym2 diff = exact.sigma(map.to_physical(rule.points[q])) - sh;
      acc += rule.weights[q] * compliance_apply(diff, exact.material).dot(diff);
    }
    out[t] = acc * map.det;
  }
  return out;
}

double error_A_norm(const FEFields& fields, const ExactSolution& exact, int singular_levels) {
  const auto per = error_A_norm_sq(fields, exact, singular_levels);
  double s = 0.0;
  for (double v : per) s += v;
  return std::sqrt(s);
}

double exact_A_norm(const Mesh& mesh, const ExactSolution& exact, int r, int singular_levels) {
  const QuadratureRule& base = triangle_rule(2 * (r + 3) + 4);
  const QuadratureRule composite = composite_triangle_rule(base, singular_levels);
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const bool singular = exact.singular_point && touches(mesh, t, *exact.singular_point);
    const QuadratureRule& rule = singular ? composite : base;
    const AffineMap map = AffineMap::of(mesh, t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Sym2 sg = exact.sigma(map.to_physical(rule.points[q]));
      s += rule.weights[q] * map.det * compliance_apply(sg, exact.material).dot(sg);
    }
  }
  return std::sqrt(s);
}

double rate(std::span<const double> nt, std::span<const double> err, std::size_t window) {
  if (nt.size() != err.size()) throw Error(ErrorKind::Argument, "rate: length mismatch");
  if (window < 2 || nt.size() < window) {
    throw Error(ErrorKind::Argument, "rate: need at least " + std::to_string(std::max<std::size_t>(window, 2)) + " rows");
  }
  const std::size_t first = nt.size() - window;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = first; i < nt.size(); ++i) {
    if (!(nt[i] > 0) || !(err[i] > 0)) throw Error(ErrorKind::Argument, "rate: nonpositive value");
    const double x = std::log(nt[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(window);
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw Error(ErrorKind::Argument, "rate: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

}  // namespace hmfem
