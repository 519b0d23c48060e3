#include "quadrature.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace hmfem {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    long double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    // map [-1,1] -> [0,1]; nodes ascending
    nodes[n - 1 - i] = static_cast<double>(0.5L * (x + 1));
    weights[n - 1 - i] = static_cast<double>(1.0L / ((1 - x * x) * dp * dp));
  }
}

double reference_monomial_integral(int a, int b) {
  // a! b! / (a+b+2)! computed as a product to stay in range
  long double v = 1.0L;
  for (int k = 1; k <= b; ++k) v *= static_cast<long double>(k) / (a + k);
  return static_cast<double>(v / ((a + b + 1.0L) * (a + b + 2.0L)));
}

namespace {

QuadratureRule make_edge_rule(int exactness) {
  QuadratureRule q;
  q.kind = QuadratureKind::Edge;
  q.exactness = exactness;
  gauss_legendre((exactness + 2) / 2, q.abscissae, q.weights);
  return q;
}

// Collapsed (Duffy) tensor Gauss rule: x = u, y = (1-u) v, dA = (1-u) du dv.
QuadratureRule make_triangle_rule(int exactness) {
  QuadratureRule q;
  q.kind = QuadratureKind::Triangle;
  q.exactness = exactness;
  const int m = (exactness + 3) / 2;
  std::vector<double> gx, gw;
  gauss_legendre(m, gx, gw);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double u = gx[i];
      const double v = gx[j];
      const Vec2 p(u, (1.0 - u) * v);
      q.points.push_back(p);
      q.barycentric.emplace_back(1.0 - p.x() - p.y(), p.x(), p.y());
      q.weights.push_back(gw[i] * gw[j] * (1.0 - u));
    }
  }
  return q;
}

void verify(const QuadratureRule& q) {
  const int d = q.exactness;
  for (double w : q.weights) {
    if (!(w > 0)) throw Error(ErrorKind::Numerical, "quadrature rule has a nonpositive weight");
  }
  if (q.kind == QuadratureKind::Edge) {
    for (int a = 0; a <= d; ++a) {
      double s = 0;
      for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.abscissae[i], a);
      const double exact = 1.0 / (a + 1);
      if (std::abs(s - exact) > 1e-13 * exact) throw Error(ErrorKind::Numerical, "edge rule failed exactness check");
    }
    return;
  }
  for (int a = 0; a <= d; ++a) {
    for (int b = 0; a + b <= d; ++b) {
      double s = 0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        s += q.weights[i] * std::pow(q.points[i].x(), a) * std::pow(q.points[i].y(), b);
      }
      const double exact = reference_monomial_integral(a, b);
      if (std::abs(s - exact) > 1e-13 * exact) throw Error(ErrorKind::Numerical, "triangle rule failed exactness check");
    }
  }
}

}  // namespace

const QuadratureRule& quadrature(QuadratureKind kind, int exactness) {
  if (exactness < 0 || exactness > 30) {
    throw Error(ErrorKind::Argument, "quadrature exactness " + std::to_string(exactness) + " unavailable (0..30)");
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  const auto key = std::pair(static_cast<int>(kind), exactness);
  auto it = cache.find(key);
  if (it == cache.end()) {
    QuadratureRule q = kind == QuadratureKind::Edge ? make_edge_rule(exactness) : make_triangle_rule(exactness);
    verify(q);
    it = cache.emplace(key, std::move(q)).first;
  }
  return it->second;
}

QuadratureRule composite_triangle_rule(const QuadratureRule& base, int levels) {
  using Tri = std::array<Vec2, 3>;
  std::vector<Tri> pieces = {Tri{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}};
  for (int l = 0; l < levels; ++l) {
    std::vector<Tri> next;
    next.reserve(pieces.size() * 4);
    for (const auto& t : pieces) {
      const Vec2 m01 = 0.5 * (t[0] + t[1]), m12 = 0.5 * (t[1] + t[2]), m20 = 0.5 * (t[2] + t[0]);
      next.push_back({t[0], m01, m20});
      next.push_back({m01, t[1], m12});
      next.push_back({m20, m12, t[2]});
      next.push_back({m12, m20, m01});
    }
    pieces = std::move(next);
  }
  QuadratureRule q;
  q.kind = QuadratureKind::Triangle;
  q.exactness = base.exactness;
  const double scale = 1.0 / static_cast<double>(pieces.size());
  for (const auto& t : pieces) {
    for (std::size_t i = 0; i < base.size(); ++i) {
      const Vec2 p = t[0] + base.points[i].x() * (t[1] - t[0]) + base.points[i].y() * (t[2] - t[0]);
      q.points.push_back(p);
      q.barycentric.emplace_back(1.0 - p.x() - p.y(), p.x(), p.y());
      q.weights.push_back(base.weights[i] * scale);
    }
  }
  return q;
}

}  // namespace hmfem
