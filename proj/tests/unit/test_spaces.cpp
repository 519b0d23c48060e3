#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace hmfem;

TEST_CASE("reference basis sizes and normalization") {
  CHECK(reference_basis(0).size() == 1);
  CHECK(reference_basis(0).values({0.2, 0.3})(0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(reference_basis(3).size() == 10);
  CHECK_THROWS_AS(reference_basis(13), Error);
  CHECK_THROWS_AS(reference_basis(-1), Error);
}

TEST_CASE("Gram matrix under exact integration is the identity") {
  // the degrees used by r = 0, 1 (stress up to 4, estimator jets up to 4)
  for (int k : {1, 2, 3, 4}) {
    const ReferenceBasis& b = reference_basis(k);
    const auto n = static_cast<Eigen::Index>(b.size());
    const QuadratureRule& q = triangle_rule(2 * k);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Eigen::VectorXd v = b.values(q.points[i]);
      g += q.weights[i] * v * v.transpose();
    }
    CHECK((g - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("basis spans the monomials of each degree in order") {
  const ReferenceBasis& b = reference_basis(4);
  // lower triangular coefficients: function i uses monomials 0..i only
  const Eigen::MatrixXd& c = b.coefficients();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    CHECK(c(i, i) != 0.0);
    for (Eigen::Index j = i + 1; j < c.cols(); ++j) CHECK(c(i, j) == 0.0);
  }
}

TEST_CASE("basis derivatives match finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.45);
  const ReferenceBasis& b = reference_basis(4);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const Vec2 p(u(rng), u(rng));
    const BasisTabulation t = b.tabulate(p);
    const Eigen::VectorXd fx = (b.values(p + Vec2(h, 0)) - b.values(p - Vec2(h, 0))) / (2 * h);
    const Eigen::VectorXd fy = (b.values(p + Vec2(0, h)) - b.values(p - Vec2(0, h))) / (2 * h);
    const double scale = std::max(1.0, t.dx.cwiseAbs().maxCoeff());
    CHECK((fx - t.dx).cwiseAbs().maxCoeff() < 1e-6 * scale);
    CHECK((fy - t.dy).cwiseAbs().maxCoeff() < 1e-6 * scale);
    const BasisTabulation px = b.tabulate(p + Vec2(h, 0)), mx = b.tabulate(p - Vec2(h, 0));
    const BasisTabulation py = b.tabulate(p + Vec2(0, h)), my = b.tabulate(p - Vec2(0, h));
    const double s2 = std::max(1.0, t.dxx.cwiseAbs().maxCoeff());
    CHECK(((px.dx - mx.dx) / (2 * h) - t.dxx).cwiseAbs().maxCoeff() < 1e-6 * s2);
    CHECK(((py.dx - my.dx) / (2 * h) - t.dxy).cwiseAbs().maxCoeff() < 1e-6 * s2);
    CHECK(((py.dy - my.dy) / (2 * h) - t.dyy).cwiseAbs().maxCoeff() < 1e-6 * s2);
  }
}

TEST_CASE("Legendre values are orthonormal on [0,1]") {
  const QuadratureRule& r = edge_rule(12);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(5, 5);
  for (std::size_t q = 0; q < r.size(); ++q) {
    const Eigen::VectorXd l = legendre_values(4, r.abscissae[q]);
    g += r.weights[q] * l * l.transpose();
  }
  CHECK((g - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("quadrature examples") {
  CHECK(edge_rule(7).size() == 4);
  const QuadratureRule& t2 = triangle_rule(2);
  double s = 0, w = 0;
  for (std::size_t q = 0; q < t2.size(); ++q) {
    s += t2.weights[q] * (t2.points[q].x() + t2.points[q].y());
    w += t2.weights[q];
  }
  CHECK(s == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(w == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(triangle_rule(31), Error);
  CHECK_THROWS_AS(edge_rule(-1), Error);
}

TEST_CASE("quadrature rules integrate monomials up to their exactness") {
  for (int deg = 0; deg <= 20; ++deg) {
    const QuadratureRule& r = triangle_rule(deg);
    for (double wq : r.weights) CHECK(wq > 0);
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        double s = 0;
        for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q].x(), a) * std::pow(r.points[q].y(), b);
        const double exact = reference_monomial_integral(a, b);
        CHECK(std::abs(s - exact) <= 1e-13 * exact);
      }
    }
    const QuadratureRule& e = edge_rule(deg);
    for (int a = 0; a <= deg; ++a) {
      double s = 0;
      for (std::size_t q = 0; q < e.size(); ++q) s += e.weights[q] * std::pow(e.abscissae[q], a);
      CHECK(std::abs(s - 1.0 / (a + 1)) <= 1e-13 / (a + 1));
    }
  }
}

TEST_CASE("composite rule keeps exactness and total weight") {
  const QuadratureRule c = composite_triangle_rule(triangle_rule(4), 2);
  CHECK(c.size() == 16 * triangle_rule(4).size());
  double s = 0, w = 0;
  for (std::size_t q = 0; q < c.size(); ++q) {
    s += c.weights[q] * std::pow(c.points[q].x(), 3) * c.points[q].y();
    w += c.weights[q];
  }
  CHECK(w == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s == doctest::Approx(reference_monomial_integral(3, 1)).epsilon(1e-13));
}

TEST_CASE("affine map round-trip and constant integrates to the area") {
  std::mt19937_64 rng(5);
  const Mesh m = hmfem::testing::random_refinement(l_shaped_initial_mesh(), 3, rng);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const AffineMap map = AffineMap::of(m, t);
    const Vec2 x = m.vertex(m.triangle(t).v[1]);
    CHECK((map.to_physical(map.to_reference(x)) - x).norm() < 1e-14);
    CHECK(map.det * 0.5 == doctest::Approx(m.area(t)).epsilon(1e-14));
  }
}

TEST_CASE("dof map examples") {
  using hmfem::testing::reference_triangle;
  using hmfem::testing::unit_square;
  const DofMap one(reference_triangle(), SpaceConfig{0});
  CHECK(one.n_sigma() == 30);
  CHECK(one.n_u() == 12);
  CHECK(one.n_lambda() == 0);
  const DofMap sq(unit_square(), SpaceConfig{0});
  CHECK(sq.n_x() == 84);
  CHECK(sq.n_lambda() == 8);
  const DofMap r1(reference_triangle(), SpaceConfig{1});
  CHECK(r1.n_sigma() == 45);
  CHECK(r1.n_u() == 20);
  const DofMap neu(unit_square(true), SpaceConfig{0});
  CHECK(neu.n_lambda() == 16);
}

TEST_CASE("dof map closed-form counts and contiguous offsets") {
  std::mt19937_64 rng(9);
  for (int r = 0; r <= 2; ++r) {
    const Mesh m = hmfem::testing::random_refinement(hmfem::testing::unit_square(true), 4, rng);
    const DofMap d(m, SpaceConfig{r});
    const std::size_t nt = m.num_triangles();
    std::size_t neumann = 0;
    for (const Edge& e : m.edges()) neumann += e.kind == BoundaryKind::Neumann;
    CHECK(d.n_sigma() == 3 * nt * static_cast<std::size_t>((r + 4) * (r + 5) / 2));
    CHECK(d.n_u() == nt * static_cast<std::size_t>((r + 3) * (r + 4)));
    CHECK(d.n_lambda() == 2 * static_cast<std::size_t>(r + 4) * (m.num_interior_edges() + neumann));
    std::size_t expect = 0;
    for (std::size_t t = 0; t < nt; ++t) {
      CHECK(d.stress_offset(t) == expect);
      CHECK(d.displacement_offset(t) == expect + d.config().local_stress_size());
      expect += d.config().local_size();
    }
    CHECK(expect == d.n_x());
    std::size_t slot = 0;
    for (std::size_t e = 0; e < m.num_edges(); ++e) {
      if (m.edge(e).kind == BoundaryKind::Dirichlet) {
        CHECK(d.multiplier_offset(e) == npos);
      } else {
        CHECK(d.multiplier_offset(e) == slot * d.config().edge_multiplier_size());
        ++slot;
      }
    }
  }
  CHECK_THROWS_AS(SpaceConfig{-1}.validate(), Error);
}
