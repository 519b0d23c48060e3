#pragma once

#include "common.hpp"

#include <cstddef>

namespace hmfem {

inline constexpr std::size_t triangle_dim(int k) { return static_cast<std::size_t>((k + 1) * (k + 2) / 2); }

/// Values and derivatives of every basis function at one reference point.
struct BasisTabulation {
  Eigen::VectorXd value;
  Eigen::VectorXd dx, dy;
  Eigen::VectorXd dxx, dxy, dyy;
};

/// Orthonormal modal basis of P_k on the reference triangle: monomials x^a y^b
/// (ordered by total degree) orthonormalized against the exact reference mass
/// matrix, so the first triangle_dim(j) functions span P_j.
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return triangle_dim(degree_); }

  /// Row i holds the monomial coefficients of basis function i; monomial j is
  /// x^{exponents(j).first} y^{exponents(j).second}.
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }
  std::pair<int, int> exponents(std::size_t j) const { return exps_[j]; }

  Eigen::VectorXd values(const Vec2& p) const;
  BasisTabulation tabulate(const Vec2& p, bool second_derivatives = true) const;

 private:
  int degree_;
  std::vector<std::pair<int, int>> exps_;
  Eigen::MatrixXd coeffs_;
};

/// Cached basis of degree k; rejects k < 0 or k > 12.
const ReferenceBasis& reference_basis(int k);

/// Orthonormal Legendre polynomials on [0,1], degrees 0..k, at s.
Eigen::VectorXd legendre_values(int k, double s);

}  // namespace hmfem
