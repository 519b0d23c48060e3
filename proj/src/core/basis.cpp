#include "basis.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace hmfem {
namespace {

using MatLD = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Returns C with C * G * C^T = I, C lower triangular.
MatLD orthonormalizer(const MatLD& gram) {
  Eigen::LLT<MatLD> llt(gram);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "reference Gram matrix is not positive definite");
  const MatLD id = MatLD::Identity(gram.rows(), gram.cols());
  return llt.matrixL().solve(id);
}

}  // namespace

ReferenceBasis::ReferenceBasis(int degree) : degree_(degree) {
  if (degree < 0 || degree > 12) {
    throw Error(ErrorKind::Argument, "basis degree " + std::to_string(degree) + " outside supported range 0..12");
  }
  for (int d = 0; d <= degree; ++d) {
    for (int b = 0; b <= d; ++b) exps_.emplace_back(d - b, b);
  }
  const auto n = static_cast<Eigen::Index>(exps_.size());
  MatLD gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      gram(i, j) = reference_monomial_integral(exps_[i].first + exps_[j].first, exps_[i].second + exps_[j].second);
    }
  }
  MatLD c = orthonormalizer(gram);
  // one refinement sweep to remove the residual loss of orthogonality
  const MatLD g2 = c * gram * c.transpose();
  c = orthonormalizer(g2) * c;
  coeffs_ = c.cast<double>();
}

Eigen::VectorXd ReferenceBasis::values(const Vec2& p) const {
  Eigen::VectorXd mono(exps_.size());
  for (std::size_t j = 0; j < exps_.size(); ++j) {
    mono[j] = std::pow(p.x(), exps_[j].first) * std::pow(p.y(), exps_[j].second);
  }
  return coeffs_ * mono;
}

BasisTabulation ReferenceBasis::tabulate(const Vec2& p, bool second_derivatives) const {
  const auto n = static_cast<Eigen::Index>(exps_.size());
  auto pw = [](double x, int k) { return k < 0 ? 0.0 : std::pow(x, k); };
  Eigen::VectorXd m(n), mx(n), my(n), mxx, mxy, myy;
  if (second_derivatives) {
    mxx.resize(n);
    mxy.resize(n);
    myy.resize(n);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto [a, b] = exps_[j];
    const double x = p.x(), y = p.y();
    m[j] = pw(x, a) * pw(y, b);
    mx[j] = a * pw(x, a - 1) * pw(y, b);
    my[j] = b * pw(x, a) * pw(y, b - 1);
    if (second_derivatives) {
      mxx[j] = a * (a - 1) * pw(x, a - 2) * pw(y, b);
      mxy[j] = a * b * pw(x, a - 1) * pw(y, b - 1);
      myy[j] = b * (b - 1) * pw(x, a) * pw(y, b - 2);
    }
  }
  BasisTabulation t;
  t.value = coeffs_ * m;
  t.dx = coeffs_ * mx;
  t.dy = coeffs_ * my;
  if (second_derivatives) {
    t.dxx = coeffs_ * mxx;
    t.dxy = coeffs_ * mxy;
    t.dyy = coeffs_ * myy;
  }
  return t;
}

const ReferenceBasis& reference_basis(int k) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<ReferenceBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[k];
  if (!slot) slot = std::make_unique<ReferenceBasis>(k);
  return *slot;
}

Eigen::VectorXd legendre_values(int k, double s) {
  Eigen::VectorXd out(k + 1);
  const double x = 2.0 * s - 1.0;
  double p0 = 1.0, p1 = x;
  for (int j = 0; j <= k; ++j) {
    double pj;
    if (j == 0) {
      pj = 1.0;
    } else if (j == 1) {
      pj = x;
    } else {
      pj = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = pj;
    }
    out[j] = pj * std::sqrt(2.0 * j + 1.0);
  }
  return out;
}

}  // namespace hmfem
