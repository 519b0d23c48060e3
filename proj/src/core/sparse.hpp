#pragma once

#include "common.hpp"

#include <memory>
#include <vector>

namespace hmfem {

/// Compressed sparse row matrix with sorted column indices.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y;
    multiply(x, y);
    return y;
  }
  double at(std::size_t i, std::size_t j) const;
  Eigen::VectorXd diagonal() const;
  Eigen::MatrixXd to_dense() const;
};

/// Zero-fill incomplete Cholesky L L^T ~ S on the lower pattern of S.
class IncompleteCholesky {
 public:
  /// Returns false on a nonpositive pivot. `shift` is added to the diagonal.
  bool factor(const CsrMatrix& s, double shift = 0.0);
  void solve(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_;  // strictly lower part of L
  std::vector<std::size_t> col_;
  std::vector<double> val_;
  std::vector<double> diag_;
};

/// Sparse L D L^T with approximate minimum degree ordering of the
/// diagonally scaled matrix D^{-1/2} S D^{-1/2} + shift I, D = diag(S).
/// `solve` applies the correspondingly rescaled inverse.
class SparseCholesky {
 public:
  SparseCholesky();
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;

  /// Returns false on a nonpositive diagonal entry, a zero pivot or a failed
  /// factorization.
  bool factor(const CsrMatrix& s, double shift = 0.0);
  void solve(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;
  /// Smallest and largest pivot of D.
  double min_pivot() const;
  double max_pivot() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hmfem
