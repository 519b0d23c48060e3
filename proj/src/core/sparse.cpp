#include "sparse.hpp"

#include <algorithm>
#include <cmath>

namespace hmfem {

void CsrMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += val[p] * x[static_cast<Eigen::Index>(col[p])];
    y[static_cast<Eigen::Index>(i)] = s;
  }
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

Eigen::VectorXd CsrMatrix::diagonal() const {
  Eigen::VectorXd d(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) d[static_cast<Eigen::Index>(i)] = at(i, i);
  return d;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col[p])) = val[p];
    }
  }
  return d;
}

bool IncompleteCholesky::factor(const CsrMatrix& s, double shift) {
  n_ = s.rows;
  row_ptr_.assign(n_ + 1, 0);
  col_.clear();
  val_.clear();
  diag_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1] && s.col[p] < i; ++p) {
      col_.push_back(s.col[p]);
      val_.push_back(s.val[p]);
    }
    row_ptr_[i + 1] = col_.size();
    diag_[i] = s.at(i, i) + shift;
  }

  // position of column j within the current row, or npos
  std::vector<std::size_t> where(n_, npos);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t begin = row_ptr_[i], end = row_ptr_[i + 1];
    for (std::size_t p = begin; p < end; ++p) where[col_[p]] = p;
    for (std::size_t p = begin; p < end; ++p) {
      const std::size_t k = col_[p];
      double v = val_[p];
      for (std::size_t q = row_ptr_[k]; q < row_ptr_[k + 1]; ++q) {
        const std::size_t w = where[col_[q]];
        if (w != npos && w < p) v -= val_[w] * val_[q];
      }
      val_[p] = v / diag_[k];
    }
    double d = diag_[i];
    for (std::size_t p = begin; p < end; ++p) d -= val_[p] * val_[p];
    for (std::size_t p = begin; p < end; ++p) where[col_[p]] = npos;
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    diag_[i] = std::sqrt(d);
  }
  return true;
}

void IncompleteCholesky::solve(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  z = r;
  for (std::size_t i = 0; i < n_; ++i) {
    double v = z[static_cast<Eigen::Index>(i)];
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) v -= val_[p] * z[static_cast<Eigen::Index>(col_[p])];
    z[static_cast<Eigen::Index>(i)] = v / diag_[i];
  }
  for (std::size_t i = n_; i-- > 0;) {
    const double v = z[static_cast<Eigen::Index>(i)] / diag_[i];
    z[static_cast<Eigen::Index>(i)] = v;
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) z[static_cast<Eigen::Index>(col_[p])] -= val_[p] * v;
  }
}

}  // namespace hmfem
