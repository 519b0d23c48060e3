#include "sparse.hpp"

#include <cstdint>

#if defined(HMFEM_HAVE_CHOLMOD)
#include <cholmod.h>
#else
#include <Eigen/SparseCholesky>
#endif

namespace hmfem {

#if defined(HMFEM_HAVE_CHOLMOD)

// Supernodal CHOLMOD factorization of the scaled matrix (lower triangle).
struct SparseCholesky::Impl {
  cholmod_common common{};
  cholmod_factor* factor = nullptr;
  Eigen::VectorXd scale;  // diag(S)^{-1/2}
  Eigen::VectorXd pivots;

  Impl() {
    cholmod_start(&common);
    common.supernodal = CHOLMOD_SUPERNODAL;
    common.print = 0;
    common.error_handler = nullptr;
  }
  ~Impl() {
    release();
    cholmod_finish(&common);
  }
  void release() {
    if (factor) cholmod_free_factor(&factor, &common);
    factor = nullptr;
  }
};

namespace {

// Diagonal of D in L D L^T (squares of the diagonal of L for LL^T factors).
Eigen::VectorXd factor_pivots(const cholmod_factor* f) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(f->n));
  const auto* x = static_cast<const double*>(f->x);
  if (f->is_super) {
    const bool long_index = f->itype == CHOLMOD_LONG;
    auto at = [&](const void* arr, std::size_t k) -> std::int64_t {
      return long_index ? static_cast<const std::int64_t*>(arr)[k] : static_cast<const int*>(arr)[k];
    };
    for (std::size_t k = 0; k < f->nsuper; ++k) {
      const std::int64_t c0 = at(f->super, k), c1 = at(f->super, k + 1);
      const std::int64_t nrows = at(f->pi, k + 1) - at(f->pi, k);
      const std::int64_t base = at(f->px, k);
      for (std::int64_t j = c0; j < c1; ++j) {
        const double l = x[base + (j - c0) * nrows + (j - c0)];
        d[j] = l * l;
      }
    }
  } else {
    const bool long_index = f->itype == CHOLMOD_LONG;
    for (std::size_t j = 0; j < f->n; ++j) {
      const std::int64_t p = long_index ? static_cast<const std::int64_t*>(f->p)[j] : static_cast<const int*>(f->p)[j];
      d[static_cast<Eigen::Index>(j)] = f->is_ll ? x[p] * x[p] : x[p];
    }
  }
  return d;
}

}  // namespace

SparseCholesky::SparseCholesky() : impl_(std::make_unique<Impl>()) {}
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

bool SparseCholesky::factor(const CsrMatrix& s, double shift) {
  impl_->release();
  const Eigen::VectorXd d = s.diagonal();
  if (d.size() > 0 && !(d.minCoeff() > 0.0)) return false;
  impl_->scale = d.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd& sc = impl_->scale;
  // column i of the lower triangle = entries j >= i of row i (symmetry)
  std::size_t nnz = 0;
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) nnz += s.col[p] >= i;
  }
  cholmod_common* c = &impl_->common;
  cholmod_sparse* a = cholmod_allocate_sparse(s.rows, s.cols, nnz, 1, 1, -1, CHOLMOD_REAL, c);
  if (!a) return false;
  auto* ap = static_cast<int*>(a->p);
  auto* ai = static_cast<int*>(a->i);
  auto* ax = static_cast<double*>(a->x);
  std::size_t k = 0;
  for (std::size_t i = 0; i < s.rows; ++i) {
    ap[i] = static_cast<int>(k);
    for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
      const std::size_t j = s.col[p];
      if (j < i) continue;
      ai[k] = static_cast<int>(j);
      ax[k] = s.val[p] * sc[static_cast<Eigen::Index>(i)] * sc[static_cast<Eigen::Index>(j)];
      ++k;
    }
  }
  ap[s.rows] = static_cast<int>(k);
  impl_->factor = cholmod_analyze(a, c);
  bool ok = impl_->factor != nullptr;
  if (ok) {
    double beta[2] = {shift, 0.0};
    ok = cholmod_factorize_p(a, beta, nullptr, 0, impl_->factor, c) && c->status == CHOLMOD_OK &&
         impl_->factor->minor == impl_->factor->n;
  }
  cholmod_free_sparse(&a, c);
  if (!ok) {
    impl_->release();
    return false;
  }
  impl_->pivots = factor_pivots(impl_->factor);
  return impl_->pivots.size() == 0 || (impl_->pivots.minCoeff() > 0.0 && impl_->pivots.allFinite());
}

void SparseCholesky::solve(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  cholmod_common* c = &impl_->common;
  const std::size_t n = static_cast<std::size_t>(r.size());
  cholmod_dense* b = cholmod_allocate_dense(n, 1, n, CHOLMOD_REAL, c);
  Eigen::Map<Eigen::VectorXd>(static_cast<double*>(b->x), r.size()) = impl_->scale.cwiseProduct(r);
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, impl_->factor, b, c);
  if (!x) {
    cholmod_free_dense(&b, c);
    throw Error(ErrorKind::Numerical, "sparse Cholesky solve failed");
  }
  z = impl_->scale.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(static_cast<const double*>(x->x), r.size()));
  cholmod_free_dense(&x, c);
  cholmod_free_dense(&b, c);
}

double SparseCholesky::min_pivot() const { return impl_->pivots.size() ? impl_->pivots.minCoeff() : 0.0; }
double SparseCholesky::max_pivot() const { return impl_->pivots.size() ? impl_->pivots.maxCoeff() : 0.0; }

#else

struct SparseCholesky::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  Eigen::VectorXd scale;  // diag(S)^{-1/2}
};

SparseCholesky::SparseCholesky() : impl_(std::make_unique<Impl>()) {}
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

bool SparseCholesky::factor(const CsrMatrix& s, double shift) {
  const Eigen::VectorXd d = s.diagonal();
  if (d.size() > 0 && !(d.minCoeff() > 0.0)) return false;
  impl_->scale = d.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd& sc = impl_->scale;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(s.nnz() / 2 + s.rows);
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
      const std::size_t j = s.col[p];
      if (j <= i) {
        trip.emplace_back(static_cast<int>(i), static_cast<int>(j),
                          s.val[p] * sc[static_cast<Eigen::Index>(i)] * sc[static_cast<Eigen::Index>(j)]);
      }
    }
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
  m.setFromTriplets(trip.begin(), trip.end());
  impl_->ldlt.setShift(shift);
  impl_->ldlt.compute(m);
  if (impl_->ldlt.info() != Eigen::Success) return false;
  const auto& piv = impl_->ldlt.vectorD();
  return piv.size() == 0 || (piv.minCoeff() > 0.0 && piv.allFinite());
}

void SparseCholesky::solve(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  z = impl_->scale.cwiseProduct(impl_->ldlt.solve(impl_->scale.cwiseProduct(r)).eval());
}

double SparseCholesky::min_pivot() const {
  const auto& d = impl_->ldlt.vectorD();
  return d.size() ? d.minCoeff() : 0.0;
}

double SparseCholesky::max_pivot() const {
  const auto& d = impl_->ldlt.vectorD();
  return d.size() ? d.maxCoeff() : 0.0;
}

#endif

}  // namespace hmfem
