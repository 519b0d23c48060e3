#pragma once

#include "fields.hpp"
#include "sparse.hpp"

namespace hmfem {

/// Per-element inverse of the block [[K (x) I, D^T], [D, 0]] by block
/// elimination: a Cholesky factor of D (K^-1 (x) I) D^T per element.
class LocalInverse {
 public:
  explicit LocalInverse(const SaddleSystem& sys);

  /// Solves A_T (s; u) = (g; h) for one element.
  Eigen::VectorXd solve(std::size_t t, const Eigen::Ref<const Eigen::VectorXd>& rhs) const;
  /// Stress-stress block of A_T^{-1}.
  Eigen::MatrixXd stress_block(std::size_t t) const;
  /// X = A^{-1} y for the whole block-diagonal A.
  Eigen::VectorXd apply(const Eigen::VectorXd& y) const;

 private:
  const SaddleSystem* sys_;
  Eigen::Matrix3d kinv_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> schur_;
};

/// Explicit Schur complement S = B^T A^{-1} B and rhs = B^T A^{-1} F - G.
struct SchurOperator {
  CsrMatrix S;
  Eigen::VectorXd rhs;
  std::size_t block_size = 0;
};

SchurOperator build_schur(const SaddleSystem& sys, const LocalInverse& inv);

enum class Preconditioner { IncompleteCholesky, ShiftedIncompleteCholesky, Jacobi, Cholesky };

/// Requested preconditioner. `Cholesky` factors D^{-1/2} S D^{-1/2} + 1e-10 I
/// completely, D = diag(S) (the shift absorbs the kernel); `IncompleteCholesky` is IC(0)
/// with the shift and Jacobi fallbacks.
enum class PreconditionerChoice { Cholesky, IncompleteCholesky };

struct PcgOptions {
  double tol = 1e-10;
  std::size_t maxit = 0;  // 0: 10 * n
  PreconditionerChoice preconditioner = PreconditionerChoice::Cholesky;
};

struct SolveReport {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool kernel_detected = false;
  Preconditioner preconditioner = Preconditioner::IncompleteCholesky;
  bool restarted = false;
  double wall_ms = 0.0;
};

/// Preconditioned conjugate gradients on S Lambda = rhs. For IC(0), a
/// nonpositive pivot triggers a diagonal shift of 1e-10 max|diag|, then Jacobi.
/// A CG breakdown restarts once with Jacobi. Throws Numerical when maxit is
/// exceeded.
Eigen::VectorXd pcg(const SchurOperator& op, const PcgOptions& opts, SolveReport& report);

/// X = A^{-1} (F - B Lambda).
FEFields recover_fields(const SaddleSystem& sys, const LocalInverse& inv, const Eigen::VectorXd& lambda);

/// assemble-free convenience: Schur, PCG and recovery for an assembled system.
FEFields solve_system(const SaddleSystem& sys, const PcgOptions& opts, SolveReport& report);

}  // namespace hmfem
