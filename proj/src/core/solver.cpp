#include "solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace hmfem {

LocalInverse::LocalInverse(const SaddleSystem& sys) : sys_(&sys), kinv_(sys.compliance.inverse()) {
  const std::size_t ns = sys.config().stress_scalar_dim();
  schur_.reserve(sys.divergence.size());
  for (std::size_t t = 0; t < sys.divergence.size(); ++t) {
    const Eigen::MatrixXd& d = sys.divergence[t];
    // D (K^-1 (x) I) D^T
    Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(d.rows(), d.cols());
    const auto n = static_cast<Eigen::Index>(ns);
    for (int c = 0; c < 3; ++c) {
      for (int e = 0; e < 3; ++e) {
        if (kinv_(c, e) != 0.0) dm.middleCols(c * n, n) += kinv_(c, e) * d.middleCols(e * n, n);
      }
    }
    schur_.emplace_back(dm * d.transpose());
    if (schur_.back().info() != Eigen::Success) {
      throw Error(ErrorKind::Numerical, "local block of triangle " + std::to_string(t) + " is singular");
    }
  }
}

namespace {

Eigen::VectorXd kron3(const Eigen::Matrix3d& k, const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index n = v.size() / 3;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int c = 0; c < 3; ++c) {
    for (int e = 0; e < 3; ++e) {
      if (k(c, e) != 0.0) out.segment(c * n, n) += k(c, e) * v.segment(e * n, n);
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd LocalInverse::solve(std::size_t t, const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  const auto nsl = static_cast<Eigen::Index>(sys_->config().local_stress_size());
  const auto nul = static_cast<Eigen::Index>(sys_->config().local_displacement_size());
  const Eigen::MatrixXd& d = sys_->divergence[t];
  const Eigen::VectorXd w = kron3(kinv_, rhs.head(nsl));
  Eigen::VectorXd out(nsl + nul);
  const Eigen::VectorXd u = schur_[t].solve(d * w - rhs.tail(nul));
  out.head(nsl) = w - kron3(kinv_, d.transpose() * u);
  out.tail(nul) = u;
  return out;
}

Eigen::MatrixXd LocalInverse::stress_block(std::size_t t) const {
  const auto nsl = static_cast<Eigen::Index>(sys_->config().local_stress_size());
  const auto ns = nsl / 3;
  const Eigen::MatrixXd& d = sys_->divergence[t];
  Eigen::MatrixXd minv = Eigen::MatrixXd::Zero(nsl, nsl);
  for (int c = 0; c < 3; ++c) {
    for (int e = 0; e < 3; ++e) minv.block(c * ns, e * ns, ns, ns).diagonal().setConstant(kinv_(c, e));
  }
  const Eigen::MatrixXd dm = d * minv;  // D M^-1 (M^-1 symmetric)
  return minv - dm.transpose() * schur_[t].solve(dm);
}

Eigen::VectorXd LocalInverse::apply(const Eigen::VectorXd& y) const {
  Eigen::VectorXd x(y.size());
  const auto n = static_cast<Eigen::Index>(sys_->config().local_size());
  for (std::size_t t = 0; t < schur_.size(); ++t) {
    const auto off = static_cast<Eigen::Index>(sys_->dofs.element_offset(t));
    x.segment(off, n) = solve(t, y.segment(off, n));
  }
  return x;
}

SchurOperator build_schur(const SaddleSystem& sys, const LocalInverse& inv) {
  const Mesh& mesh = *sys.mesh;
  const DofMap& dofs = sys.dofs;
  const std::size_t nslots = dofs.multiplier_edges().size();
  const std::size_t bs = sys.config().edge_multiplier_size();
  SchurOperator op;
  op.block_size = bs;
  op.S.rows = op.S.cols = nslots * bs;

  // multiplier slots on each triangle
  std::vector<std::array<std::size_t, 3>> tri_slots(mesh.num_triangles());
  std::vector<std::array<std::size_t, 3>> tri_side(mesh.num_triangles());
  for (auto& a : tri_slots) a.fill(npos);
  for (std::size_t k = 0; k < nslots; ++k) {
    for (std::size_t side = 0; side < sys.coupling[k].size(); ++side) {
      const std::size_t t = sys.coupling[k][side].triangle;
      for (int i = 0; i < 3; ++i) {
        if (tri_slots[t][i] == npos) {
          tri_slots[t][i] = k;
          tri_side[t][i] = side;
          break;
        }
      }
    }
  }

  // block pattern: slots coupled through a shared triangle
  std::vector<std::vector<std::size_t>> nbr(nslots);
  for (const auto& ts : tri_slots) {
    for (std::size_t a : ts) {
      if (a == npos) continue;
      for (std::size_t b : ts) {
        if (b != npos) nbr[a].push_back(b);
      }
    }
  }
  for (auto& v : nbr) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  op.S.row_ptr.assign(op.S.rows + 1, 0);
  for (std::size_t k = 0; k < nslots; ++k) {
    for (std::size_t r = 0; r < bs; ++r) op.S.row_ptr[k * bs + r + 1] = nbr[k].size() * bs;
  }
  for (std::size_t i = 0; i < op.S.rows; ++i) op.S.row_ptr[i + 1] += op.S.row_ptr[i];
  op.S.col.resize(op.S.row_ptr.back());
  op.S.val.assign(op.S.row_ptr.back(), 0.0);
  for (std::size_t k = 0; k < nslots; ++k) {
    for (std::size_t r = 0; r < bs; ++r) {
      std::size_t p = op.S.row_ptr[k * bs + r];
      for (std::size_t j : nbr[k]) {
        for (std::size_t c = 0; c < bs; ++c) op.S.col[p++] = j * bs + c;
      }
    }
  }

  const auto nsl = static_cast<Eigen::Index>(sys.config().local_stress_size());
  const auto nb = static_cast<Eigen::Index>(bs);
  op.rhs = -sys.G;
  const Eigen::VectorXd xf = inv.apply(sys.F);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    std::vector<std::size_t> slots;
    std::vector<Eigen::MatrixXd> blocks;
    for (int i = 0; i < 3; ++i) {
      if (tri_slots[t][i] == npos) continue;
      slots.push_back(tri_slots[t][i]);
      blocks.push_back(sys.coupling_block(tri_slots[t][i], tri_side[t][i]));
    }
    if (slots.empty()) continue;
    Eigen::MatrixXd bt(nsl, nb * static_cast<Eigen::Index>(slots.size()));
    for (std::size_t i = 0; i < slots.size(); ++i) bt.middleCols(static_cast<Eigen::Index>(i) * nb, nb) = blocks[i];
    const Eigen::MatrixXd local = bt.transpose() * inv.stress_block(t) * bt;
    const Eigen::VectorXd local_rhs = bt.transpose() * xf.segment(static_cast<Eigen::Index>(sys.dofs.stress_offset(t)), nsl);

    for (std::size_t i = 0; i < slots.size(); ++i) {
      const std::size_t ki = slots[i];
      op.rhs.segment(static_cast<Eigen::Index>(ki * bs), nb) += local_rhs.segment(static_cast<Eigen::Index>(i) * nb, nb);
      for (std::size_t j = 0; j < slots.size(); ++j) {
        const std::size_t pos = static_cast<std::size_t>(
            std::lower_bound(nbr[ki].begin(), nbr[ki].end(), slots[j]) - nbr[ki].begin());
        for (std::size_t r = 0; r < bs; ++r) {
          double* row = op.S.val.data() + op.S.row_ptr[ki * bs + r] + pos * bs;
          for (std::size_t c = 0; c < bs; ++c) {
            row[c] += local(static_cast<Eigen::Index>(i * bs + r), static_cast<Eigen::Index>(j * bs + c));
          }
        }
      }
    }
  }
  return op;
}

namespace {

struct PreconditionerState {
  Preconditioner kind = Preconditioner::IncompleteCholesky;
  IncompleteCholesky ic;
  SparseCholesky chol;
  Eigen::VectorXd inv_diag;

  void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
    if (kind == Preconditioner::Jacobi) {
      z = r.cwiseProduct(inv_diag);
    } else if (kind == Preconditioner::Cholesky) {
      chol.solve(r, z);
    } else {
      ic.solve(r, z);
    }
  }
};

void make_jacobi(const CsrMatrix& s, PreconditionerState& pc) {
  pc.kind = Preconditioner::Jacobi;
  const Eigen::VectorXd d = s.diagonal();
  const double dmax = d.cwiseAbs().maxCoeff();
  pc.inv_diag = d.unaryExpr([dmax](double v) { return v > 1e-14 * dmax ? 1.0 / v : 0.0; });
}

enum class CgStatus { Converged, Breakdown, MaxIt };

CgStatus run_cg(const CsrMatrix& s, const Eigen::VectorXd& b, const PreconditionerState& pc, double tol, std::size_t maxit,
                Eigen::VectorXd& x, std::size_t& its, double& relres) {
  const double bnorm = b.norm();
  Eigen::VectorXd r = b - s * x;
  Eigen::VectorXd z, q;
  pc.apply(r, z);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  relres = r.norm() / bnorm;
  its = 0;
  while (relres > tol) {
    if (its >= maxit) return CgStatus::MaxIt;
    s.multiply(p, q);
    const double pq = p.dot(q);
    if (!(pq > 1e-300) || !std::isfinite(pq) || !(rz > 0.0)) return CgStatus::Breakdown;
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    ++its;
    relres = r.norm() / bnorm;
    if (relres <= tol) break;
    pc.apply(r, z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return CgStatus::Converged;
}

}  // namespace

Eigen::VectorXd pcg(const SchurOperator& op, const PcgOptions& opts, SolveReport& report) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = op.S.rows;
  report = SolveReport{};
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (n == 0 || op.rhs.norm() == 0.0) {
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return x;
  }
  const std::size_t maxit = opts.maxit ? opts.maxit : 10 * n;

  PreconditionerState pc;
  const double shift = 1e-10 * op.S.diagonal().cwiseAbs().maxCoeff();
  if (opts.preconditioner == PreconditionerChoice::Cholesky) {
    pc.kind = Preconditioner::Cholesky;
    // unit-diagonal scaling, so the shift is relative to every row
    constexpr double rel_shift = 1e-10;
    if (!pc.chol.factor(op.S, rel_shift)) {
      make_jacobi(op.S, pc);
      report.kernel_detected = true;
    } else {
      // kernel directions of S leave pivots of the size of the shift
      report.kernel_detected = pc.chol.min_pivot() < 1e3 * rel_shift;
    }
  } else if (!pc.ic.factor(op.S)) {
    report.kernel_detected = true;
    if (pc.ic.factor(op.S, shift)) {
      pc.kind = Preconditioner::ShiftedIncompleteCholesky;
    } else {
      make_jacobi(op.S, pc);
    }
  }

  std::size_t its = 0;
  double relres = 0.0;
  CgStatus status = run_cg(op.S, op.rhs, pc, opts.tol, maxit, x, its, relres);
  report.iterations = its;
  if (status == CgStatus::Breakdown && pc.kind != Preconditioner::Jacobi) {
    report.restarted = true;
    make_jacobi(op.S, pc);
    x.setZero();
    status = run_cg(op.S, op.rhs, pc, opts.tol, maxit, x, its, relres);
    report.iterations += its;
  }
  report.preconditioner = pc.kind;
  report.relative_residual = relres;
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (status == CgStatus::MaxIt) {
    throw Error(ErrorKind::Numerical, "PCG did not converge in " + std::to_string(maxit) +
                                          " iterations (relative residual " + std::to_string(relres) + ")");
  }
  if (status == CgStatus::Breakdown) throw Error(ErrorKind::Numerical, "PCG breakdown");
  return x;
}

FEFields recover_fields(const SaddleSystem& sys, const LocalInverse& inv, const Eigen::VectorXd& lambda) {
  if (static_cast<std::size_t>(lambda.size()) != sys.dofs.n_lambda()) {
    throw Error(ErrorKind::Argument, "multiplier vector length mismatch");
  }
  Eigen::VectorXd y = sys.F;
  if (lambda.size() > 0) y -= sys.apply_B(lambda);
  return FEFields(sys.mesh, sys.dofs, inv.apply(y), lambda);
}

FEFields solve_system(const SaddleSystem& sys, const PcgOptions& opts, SolveReport& report) {
  const LocalInverse inv(sys);
  const SchurOperator op = build_schur(sys, inv);
  const Eigen::VectorXd lambda = pcg(op, opts, report);
  return recover_fields(sys, inv, lambda);
}

}  // namespace hmfem
