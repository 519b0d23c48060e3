#pragma once

#include "problem.hpp"
#include "quadrature.hpp"
#include "spaces.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace hmfem {

/// Degree-dependent reference quantities shared by all elements.
struct ReferenceElement {
  SpaceConfig cfg;
  const ReferenceBasis* stress = nullptr;
  const ReferenceBasis* displacement = nullptr;
  /// gx(k,a) = int_ref d/dx psi^sigma_a psi^u_k, likewise gy for d/dy
  Eigen::MatrixXd gx, gy;
  const QuadratureRule* volume_rule = nullptr;  // load integrals
  Eigen::MatrixXd volume_disp_values;           // (num points, displacement dim)
  const QuadratureRule* edge_rule = nullptr;    // traces, boundary data

  static const ReferenceElement& get(SpaceConfig cfg);
};

/// Component matrix N with (E_c n)_d = N(c,d).
Eigen::Matrix<double, 3, 2> normal_components(const Vec2& n);

/// One side of a multiplier edge: trace(a,m) = int_e psi^sigma_a l_m ds on
/// `triangle`, with the jump sign (+1 on the plus side).
struct EdgeSide {
  std::size_t triangle = npos;
  double sign = 1.0;
  Eigen::MatrixXd trace;
};

/// Hybridized saddle-point system (A B; B^T O)(X; Lambda) = (F; G).
/// A is block diagonal: every element block is [[K (x) I, D^T], [D, 0]] with
/// the shared compliance component matrix K; only D varies per element.
/// G carries the Neumann traction data and is zero when there are no
/// Neumann edges.
class SaddleSystem {
 public:
  std::shared_ptr<const Mesh> mesh;
  DofMap dofs;
  MaterialParams material;
  Eigen::Matrix3d compliance;
  std::vector<Eigen::MatrixXd> divergence;      // per triangle: (local disp) x (local stress)
  std::vector<std::vector<EdgeSide>> coupling;  // per multiplier slot
  Eigen::VectorXd F;
  Eigen::VectorXd G;
  std::vector<std::string> warnings;

  const SpaceConfig& config() const { return dofs.config(); }

  /// Dense local block of A for triangle t.
  Eigen::MatrixXd local_block(std::size_t t) const;
  /// Dense (local stress) x (edge multipliers) block of B for a multiplier edge side.
  Eigen::MatrixXd coupling_block(std::size_t slot, std::size_t side) const;

  Eigen::VectorXd apply_A(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_B(const Eigen::VectorXd& lambda) const;
  Eigen::VectorXd apply_Bt(const Eigen::VectorXd& x) const;

  /// "row col value" lines for the full matrix [[A, B], [B^T, 0]].
  void write_triplets(std::ostream& os) const;
};

/// Element block for triangle t of `mesh` (standalone form of SaddleSystem::local_block).
Eigen::MatrixXd local_block(const Mesh& mesh, std::size_t t, SpaceConfig cfg, const MaterialParams& m);

/// Divergence block D(k,j) = (div phi_j, psi_k)_T.
Eigen::MatrixXd local_divergence(const Mesh& mesh, std::size_t t, const ReferenceElement& ref);

/// Signed (local stress) x (edge multipliers) coupling of edge e seen from
/// triangle t; rejects Dirichlet edges.
Eigen::MatrixXd local_edge_coupling(const Mesh& mesh, std::size_t e, std::size_t t, SpaceConfig cfg);

/// Contribution of triangle t to F: load in the displacement rows and
/// Dirichlet data of its boundary edges in the stress rows.
Eigen::VectorXd local_rhs(const Mesh& mesh, std::size_t t, const ProblemData& data, SpaceConfig cfg);

/// Neumann data int_e mu_i . g_N ds for a Neumann edge.
Eigen::VectorXd local_neumann_rhs(const Mesh& mesh, std::size_t e, const ProblemData& data, SpaceConfig cfg);

/// max_v |int f.v - int_{Gamma_N} g_N.v| / scale over the rigid motions, or 0
/// if the mesh has Dirichlet edges (no compatibility requirement).
double compatibility_defect(const Mesh& mesh, const ProblemData& data, SpaceConfig cfg);

SaddleSystem assemble(std::shared_ptr<const Mesh> mesh, SpaceConfig cfg, const ProblemData& data);

}  // namespace hmfem
