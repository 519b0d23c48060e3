#pragma once

#include "bench.hpp"
#include "estimator.hpp"
#include "solver.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hmfem {

/// Smallest set M with sum_{M} bar_eta2 >= theta^2 sum bar_eta2: values
/// sorted descending (ties by ascending id), shortest qualifying prefix.
/// Returned ids are in that sorted order.
std::vector<std::size_t> dorfler_mark(std::span<const double> bar_eta2, double theta);

enum class RefinementMode { Adaptive, Uniform };

struct AfemConfig {
  double theta = 0.3;
  SpaceConfig space;
  std::size_t max_elements = 20000;
  std::size_t max_iterations = 100;
  double eta_tol = 0.0;
  RefinementMode refinement = RefinementMode::Adaptive;
  PcgOptions pcg;

  void validate() const;
};

/// Data for the loop; `exact` enables the err_A column.
struct AfemProblem {
  ProblemData data;
  std::optional<ExactSolution> exact;
};

struct AfemRecord {
  std::size_t iter = 0;
  std::size_t nt = 0;
  std::size_t n_sigma = 0;
  std::size_t n_u = 0;
  std::size_t n_lambda = 0;
  double eta = 0.0;
  double osc = 0.0;
  double bar_eta = 0.0;
  std::optional<double> err_A;
  std::size_t marked = 0;
  std::size_t pcg_iters = 0;
  double wall_ms = 0.0;
};

/// Everything produced by one SOLVE-ESTIMATE-MARK pass on a mesh.
struct AfemStep {
  FEFields fields;
  EstimatorReport report;
  SolveReport solve;
  std::vector<std::size_t> marked;  // all triangles in uniform mode
  AfemRecord record;
};

/// Solves, estimates and marks on `mesh`; refinement is left to the caller.
AfemStep afem_step(std::shared_ptr<const Mesh> mesh, const AfemConfig& cfg, const AfemProblem& problem,
                   std::size_t iter);

/// Refines the marked triangles (adaptive) or every triangle by one bisection
/// (uniform) and returns the new mesh.
Mesh refine(const Mesh& mesh, const AfemStep& step, RefinementMode mode);

struct AfemTrace {
  std::vector<AfemRecord> rows;
  /// The loop stopped at max_iterations before the element or eta criterion held.
  bool truncated = false;
  std::shared_ptr<const Mesh> final_mesh;
  FEFields final_fields;
  EstimatorReport final_report;
};

/// Loop order per iteration: solve, estimate, record, test the stop
/// criteria (eta_tol, max_elements, max_iterations), mark and refine.
AfemTrace run(std::shared_ptr<const Mesh> initial, const AfemConfig& cfg, const AfemProblem& problem,
              const std::function<void(const AfemRecord&)>& on_record = {});

}  // namespace hmfem
