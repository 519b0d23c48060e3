#include "adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace hmfem {

std::vector<std::size_t> dorfler_mark(std::span<const double> bar_eta2, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error(ErrorKind::Config, "theta must lie in (0,1)");
  double total = 0.0;
  for (double v : bar_eta2) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::Argument, "indicators must be finite and nonnegative");
    total += v;
  }
  if (total == 0.0) throw Error(ErrorKind::Argument, "all indicators are zero; nothing to mark");
  std::vector<std::size_t> order(bar_eta2.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return bar_eta2[a] > bar_eta2[b]; });
  const double goal = theta * theta * total;
  double acc = 0.0;
  std::size_t k = 0;
  while (k < order.size() && acc < goal) acc += bar_eta2[order[k++]];
  order.resize(k);
  return order;
}

void AfemConfig::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) throw Error(ErrorKind::Config, "theta must lie in (0,1)");
  space.validate();
  if (max_elements == 0) throw Error(ErrorKind::Config, "max_elements must be positive");
  if (!(eta_tol >= 0.0)) throw Error(ErrorKind::Config, "eta_tol must be nonnegative");
  if (!(pcg.tol > 0.0 && pcg.tol < 1.0)) throw Error(ErrorKind::Config, "pcg tolerance must lie in (0,1)");
}

AfemStep afem_step(std::shared_ptr<const Mesh> mesh, const AfemConfig& cfg, const AfemProblem& problem,
                   std::size_t iter) {
  const auto start = std::chrono::steady_clock::now();
  AfemStep step;
  const SaddleSystem sys = assemble(mesh, cfg.space, problem.data);
  step.fields = solve_system(sys, cfg.pcg, step.solve);
  step.report = estimate(step.fields, problem.data);
  if (cfg.refinement == RefinementMode::Uniform) {
    step.marked.resize(mesh->num_triangles());
    std::iota(step.marked.begin(), step.marked.end(), std::size_t{0});
  } else if (step.report.bar_eta > 0.0) {
    step.marked = dorfler_mark(step.report.bar_eta2, cfg.theta);
  }
  AfemRecord& rec = step.record;
  rec.iter = iter;
  rec.nt = mesh->num_triangles();
  rec.n_sigma = sys.dofs.n_sigma();
  rec.n_u = sys.dofs.n_u();
  rec.n_lambda = sys.dofs.n_lambda();
  rec.eta = step.report.eta;
  rec.osc = step.report.osc;
  rec.bar_eta = step.report.bar_eta;
  if (problem.exact) rec.err_A = error_A_norm(step.fields, *problem.exact);
  rec.marked = step.marked.size();
  rec.pcg_iters = step.solve.iterations;
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return step;
}

Mesh refine(const Mesh& mesh, const AfemStep& step, RefinementMode mode) {
  if (mode == RefinementMode::Uniform) return uniform_refine(mesh);
  return bisect(mesh, step.marked);
}

AfemTrace run(std::shared_ptr<const Mesh> initial, const AfemConfig& cfg, const AfemProblem& problem,
              const std::function<void(const AfemRecord&)>& on_record) {
  cfg.validate();
  AfemTrace trace;
  std::shared_ptr<const Mesh> mesh = std::move(initial);
  for (std::size_t iter = 0;; ++iter) {
    AfemStep step = afem_step(mesh, cfg, problem, iter);
    trace.rows.push_back(step.record);
    if (on_record) on_record(step.record);
    const bool converged = step.report.bar_eta <= cfg.eta_tol;
    const bool full = mesh->num_triangles() >= cfg.max_elements;
    if (converged || full || iter >= cfg.max_iterations || step.marked.empty()) {
      trace.truncated = !converged && !full && iter >= cfg.max_iterations;
      trace.final_mesh = mesh;
      trace.final_fields = std::move(step.fields);
      trace.final_report = std::move(step.report);
      return trace;
    }
    mesh = std::make_shared<const Mesh>(refine(*mesh, step, cfg.refinement));
  }
}

}  // namespace hmfem
