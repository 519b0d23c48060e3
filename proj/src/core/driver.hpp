#pragma once

#include "adapt.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace hmfem {

enum class ProblemKind { LShape, Manufactured, FromFiles };

/// Flat key=value run configuration. Unknown keys and malformed values are
/// Config errors.
struct RunConfig {
  ProblemKind problem = ProblemKind::LShape;
  int r = 0;
  double theta = 0.3;
  double lambda = 1e4;
  double mu = 1.0;
  RefinementMode refinement = RefinementMode::Adaptive;
  std::size_t max_elements = 20000;
  std::size_t max_iterations = 1000;
  double eta_tol = 0.0;
  double pcg_tol = 1e-10;
  std::size_t pcg_maxit = 0;
  PreconditionerChoice preconditioner = PreconditionerChoice::Cholesky;
  std::string out = "out";
  /// from-files: mesh file and closed-form data (manufactured | lshape)
  std::string mesh;
  std::string data = "manufactured";

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  /// Reads "key = value" lines; '#' starts a comment.
  void load(std::istream& is);
  void load(const std::string& path);
  void validate() const;

  AfemConfig afem() const;
  MaterialParams material() const { return {mu, lambda}; }
};

/// Initial mesh and data selected by a configuration.
struct ProblemSetup {
  std::shared_ptr<const Mesh> mesh;
  AfemProblem problem;
  std::optional<double> z;  // singular exponent for the L-shape data
};

ProblemSetup make_problem(const RunConfig& cfg);

struct RunResult {
  RunConfig config;
  ProblemSetup setup;
  AfemTrace trace;
};

/// One solve on the initial mesh (a single trace row).
RunResult run_solve(const RunConfig& cfg, const std::function<void(const AfemRecord&)>& on_record = {});
/// Full adaptive (or uniform) loop.
RunResult run_adapt(const RunConfig& cfg, const std::function<void(const AfemRecord&)>& on_record = {});

inline constexpr const char* kTraceHeader = "iter,nt,n_sigma,n_u,n_lambda,eta,osc,bar_eta,err_A,marked,pcg_iters,wall_ms";

void write_trace_csv(std::ostream& os, const std::vector<AfemRecord>& rows);

/// Least-squares slope of err_A (or bar_eta when `estimator`) against nt over
/// the last min(window, rows) rows; empty with fewer than two usable rows.
std::optional<double> trace_slope(const std::vector<AfemRecord>& rows, std::size_t window, bool estimator);

/// Writes mesh.txt, trace.csv, indicators.csv and summary.txt into `dir`
/// (created if missing).
void write_outputs(const std::string& dir, const RunResult& result);

/// Writes the initial mesh of the configured problem to `dir`/mesh.txt.
void export_initial_mesh(const RunConfig& cfg, const std::string& dir);

}  // namespace hmfem
