// Command-line driver: solve, adapt, mesh-export. Uses only the C API.
#include "hmfem.h"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

int exit_code(hmfem_status s) {
  switch (s) {
    case HMFEM_OK: return 0;
    case HMFEM_ERR_CONFIG:
    case HMFEM_ERR_ARGUMENT: return 2;
    case HMFEM_ERR_NUMERICAL: return 3;
    default: return 1;
  }
}

struct Failure {
  hmfem_status status;
  std::string message;
};

void check(hmfem_status s) {
  if (s != HMFEM_OK) throw Failure{s, hmfem_last_error()};
}

struct Options {
  std::string config;
  std::optional<std::string> out, problem, mesh;
  std::optional<double> theta, lambda, mu;
  std::optional<int> r;
  std::optional<long long> max_elements;
  bool uniform = false;
  bool quiet = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "key=value configuration file");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--problem", o.problem, "lshape | manufactured | from-files");
  app->add_option("--mesh", o.mesh, "mesh file for problem=from-files");
  app->add_option("--theta", o.theta, "marking parameter in (0,1)");
  app->add_option("--lambda", o.lambda, "Lame parameter lambda");
  app->add_option("--mu", o.mu, "Lame parameter mu");
  app->add_option("--r", o.r, "degree parameter (stress degree r+3)");
  app->add_option("--max-elements", o.max_elements, "stop once the mesh has this many triangles");
  app->add_flag("--uniform", o.uniform, "uniform instead of adaptive refinement");
  app->add_option("--set", o.sets, "extra key=value override (repeatable)");
  app->add_flag("-q,--quiet", o.quiet, "no per-iteration progress");
}

void set(hmfem_config* cfg, const std::string& key, const std::string& value) { check(hmfem_config_set(cfg, key.c_str(), value.c_str())); }

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

hmfem_config* build_config(const Options& o) {
  hmfem_config* cfg = nullptr;
  check(hmfem_config_create(&cfg));
  try {
    if (!o.config.empty()) check(hmfem_config_load(cfg, o.config.c_str()));
    if (o.out) set(cfg, "out", *o.out);
    if (o.problem) set(cfg, "problem", *o.problem);
    if (o.mesh) set(cfg, "mesh", *o.mesh);
    if (o.theta) set(cfg, "theta", num(*o.theta));
    if (o.lambda) set(cfg, "lambda", num(*o.lambda));
    if (o.mu) set(cfg, "mu", num(*o.mu));
    if (o.r) set(cfg, "r", std::to_string(*o.r));
    if (o.max_elements) set(cfg, "max_elements", std::to_string(*o.max_elements));
    if (o.uniform) set(cfg, "refinement", "uniform");
    for (const auto& kv : o.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure{HMFEM_ERR_CONFIG, "--set expects key=value, got '" + kv + "'"};
      set(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    check(hmfem_config_validate(cfg));
  } catch (...) {
    hmfem_config_destroy(cfg);
    throw;
  }
  return cfg;
}

void progress(const hmfem_trace_row* row, void*) {
  std::fprintf(stderr, "iter %zu  nt %zu  bar_eta %.6e", row->iter, row->nt, row->bar_eta);
  if (row->has_err_A) std::fprintf(stderr, "  err_A %.6e", row->err_A);
  std::fprintf(stderr, "  marked %zu  pcg %zu  %.0f ms\n", row->marked, row->pcg_iters, row->wall_ms);
}

int run(const Options& o, bool adapt) {
  std::unique_ptr<hmfem_config, decltype(&hmfem_config_destroy)> cfg(build_config(o), hmfem_config_destroy);
  hmfem_result* raw = nullptr;
  const hmfem_progress_fn cb = o.quiet ? nullptr : progress;
  check(adapt ? hmfem_run_adapt(cfg.get(), cb, nullptr, &raw) : hmfem_run_solve(cfg.get(), cb, nullptr, &raw));
  std::unique_ptr<hmfem_result, decltype(&hmfem_result_destroy)> res(raw, hmfem_result_destroy);
  check(hmfem_result_write(res.get(), nullptr));

  char out[4096];
  check(hmfem_config_get(cfg.get(), "out", out, sizeof out));
  size_t n = 0;
  check(hmfem_result_num_rows(res.get(), &n));
  hmfem_trace_row last{};
  check(hmfem_result_row(res.get(), n - 1, &last));
  std::printf("wrote %s/{mesh.txt,trace.csv,indicators.csv,summary.txt}\n", out);
  std::printf("iterations %zu  final nt %zu  eta %.6e  osc %.6e  bar_eta %.6e", n, last.nt, last.eta, last.osc, last.bar_eta);
  if (last.has_err_A) std::printf("  err_A %.6e", last.err_A);
  std::printf("\n");
  if (adapt) {
    double slope = 0.0;
    if (hmfem_result_slope(res.get(), 8, 0, &slope) == HMFEM_OK) std::printf("slope err_A (last 8) %.4f\n", slope);
    int truncated = 0;
    check(hmfem_result_truncated(res.get(), &truncated));
    if (truncated) std::printf("stopped at max_iterations before the other criteria held\n");
  }
  return 0;
}

int export_mesh(const Options& o) {
  std::unique_ptr<hmfem_config, decltype(&hmfem_config_destroy)> cfg(build_config(o), hmfem_config_destroy);
  check(hmfem_mesh_export(cfg.get(), nullptr));
  char out[4096];
  check(hmfem_config_get(cfg.get(), "out", out, sizeof out));
  std::printf("wrote %s/mesh.txt\n", out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive hybridized mixed finite elements for planar linear elasticity"};
  app.require_subcommand(1);
  Options solve_o, adapt_o, export_o;
  auto* solve = app.add_subcommand("solve", "one solve on the initial mesh");
  auto* adapt = app.add_subcommand("adapt", "adaptive (or uniform) refinement loop");
  auto* mexp = app.add_subcommand("mesh-export", "write the initial mesh");
  add_common(solve, solve_o);
  add_common(adapt, adapt_o);
  add_common(mexp, export_o);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (solve->parsed()) return run(solve_o, false);
    if (adapt->parsed()) return run(adapt_o, true);
    return export_mesh(export_o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return exit_code(f.status);
  }
}
