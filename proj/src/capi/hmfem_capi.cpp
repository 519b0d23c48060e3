#include "hmfem.h"

#include "driver.hpp"

#include <cstring>
#include <new>
#include <numbers>
#include <string>

struct hmfem_config {
  hmfem::RunConfig cfg;
};

struct hmfem_mesh {
  std::shared_ptr<const hmfem::Mesh> mesh;
};

struct hmfem_result {
  hmfem::RunResult result;
};

namespace {

thread_local std::string last_error;

hmfem_status fail(hmfem_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

hmfem_status status_of(hmfem::ErrorKind k) {
  switch (k) {
    case hmfem::ErrorKind::Argument: return HMFEM_ERR_ARGUMENT;
    case hmfem::ErrorKind::Config: return HMFEM_ERR_CONFIG;
    case hmfem::ErrorKind::Mesh: return HMFEM_ERR_MESH;
    case hmfem::ErrorKind::Numerical: return HMFEM_ERR_NUMERICAL;
    case hmfem::ErrorKind::Io: return HMFEM_ERR_IO;
  }
  return HMFEM_ERR_INTERNAL;
}

template <class F>
hmfem_status guard(F&& f) {
  try {
    f();
    return HMFEM_OK;
  } catch (const hmfem::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HMFEM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HMFEM_ERR_INTERNAL, e.what());
  }
}

#define HMFEM_REQUIRE(cond) \
  if (!(cond)) return fail(HMFEM_ERR_ARGUMENT, "null argument: " #cond)

hmfem_trace_row to_row(const hmfem::AfemRecord& r) {
  hmfem_trace_row row{};
  row.iter = r.iter;
  row.nt = r.nt;
  row.n_sigma = r.n_sigma;
  row.n_u = r.n_u;
  row.n_lambda = r.n_lambda;
  row.eta = r.eta;
  row.osc = r.osc;
  row.bar_eta = r.bar_eta;
  row.has_err_A = r.err_A.has_value() ? 1 : 0;
  row.err_A = r.err_A.value_or(0.0);
  row.marked = r.marked;
  row.pcg_iters = r.pcg_iters;
  row.wall_ms = r.wall_ms;
  return row;
}

template <class Run>
hmfem_status run_with(const hmfem_config* cfg, hmfem_progress_fn progress, void* user, hmfem_result** out, Run run) {
  HMFEM_REQUIRE(cfg);
  HMFEM_REQUIRE(out);
  *out = nullptr;
  return guard([&] {
    std::function<void(const hmfem::AfemRecord&)> cb;
    if (progress) {
      cb = [progress, user](const hmfem::AfemRecord& r) {
        const hmfem_trace_row row = to_row(r);
        progress(&row, user);
      };
    }
    auto res = std::make_unique<hmfem_result>();
    res->result = run(cfg->cfg, cb);
    *out = res.release();
  });
}

}  // namespace

extern "C" {

const char* hmfem_last_error(void) { return last_error.c_str(); }

const char* hmfem_version(void) { return "1.0.0"; }

hmfem_status hmfem_config_create(hmfem_config** out) {
  HMFEM_REQUIRE(out);
  return guard([&] { *out = new hmfem_config(); });
}

void hmfem_config_destroy(hmfem_config* cfg) { delete cfg; }

hmfem_status hmfem_config_set(hmfem_config* cfg, const char* key, const char* value) {
  HMFEM_REQUIRE(cfg);
  HMFEM_REQUIRE(key);
  HMFEM_REQUIRE(value);
  return guard([&] { cfg->cfg.set(key, value); });
}

hmfem_status hmfem_config_get(const hmfem_config* cfg, const char* key, char* buf, size_t size) {
  HMFEM_REQUIRE(cfg);
  HMFEM_REQUIRE(key);
  HMFEM_REQUIRE(buf);
  HMFEM_REQUIRE(size > 0);
  return guard([&] {
    const std::string v = cfg->cfg.get(key);
    const std::size_t n = std::min(v.size(), size - 1);
    std::memcpy(buf, v.data(), n);
    buf[n] = '\0';
  });
}

hmfem_status hmfem_config_load(hmfem_config* cfg, const char* path) {
  HMFEM_REQUIRE(cfg);
  HMFEM_REQUIRE(path);
  return guard([&] { cfg->cfg.load(std::string(path)); });
}

hmfem_status hmfem_config_validate(const hmfem_config* cfg) {
  HMFEM_REQUIRE(cfg);
  return guard([&] { cfg->cfg.validate(); });
}

hmfem_status hmfem_run_solve(const hmfem_config* cfg, hmfem_progress_fn progress, void* user, hmfem_result** out) {
  return run_with(cfg, progress, user, out, [](const hmfem::RunConfig& c, const auto& cb) { return hmfem::run_solve(c, cb); });
}

hmfem_status hmfem_run_adapt(const hmfem_config* cfg, hmfem_progress_fn progress, void* user, hmfem_result** out) {
  return run_with(cfg, progress, user, out, [](const hmfem::RunConfig& c, const auto& cb) { return hmfem::run_adapt(c, cb); });
}

void hmfem_result_destroy(hmfem_result* res) { delete res; }

hmfem_status hmfem_result_num_rows(const hmfem_result* res, size_t* n) {
  HMFEM_REQUIRE(res);
  HMFEM_REQUIRE(n);
  *n = res->result.trace.rows.size();
  return HMFEM_OK;
}

hmfem_status hmfem_result_row(const hmfem_result* res, size_t i, hmfem_trace_row* row) {
  HMFEM_REQUIRE(res);
  HMFEM_REQUIRE(row);
  if (i >= res->result.trace.rows.size()) return fail(HMFEM_ERR_ARGUMENT, "trace row index out of range");
  *row = to_row(res->result.trace.rows[i]);
  return HMFEM_OK;
}

hmfem_status hmfem_result_truncated(const hmfem_result* res, int* truncated) {
  HMFEM_REQUIRE(res);
  HMFEM_REQUIRE(truncated);
  *truncated = res->result.trace.truncated ? 1 : 0;
  return HMFEM_OK;
}

hmfem_status hmfem_result_slope(const hmfem_result* res, size_t window, int estimator, double* slope) {
  HMFEM_REQUIRE(res);
  HMFEM_REQUIRE(slope);
  return guard([&] {
    const auto s = hmfem::trace_slope(res->result.trace.rows, window, estimator != 0);
    if (!s) throw hmfem::Error(hmfem::ErrorKind::Argument, "not enough trace rows with positive values for a slope");
    *slope = *s;
  });
}

hmfem_status hmfem_result_indicators(const hmfem_result* res, double* eta2, double* osc2, size_t* n) {
  HMFEM_REQUIRE(res);
  HMFEM_REQUIRE(n);
  const auto& rep = res->result.trace.final_report;
  if (eta2 || osc2) {
    if (*n < rep.eta2.size()) return fail(HMFEM_ERR_ARGUMENT, "indicator buffer too small");
    for (std::size_t i = 0; i < rep.eta2.size(); ++i) {
      if (eta2) eta2[i] = rep.eta2[i];
      if (osc2) osc2[i] = rep.osc2[i];
    }
  }
  *n = rep.eta2.size();
  return HMFEM_OK;
}

hmfem_status hmfem_result_write(const hmfem_result* res, const char* dir) {
  HMFEM_REQUIRE(res);
  return guard([&] { hmfem::write_outputs(dir ? std::string(dir) : res->result.config.out, res->result); });
}

hmfem_status hmfem_result_final_mesh(const hmfem_result* res, hmfem_mesh** out) {
  HMFEM_REQUIRE(res);
  HMFEM_REQUIRE(out);
  return guard([&] { *out = new hmfem_mesh{res->result.trace.final_mesh}; });
}

hmfem_status hmfem_mesh_lshape(hmfem_mesh** out) {
  HMFEM_REQUIRE(out);
  return guard([&] { *out = new hmfem_mesh{std::make_shared<const hmfem::Mesh>(hmfem::l_shaped_initial_mesh())}; });
}

hmfem_status hmfem_mesh_read(const char* path, hmfem_mesh** out) {
  HMFEM_REQUIRE(path);
  HMFEM_REQUIRE(out);
  return guard([&] { *out = new hmfem_mesh{std::make_shared<const hmfem::Mesh>(hmfem::read_mesh(std::string(path)))}; });
}

hmfem_status hmfem_mesh_write(const hmfem_mesh* mesh, const char* path) {
  HMFEM_REQUIRE(mesh);
  HMFEM_REQUIRE(path);
  return guard([&] { hmfem::write_mesh(std::string(path), *mesh->mesh); });
}

hmfem_status hmfem_mesh_refine_uniform(const hmfem_mesh* mesh, hmfem_mesh** out) {
  HMFEM_REQUIRE(mesh);
  HMFEM_REQUIRE(out);
  return guard([&] { *out = new hmfem_mesh{std::make_shared<const hmfem::Mesh>(hmfem::uniform_refine(*mesh->mesh))}; });
}

hmfem_status hmfem_mesh_bisect(const hmfem_mesh* mesh, const size_t* marked, size_t n, hmfem_mesh** out) {
  HMFEM_REQUIRE(mesh);
  HMFEM_REQUIRE(out);
  HMFEM_REQUIRE(marked || n == 0);
  return guard([&] {
    const std::vector<std::size_t> m(marked, marked + n);
    *out = new hmfem_mesh{std::make_shared<const hmfem::Mesh>(hmfem::bisect(*mesh->mesh, m))};
  });
}

hmfem_status hmfem_mesh_counts(const hmfem_mesh* mesh, size_t* vertices, size_t* triangles, size_t* edges) {
  HMFEM_REQUIRE(mesh);
  if (vertices) *vertices = mesh->mesh->num_vertices();
  if (triangles) *triangles = mesh->mesh->num_triangles();
  if (edges) *edges = mesh->mesh->num_edges();
  return HMFEM_OK;
}

void hmfem_mesh_destroy(hmfem_mesh* mesh) { delete mesh; }

hmfem_status hmfem_mesh_export(const hmfem_config* cfg, const char* dir) {
  HMFEM_REQUIRE(cfg);
  return guard([&] { hmfem::export_initial_mesh(cfg->cfg, dir ? std::string(dir) : cfg->cfg.out); });
}

hmfem_status hmfem_find_z(double lambda, double mu, double* z) {
  HMFEM_REQUIRE(z);
  return guard([&] { *z = hmfem::find_z(lambda, mu, 1.5 * std::numbers::pi); });
}

hmfem_status hmfem_dorfler_mark(const double* bar_eta2, size_t n, double theta, size_t* out, size_t* count) {
  HMFEM_REQUIRE(bar_eta2 || n == 0);
  HMFEM_REQUIRE(out || n == 0);
  HMFEM_REQUIRE(count);
  return guard([&] {
    const auto m = hmfem::dorfler_mark(std::span<const double>(bar_eta2, n), theta);
    std::copy(m.begin(), m.end(), out);
    *count = m.size();
  });
}

}  // extern "C"
