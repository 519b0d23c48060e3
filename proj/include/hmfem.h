/* C interface to the hmfem adaptive mixed elasticity solver.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_destroy function. Every call returns an hmfem_status; on failure
 * hmfem_last_error() describes the problem (per thread, valid until the next
 * failing call on that thread). */
#ifndef HMFEM_H
#define HMFEM_H

#include <stddef.h>

#if defined(HMFEM_BUILDING)
#define HMFEM_API __attribute__((visibility("default")))
#else
#define HMFEM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hmfem_status {
  HMFEM_OK = 0,
  HMFEM_ERR_ARGUMENT = 1,  /* bad argument or null handle */
  HMFEM_ERR_CONFIG = 2,    /* invalid or unknown configuration value */
  HMFEM_ERR_MESH = 3,      /* invalid or nonconforming mesh */
  HMFEM_ERR_NUMERICAL = 4, /* solver failure, non-finite data */
  HMFEM_ERR_IO = 5,        /* file could not be read or written */
  HMFEM_ERR_INTERNAL = 6
} hmfem_status;

typedef struct hmfem_config hmfem_config;
typedef struct hmfem_mesh hmfem_mesh;
typedef struct hmfem_result hmfem_result;

/* One row of the AFEM trace. has_err_A is 0 when no exact solution is known. */
typedef struct hmfem_trace_row {
  size_t iter;
  size_t nt;
  size_t n_sigma;
  size_t n_u;
  size_t n_lambda;
  double eta;
  double osc;
  double bar_eta;
  int has_err_A;
  double err_A;
  size_t marked;
  size_t pcg_iters;
  double wall_ms;
} hmfem_trace_row;

typedef void (*hmfem_progress_fn)(const hmfem_trace_row* row, void* user);

HMFEM_API const char* hmfem_last_error(void);
HMFEM_API const char* hmfem_version(void);

/* Configuration: flat key=value pairs (problem, r, theta, lambda, mu,
 * refinement, max_elements, max_iterations, eta_tol, pcg_tol, pcg_maxit,
 * preconditioner, out, mesh, data). */
HMFEM_API hmfem_status hmfem_config_create(hmfem_config** out);
HMFEM_API void hmfem_config_destroy(hmfem_config* cfg);
HMFEM_API hmfem_status hmfem_config_set(hmfem_config* cfg, const char* key, const char* value);
/* Copies the current value into buf (NUL-terminated, truncated to size). */
HMFEM_API hmfem_status hmfem_config_get(const hmfem_config* cfg, const char* key, char* buf, size_t size);
HMFEM_API hmfem_status hmfem_config_load(hmfem_config* cfg, const char* path);
HMFEM_API hmfem_status hmfem_config_validate(const hmfem_config* cfg);

/* Runs. solve: one solve on the initial mesh; adapt: the full loop.
 * progress may be NULL. */
HMFEM_API hmfem_status hmfem_run_solve(const hmfem_config* cfg, hmfem_progress_fn progress, void* user,
                                       hmfem_result** out);
HMFEM_API hmfem_status hmfem_run_adapt(const hmfem_config* cfg, hmfem_progress_fn progress, void* user,
                                       hmfem_result** out);
HMFEM_API void hmfem_result_destroy(hmfem_result* res);
HMFEM_API hmfem_status hmfem_result_num_rows(const hmfem_result* res, size_t* n);
HMFEM_API hmfem_status hmfem_result_row(const hmfem_result* res, size_t i, hmfem_trace_row* row);
HMFEM_API hmfem_status hmfem_result_truncated(const hmfem_result* res, int* truncated);
/* Least-squares slope of err_A (estimator = 0) or bar_eta (estimator = 1)
 * against nt over the last window rows. */
HMFEM_API hmfem_status hmfem_result_slope(const hmfem_result* res, size_t window, int estimator, double* slope);
/* Per-element squared indicators of the final mesh; arrays of length n
 * (query n with NULL arrays). */
HMFEM_API hmfem_status hmfem_result_indicators(const hmfem_result* res, double* eta2, double* osc2, size_t* n);
/* Writes mesh.txt, trace.csv, indicators.csv, summary.txt; dir NULL uses the
 * configured output directory. */
HMFEM_API hmfem_status hmfem_result_write(const hmfem_result* res, const char* dir);
HMFEM_API hmfem_status hmfem_result_final_mesh(const hmfem_result* res, hmfem_mesh** out);

/* Meshes. */
HMFEM_API hmfem_status hmfem_mesh_lshape(hmfem_mesh** out);
HMFEM_API hmfem_status hmfem_mesh_read(const char* path, hmfem_mesh** out);
HMFEM_API hmfem_status hmfem_mesh_write(const hmfem_mesh* mesh, const char* path);
HMFEM_API hmfem_status hmfem_mesh_refine_uniform(const hmfem_mesh* mesh, hmfem_mesh** out);
/* Newest-vertex bisection of the listed triangles plus closure. */
HMFEM_API hmfem_status hmfem_mesh_bisect(const hmfem_mesh* mesh, const size_t* marked, size_t n, hmfem_mesh** out);
HMFEM_API hmfem_status hmfem_mesh_counts(const hmfem_mesh* mesh, size_t* vertices, size_t* triangles, size_t* edges);
HMFEM_API void hmfem_mesh_destroy(hmfem_mesh* mesh);
/* Writes the configured problem's initial mesh to dir/mesh.txt (dir NULL:
 * configured output directory). */
HMFEM_API hmfem_status hmfem_mesh_export(const hmfem_config* cfg, const char* dir);

/* Smallest root in (0,1) of the L-shape characteristic equation, omega = 3pi/2. */
HMFEM_API hmfem_status hmfem_find_z(double lambda, double mu, double* z);

/* Dorfler marking: writes the marked ids (in selection order) to out, which
 * must hold n entries; *count receives the number marked. */
HMFEM_API hmfem_status hmfem_dorfler_mark(const double* bar_eta2, size_t n, double theta, size_t* out, size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* HMFEM_H */
