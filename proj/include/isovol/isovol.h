#ifndef ISOVOL_ISOVOL_H
#define ISOVOL_ISOVOL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ISOVOL_BUILDING_LIBRARY)
#    define ISOVOL_API __declspec(dllexport)
#  else
#    define ISOVOL_API __declspec(dllimport)
#  endif
#else
#  define ISOVOL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum isovol_status {
  ISOVOL_OK = 0,
  ISOVOL_INVALID_ARGUMENT = 1,
  ISOVOL_NOT_POSITIVE_DEFINITE = 2,
  ISOVOL_DEGENERATE_LEVEL = 3,
  ISOVOL_OFF_SIMPLEX_AFFINE_HULL = 4,
  ISOVOL_DEGENERATE_SIMPLEX = 5,
  ISOVOL_EMPTY_INTERSECTION = 6,
  ISOVOL_NUMERICALLY_ON_BOUNDARY = 7,
  ISOVOL_NO_CROSSING = 8,
  ISOVOL_ANCHOR_OUTSIDE_SIMPLEX = 9,
  ISOVOL_TANGENT_FACET = 10,
  ISOVOL_VOLUMES_NOT_CACHED = 11,
  ISOVOL_DEGENERATE_MEAN = 12,
  ISOVOL_SCHEDULE_STALL = 13,
  ISOVOL_NON_CONVERGENCE = 14,
  ISOVOL_ZERO_VARIANCE = 15,
  ISOVOL_MALFORMED_CSV = 16,
  ISOVOL_NON_MONOTONE_DATES = 17,
  ISOVOL_TOO_FEW_OBSERVATIONS = 18,
  ISOVOL_TOO_FEW_ASSETS = 19,
  ISOVOL_COVERAGE_GAP = 20,
  ISOVOL_TOO_SHORT_SERIES = 21,
  ISOVOL_DEGENERATE_VARIANCE = 22,
  ISOVOL_IO_ERROR = 23,
  ISOVOL_INTERNAL_ERROR = 99
} isovol_status;

/* Opaque handles. */
typedef struct isovol_body isovol_body;           /* sphere patch S^{d-1} ∩ simplex */
typedef struct isovol_transform isovol_transform; /* iso-variance slice -> sphere patch map */

ISOVOL_API const char* isovol_version(void);
ISOVOL_API const char* isovol_status_name(isovol_status status);
/* Message of the last failed call on this thread ("" if none). */
ISOVOL_API const char* isovol_last_error(void);
/* Strings and buffers returned through out-parameters are owned by the caller. */
ISOVOL_API void isovol_string_free(char* s);
ISOVOL_API void isovol_buffer_free(double* buffer);

/* ---- iso-variance transform ---- */

/* cov: n x n row-major covariance, level: target variance c > 0. */
ISOVOL_API isovol_status isovol_transform_create(const double* cov, int n, double level, isovol_transform** out);
ISOVOL_API void isovol_transform_free(isovol_transform* t);
ISOVOL_API int isovol_transform_assets(const isovol_transform* t);
ISOVOL_API int isovol_transform_dim(const isovol_transform* t);
/* weights: assets values summing to 1; point: dim values. */
ISOVOL_API isovol_status isovol_transform_to_patch(const isovol_transform* t, const double* weights, double* point);
ISOVOL_API isovol_status isovol_transform_from_patch(const isovol_transform* t, const double* point, double* weights);
ISOVOL_API isovol_status isovol_transform_to_json(const isovol_transform* t, char** json);

/* ---- bodies ---- */

/* normals: (dim+1) x dim row-major, offsets: dim+1 values; body = {x : A x <= b} ∩ S^{dim-1}. */
ISOVOL_API isovol_status isovol_body_create(const double* normals, const double* offsets, int dim, isovol_body** out);
ISOVOL_API isovol_status isovol_body_from_transform(const isovol_transform* t, isovol_body** out);
/* JSON object {"A": [[...], ...], "b": [...]}. */
ISOVOL_API isovol_status isovol_body_from_json(const char* json, isovol_body** out);
ISOVOL_API void isovol_body_free(isovol_body* body);
ISOVOL_API int isovol_body_dim(const isovol_body* body);
ISOVOL_API int isovol_body_component_count(const isovol_body* body);
/* component receives the component id, or -1 when the unit vector is outside. */
ISOVOL_API isovol_status isovol_body_membership(const isovol_body* body, const double* point, int* component);
ISOVOL_API isovol_status isovol_body_components_json(const isovol_body* body, char** json);

typedef struct isovol_sample_options {
  int walk;          /* 0 = reflective great-cycle walk, 1 = great-cycle walk */
  double tau;        /* trajectory length scale; <= 0 estimates it */
  int rho;           /* reflection budget; <= 0 uses 100 d */
  int walk_length;   /* steps between kept samples; <= 0 uses 1 */
  uint64_t burn_in;  /* steps discarded before the first sample */
  int threads;       /* <= 0 uses all cores */
} isovol_sample_options;

typedef struct isovol_volume_options {
  double epsilon;   /* target relative error, default 0.1 */
  double delta;     /* schedule variance window, default 0.1 */
  double epsilon0;  /* mass allowed outside at the last phase, default 0.05 */
  double zeta;      /* stopping-test failure probability, default 0.05 */
  uint64_t max_samples_per_phase;  /* default 1e7 */
  int max_phases;                  /* default 200 */
  int threads;                     /* <= 0 uses all cores */
} isovol_volume_options;

ISOVOL_API void isovol_sample_options_init(isovol_sample_options* options);
ISOVOL_API void isovol_volume_options_init(isovol_volume_options* options);

/* Estimates every component volume, caches normalized weights on the body and
   returns a JSON report. options may be NULL for defaults. */
ISOVOL_API isovol_status isovol_body_estimate_volumes(isovol_body* body, const isovol_volume_options* options,
                                                      uint64_t seed, char** report_json);
ISOVOL_API isovol_status isovol_body_set_weights(isovol_body* body, const double* weights, int count);

/* n uniform samples from the body into points (n x dim row-major).
   components (n ints) and diagnostics_json may be NULL. Bodies with more than
   one component need cached weights. */
ISOVOL_API isovol_status isovol_body_sample(const isovol_body* body, const isovol_sample_options* options,
                                            uint64_t seed, size_t n, double* points, int* components,
                                            char** diagnostics_json);

/* ---- portfolios ---- */

/* n long-only portfolios with x^T cov x = level into portfolios (n x n_assets row-major). */
ISOVOL_API isovol_status isovol_sample_level(const double* cov, int n_assets, double level, size_t n,
                                             const isovol_sample_options* sample_options,
                                             const isovol_volume_options* volume_options, uint64_t seed,
                                             double* portfolios, char** report_json);

/* Runs the quarterly backtest described by config_json (see README). */
ISOVOL_API isovol_status isovol_backtest_run(const char* config_json, uint64_t seed, char** stats_csv,
                                             char** report_json);

/* ---- diagnostics ---- */

/* samples: chains x n x dim, contiguous. out: dim PSRF values. */
ISOVOL_API isovol_status isovol_psrf(const double* samples, int chains, size_t n, int dim, double* out);

/* Numeric CSV with a header row; lines starting with '#' are skipped.
   values is rows x cols row-major; free with isovol_buffer_free. */
ISOVOL_API isovol_status isovol_read_matrix_csv(const char* path, double** values, size_t* rows, size_t* cols,
                                                char** header_json);

#ifdef __cplusplus
}
#endif

#endif
