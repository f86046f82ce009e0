/* C interface to the aomlab experiment runner and bound evaluator.
 *
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function. Every call that can fail returns an aomlab_status and, on
 * failure, leaves a message retrievable with aomlab_last_error() from the
 * same thread. */
#ifndef AOMLAB_H
#define AOMLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AOMLAB_API __declspec(dllexport)
#else
#define AOMLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aomlab_status {
  AOMLAB_OK = 0,
  AOMLAB_ERR_CONFIG = 1,
  AOMLAB_ERR_ALL_DIVERGED = 2,
  AOMLAB_ERR_IO = 3,
  AOMLAB_ERR_INVALID_ARGUMENT = 4,
  AOMLAB_ERR_NUMERIC = 5,
  AOMLAB_ERR_INTERNAL = 6
} aomlab_status;

typedef struct aomlab_config aomlab_config;
typedef struct aomlab_result aomlab_result;

AOMLAB_API const char* aomlab_version(void);
AOMLAB_API const char* aomlab_last_error(void);
AOMLAB_API const char* aomlab_status_name(aomlab_status status);

/* Configuration. Keys are `section.key` or an unambiguous bare key. */
AOMLAB_API aomlab_status aomlab_config_load(const char* path, aomlab_config** out);
AOMLAB_API aomlab_status aomlab_config_parse(const char* text, aomlab_config** out);
AOMLAB_API aomlab_status aomlab_config_set(aomlab_config* config, const char* key,
                                           const char* value);
/* Writes the canonical text form, NUL-terminated, when it fits in `capacity`
 * bytes; `*length` always receives the length without the terminator. */
AOMLAB_API aomlab_status aomlab_config_serialize(const aomlab_config* config, char* buffer,
                                                 size_t capacity, size_t* length);
AOMLAB_API void aomlab_config_free(aomlab_config* config);

/* Experiments. Results live until aomlab_result_free. */
AOMLAB_API aomlab_status aomlab_run(const aomlab_config* config, aomlab_result** out);
/* `values` is a comma-separated list. A null `param` or `values` falls back
 * to the config's [sweep] section. */
AOMLAB_API aomlab_status aomlab_sweep(const aomlab_config* config, const char* param,
                                      const char* values, aomlab_result** out);
/* Bound curves from explicit constants only; writes bounds.csv. */
AOMLAB_API aomlab_status aomlab_bounds(const aomlab_config* config, aomlab_result** out);
AOMLAB_API aomlab_status aomlab_plot(const char* summary_csv, const char* metric, int log_y,
                                     const char* out_svg);

AOMLAB_API const char* aomlab_result_summary(const aomlab_result* result);
AOMLAB_API size_t aomlab_result_steps(const aomlab_result* result);
AOMLAB_API size_t aomlab_result_diverged(const aomlab_result* result);
AOMLAB_API uint64_t aomlab_result_data_hash(const aomlab_result* result);
/* Mean series of a metric (delta, sigma, train_loss, test_loss, gen_gap,
 * delta_bound, sigma_bound) for a run result. The pointer stays valid until
 * the result is freed. */
AOMLAB_API aomlab_status aomlab_result_series(const aomlab_result* result, const char* metric,
                                              const double** data, size_t* length);
AOMLAB_API aomlab_status aomlab_result_growth(const aomlab_result* result, double* r,
                                              double* r_stderr);
/* Sweep results: number of values and the final mean delta at each. */
AOMLAB_API size_t aomlab_result_sweep_size(const aomlab_result* result);
AOMLAB_API aomlab_status aomlab_result_sweep_final_delta(const aomlab_result* result,
                                                         size_t index, double* value);
AOMLAB_API void aomlab_result_free(aomlab_result* result);

/* Pure bound evaluation. */
typedef struct aomlab_bound_constants {
  double mu;
  double L;
  double M;
  double lambda1;
  double lambda2;
  double epsilon;
  int n;
  double c;
  double alpha;
  double beta;
} aomlab_bound_constants;

AOMLAB_API double aomlab_operator_norm_2x2(double a11, double a12, double a21, double a22);
AOMLAB_API aomlab_status aomlab_adagrad_cor2(const aomlab_bound_constants* constants, double T,
                                             double* bound, double* t0_star);
AOMLAB_API aomlab_status aomlab_theorem4(const aomlab_bound_constants* constants, int64_t T,
                                         int64_t t0, double* bound);
AOMLAB_API aomlab_status aomlab_adamw_region(const aomlab_bound_constants* constants,
                                             double beta, double eta, double* beta_threshold,
                                             int* feasible, double* lambda_lo,
                                             double* lambda_hi);

#ifdef __cplusplus
}
#endif

#endif /* AOMLAB_H */
