/* C interface to the selfmap library: configure and run the sensorimotor
 * learning pipeline, and evaluate trained models.
 *
 * All functions return a status code; on failure selfmap_last_error() holds
 * a message for the calling thread. Strings handed out through char** are
 * owned by the caller and released with selfmap_string_free(). */
#ifndef SELFMAP_H
#define SELFMAP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum selfmap_status {
  SELFMAP_OK = 0,
  SELFMAP_ERR_INVALID_ARGUMENT = 1,
  SELFMAP_ERR_IO = 2,
  SELFMAP_ERR_PARSE = 3,
  SELFMAP_ERR_NUMERIC = 4,
  SELFMAP_ERR_MISSING_STAGE = 5,
  SELFMAP_ERR_INTERNAL = 6
} selfmap_status;

typedef struct selfmap_config selfmap_config;
typedef struct selfmap_model selfmap_model;

/* Message of the calling thread's most recent failure; "" when none. The
 * pointer stays valid until this thread's next library call. */
const char* selfmap_last_error(void);

void selfmap_string_free(char* s);

/* Fresh configuration with the built-in defaults for scenario 1 (position
 * sensor) or 2 (retina across three environments). */
selfmap_status selfmap_config_default(int scenario, selfmap_config** out);
selfmap_status selfmap_config_load(const char* path, selfmap_config** out);
selfmap_status selfmap_config_save(const selfmap_config* cfg,
                                   const char* path);
/* assignment is "key=value" or "section.key=value", e.g. "training.mu=0.2";
 * values are parsed as JSON, bare words as strings. */
selfmap_status selfmap_config_set(selfmap_config* cfg, const char* assignment);
selfmap_status selfmap_config_dump(const selfmap_config* cfg,
                                   char** json_out);
void selfmap_config_free(selfmap_config* cfg);

/* Runs every stage into the configured output directory and writes
 * manifest.json; manifest_json_out (optional) receives its contents. */
selfmap_status selfmap_run(const selfmap_config* cfg,
                           char** manifest_json_out);
/* Runs one stage: explore | pretrain | train | eval-nullspace | reach |
 * export. metrics_json_out (optional) receives the stage metrics. */
selfmap_status selfmap_run_stage(const selfmap_config* cfg, const char* stage,
                                 char** metrics_json_out);

/* Loads a trained network (model JSON) with its normalization (stats JSON)
 * for standalone evaluation. */
selfmap_status selfmap_model_load(const char* model_path,
                                  const char* stats_path,
                                  selfmap_model** out);
selfmap_status selfmap_model_output_dim(const selfmap_model* m, int* dim_out);
/* Internal representation of raw joint angles p[3]; xi_out must hold
 * output_dim values. */
selfmap_status selfmap_model_evaluate(const selfmap_model* m,
                                      const double p[3], double* xi_out,
                                      size_t xi_len);
/* Finite-difference Jacobian at raw joint angles, taken in the network's
 * normalized input coordinates; row-major output_dim x 3 into jac_out. */
selfmap_status selfmap_model_jacobian(const selfmap_model* m,
                                      const double p[3], double eps,
                                      double* jac_out, size_t jac_len);
void selfmap_model_free(selfmap_model* m);

#ifdef __cplusplus
}
#endif

#endif /* SELFMAP_H */
