/* C interface to the miest estimator library.
 *
 * Every function returns a miest_status. On failure the message of the most
 * recent error on the calling thread is available from miest_last_error().
 * Strings handed out through char** parameters are owned by the caller and
 * released with miest_string_free().
 */
#ifndef MIEST_H
#define MIEST_H

#include <stddef.h>
#include <stdint.h>

#if defined(MIEST_BUILDING)
#define MIEST_API __attribute__((visibility("default")))
#else
#define MIEST_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum miest_status {
  MIEST_OK = 0,
  MIEST_INVALID_ARGUMENT = 1,
  MIEST_PARSE = 2,
  MIEST_RAGGED_ROWS = 3,
  MIEST_DUPLICATE_NAME = 4,
  MIEST_EMPTY_DATA = 5,
  MIEST_NON_FINITE = 6,
  MIEST_INSUFFICIENT_SAMPLES = 7,
  MIEST_DEGENERATE_FIT = 8,
  MIEST_DIVERGENT = 9,
  MIEST_CALIBRATION_FAILED = 10,
  MIEST_BUDGET_EXCEEDED = 11,
  MIEST_UNKNOWN_VARIABLE = 12,
  MIEST_IO = 13,
  MIEST_INTERNAL = 99
} miest_status;

typedef enum miest_order { MIEST_PAIRS = 2, MIEST_TRIPLETS = 3 } miest_order;

typedef struct miest_dataset miest_dataset;
typedef struct miest_config miest_config;
typedef struct miest_calibration miest_calibration;
typedef struct miest_matrix miest_matrix;

typedef struct miest_load_options {
  char delimiter;              /* ',' when 0 */
  const char* missing_token;   /* "NA" when NULL */
  int variables_as_columns;    /* 0: one line per variable */
  int has_names;
  int has_observation_labels;
} miest_load_options;

MIEST_API const char* miest_version(void);
MIEST_API const char* miest_last_error(void);
MIEST_API const char* miest_status_name(miest_status status);
MIEST_API void miest_string_free(char* s);
MIEST_API void miest_load_options_default(miest_load_options* opts);

/* Datasets. opts may be NULL for defaults. */
MIEST_API miest_status miest_dataset_load(const char* path, const miest_load_options* opts,
                                          miest_dataset** out);
MIEST_API miest_status miest_dataset_parse(const char* text, const miest_load_options* opts,
                                           miest_dataset** out);
MIEST_API void miest_dataset_free(miest_dataset* ds);
MIEST_API size_t miest_dataset_num_vars(const miest_dataset* ds);
MIEST_API size_t miest_dataset_num_obs(const miest_dataset* ds);
MIEST_API const char* miest_dataset_var_name(const miest_dataset* ds, size_t var);
MIEST_API miest_status miest_dataset_find(const miest_dataset* ds, const char* name, size_t* out);

/* Configuration. Keys: f1 f3 t1 include_full b_max tolerance min_joint seed
 * workers probe_pairs probe_triplets baseline_tuples triplet_budget
 * discrete_levels quantization (per-subsample|once) inner_pair_cap (0 = none).
 */
MIEST_API miest_status miest_config_create(miest_config** out);
MIEST_API void miest_config_free(miest_config* cfg);
MIEST_API miest_status miest_config_set(miest_config* cfg, const char* key, const char* value);
MIEST_API miest_status miest_config_get(const miest_config* cfg, const char* key, char** value);
MIEST_API miest_status miest_config_to_json(const miest_config* cfg, char** json);

/* Shuffle calibration of the level cap. b_star is 0 when no level passes. */
MIEST_API miest_status miest_calibrate(const miest_dataset* ds, const miest_config* cfg,
                                       miest_order order, miest_calibration** out);
MIEST_API void miest_calibration_free(miest_calibration* cal);
MIEST_API uint32_t miest_calibration_b_star(const miest_calibration* cal);
MIEST_API miest_status miest_calibration_to_json(const miest_calibration* cal, char** json);
MIEST_API miest_status miest_calibration_table(const miest_calibration* cal, char** text);

/* One pair with its full extrapolation detail as JSON. */
MIEST_API miest_status miest_pair_report(const miest_dataset* ds, const miest_config* cfg,
                                         size_t a, size_t b, uint32_t b_star, char** json);

/* All pairs. */
MIEST_API miest_status miest_matrix_estimate(const miest_dataset* ds, const miest_config* cfg,
                                             uint32_t b_star, miest_matrix** out);
MIEST_API void miest_matrix_free(miest_matrix* m);
MIEST_API size_t miest_matrix_size(const miest_matrix* m);
/* Returns MIEST_INSUFFICIENT_SAMPLES for skipped pairs and the diagonal. */
MIEST_API miest_status miest_matrix_value(const miest_matrix* m, size_t a, size_t b, double* out);
MIEST_API miest_status miest_matrix_to_csv(const miest_matrix* m, char** csv);
MIEST_API miest_status miest_matrix_sidecar_json(const miest_matrix* m, char** json);
/* group_text: one "label: name1,name2" line per group. */
MIEST_API miest_status miest_matrix_sorted_csv(const miest_matrix* m, const miest_dataset* ds,
                                               const char* group_text, char** csv);

/* Triplets and group summaries for every group in group_text. */
MIEST_API miest_status miest_triplets_report(const miest_dataset* ds, const miest_config* cfg,
                                             const char* group_text, uint32_t b_triplet,
                                             uint32_t b_pair, char** json);

/* Verification runs. */
MIEST_API miest_status miest_verify_shuffled(const miest_dataset* ds, const miest_config* cfg,
                                             uint32_t b_star, size_t n_pairs, char** json);
MIEST_API miest_status miest_verify_stability(const miest_dataset* ds, const miest_config* cfg,
                                              const miest_matrix* full, uint32_t b_star,
                                              double fraction, size_t bins, char** json,
                                              char** histogram_csv);

/* Pearson correlation against MI for every estimated pair of m. */
MIEST_API miest_status miest_compare_pc(const miest_dataset* ds, const miest_matrix* m,
                                        char** csv);

#ifdef __cplusplus
}
#endif

#endif /* MIEST_H */
