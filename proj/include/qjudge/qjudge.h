/*
 * Copyright 2026 The qjudge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the qjudge library: quantitative judges that map a frozen
 * base judge's rationale embedding and score to calibrated predictions of
 * human scores (LS, MN, BTL, BTL2 and Plackett-Luce judges).
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a qj_status; on
 * failure qj_last_error() describes the problem (thread-local, valid until
 * the next failing call on the same thread). Strings returned through
 * char** out-parameters are heap-allocated and released with qj_string_free.
 */

#ifndef QJUDGE_QJUDGE_H_
#define QJUDGE_QJUDGE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QJ_API __declspec(dllexport)
#elif defined(__GNUC__)
#define QJ_API __attribute__((visibility("default")))
#else
#define QJ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  QJ_OK = 0,
  QJ_ERR_RUNTIME = 1,    /* divergence and other failures of valid input */
  QJ_ERR_VALIDATION = 2, /* malformed or incompatible input */
  QJ_ERR_IO = 3          /* unreadable or unwritable file */
} qj_status;

typedef enum {
  QJ_KIND_LS = 0,
  QJ_KIND_MN = 1,
  QJ_KIND_BTL = 2,
  QJ_KIND_BTL2 = 3,
  QJ_KIND_PL = 4
} qj_kind;

typedef enum {
  QJ_TASK_ABSOLUTE = 0,
  QJ_TASK_PAIRWISE = 1,
  QJ_TASK_RANKING = 2
} qj_task;

typedef enum { QJ_LR_DECAY_NONE = 0, QJ_LR_DECAY_INVERSE_SQRT_EPOCH = 1 } qj_lr_decay;
typedef enum { QJ_INIT_BASE_JUDGE_IDENTITY = 0, QJ_INIT_ZEROS = 1 } qj_init;

typedef struct qj_dataset qj_dataset;
typedef struct qj_model qj_model;

typedef struct {
  qj_kind kind;
  int gamma_auto;          /* nonzero: choose gamma by cross-validation */
  double gamma;            /* used when gamma_auto == 0 */
  const double* grid;      /* NULL: default grid */
  size_t grid_len;
  int folds;               /* default 5 */
  uint64_t seed;           /* master seed */
  double learning_rate;    /* default 0.01 */
  int epochs;              /* default 200 */
  int batch_size;          /* default 64 */
  qj_lr_decay lr_decay;    /* default inverse-sqrt */
  qj_init init;            /* default base-judge identity */
  int expand_pairs;        /* btl2 on ranking data */
  double clamp_epsilon;    /* default 1e-9 */
} qj_train_options;

typedef struct {
  int clip_to_score_set;
  int per_example;
  int expand_pairs;
  uint64_t seed;
  double clamp_epsilon;
} qj_eval_options;

QJ_API const char* qj_version(void);
QJ_API const char* qj_last_error(void);
QJ_API void qj_string_free(char* str);

QJ_API void qj_train_options_init(qj_train_options* options);
QJ_API void qj_eval_options_init(qj_eval_options* options);
QJ_API qj_status qj_parse_kind(const char* name, qj_kind* out);
/* Sub-seed for `purpose` derived from a master seed. */
QJ_API uint64_t qj_derive_seed(uint64_t master, const char* purpose, uint64_t index);

/* Datasets */
QJ_API qj_status qj_dataset_load(const char* path, qj_dataset** out);
QJ_API qj_status qj_dataset_parse(const char* text, size_t len, qj_dataset** out);
QJ_API qj_status qj_dataset_save(const qj_dataset* dataset, const char* path);
QJ_API qj_status qj_dataset_serialize(const qj_dataset* dataset, char** out);
QJ_API void qj_dataset_free(qj_dataset* dataset);
QJ_API size_t qj_dataset_size(const qj_dataset* dataset);
QJ_API size_t qj_dataset_dimension(const qj_dataset* dataset);
QJ_API qj_task qj_dataset_task(const qj_dataset* dataset);

QJ_API qj_status qj_dataset_split(const qj_dataset* dataset, double test_fraction,
                                  uint64_t seed, qj_dataset** train,
                                  qj_dataset** test);
QJ_API qj_status qj_dataset_subsample(const qj_dataset* dataset, double fraction,
                                      uint64_t seed, qj_dataset** out);
QJ_API qj_status qj_dataset_expand_pairs(const qj_dataset* dataset, uint64_t seed,
                                         qj_dataset** out);
QJ_API qj_status qj_dataset_drop_features(const qj_dataset* dataset,
                                          double drop_fraction, uint64_t seed,
                                          qj_dataset** out);

/* Models */
QJ_API qj_status qj_model_load(const char* path, qj_model** out);
QJ_API qj_status qj_model_save(const qj_model* model, const char* path);
QJ_API qj_status qj_model_serialize(const qj_model* model, char** out);
QJ_API void qj_model_free(qj_model* model);
QJ_API qj_kind qj_model_kind(const qj_model* model);
QJ_API size_t qj_model_dimension(const qj_model* model);
QJ_API double qj_model_gamma(const qj_model* model);
/* Number of parameters (thetas then biases) and a copy of them. */
QJ_API size_t qj_model_param_count(const qj_model* model);
QJ_API qj_status qj_model_params(const qj_model* model, double* out, size_t len);
/* A model at the base-judge identity point. score_set is required for MN. */
QJ_API qj_status qj_model_identity(qj_kind kind, size_t dimension,
                                   const double* score_set, size_t score_len,
                                   qj_model** out);
QJ_API qj_status qj_model_summary(const qj_model* model, char** out);

/* Single-example predictions */
QJ_API qj_status qj_predict_ls(const qj_model* model, const double* embedding,
                               size_t dim, double base_score, double* out);
QJ_API qj_status qj_predict_mn(const qj_model* model, const double* embedding,
                               size_t dim, const double* base_probs,
                               size_t num_labels, double* out_probs);
QJ_API qj_status qj_predict_btl(const qj_model* model, const double* embedding,
                                size_t dim, double base_prob_first, double* out);
QJ_API qj_status qj_predict_btl2(const qj_model* model, const double* embedding_a,
                                 const double* embedding_b, size_t dim,
                                 double base_score_a, double base_score_b,
                                 double* out);
/* embeddings: k rows of dim values, row-major. */
QJ_API qj_status qj_predict_pl(const qj_model* model, const double* embeddings,
                               const double* base_scores, size_t k, size_t dim,
                               double* out_probs);

/* Commands */
QJ_API qj_status qj_train(const qj_dataset* data, const qj_train_options* options,
                          qj_model** out);
/* EvalReport as a JSON record. */
QJ_API qj_status qj_evaluate(const qj_model* model, const qj_dataset* test,
                             const qj_eval_options* options, char** report_json);
/* One JSON prediction record per line. */
QJ_API qj_status qj_predict(const qj_model* model, const qj_dataset* inputs,
                            const qj_eval_options* options, char** records);

/* Ablations return a long-format tab-separated table. grid == NULL selects the
 * default grid of the study. */
QJ_API qj_status qj_ablate_size(const qj_dataset* train, const qj_dataset* test,
                                const qj_train_options* train_options,
                                const qj_eval_options* eval_options,
                                const double* fractions, size_t len,
                                int n_seeds, char** table);
QJ_API qj_status qj_ablate_gamma(const qj_dataset* train, const qj_dataset* test,
                                 const qj_train_options* train_options,
                                 const qj_eval_options* eval_options,
                                 const double* grid, size_t len, int n_seeds,
                                 char** table);
QJ_API qj_status qj_ablate_features(const qj_dataset* train,
                                    const qj_dataset* test,
                                    const qj_train_options* train_options,
                                    const qj_eval_options* eval_options,
                                    const double* drops, size_t len,
                                    int n_seeds, char** table);

#ifdef __cplusplus
}
#endif

#endif /* QJUDGE_QJUDGE_H_ */
