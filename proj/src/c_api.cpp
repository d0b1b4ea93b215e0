// Copyright 2026 The qjudge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qjudge/qjudge.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qjudge/dataset.hpp"
#include "qjudge/error.hpp"
#include "qjudge/glm.hpp"
#include "qjudge/model.hpp"
#include "qjudge/pipeline.hpp"
#include "qjudge/random.hpp"

struct qj_dataset {
  qjudge::Dataset value;
};

struct qj_model {
  qjudge::JudgeModel value;
};

namespace {

thread_local std::string g_last_error;

qj_status Fail(qj_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
qj_status Guard(Fn&& fn) {
  try {
    fn();
    return QJ_OK;
  } catch (const qjudge::Error& e) {
    switch (e.kind()) {
      case qjudge::ErrorKind::kValidation:
        return Fail(QJ_ERR_VALIDATION, e.what());
      case qjudge::ErrorKind::kIo:
        return Fail(QJ_ERR_IO, e.what());
      case qjudge::ErrorKind::kRuntime:
        break;
    }
    return Fail(QJ_ERR_RUNTIME, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(QJ_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return Fail(QJ_ERR_RUNTIME, e.what());
  }
}

void Require(const void* ptr, const char* name) {
  if (ptr == nullptr) {
    throw qjudge::ValidationError(std::string(name) + " must not be NULL");
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

qjudge::ModelKind ToKind(qj_kind kind) {
  switch (kind) {
    case QJ_KIND_LS:
      return qjudge::ModelKind::kLs;
    case QJ_KIND_MN:
      return qjudge::ModelKind::kMn;
    case QJ_KIND_BTL:
      return qjudge::ModelKind::kBtl;
    case QJ_KIND_BTL2:
      return qjudge::ModelKind::kBtl2;
    case QJ_KIND_PL:
      return qjudge::ModelKind::kPl;
  }
  throw qjudge::ValidationError("unknown model kind");
}

qj_kind FromKind(qjudge::ModelKind kind) {
  switch (kind) {
    case qjudge::ModelKind::kLs:
      return QJ_KIND_LS;
    case qjudge::ModelKind::kMn:
      return QJ_KIND_MN;
    case qjudge::ModelKind::kBtl:
      return QJ_KIND_BTL;
    case qjudge::ModelKind::kBtl2:
      return QJ_KIND_BTL2;
    case qjudge::ModelKind::kPl:
      return QJ_KIND_PL;
  }
  return QJ_KIND_LS;
}

qjudge::TrainOptions ToTrainOptions(const qj_train_options* o) {
  Require(o, "train options");
  qjudge::TrainOptions t;
  t.kind = ToKind(o->kind);
  if (!o->gamma_auto) t.gamma = o->gamma;
  if (o->grid != nullptr) {
    if (o->grid_len == 0) throw qjudge::ValidationError("empty gamma grid");
    t.grid.assign(o->grid, o->grid + o->grid_len);
  }
  t.folds = o->folds;
  t.seed = o->seed;
  t.sgd.learning_rate = o->learning_rate;
  t.sgd.epochs = o->epochs;
  t.sgd.batch_size = o->batch_size;
  t.sgd.lr_decay = o->lr_decay == QJ_LR_DECAY_NONE
                       ? qjudge::LrDecay::kNone
                       : qjudge::LrDecay::kInverseSqrtEpoch;
  t.sgd.init = o->init == QJ_INIT_ZEROS ? qjudge::InitPoint::kZeros
                                        : qjudge::InitPoint::kBaseJudgeIdentity;
  t.expand_pairs = o->expand_pairs != 0;
  t.clamp.epsilon = o->clamp_epsilon;
  t.clamp.Validate();
  t.sgd.Validate();
  return t;
}

qjudge::EvalOptions ToEvalOptions(const qj_eval_options* o) {
  qjudge::EvalOptions e;
  if (o == nullptr) return e;
  e.clip_to_score_set = o->clip_to_score_set != 0;
  e.per_example = o->per_example != 0;
  e.expand_pairs = o->expand_pairs != 0;
  e.seed = o->seed;
  e.clamp.epsilon = o->clamp_epsilon;
  e.clamp.Validate();
  return e;
}

qj_dataset* Wrap(qjudge::Dataset d) { return new qj_dataset{std::move(d)}; }
qj_model* Wrap(qjudge::JudgeModel m) { return new qj_model{std::move(m)}; }

template <typename Study>
qj_status RunAblation(Study study, const char* x_name,
                      std::vector<double> defaults, const qj_dataset* train,
                      const qj_dataset* test,
                      const qj_train_options* train_options,
                      const qj_eval_options* eval_options, const double* grid,
                      size_t len, int n_seeds, char** table) {
  return Guard([&] {
    Require(train, "train");
    Require(test, "test");
    Require(table, "table");
    qjudge::AblationOptions options;
    options.train = ToTrainOptions(train_options);
    options.eval = ToEvalOptions(eval_options);
    options.n_seeds = n_seeds;
    std::vector<double> values =
        grid ? std::vector<double>(grid, grid + len) : std::move(defaults);
    const auto rows = study(train->value, test->value, options, values);
    *table = CopyString(qjudge::FormatAblationTable(rows, x_name));
  });
}

}  // namespace

extern "C" {

const char* qj_version(void) { return "1.0.0"; }

const char* qj_last_error(void) { return g_last_error.c_str(); }

void qj_string_free(char* str) { std::free(str); }

void qj_train_options_init(qj_train_options* options) {
  if (options == nullptr) return;
  const qjudge::SgdConfig sgd;
  options->kind = QJ_KIND_LS;
  options->gamma_auto = 1;
  options->gamma = 0.0;
  options->grid = nullptr;
  options->grid_len = 0;
  options->folds = 5;
  options->seed = 0;
  options->learning_rate = sgd.learning_rate;
  options->epochs = sgd.epochs;
  options->batch_size = sgd.batch_size;
  options->lr_decay = QJ_LR_DECAY_INVERSE_SQRT_EPOCH;
  options->init = QJ_INIT_BASE_JUDGE_IDENTITY;
  options->expand_pairs = 0;
  options->clamp_epsilon = qjudge::ProbClamp{}.epsilon;
}

void qj_eval_options_init(qj_eval_options* options) {
  if (options == nullptr) return;
  options->clip_to_score_set = 0;
  options->per_example = 0;
  options->expand_pairs = 0;
  options->seed = 0;
  options->clamp_epsilon = qjudge::ProbClamp{}.epsilon;
}

qj_status qj_parse_kind(const char* name, qj_kind* out) {
  return Guard([&] {
    Require(name, "name");
    Require(out, "out");
    *out = FromKind(qjudge::ParseKind(name));
  });
}

uint64_t qj_derive_seed(uint64_t master, const char* purpose,
                        uint64_t index) {
  return qjudge::DeriveSeed(master, purpose ? purpose : "", index);
}

qj_status qj_dataset_load(const char* path, qj_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = Wrap(qjudge::LoadDataset(path));
  });
}

qj_status qj_dataset_parse(const char* text, size_t len, qj_dataset** out) {
  return Guard([&] {
    Require(text, "text");
    Require(out, "out");
    *out = Wrap(qjudge::ParseDataset(std::string_view(text, len)));
  });
}

qj_status qj_dataset_save(const qj_dataset* dataset, const char* path) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(path, "path");
    qjudge::WriteDataset(dataset->value, path);
  });
}

qj_status qj_dataset_serialize(const qj_dataset* dataset, char** out) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(out, "out");
    *out = CopyString(qjudge::SerializeDataset(dataset->value));
  });
}

void qj_dataset_free(qj_dataset* dataset) { delete dataset; }

size_t qj_dataset_size(const qj_dataset* dataset) {
  return dataset ? dataset->value.size() : 0;
}

size_t qj_dataset_dimension(const qj_dataset* dataset) {
  return dataset ? dataset->value.header.dimension : 0;
}

qj_task qj_dataset_task(const qj_dataset* dataset) {
  if (dataset == nullptr) return QJ_TASK_ABSOLUTE;
  switch (dataset->value.header.task) {
    case qjudge::Task::kPairwise:
      return QJ_TASK_PAIRWISE;
    case qjudge::Task::kRanking:
      return QJ_TASK_RANKING;
    case qjudge::Task::kAbsolute:
      break;
  }
  return QJ_TASK_ABSOLUTE;
}

qj_status qj_dataset_split(const qj_dataset* dataset, double test_fraction,
                           uint64_t seed, qj_dataset** train,
                           qj_dataset** test) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(train, "train");
    Require(test, "test");
    auto parts = qjudge::Split(dataset->value, test_fraction, seed);
    auto train_handle = std::unique_ptr<qj_dataset>(Wrap(std::move(parts.train)));
    *test = Wrap(std::move(parts.test));
    *train = train_handle.release();
  });
}

qj_status qj_dataset_subsample(const qj_dataset* dataset, double fraction,
                               uint64_t seed, qj_dataset** out) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(out, "out");
    *out = Wrap(qjudge::Subsample(dataset->value, fraction, seed));
  });
}

qj_status qj_dataset_expand_pairs(const qj_dataset* dataset, uint64_t seed,
                                  qj_dataset** out) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(out, "out");
    *out = Wrap(qjudge::ExpandRankingsToPairs(dataset->value, seed));
  });
}

qj_status qj_dataset_drop_features(const qj_dataset* dataset,
                                   double drop_fraction, uint64_t seed,
                                   qj_dataset** out) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(out, "out");
    *out = Wrap(qjudge::DropFeatures(dataset->value, drop_fraction, seed));
  });
}

qj_status qj_model_load(const char* path, qj_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = Wrap(qjudge::LoadModel(path));
  });
}

qj_status qj_model_save(const qj_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    qjudge::SaveModel(model->value, path);
  });
}

qj_status qj_model_serialize(const qj_model* model, char** out) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    *out = CopyString(qjudge::SerializeModel(model->value));
  });
}

void qj_model_free(qj_model* model) { delete model; }

qj_kind qj_model_kind(const qj_model* model) {
  return model ? FromKind(model->value.kind) : QJ_KIND_LS;
}

size_t qj_model_dimension(const qj_model* model) {
  return model ? model->value.dimension : 0;
}

double qj_model_gamma(const qj_model* model) {
  return model ? model->value.gamma : 0.0;
}

size_t qj_model_param_count(const qj_model* model) {
  return model ? model->value.layout().size() : 0;
}

qj_status qj_model_params(const qj_model* model, double* out, size_t len) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    const std::vector<double> flat = model->value.Flatten();
    if (len != flat.size()) {
      throw qjudge::ValidationError("output buffer has length " +
                                    std::to_string(len) + ", need " +
                                    std::to_string(flat.size()));
    }
    std::copy(flat.begin(), flat.end(), out);
  });
}

qj_status qj_model_identity(qj_kind kind, size_t dimension,
                            const double* score_set, size_t score_len,
                            qj_model** out) {
  return Guard([&] {
    Require(out, "out");
    std::vector<double> labels;
    if (score_set != nullptr) labels.assign(score_set, score_set + score_len);
    qjudge::JudgeModel model =
        qjudge::MakeIdentityModel(ToKind(kind), dimension, std::move(labels));
    model.Validate();
    *out = Wrap(std::move(model));
  });
}

qj_status qj_model_summary(const qj_model* model, char** out) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    *out = CopyString(qjudge::TrainingSummary(model->value));
  });
}

qj_status qj_predict_ls(const qj_model* model, const double* embedding,
                        size_t dim, double base_score, double* out) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    if (dim > 0) Require(embedding, "embedding");
    *out = qjudge::PredictLs(std::span<const double>(embedding, dim),
                             base_score, model->value);
  });
}

qj_status qj_predict_mn(const qj_model* model, const double* embedding,
                        size_t dim, const double* base_probs, size_t num_labels,
                        double* out_probs) {
  return Guard([&] {
    Require(model, "model");
    Require(base_probs, "base_probs");
    Require(out_probs, "out_probs");
    if (dim > 0) Require(embedding, "embedding");
    const auto dist = qjudge::PredictMn(
        std::span<const double>(embedding, dim),
        std::span<const double>(base_probs, num_labels), model->value);
    std::copy(dist.begin(), dist.end(), out_probs);
  });
}

qj_status qj_predict_btl(const qj_model* model, const double* embedding,
                         size_t dim, double base_prob_first, double* out) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    if (dim > 0) Require(embedding, "embedding");
    *out = qjudge::PredictBtl(std::span<const double>(embedding, dim),
                              base_prob_first, model->value);
  });
}

qj_status qj_predict_btl2(const qj_model* model, const double* embedding_a,
                          const double* embedding_b, size_t dim,
                          double base_score_a, double base_score_b,
                          double* out) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    if (dim > 0) {
      Require(embedding_a, "embedding_a");
      Require(embedding_b, "embedding_b");
    }
    *out = qjudge::PredictBtl2(std::span<const double>(embedding_a, dim),
                               std::span<const double>(embedding_b, dim),
                               base_score_a, base_score_b, model->value);
  });
}

qj_status qj_predict_pl(const qj_model* model, const double* embeddings,
                        const double* base_scores, size_t k, size_t dim,
                        double* out_probs) {
  return Guard([&] {
    Require(model, "model");
    Require(base_scores, "base_scores");
    Require(out_probs, "out_probs");
    if (k * dim > 0) Require(embeddings, "embeddings");
    std::vector<qjudge::RankedItem> items(k);
    for (size_t i = 0; i < k; ++i) {
      items[i].embedding.assign(embeddings + i * dim, embeddings + (i + 1) * dim);
      items[i].base_score = base_scores[i];
    }
    const auto dist = qjudge::PredictPl(items, model->value);
    std::copy(dist.begin(), dist.end(), out_probs);
  });
}

qj_status qj_train(const qj_dataset* data, const qj_train_options* options,
                   qj_model** out) {
  return Guard([&] {
    Require(data, "data");
    Require(out, "out");
    *out = Wrap(qjudge::Train(data->value, ToTrainOptions(options)));
  });
}

qj_status qj_evaluate(const qj_model* model, const qj_dataset* test,
                      const qj_eval_options* options, char** report_json) {
  return Guard([&] {
    Require(model, "model");
    Require(test, "test");
    Require(report_json, "report_json");
    const auto report =
        qjudge::Evaluate(model->value, test->value, ToEvalOptions(options));
    *report_json = CopyString(qjudge::SerializeReport(report));
  });
}

qj_status qj_predict(const qj_model* model, const qj_dataset* inputs,
                     const qj_eval_options* options, char** records) {
  return Guard([&] {
    Require(model, "model");
    Require(inputs, "inputs");
    Require(records, "records");
    *records = CopyString(
        qjudge::Predict(model->value, inputs->value, ToEvalOptions(options)));
  });
}

qj_status qj_ablate_size(const qj_dataset* train, const qj_dataset* test,
                         const qj_train_options* train_options,
                         const qj_eval_options* eval_options,
                         const double* fractions, size_t len, int n_seeds,
                         char** table) {
  return RunAblation(qjudge::AblateSize, "fraction",
                     qjudge::DefaultSizeFractions(), train, test, train_options,
                     eval_options, fractions, len, n_seeds, table);
}

qj_status qj_ablate_gamma(const qj_dataset* train, const qj_dataset* test,
                          const qj_train_options* train_options,
                          const qj_eval_options* eval_options,
                          const double* grid, size_t len, int n_seeds,
                          char** table) {
  return RunAblation(qjudge::AblateGamma, "gamma", qjudge::DefaultGammaGrid(),
                     train, test, train_options, eval_options, grid, len,
                     n_seeds, table);
}

qj_status qj_ablate_features(const qj_dataset* train, const qj_dataset* test,
                             const qj_train_options* train_options,
                             const qj_eval_options* eval_options,
                             const double* drops, size_t len, int n_seeds,
                             char** table) {
  return RunAblation(qjudge::AblateFeatures, "drop",
                     qjudge::DefaultDropFractions(), train, test,
                     train_options, eval_options, drops, len, n_seeds, table);
}

}  // extern "C"
