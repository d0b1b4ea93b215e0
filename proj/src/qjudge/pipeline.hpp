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

// End-to-end commands: train, evaluate, predict and the three ablation
// studies. A single master seed drives everything; sub-seeds are derived
// with DeriveSeed(seed, "<purpose>").

#ifndef QJUDGE_PIPELINE_HPP_
#define QJUDGE_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qjudge/dataset.hpp"
#include "qjudge/glm.hpp"
#include "qjudge/model.hpp"
#include "qjudge/training.hpp"

namespace qjudge {

struct TrainOptions {
  ModelKind kind = ModelKind::kLs;
  std::optional<double> gamma;  // nullopt: choose by cross-validation
  std::vector<double> grid = DefaultGammaGrid();
  int folds = 5;
  uint64_t seed = 0;
  SgdConfig sgd;  // shuffle_seed is derived from `seed`
  bool expand_pairs = false;
  ProbClamp clamp;
};

// Checks task/kind compatibility and expands rankings into pairs when
// requested (BTL2 only).
Dataset PrepareForKind(const Dataset& data, ModelKind kind, bool expand_pairs,
                       uint64_t seed);

JudgeModel Train(const Dataset& data, const TrainOptions& options);

struct EvalOptions {
  bool clip_to_score_set = false;
  bool per_example = false;
  bool expand_pairs = false;
  uint64_t seed = 0;  // pair-slot coins when expanding
  ProbClamp clamp;
};

struct PerExample {
  std::string id;
  double prediction = 0.0;
  double truth = 0.0;
};

struct Confusion {
  std::vector<double> labels;
  std::vector<std::vector<long>> counts;  // [truth][predicted]
};

struct EvalReport {
  Task task = Task::kAbsolute;
  ModelKind kind = ModelKind::kLs;
  size_t n = 0;
  std::optional<double> mse, mae, accuracy, precision, recall, f1;
  std::optional<double> pearson_r, spearman_rho, kendall_tau;
  std::optional<double> mean_loss;  // unregularized, per example
  std::optional<Confusion> confusion;
  std::string prediction_representation;
  std::vector<PerExample> per_example;
};

EvalReport Evaluate(const JudgeModel& model, const Dataset& test,
                    const EvalOptions& options);
std::string SerializeReport(const EvalReport& report);

// One JSON record per input example, in input order.
std::string Predict(const JudgeModel& model, const Dataset& inputs,
                    const EvalOptions& options);

struct AblationRow {
  double x = 0.0;  // fraction, gamma or drop fraction
  int seed_index = 0;
  uint64_t seed = 0;
  size_t train_size = 0;
  size_t dimension = 0;
  double gamma = 0.0;
  double theta_norm = 0.0;
  EvalReport report;
};

struct AblationOptions {
  TrainOptions train;
  EvalOptions eval;
  int n_seeds = 10;
};

// Run i uses master seed train.seed + i, so run 0 matches a plain train /
// evaluate invocation with the same seed.
std::vector<AblationRow> AblateSize(const Dataset& train, const Dataset& test,
                                    const AblationOptions& options,
                                    const std::vector<double>& fractions);
std::vector<AblationRow> AblateGamma(const Dataset& train, const Dataset& test,
                                     const AblationOptions& options,
                                     const std::vector<double>& grid);
std::vector<AblationRow> AblateFeatures(const Dataset& train,
                                        const Dataset& test,
                                        const AblationOptions& options,
                                        const std::vector<double>& drops);

// Long-format tab-separated table: one "run" row per observation followed by
// one "mean" row per grid value, in grid order.
std::string FormatAblationTable(const std::vector<AblationRow>& rows,
                                const std::string& x_name);

std::vector<double> DefaultSizeFractions();
std::vector<double> DefaultDropFractions();

// Human-readable training summary.
std::string TrainingSummary(const JudgeModel& model);

}  // namespace qjudge

#endif  // QJUDGE_PIPELINE_HPP_
