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

#ifndef QJUDGE_MODEL_HPP_
#define QJUDGE_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qjudge {

enum class ModelKind { kLs, kMn, kBtl, kBtl2, kPl };

std::string_view KindName(ModelKind kind);  // "ls", "mn", ...
ModelKind ParseKind(std::string_view name);

// Evidence for the cross-validated choice of gamma.
struct CvRecord {
  std::vector<double> grid;
  // fold_losses[g][f]: mean validation loss of grid point g on fold f.
  std::vector<std::vector<double>> fold_losses;
  double chosen_gamma = 0.0;
  int folds = 0;
};

struct TrainingMetadata {
  uint64_t seed = 0;
  size_t training_size = 0;
  int epochs = 0;
  int best_epoch = 0;        // 0 means the initial point was never improved on
  double training_loss = 0;  // regularized summed loss at the returned point
  double final_gradient_norm = 0;
  std::optional<CvRecord> cv;
};

// Where the parameters of each kind live in a flat vector: every theta of
// length dimension + 1 first, then the biases. Only thetas are penalized.
struct ParamLayout {
  ModelKind kind = ModelKind::kLs;
  size_t dimension = 0;
  size_t num_thetas = 1;
  size_t num_biases = 1;

  static ParamLayout For(ModelKind kind, size_t dimension, size_t num_classes);

  size_t theta_size() const { return dimension + 1; }
  size_t penalized_size() const { return num_thetas * theta_size(); }
  size_t size() const { return penalized_size() + num_biases; }
};

struct JudgeModel {
  ModelKind kind = ModelKind::kLs;
  size_t dimension = 0;
  // One vector for LS, BTL, BTL2 and PL; one per score label for MN.
  std::vector<std::vector<double>> theta;
  // One entry for LS, BTL and BTL2; one per score label for MN; none for PL.
  std::vector<double> bias;
  std::vector<double> score_set;  // MN, and LS when rounding to labels
  double gamma = 0.0;
  TrainingMetadata metadata;

  ParamLayout layout() const;
  std::vector<double> Flatten() const;
  void Assign(std::span<const double> params);

  // Throws a validation error when the invariants on vector lengths fail.
  void Validate() const;
};

// The base-judge identity point: every theta = 0_d (+) 1, every bias 0.
std::vector<double> IdentityParams(const ParamLayout& layout);

// A model of `kind` at the identity point.
JudgeModel MakeIdentityModel(ModelKind kind, size_t dimension,
                             std::vector<double> score_set = {});

// Sum of squares of the penalized (non-bias) coordinates.
double ThetaSquaredNorm(const ParamLayout& layout,
                        std::span<const double> params);

std::string SerializeModel(const JudgeModel& model);
JudgeModel ParseModel(std::string_view text);
void SaveModel(const JudgeModel& model, const std::string& path);
JudgeModel LoadModel(const std::string& path);

}  // namespace qjudge

#endif  // QJUDGE_MODEL_HPP_
