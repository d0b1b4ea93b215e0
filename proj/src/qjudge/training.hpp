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

#ifndef QJUDGE_TRAINING_HPP_
#define QJUDGE_TRAINING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "qjudge/dataset.hpp"
#include "qjudge/glm.hpp"
#include "qjudge/model.hpp"

namespace qjudge {

enum class LrDecay { kNone, kInverseSqrtEpoch };
enum class InitPoint { kBaseJudgeIdentity, kZeros };

struct SgdConfig {
  double learning_rate = 0.01;
  int epochs = 200;
  int batch_size = 64;
  uint64_t shuffle_seed = 0;
  LrDecay lr_decay = LrDecay::kInverseSqrtEpoch;
  InitPoint init = InitPoint::kBaseJudgeIdentity;

  void Validate() const;
};

// Minibatch SGD on the regularized objective divided by n (mean loss plus
// gamma/n * ||theta||^2). Dividing by n keeps the minimizer and makes the
// learning rate independent of the training-set size. Each step takes a
// gradient step on the minibatch mean loss followed by the proximal map of
// the penalty, theta /= 1 + 2 * lr * gamma / n. The data order is reshuffled
// every epoch; epoch e uses learning_rate / sqrt(e + 1) under inverse-sqrt
// decay.
//
// Returns the parameters with the lowest full regularized training loss
// among the initial point and every epoch end.
JudgeModel SgdFit(const Design& design, double gamma, const SgdConfig& config);
JudgeModel SgdFit(ModelKind kind, const Dataset& train, double gamma,
                  const SgdConfig& config, ProbClamp clamp = {});

// {1e-4, 1e-3, 1e-2, 1e-1, 1, 10, 100}, on the summed-loss scale.
std::vector<double> DefaultGammaGrid();

// Seeded shuffle of 0..n-1 cut into k contiguous near-equal folds.
std::vector<std::vector<size_t>> MakeFolds(size_t n, int k, uint64_t seed);

// Rows of `design` at `indices`, in that order.
Design SubDesign(const Design& design, std::span<const size_t> indices);

struct CvResult {
  CvRecord record;
  JudgeModel model;  // refit on the full design at the chosen gamma
};

// k-fold selection of gamma by mean unregularized validation loss, ties
// broken toward the larger gamma, then a refit on all rows.
CvResult CrossValidateGamma(const Design& design, std::span<const double> grid,
                            int folds, const SgdConfig& config, uint64_t seed);

// Regularized training loss (at fitted.gamma) of the base-judge identity
// point minus that of the fitted parameters. Reports; never asserts.
double EvaluateOptimalityMargin(const Design& design, const JudgeModel& fitted);

// Gradient norm of the summed regularized objective at `params`.
double GradientNorm(const Design& design, std::span<const double> params,
                    double gamma);

}  // namespace qjudge

#endif  // QJUDGE_TRAINING_HPP_
