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

#include "qjudge/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qjudge/error.hpp"
#include "qjudge/random.hpp"

namespace qjudge {

void SgdConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be positive");
  }
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
}

double GradientNorm(const Design& design, std::span<const double> params,
                    double gamma) {
  const LossGradient lg = LossAndGradient(design, params, gamma);
  double sq = 0.0;
  for (double g : lg.gradient) sq += g * g;
  return std::sqrt(sq);
}

JudgeModel SgdFit(const Design& design, double gamma, const SgdConfig& config) {
  config.Validate();
  if (design.rows.empty()) throw ValidationError("sgd: empty training set");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("sgd: gamma must be a finite value >= 0");
  }
  const ParamLayout layout = design.layout();
  const size_t n = design.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> params = config.init == InitPoint::kBaseJudgeIdentity
                                   ? IdentityParams(layout)
                                   : std::vector<double>(layout.size(), 0.0);
  std::vector<double> best = params;
  double best_loss = Loss(design, params, gamma);
  if (!std::isfinite(best_loss)) {
    throw RuntimeError("sgd: non-finite loss at the initial point");
  }
  int best_epoch = 0;

  Rng rng(config.shuffle_seed);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<double> grad(layout.size());
  const size_t batch = static_cast<size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.Shuffle(order);
    const double lr =
        config.lr_decay == LrDecay::kInverseSqrtEpoch
            ? config.learning_rate / std::sqrt(static_cast<double>(epoch + 1))
            : config.learning_rate;
    for (size_t start = 0; start < n; start += batch) {
      const size_t stop = std::min(n, start + batch);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (size_t i = start; i < stop; ++i) {
        AccumulateRow(design, design.rows[order[i]], params, scale, grad);
      }
      for (size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
      // Proximal step on the penalty: exact for any gamma, so a large
      // gamma shrinks theta instead of overshooting.
      const double shrink = 1.0 / (1.0 + 2.0 * lr * gamma * inv_n);
      for (size_t i = 0; i < layout.penalized_size(); ++i) params[i] *= shrink;
    }
    const double loss = Loss(design, params, gamma);
    if (!std::isfinite(loss)) {
      throw RuntimeError("sgd: non-finite loss at epoch " +
                         std::to_string(epoch + 1) +
                         "; try a smaller learning rate (--lr)");
    }
    if (loss < best_loss) {
      best_loss = loss;
      best = params;
      best_epoch = epoch + 1;
    }
  }

  JudgeModel model;
  model.kind = design.kind;
  model.dimension = design.dimension;
  model.score_set = design.score_set;
  model.gamma = gamma;
  model.Assign(best);
  model.metadata.seed = config.shuffle_seed;
  model.metadata.training_size = n;
  model.metadata.epochs = config.epochs;
  model.metadata.best_epoch = best_epoch;
  model.metadata.training_loss = best_loss;
  model.metadata.final_gradient_norm = GradientNorm(design, best, gamma);
  return model;
}

JudgeModel SgdFit(ModelKind kind, const Dataset& train, double gamma,
                  const SgdConfig& config, ProbClamp clamp) {
  if (train.size() == 0) throw ValidationError("sgd: empty training set");
  return SgdFit(BuildDesign(kind, train, clamp), gamma, config);
}

std::vector<double> DefaultGammaGrid() {
  return {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
}

std::vector<std::vector<size_t>> MakeFolds(size_t n, int k, uint64_t seed) {
  if (k < 2) throw ValidationError("cross-validation needs k >= 2 folds");
  if (static_cast<size_t>(k) > n) {
    throw ValidationError("cross-validation: k = " + std::to_string(k) +
                          " exceeds the " + std::to_string(n) +
                          " training examples");
  }
  const std::vector<size_t> perm = RandomPermutation(n, seed);
  std::vector<std::vector<size_t>> folds(k);
  const size_t base = n / k;
  const size_t extra = n % k;
  size_t pos = 0;
  for (size_t f = 0; f < static_cast<size_t>(k); ++f) {
    const size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(perm.begin() + pos, perm.begin() + pos + len);
    pos += len;
  }
  return folds;
}

Design SubDesign(const Design& design, std::span<const size_t> indices) {
  Design sub;
  sub.kind = design.kind;
  sub.dimension = design.dimension;
  sub.num_classes = design.num_classes;
  sub.score_set = design.score_set;
  sub.rows.reserve(indices.size());
  for (size_t i : indices) sub.rows.push_back(design.rows.at(i));
  return sub;
}

CvResult CrossValidateGamma(const Design& design, std::span<const double> grid,
                            int folds, const SgdConfig& config,
                            uint64_t seed) {
  if (grid.empty()) throw ValidationError("cross-validation: empty gamma grid");
  for (double g : grid) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw ValidationError("cross-validation: gamma values must be >= 0");
    }
  }
  const auto fold_indices = MakeFolds(design.size(), folds, seed);

  CvRecord record;
  record.grid.assign(grid.begin(), grid.end());
  record.folds = folds;
  record.fold_losses.assign(grid.size(), std::vector<double>(folds, 0.0));

  // Training and validation designs per fold, shared across the grid.
  std::vector<Design> train_parts, valid_parts;
  for (int f = 0; f < folds; ++f) {
    std::vector<size_t> train_idx;
    for (int g = 0; g < folds; ++g) {
      if (g == f) continue;
      train_idx.insert(train_idx.end(), fold_indices[g].begin(),
                       fold_indices[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    train_parts.push_back(SubDesign(design, train_idx));
    valid_parts.push_back(SubDesign(design, fold_indices[f]));
  }

  size_t best = 0;
  double best_mean = 0.0;
  for (size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      const JudgeModel fit = SgdFit(train_parts[f], grid[g], config);
      const double loss = MeanLoss(valid_parts[f], fit.Flatten());
      record.fold_losses[g][f] = loss;
      sum += loss;
    }
    const double mean = sum / folds;
    if (g == 0 || mean < best_mean ||
        (mean == best_mean && grid[g] > grid[best])) {
      best = g;
      best_mean = mean;
    }
  }
  record.chosen_gamma = grid[best];

  CvResult result;
  result.model = SgdFit(design, record.chosen_gamma, config);
  result.model.metadata.cv = record;
  result.record = std::move(record);
  return result;
}

double EvaluateOptimalityMargin(const Design& design,
                                const JudgeModel& fitted) {
  if (fitted.kind != design.kind) {
    throw ValidationError("optimality margin: model kind does not match data");
  }
  const std::vector<double> identity = IdentityParams(design.layout());
  return Loss(design, identity, fitted.gamma) -
         Loss(design, fitted.Flatten(), fitted.gamma);
}

}  // namespace qjudge
