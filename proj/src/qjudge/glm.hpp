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

// Prediction functions and regularized losses of the five quantitative
// judges. Every judge is linear in the concatenated feature (embedding (+)
// base signal), where the base signal is
//
//   LS    the base score b
//   MN    log p_s, one feature row per score label
//   BTL   the base log-odds log(p / (1 - p))
//   BTL2  BTL on (embedding_a - embedding_b) with p = b_a / (b_a + b_b)
//   PL    the base score b_k of every item, no bias
//
// so theta = 0_d (+) 1 with zero bias reproduces the base judge.

#ifndef QJUDGE_GLM_HPP_
#define QJUDGE_GLM_HPP_

#include <span>
#include <vector>

#include "qjudge/dataset.hpp"
#include "qjudge/model.hpp"

namespace qjudge {

// Guards log p and log-odds against degenerate base probabilities.
struct ProbClamp {
  double epsilon = 1e-9;

  void Validate() const;
  double Apply(double p) const;
};

double Sigmoid(double z);
double LogSumExp(std::span<const double> values);

// Softmax computed through log-sum-exp.
std::vector<double> Softmax(std::span<const double> logits);

double PredictLs(std::span<const double> embedding, double base_score,
                 const JudgeModel& model);

// Distribution over model.score_set. `base_probs` is dense over the same set.
std::vector<double> PredictMn(std::span<const double> embedding,
                              std::span<const double> base_probs,
                              const JudgeModel& model, ProbClamp clamp = {});

// Probability that the first response is preferred.
double PredictBtl(std::span<const double> embedding, double base_prob_first,
                  const JudgeModel& model, ProbClamp clamp = {});
double BtlLogit(std::span<const double> embedding, double base_prob_first,
                const JudgeModel& model, ProbClamp clamp = {});

double PredictBtl2(std::span<const double> embedding_a,
                   std::span<const double> embedding_b, double base_score_a,
                   double base_score_b, const JudgeModel& model,
                   ProbClamp clamp = {});
double Btl2Logit(std::span<const double> embedding_a,
                 std::span<const double> embedding_b, double base_score_a,
                 double base_score_b, const JudgeModel& model,
                 ProbClamp clamp = {});

// Strict threshold: exactly 0.5 prefers the second response.
inline bool PrefersFirst(double prob_first) { return prob_first > 0.5; }

// Per-item utilities (phi(e_k) (+) b_k) . theta.
std::vector<double> PlUtilities(std::span<const RankedItem> items,
                                const JudgeModel& model);
// Choice distribution over the K items.
std::vector<double> PredictPl(std::span<const RankedItem> items,
                              const JudgeModel& model);
// log P(ranking), ranking listing item indices best to worst.
double PlPermutationLogProb(std::span<const RankedItem> items,
                            std::span<const size_t> ranking,
                            const JudgeModel& model);

// Index of the maximum, ties broken toward the lowest index (which is the
// lower score label for MN and the first item for PL).
size_t ArgMax(std::span<const double> values);

// Feature rows of a dataset prepared for one model kind.
struct DesignRow {
  // LS, BTL, BTL2: d + 1 features. MN: d embedding values then |S| log
  // probabilities. PL: K rows of d + 1 features, row-major.
  std::vector<double> features;
  double target = 0.0;          // LS human score; BTL/BTL2 preference
  size_t label = 0;             // MN score-set index
  std::vector<size_t> ranking;  // PL
};

struct Design {
  ModelKind kind = ModelKind::kLs;
  size_t dimension = 0;
  size_t num_classes = 0;  // MN only
  std::vector<double> score_set;
  std::vector<DesignRow> rows;

  ParamLayout layout() const {
    return ParamLayout::For(kind, dimension, num_classes);
  }
  size_t size() const { return rows.size(); }
};

// Builds the design of `kind` from a labeled dataset. Throws a validation
// error on kind/task mismatch, missing labels or missing base_probs (MN).
Design BuildDesign(ModelKind kind, const Dataset& dataset,
                   ProbClamp clamp = {});

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

// Summed loss over `batch` (all rows when empty) plus gamma * ||theta||^2,
// biases excluded from the penalty, and its exact gradient.
LossGradient LossAndGradient(const Design& design,
                             std::span<const double> params, double gamma,
                             std::span<const size_t> batch = {});

// Loss only; same value as LossAndGradient(...).loss.
double Loss(const Design& design, std::span<const double> params,
            double gamma, std::span<const size_t> batch = {});

// Unregularized loss averaged over the rows: MSE for LS, cross-entropy for
// MN, logistic loss for BTL/BTL2, negative permutation log-likelihood for PL.
double MeanLoss(const Design& design, std::span<const double> params);

// Returns the unregularized loss of one row and, when `gradient` is
// non-empty, adds `scale` times its gradient into it.
double AccumulateRow(const Design& design, const DesignRow& row,
                     std::span<const double> params, double scale,
                     std::span<double> gradient);

}  // namespace qjudge

#endif  // QJUDGE_GLM_HPP_
