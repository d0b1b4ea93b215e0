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

#include "qjudge/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qjudge/error.hpp"

namespace qjudge {
namespace {

constexpr double kProbSumTolerance = 1e-6;

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double LogOdds(double p) { return std::log(p) - std::log1p(-p); }

void CheckKind(const JudgeModel& model, ModelKind expected) {
  if (model.kind != expected) {
    throw ValidationError("expected a " + std::string(KindName(expected)) +
                          " judge, got " + std::string(KindName(model.kind)));
  }
}

void CheckEmbedding(std::span<const double> embedding,
                    const JudgeModel& model) {
  if (embedding.size() != model.dimension) {
    throw ValidationError("dimension mismatch: embedding has " +
                          std::to_string(embedding.size()) +
                          " features, model expects " +
                          std::to_string(model.dimension));
  }
  for (double x : embedding) {
    if (!std::isfinite(x)) throw ValidationError("non-finite embedding value");
  }
}

void CheckFinite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw ValidationError(std::string("non-finite ") + what);
  }
}

// Linear score of a BTL-style feature row: phi . theta[0:d] + signal *
// theta[d] + c.
double LinearLogit(std::span<const double> embedding, double signal,
                   const std::vector<double>& theta, double bias) {
  const size_t d = embedding.size();
  return Dot(embedding, std::span<const double>(theta).first(d)) +
         signal * theta[d] + bias;
}

double BtlLogitUnchecked(std::span<const double> embedding,
                         double base_prob_first, const JudgeModel& model,
                         ProbClamp clamp) {
  return LinearLogit(embedding, LogOdds(clamp.Apply(base_prob_first)),
                     model.theta[0], model.bias[0]);
}

std::vector<double> Difference(std::span<const double> a,
                               std::span<const double> b) {
  std::vector<double> diff(a.size());
  for (size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return diff;
}

void AppendFeatures(std::vector<double>& out, std::span<const double> emb,
                    double signal) {
  out.insert(out.end(), emb.begin(), emb.end());
  out.push_back(signal);
}

[[noreturn]] void DesignFail(const std::string& id, const std::string& what) {
  throw ValidationError("example '" + id + "': " + what);
}

void RequireTask(const Dataset& dataset, Task task, ModelKind kind) {
  if (dataset.header.task != task) {
    throw ValidationError(
        "a " + std::string(KindName(kind)) + " judge needs a " +
        std::string(TaskName(task)) + " dataset, got task '" +
        std::string(TaskName(dataset.header.task)) + "'");
  }
}

}  // namespace

void ProbClamp::Validate() const {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ValidationError("probability clamp epsilon must lie in (0, 0.5)");
  }
}

double ProbClamp::Apply(double p) const {
  return std::clamp(p, epsilon, 1.0 - epsilon);
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LogSumExp(std::span<const double> values) {
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double lse = LogSumExp(logits);
  std::vector<double> out(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) out[i] = std::exp(logits[i] - lse);
  return out;
}

size_t ArgMax(std::span<const double> values) {
  size_t best = 0;
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double PredictLs(std::span<const double> embedding, double base_score,
                 const JudgeModel& model) {
  CheckKind(model, ModelKind::kLs);
  CheckEmbedding(embedding, model);
  CheckFinite(base_score, "base score");
  return LinearLogit(embedding, base_score, model.theta[0], model.bias[0]);
}

std::vector<double> PredictMn(std::span<const double> embedding,
                              std::span<const double> base_probs,
                              const JudgeModel& model, ProbClamp clamp) {
  CheckKind(model, ModelKind::kMn);
  CheckEmbedding(embedding, model);
  clamp.Validate();
  const size_t classes = model.score_set.size();
  if (base_probs.size() != classes) {
    throw ValidationError("MN judge needs base_probs over all " +
                          std::to_string(classes) + " score labels");
  }
  const double total = std::accumulate(base_probs.begin(), base_probs.end(), 0.0);
  if (std::abs(total - 1.0) > kProbSumTolerance) {
    throw ValidationError("base probabilities sum to " + std::to_string(total));
  }
  std::vector<double> logits(classes);
  for (size_t s = 0; s < classes; ++s) {
    logits[s] = LinearLogit(embedding, std::log(clamp.Apply(base_probs[s])),
                            model.theta[s], model.bias[s]);
  }
  return Softmax(logits);
}

double BtlLogit(std::span<const double> embedding, double base_prob_first,
                const JudgeModel& model, ProbClamp clamp) {
  CheckKind(model, ModelKind::kBtl);
  CheckEmbedding(embedding, model);
  CheckFinite(base_prob_first, "base probability");
  clamp.Validate();
  return BtlLogitUnchecked(embedding, base_prob_first, model, clamp);
}

double PredictBtl(std::span<const double> embedding, double base_prob_first,
                  const JudgeModel& model, ProbClamp clamp) {
  return Sigmoid(BtlLogit(embedding, base_prob_first, model, clamp));
}

double Btl2Logit(std::span<const double> embedding_a,
                 std::span<const double> embedding_b, double base_score_a,
                 double base_score_b, const JudgeModel& model,
                 ProbClamp clamp) {
  CheckKind(model, ModelKind::kBtl2);
  CheckEmbedding(embedding_a, model);
  CheckEmbedding(embedding_b, model);
  clamp.Validate();
  if (!(base_score_a > 0.0) || !(base_score_b > 0.0) ||
      !std::isfinite(base_score_a) || !std::isfinite(base_score_b)) {
    throw ValidationError("BTL2 judge needs positive base scores");
  }
  const std::vector<double> diff = Difference(embedding_a, embedding_b);
  const double p = base_score_a / (base_score_a + base_score_b);
  return BtlLogitUnchecked(diff, p, model, clamp);
}

double PredictBtl2(std::span<const double> embedding_a,
                   std::span<const double> embedding_b, double base_score_a,
                   double base_score_b, const JudgeModel& model,
                   ProbClamp clamp) {
  return Sigmoid(Btl2Logit(embedding_a, embedding_b, base_score_a,
                           base_score_b, model, clamp));
}

std::vector<double> PlUtilities(std::span<const RankedItem> items,
                                const JudgeModel& model) {
  CheckKind(model, ModelKind::kPl);
  if (items.size() < 2) throw ValidationError("PL judge needs K >= 2 items");
  std::vector<double> utilities;
  utilities.reserve(items.size());
  for (const RankedItem& item : items) {
    CheckEmbedding(item.embedding, model);
    CheckFinite(item.base_score, "base score");
    utilities.push_back(
        LinearLogit(item.embedding, item.base_score, model.theta[0], 0.0));
  }
  return utilities;
}

std::vector<double> PredictPl(std::span<const RankedItem> items,
                              const JudgeModel& model) {
  return Softmax(PlUtilities(items, model));
}

double PlPermutationLogProb(std::span<const RankedItem> items,
                            std::span<const size_t> ranking,
                            const JudgeModel& model) {
  const std::vector<double> u = PlUtilities(items, model);
  const size_t k = u.size();
  std::vector<bool> seen(k, false);
  if (ranking.size() != k) throw ValidationError("invalid permutation");
  for (size_t r : ranking) {
    if (r >= k || seen[r]) throw ValidationError("invalid permutation");
    seen[r] = true;
  }
  double log_prob = 0.0;
  std::vector<double> remaining;
  for (size_t stage = 0; stage + 1 < k; ++stage) {
    remaining.clear();
    for (size_t i = stage; i < k; ++i) remaining.push_back(u[ranking[i]]);
    log_prob += u[ranking[stage]] - LogSumExp(remaining);
  }
  return log_prob;
}

Design BuildDesign(ModelKind kind, const Dataset& dataset, ProbClamp clamp) {
  clamp.Validate();
  Design design;
  design.kind = kind;
  design.dimension = dataset.header.dimension;
  const size_t d = design.dimension;

  switch (kind) {
    case ModelKind::kLs:
      RequireTask(dataset, Task::kAbsolute, kind);
      design.score_set = dataset.header.score_set;
      for (const AbsoluteExample& ex : dataset.absolute) {
        if (!ex.human_score) DesignFail(ex.id, "missing field 'human_score'");
        DesignRow row;
        row.features.reserve(d + 1);
        AppendFeatures(row.features, ex.embedding, ex.base_score);
        row.target = *ex.human_score;
        design.rows.push_back(std::move(row));
      }
      break;
    case ModelKind::kMn: {
      RequireTask(dataset, Task::kAbsolute, kind);
      const auto& labels = dataset.header.score_set;
      if (labels.size() < 2) {
        throw ValidationError("MN judge needs a dataset with a score_set");
      }
      design.score_set = labels;
      design.num_classes = labels.size();
      for (const AbsoluteExample& ex : dataset.absolute) {
        if (!ex.human_score) DesignFail(ex.id, "missing field 'human_score'");
        if (!ex.base_probs) DesignFail(ex.id, "missing field 'base_probs'");
        auto it = std::find(labels.begin(), labels.end(), *ex.human_score);
        if (it == labels.end()) DesignFail(ex.id, "human_score not in score_set");
        DesignRow row;
        row.features.reserve(d + labels.size());
        row.features.insert(row.features.end(), ex.embedding.begin(),
                            ex.embedding.end());
        for (double p : BaseProbVector(ex, labels)) {
          row.features.push_back(std::log(clamp.Apply(p)));
        }
        row.label = static_cast<size_t>(it - labels.begin());
        design.rows.push_back(std::move(row));
      }
      break;
    }
    case ModelKind::kBtl:
    case ModelKind::kBtl2: {
      RequireTask(dataset, Task::kPairwise, kind);
      const PairForm want =
          kind == ModelKind::kBtl ? PairForm::kRelative : PairForm::kTwoHeaded;
      for (const PairwiseExample& ex : dataset.pairwise) {
        if (ex.form != want) {
          DesignFail(ex.id, kind == ModelKind::kBtl
                                ? "BTL judge needs relative-form pairs"
                                : "BTL2 judge needs two_headed-form pairs");
        }
        if (!ex.human_pref) DesignFail(ex.id, "missing field 'human_pref'");
        DesignRow row;
        row.features.reserve(d + 1);
        if (kind == ModelKind::kBtl) {
          AppendFeatures(row.features, ex.embedding,
                         LogOdds(clamp.Apply(ex.base_prob_first)));
        } else {
          const double p =
              ex.base_score_a / (ex.base_score_a + ex.base_score_b);
          AppendFeatures(row.features,
                         Difference(ex.embedding_a, ex.embedding_b),
                         LogOdds(clamp.Apply(p)));
        }
        row.target = *ex.human_pref;
        design.rows.push_back(std::move(row));
      }
      break;
    }
    case ModelKind::kPl:
      RequireTask(dataset, Task::kRanking, kind);
      for (const RankingExample& ex : dataset.ranking) {
        if (ex.human_ranking.size() != ex.items.size()) {
          DesignFail(ex.id, "missing field 'human_ranking'");
        }
        DesignRow row;
        row.features.reserve(ex.items.size() * (d + 1));
        for (const RankedItem& item : ex.items) {
          AppendFeatures(row.features, item.embedding, item.base_score);
        }
        row.ranking = ex.human_ranking;
        design.rows.push_back(std::move(row));
      }
      break;
  }
  return design;
}

double AccumulateRow(const Design& design, const DesignRow& row,
                     std::span<const double> params, double scale,
                     std::span<double> gradient) {
  const ParamLayout layout = design.layout();
  const size_t d = design.dimension;
  const size_t width = layout.theta_size();
  const bool want_grad = !gradient.empty();
  std::span<const double> x(row.features);

  switch (design.kind) {
    case ModelKind::kLs: {
      const double residual =
          Dot(x, params.first(width)) + params[width] - row.target;
      if (want_grad) {
        const double dz = scale * 2.0 * residual;
        Axpy(dz, x, gradient.first(width));
        gradient[width] += dz;
      }
      return residual * residual;
    }
    case ModelKind::kBtl:
    case ModelKind::kBtl2: {
      const double z = Dot(x, params.first(width)) + params[width];
      if (want_grad) {
        const double dz = scale * (Sigmoid(z) - row.target);
        Axpy(dz, x, gradient.first(width));
        gradient[width] += dz;
      }
      return row.target > 0.5 ? Softplus(-z) : Softplus(z);
    }
    case ModelKind::kMn: {
      const size_t classes = design.num_classes;
      std::span<const double> emb = x.first(d);
      std::vector<double> logits(classes);
      for (size_t s = 0; s < classes; ++s) {
        std::span<const double> theta = params.subspan(s * width, width);
        logits[s] = Dot(emb, theta.first(d)) + x[d + s] * theta[d] +
                    params[layout.penalized_size() + s];
      }
      const double lse = LogSumExp(logits);
      if (want_grad) {
        for (size_t s = 0; s < classes; ++s) {
          double dz = std::exp(logits[s] - lse);
          if (s == row.label) dz -= 1.0;
          dz *= scale;
          std::span<double> g = gradient.subspan(s * width, width);
          Axpy(dz, emb, g.first(d));
          g[d] += dz * x[d + s];
          gradient[layout.penalized_size() + s] += dz;
        }
      }
      return lse - logits[row.label];
    }
    case ModelKind::kPl: {
      const size_t k = row.ranking.size();
      std::vector<double> u(k);
      for (size_t i = 0; i < k; ++i) {
        u[i] = Dot(x.subspan(i * width, width), params.first(width));
      }
      std::vector<double> du(k, 0.0);
      std::vector<double> remaining;
      double loss = 0.0;
      for (size_t stage = 0; stage + 1 < k; ++stage) {
        remaining.clear();
        for (size_t i = stage; i < k; ++i) remaining.push_back(u[row.ranking[i]]);
        const double lse = LogSumExp(remaining);
        loss += lse - u[row.ranking[stage]];
        if (want_grad) {
          for (size_t i = stage; i < k; ++i) {
            du[row.ranking[i]] += std::exp(u[row.ranking[i]] - lse);
          }
          du[row.ranking[stage]] -= 1.0;
        }
      }
      if (want_grad) {
        for (size_t i = 0; i < k; ++i) {
          Axpy(scale * du[i], x.subspan(i * width, width),
               gradient.first(width));
        }
      }
      return loss;
    }
  }
  return 0.0;
}

LossGradient LossAndGradient(const Design& design,
                             std::span<const double> params, double gamma,
                             std::span<const size_t> batch) {
  const ParamLayout layout = design.layout();
  if (params.size() != layout.size()) {
    throw ValidationError("parameter vector has length " +
                          std::to_string(params.size()) + ", expected " +
                          std::to_string(layout.size()));
  }
  if (design.rows.empty()) throw ValidationError("empty batch");
  LossGradient out;
  out.gradient.assign(layout.size(), 0.0);
  if (batch.empty()) {
    for (const DesignRow& row : design.rows) {
      out.loss += AccumulateRow(design, row, params, 1.0, out.gradient);
    }
  } else {
    for (size_t i : batch) {
      out.loss += AccumulateRow(design, design.rows.at(i), params, 1.0,
                                out.gradient);
    }
  }
  out.loss += gamma * ThetaSquaredNorm(layout, params);
  for (size_t i = 0; i < layout.penalized_size(); ++i) {
    out.gradient[i] += 2.0 * gamma * params[i];
  }
  return out;
}

double Loss(const Design& design, std::span<const double> params, double gamma,
            std::span<const size_t> batch) {
  const ParamLayout layout = design.layout();
  if (params.size() != layout.size()) {
    throw ValidationError("parameter vector has wrong length");
  }
  double loss = 0.0;
  if (batch.empty()) {
    for (const DesignRow& row : design.rows) {
      loss += AccumulateRow(design, row, params, 1.0, {});
    }
  } else {
    for (size_t i : batch) {
      loss += AccumulateRow(design, design.rows.at(i), params, 1.0, {});
    }
  }
  return loss + gamma * ThetaSquaredNorm(layout, params);
}

double MeanLoss(const Design& design, std::span<const double> params) {
  if (design.rows.empty()) throw ValidationError("empty dataset");
  return Loss(design, params, 0.0) / static_cast<double>(design.size());
}

}  // namespace qjudge
