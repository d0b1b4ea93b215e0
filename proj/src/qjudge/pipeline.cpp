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

#include "qjudge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "qjudge/error.hpp"
#include "qjudge/metrics.hpp"
#include "qjudge/random.hpp"

namespace qjudge {
namespace {

using OrderedJson = nlohmann::ordered_json;

Task TaskFor(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLs:
    case ModelKind::kMn:
      return Task::kAbsolute;
    case ModelKind::kBtl:
    case ModelKind::kBtl2:
      return Task::kPairwise;
    case ModelKind::kPl:
      return Task::kRanking;
  }
  return Task::kAbsolute;
}

std::optional<double> TryMetric(const std::function<double()>& fn) {
  try {
    return fn();
  } catch (const Error&) {
    return std::nullopt;
  }
}

void FillCorrelations(EvalReport& report, const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  if (xs.size() < 2) return;
  report.pearson_r = TryMetric([&] { return PearsonR(xs, ys); });
  report.spearman_rho = TryMetric([&] { return SpearmanRho(xs, ys); });
  report.kendall_tau = TryMetric([&] { return KendallTau(xs, ys); });
}

std::string FormatNumber(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string FormatOptional(const std::optional<double>& x) {
  return x ? FormatNumber(*x) : "NA";
}

void PutOptional(OrderedJson& j, const char* key,
                 const std::optional<double>& value) {
  if (value) j[key] = *value;
}

struct RunSpec {
  double x;
  int seed_index;
  uint64_t seed;
};

double ThetaNorm(const JudgeModel& model) {
  return std::sqrt(ThetaSquaredNorm(model.layout(), model.Flatten()));
}

AblationRow MakeRow(const RunSpec& spec, const JudgeModel& model,
                    EvalReport report) {
  AblationRow row;
  row.x = spec.x;
  row.seed_index = spec.seed_index;
  row.seed = spec.seed;
  row.train_size = model.metadata.training_size;
  row.dimension = model.dimension;
  row.gamma = model.gamma;
  row.theta_norm = ThetaNorm(model);
  row.report = std::move(report);
  return row;
}

void CheckAblationOptions(const AblationOptions& options,
                          const std::vector<double>& grid, const char* what) {
  if (options.n_seeds < 1) throw ValidationError("n-seeds must be >= 1");
  if (grid.empty()) throw ValidationError(std::string(what) + ": empty grid");
}

}  // namespace

std::vector<double> DefaultSizeFractions() {
  return {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
}

std::vector<double> DefaultDropFractions() { return {0.0, 0.5, 0.75, 0.875}; }

Dataset PrepareForKind(const Dataset& data, ModelKind kind, bool expand_pairs,
                       uint64_t seed) {
  if (expand_pairs) {
    if (kind != ModelKind::kBtl2) {
      throw ValidationError("--expand-pairs applies only to the btl2 judge");
    }
    if (data.header.task == Task::kRanking) {
      return ExpandRankingsToPairs(data, seed);
    }
  }
  const Task want = TaskFor(kind);
  if (data.header.task != want) {
    std::string msg = "a " + std::string(KindName(kind)) +
                      " judge needs a " + std::string(TaskName(want)) +
                      " dataset, got task '" +
                      std::string(TaskName(data.header.task)) + "'";
    if (kind == ModelKind::kBtl2 && data.header.task == Task::kRanking) {
      msg += " (use --expand-pairs)";
    }
    throw ValidationError(msg);
  }
  return data;
}

JudgeModel Train(const Dataset& data, const TrainOptions& options) {
  const Dataset prepared = PrepareForKind(
      data, options.kind, options.expand_pairs, DeriveSeed(options.seed, "pairs"));
  if (prepared.size() == 0) throw ValidationError("train: empty dataset");
  const Design design = BuildDesign(options.kind, prepared, options.clamp);
  SgdConfig sgd = options.sgd;
  sgd.shuffle_seed = DeriveSeed(options.seed, "sgd");

  JudgeModel model;
  if (options.gamma) {
    model = SgdFit(design, *options.gamma, sgd);
  } else {
    if (design.size() < 2) {
      throw ValidationError("train: cross-validation needs at least 2 examples");
    }
    if (options.folds < 2) throw ValidationError("--folds must be >= 2");
    // Tiny subsamples get leave-one-out instead of an error.
    const int folds = static_cast<int>(
        std::min<size_t>(static_cast<size_t>(options.folds), design.size()));
    model = CrossValidateGamma(design, options.grid, folds, sgd,
                               DeriveSeed(options.seed, "folds"))
                .model;
  }
  model.metadata.seed = options.seed;
  return model;
}

EvalReport Evaluate(const JudgeModel& model, const Dataset& test,
                    const EvalOptions& options) {
  model.Validate();
  const Dataset data = PrepareForKind(test, model.kind, options.expand_pairs,
                                      DeriveSeed(options.seed, "pairs"));
  if (data.header.dimension != model.dimension) {
    throw ValidationError("dimension mismatch: model has dimension " +
                          std::to_string(model.dimension) + ", data has " +
                          std::to_string(data.header.dimension));
  }
  if (model.kind == ModelKind::kMn && data.header.score_set != model.score_set) {
    throw ValidationError("score_set of the data differs from the model's");
  }
  if (data.size() == 0) throw ValidationError("evaluate: empty dataset");

  EvalReport report;
  report.task = data.header.task;
  report.kind = model.kind;
  report.n = data.size();
  report.mean_loss =
      MeanLoss(BuildDesign(model.kind, data, options.clamp), model.Flatten());

  std::vector<double> preds, truths;
  std::vector<std::string> ids;
  const std::vector<double>& labels =
      model.score_set.empty() ? data.header.score_set : model.score_set;

  switch (model.kind) {
    case ModelKind::kLs: {
      std::vector<double> rounded;
      for (const AbsoluteExample& ex : data.absolute) {
        double y = PredictLs(ex.embedding, ex.base_score, model);
        if (options.clip_to_score_set && !labels.empty()) {
          y = std::clamp(y, labels.front(), labels.back());
        }
        preds.push_back(y);
        truths.push_back(*ex.human_score);
        ids.push_back(ex.id);
        if (!labels.empty()) rounded.push_back(NearestLabel(y, labels));
      }
      const RegressionMetrics rm = ComputeRegressionMetrics(preds, truths);
      report.mse = rm.mse;
      report.mae = rm.mae;
      if (!labels.empty()) {
        report.accuracy =
            ComputeClassificationMetrics(rounded, truths, labels.back()).accuracy;
        report.confusion = Confusion{labels, ConfusionMatrix(rounded, truths, labels)};
      }
      FillCorrelations(report, preds, truths);
      report.prediction_representation =
          options.clip_to_score_set ? "clipped score" : "raw score";
      break;
    }
    case ModelKind::kMn: {
      for (const AbsoluteExample& ex : data.absolute) {
        const std::vector<double> dist =
            PredictMn(ex.embedding, BaseProbVector(ex, labels), model,
                      options.clamp);
        preds.push_back(labels[ArgMax(dist)]);
        truths.push_back(*ex.human_score);
        ids.push_back(ex.id);
      }
      const RegressionMetrics rm = ComputeRegressionMetrics(preds, truths);
      report.mse = rm.mse;
      report.mae = rm.mae;
      report.accuracy =
          ComputeClassificationMetrics(preds, truths, labels.back()).accuracy;
      report.confusion = Confusion{labels, ConfusionMatrix(preds, truths, labels)};
      FillCorrelations(report, preds, truths);
      report.prediction_representation = "argmax label";
      break;
    }
    case ModelKind::kBtl:
    case ModelKind::kBtl2: {
      for (const PairwiseExample& ex : data.pairwise) {
        const double p =
            model.kind == ModelKind::kBtl
                ? PredictBtl(ex.embedding, ex.base_prob_first, model,
                             options.clamp)
                : PredictBtl2(ex.embedding_a, ex.embedding_b, ex.base_score_a,
                              ex.base_score_b, model, options.clamp);
        preds.push_back(PrefersFirst(p) ? 1.0 : 0.0);
        truths.push_back(*ex.human_pref);
        ids.push_back(ex.id);
      }
      const ClassificationMetrics cm =
          ComputeClassificationMetrics(preds, truths, 1.0);
      report.accuracy = cm.accuracy;
      report.precision = cm.precision;
      report.recall = cm.recall;
      report.f1 = cm.f1;
      const std::vector<double> binary = {0.0, 1.0};
      report.confusion = Confusion{binary, ConfusionMatrix(preds, truths, binary)};
      FillCorrelations(report, preds, truths);
      report.prediction_representation = "preference label";
      break;
    }
    case ModelKind::kPl: {
      std::vector<double> utilities, reversed_positions;
      double hits = 0.0;
      for (const RankingExample& ex : data.ranking) {
        const std::vector<double> u = PlUtilities(ex.items, model);
        const size_t choice = ArgMax(u);
        const size_t k = ex.items.size();
        std::vector<double> position(k);
        for (size_t r = 0; r < k; ++r) position[ex.human_ranking[r]] = r;
        for (size_t i = 0; i < k; ++i) {
          utilities.push_back(u[i]);
          reversed_positions.push_back(static_cast<double>(k - 1) - position[i]);
        }
        if (choice == ex.human_ranking[0]) hits += 1.0;
        preds.push_back(static_cast<double>(choice));
        truths.push_back(static_cast<double>(ex.human_ranking[0]));
        ids.push_back(ex.id);
      }
      report.accuracy = hits / static_cast<double>(data.size());
      FillCorrelations(report, utilities, reversed_positions);
      report.prediction_representation =
          "top choice; correlations pool item utilities vs reversed human rank";
      break;
    }
  }

  if (options.per_example) {
    for (size_t i = 0; i < ids.size(); ++i) {
      report.per_example.push_back({ids[i], preds[i], truths[i]});
    }
  }
  return report;
}

std::string SerializeReport(const EvalReport& report) {
  OrderedJson j;
  j["task"] = std::string(TaskName(report.task));
  j["kind"] = std::string(KindName(report.kind));
  j["n"] = report.n;
  PutOptional(j, "mse", report.mse);
  PutOptional(j, "mae", report.mae);
  PutOptional(j, "accuracy", report.accuracy);
  PutOptional(j, "precision", report.precision);
  PutOptional(j, "recall", report.recall);
  PutOptional(j, "f1", report.f1);
  PutOptional(j, "pearson_r", report.pearson_r);
  PutOptional(j, "spearman_rho", report.spearman_rho);
  PutOptional(j, "kendall_tau", report.kendall_tau);
  PutOptional(j, "mean_loss", report.mean_loss);
  j["prediction_representation"] = report.prediction_representation;
  if (report.confusion) {
    OrderedJson conf = OrderedJson::object();
    const Confusion& c = *report.confusion;
    for (size_t t = 0; t < c.labels.size(); ++t) {
      OrderedJson row = OrderedJson::object();
      for (size_t p = 0; p < c.labels.size(); ++p) {
        row[LabelKey(c.labels[p])] = c.counts[t][p];
      }
      conf[LabelKey(c.labels[t])] = std::move(row);
    }
    j["confusion"] = std::move(conf);
  }
  if (!report.per_example.empty()) {
    OrderedJson rows = OrderedJson::array();
    for (const PerExample& e : report.per_example) {
      OrderedJson r;
      r["id"] = e.id;
      r["prediction"] = e.prediction;
      r["truth"] = e.truth;
      rows.push_back(std::move(r));
    }
    j["per_example"] = std::move(rows);
  }
  return j.dump(2);
}

std::string Predict(const JudgeModel& model, const Dataset& inputs,
                    const EvalOptions& options) {
  model.Validate();
  const Dataset data = PrepareForKind(inputs, model.kind, options.expand_pairs,
                                      DeriveSeed(options.seed, "pairs"));
  if (data.header.dimension != model.dimension) {
    throw ValidationError("dimension mismatch: model has dimension " +
                          std::to_string(model.dimension) + ", data has " +
                          std::to_string(data.header.dimension));
  }
  std::string out;
  auto emit = [&](const OrderedJson& j) {
    out += j.dump();
    out += '\n';
  };
  switch (model.kind) {
    case ModelKind::kLs:
      for (const AbsoluteExample& ex : data.absolute) {
        double y = PredictLs(ex.embedding, ex.base_score, model);
        if (options.clip_to_score_set && !model.score_set.empty()) {
          y = std::clamp(y, model.score_set.front(), model.score_set.back());
        }
        OrderedJson j;
        j["id"] = ex.id;
        j["score"] = y;
        emit(j);
      }
      break;
    case ModelKind::kMn:
      for (const AbsoluteExample& ex : data.absolute) {
        const std::vector<double> dist =
            PredictMn(ex.embedding, BaseProbVector(ex, model.score_set), model,
                      options.clamp);
        OrderedJson j;
        j["id"] = ex.id;
        OrderedJson d = OrderedJson::object();
        for (size_t s = 0; s < dist.size(); ++s) {
          d[LabelKey(model.score_set[s])] = dist[s];
        }
        j["distribution"] = std::move(d);
        j["label"] = model.score_set[ArgMax(dist)];
        emit(j);
      }
      break;
    case ModelKind::kBtl:
    case ModelKind::kBtl2:
      for (const PairwiseExample& ex : data.pairwise) {
        if ((model.kind == ModelKind::kBtl) != (ex.form == PairForm::kRelative)) {
          throw ValidationError("example '" + ex.id +
                                "': pair form does not match the judge");
        }
        const double p =
            model.kind == ModelKind::kBtl
                ? PredictBtl(ex.embedding, ex.base_prob_first, model,
                             options.clamp)
                : PredictBtl2(ex.embedding_a, ex.embedding_b, ex.base_score_a,
                              ex.base_score_b, model, options.clamp);
        OrderedJson j;
        j["id"] = ex.id;
        j["prob_first"] = p;
        j["preferred"] = PrefersFirst(p) ? "first" : "second";
        emit(j);
      }
      break;
    case ModelKind::kPl:
      for (const RankingExample& ex : data.ranking) {
        const std::vector<double> dist = PredictPl(ex.items, model);
        OrderedJson j;
        j["id"] = ex.id;
        j["distribution"] = dist;
        j["choice"] = ArgMax(dist);
        emit(j);
      }
      break;
  }
  return out;
}

std::vector<AblationRow> AblateSize(const Dataset& train, const Dataset& test,
                                    const AblationOptions& options,
                                    const std::vector<double>& fractions) {
  CheckAblationOptions(options, fractions, "size ablation");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ValidationError("size ablation: fractions must lie in (0, 1]");
    }
  }
  std::vector<AblationRow> rows;
  for (double fraction : fractions) {
    for (int i = 0; i < options.n_seeds; ++i) {
      const RunSpec spec{fraction, i, options.train.seed + i};
      const Dataset sub =
          Subsample(train, fraction, DeriveSeed(spec.seed, "subsample"));
      TrainOptions topts = options.train;
      topts.seed = spec.seed;
      const JudgeModel model = Train(sub, topts);
      rows.push_back(MakeRow(spec, model, Evaluate(model, test, options.eval)));
    }
  }
  return rows;
}

std::vector<AblationRow> AblateGamma(const Dataset& train, const Dataset& test,
                                     const AblationOptions& options,
                                     const std::vector<double>& grid) {
  CheckAblationOptions(options, grid, "gamma ablation");
  std::vector<AblationRow> rows;
  for (double gamma : grid) {
    for (int i = 0; i < options.n_seeds; ++i) {
      const RunSpec spec{gamma, i, options.train.seed + i};
      TrainOptions topts = options.train;
      topts.seed = spec.seed;
      topts.gamma = gamma;
      const JudgeModel model = Train(train, topts);
      rows.push_back(MakeRow(spec, model, Evaluate(model, test, options.eval)));
    }
  }
  return rows;
}

std::vector<AblationRow> AblateFeatures(const Dataset& train,
                                        const Dataset& test,
                                        const AblationOptions& options,
                                        const std::vector<double>& drops) {
  CheckAblationOptions(options, drops, "feature ablation");
  if (train.header.dimension != test.header.dimension) {
    throw ValidationError("feature ablation: train and test dimensions differ");
  }
  std::vector<AblationRow> rows;
  for (double drop : drops) {
    for (int i = 0; i < options.n_seeds; ++i) {
      const RunSpec spec{drop, i, options.train.seed + i};
      // Same seed and dimension give the same surviving indices on both sides.
      const uint64_t drop_seed = DeriveSeed(spec.seed, "drop");
      const Dataset reduced_train = DropFeatures(train, drop, drop_seed);
      const Dataset reduced_test = DropFeatures(test, drop, drop_seed);
      TrainOptions topts = options.train;
      topts.seed = spec.seed;
      const JudgeModel model = Train(reduced_train, topts);
      rows.push_back(
          MakeRow(spec, model, Evaluate(model, reduced_test, options.eval)));
    }
  }
  return rows;
}

std::string FormatAblationTable(const std::vector<AblationRow>& rows,
                                const std::string& x_name) {
  using Getter = std::function<std::optional<double>(const AblationRow&)>;
  const std::vector<std::pair<std::string, Getter>> columns = {
      {"train_size", [](const AblationRow& r) -> std::optional<double> { return static_cast<double>(r.train_size); }},
      {"dimension", [](const AblationRow& r) -> std::optional<double> { return static_cast<double>(r.dimension); }},
      {"gamma", [](const AblationRow& r) -> std::optional<double> { return r.gamma; }},
      {"theta_norm", [](const AblationRow& r) -> std::optional<double> { return r.theta_norm; }},
      {"n", [](const AblationRow& r) -> std::optional<double> { return static_cast<double>(r.report.n); }},
      {"mse", [](const AblationRow& r) { return r.report.mse; }},
      {"mae", [](const AblationRow& r) { return r.report.mae; }},
      {"accuracy", [](const AblationRow& r) { return r.report.accuracy; }},
      {"precision", [](const AblationRow& r) { return r.report.precision; }},
      {"recall", [](const AblationRow& r) { return r.report.recall; }},
      {"f1", [](const AblationRow& r) { return r.report.f1; }},
      {"pearson_r", [](const AblationRow& r) { return r.report.pearson_r; }},
      {"spearman_rho", [](const AblationRow& r) { return r.report.spearman_rho; }},
      {"kendall_tau", [](const AblationRow& r) { return r.report.kendall_tau; }},
      {"mean_loss", [](const AblationRow& r) { return r.report.mean_loss; }},
  };

  std::ostringstream os;
  os << "row\t" << x_name << "\tseed";
  for (const auto& [name, get] : columns) os << '\t' << name;
  os << '\n';
  for (const AblationRow& r : rows) {
    os << "run\t" << FormatNumber(r.x) << '\t' << r.seed;
    for (const auto& [name, get] : columns) os << '\t' << FormatOptional(get(r));
    os << '\n';
  }

  // Means per grid value, in order of first appearance.
  std::vector<double> xs;
  for (const AblationRow& r : rows) {
    if (std::find(xs.begin(), xs.end(), r.x) == xs.end()) xs.push_back(r.x);
  }
  for (double x : xs) {
    os << "mean\t" << FormatNumber(x) << "\tmean";
    for (const auto& [name, get] : columns) {
      double sum = 0.0;
      int count = 0;
      bool complete = true;
      for (const AblationRow& r : rows) {
        if (r.x != x) continue;
        const auto v = get(r);
        if (!v) {
          complete = false;
          break;
        }
        sum += *v;
        ++count;
      }
      os << '\t'
         << (complete && count > 0 ? FormatNumber(sum / count)
                                   : std::string("NA"));
    }
    os << '\n';
  }
  return os.str();
}

std::string TrainingSummary(const JudgeModel& model) {
  std::ostringstream os;
  const TrainingMetadata& m = model.metadata;
  os << "kind: " << KindName(model.kind) << '\n'
     << "dimension: " << model.dimension << '\n'
     << "training examples: " << m.training_size << '\n'
     << "gamma: " << FormatNumber(model.gamma) << '\n'
     << "seed: " << m.seed << '\n'
     << "epochs: " << m.epochs << " (best at epoch " << m.best_epoch << ")\n"
     << "training loss: " << FormatNumber(m.training_loss) << '\n'
     << "final gradient norm: " << FormatNumber(m.final_gradient_norm) << '\n';
  if (m.cv) {
    os << "cross-validation: " << m.cv->folds << " folds\n";
    for (size_t g = 0; g < m.cv->grid.size(); ++g) {
      double mean = 0.0;
      for (double l : m.cv->fold_losses[g]) mean += l;
      mean /= static_cast<double>(m.cv->fold_losses[g].size());
      os << "  gamma " << FormatNumber(m.cv->grid[g]) << ": mean validation loss "
         << FormatNumber(mean)
         << (m.cv->grid[g] == m.cv->chosen_gamma ? "  <- chosen" : "") << '\n';
    }
  }
  return os.str();
}

}  // namespace qjudge
