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


#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "qjudge/error.hpp"
#include "qjudge/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace qjudge;
using Json = nlohmann::json;

namespace {

Dataset Fixture(const std::string& name) {
  return LoadDataset(std::string(QJUDGE_TEST_DATA_DIR) + "/" + name);
}

TrainOptions Quick(ModelKind kind, std::optional<double> gamma = std::nullopt) {
  TrainOptions o;
  o.kind = kind;
  o.gamma = gamma;
  o.sgd.epochs = 40;
  o.seed = 3;
  return o;
}

std::string ErrorOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("auto gamma training records the cross-validated choice") {
  const JudgeModel m = Train(Fixture("absolute_small.jsonl"), Quick(ModelKind::kLs));
  REQUIRE(m.metadata.cv.has_value());
  const auto grid = DefaultGammaGrid();
  CHECK(m.metadata.cv->grid == grid);
  CHECK(m.metadata.cv->folds == 5);
  CHECK(std::find(grid.begin(), grid.end(), m.gamma) != grid.end());
  CHECK(m.gamma == m.metadata.cv->chosen_gamma);
  CHECK(m.metadata.seed == 3);
  const Json saved = Json::parse(SerializeModel(m));
  CHECK(saved["metadata"]["cv"]["chosen_gamma"].get<double>() == m.gamma);
}

TEST_CASE("training is a pure function of data, options and seed") {
  const Dataset data = Fixture("pairwise_relative.jsonl");
  CHECK(SerializeModel(Train(data, Quick(ModelKind::kBtl))) ==
        SerializeModel(Train(data, Quick(ModelKind::kBtl))));
}

TEST_CASE("MN training without base probabilities names the field") {
  Dataset data = Fixture("absolute_small.jsonl");
  data.absolute[4].base_probs.reset();
  const std::string msg = ErrorOf([&] { Train(data, Quick(ModelKind::kMn, 1.0)); });
  CHECK(msg.find("base_probs") != std::string::npos);
}

TEST_CASE("BTL2 on rankings trains on every expanded pair") {
  const Dataset ranking = Fixture("ranking_small.jsonl");
  TrainOptions o = Quick(ModelKind::kBtl2, 0.1);
  o.expand_pairs = true;
  const JudgeModel m = Train(ranking, o);
  CHECK(m.metadata.training_size == ranking.size() * 4 * 3 / 2);

  o.expand_pairs = false;
  CHECK(ErrorOf([&] { Train(ranking, o); }).find("--expand-pairs") != std::string::npos);
  o.kind = ModelKind::kLs;
  o.expand_pairs = true;
  CHECK_THROWS_AS(Train(ranking, o), Error);
}

TEST_CASE("incompatible task and kind") {
  CHECK_THROWS_AS(Train(Fixture("absolute_small.jsonl"), Quick(ModelKind::kBtl, 1.0)), Error);
  CHECK_THROWS_AS(Train(Fixture("pairwise_relative.jsonl"), Quick(ModelKind::kPl, 1.0)), Error);
  CHECK_THROWS_AS(Train(Fixture("ranking_small.jsonl"), Quick(ModelKind::kMn, 1.0)), Error);
}

TEST_CASE("tiny training sets fall back to fewer folds") {
  Dataset data = Fixture("absolute_small.jsonl");
  data.absolute.resize(3);
  const JudgeModel m = Train(data, Quick(ModelKind::kLs));
  CHECK(m.metadata.cv->folds == 3);
  data.absolute.resize(1);
  CHECK_THROWS_AS(Train(data, Quick(ModelKind::kLs)), Error);
  CHECK_NOTHROW(Train(data, Quick(ModelKind::kLs, 0.5)));
}

TEST_CASE("LS report carries regression, accuracy and correlation fields") {
  const Dataset data = Fixture("absolute_small.jsonl");
  const JudgeModel m = Train(data, Quick(ModelKind::kLs, 0.1));
  EvalOptions eo;
  eo.per_example = true;
  const EvalReport r = Evaluate(m, data, eo);
  CHECK(r.n == data.size());
  CHECK(r.mse.has_value());
  CHECK(r.mae.has_value());
  CHECK(r.accuracy.has_value());
  CHECK(r.pearson_r.has_value());
  CHECK(r.spearman_rho.has_value());
  CHECK(r.kendall_tau.has_value());
  CHECK_FALSE(r.precision.has_value());
  REQUIRE(r.confusion.has_value());
  long trace = 0;
  for (size_t i = 0; i < r.confusion->labels.size(); ++i) trace += r.confusion->counts[i][i];
  CHECK(static_cast<double>(trace) / static_cast<double>(r.n) == *r.accuracy);
  CHECK(r.per_example.size() == data.size());
  CHECK(r.per_example[0].id == data.absolute[0].id);

  const Json j = Json::parse(SerializeReport(r));
  for (const char* key : {"mse", "mae", "accuracy", "pearson_r", "spearman_rho",
                          "kendall_tau", "confusion", "per_example",
                          "prediction_representation"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["confusion"]["3"].size() == 5);
  CHECK(j["prediction_representation"] == "raw score");
}

TEST_CASE("clipping bounds LS predictions to the score range") {
  const Dataset data = Fixture("absolute_small.jsonl");
  JudgeModel m = MakeIdentityModel(ModelKind::kLs, 4);
  m.score_set = data.header.score_set;
  m.bias[0] = 100.0;
  EvalOptions eo;
  eo.clip_to_score_set = true;
  eo.per_example = true;
  const EvalReport r = Evaluate(m, data, eo);
  for (const auto& e : r.per_example) CHECK(e.prediction == 5.0);
  CHECK(r.prediction_representation == "clipped score");
  for (const auto& line : Lines(Predict(m, data, eo))) {
    CHECK(Json::parse(line)["score"] == 5.0);
  }
}

TEST_CASE("MN report uses the argmax label") {
  const Dataset data = Fixture("absolute_small.jsonl");
  const JudgeModel m = Train(data, Quick(ModelKind::kMn, 1.0));
  const EvalReport r = Evaluate(m, data, EvalOptions{});
  CHECK(r.accuracy.has_value());
  CHECK(r.mse.has_value());
  CHECK(r.prediction_representation == "argmax label");
  REQUIRE(r.confusion.has_value());
  std::vector<long> truth_counts(5, 0);
  for (const auto& ex : data.absolute) ++truth_counts[static_cast<size_t>(*ex.human_score) - 1];
  for (size_t t = 0; t < 5; ++t) {
    long row = 0;
    for (long c : r.confusion->counts[t]) row += c;
    CHECK(row == truth_counts[t]);
  }
}

TEST_CASE("pairwise reports carry classification and correlation fields") {
  for (const char* name : {"pairwise_relative.jsonl", "pairwise_two_headed.jsonl"}) {
    const Dataset data = Fixture(name);
    const ModelKind kind = data.pairwise[0].form == PairForm::kRelative
                               ? ModelKind::kBtl
                               : ModelKind::kBtl2;
    const JudgeModel m = Train(data, Quick(kind, 0.1));
    const EvalReport r = Evaluate(m, data, EvalOptions{});
    for (const auto* field : {&r.accuracy, &r.precision, &r.recall, &r.f1,
                              &r.pearson_r, &r.spearman_rho, &r.kendall_tau}) {
      CHECK(field->has_value());
    }
    CHECK_FALSE(r.mse.has_value());
    const long trace = r.confusion->counts[0][0] + r.confusion->counts[1][1];
    CHECK(static_cast<double>(trace) / static_cast<double>(r.n) == *r.accuracy);
  }
}

TEST_CASE("PL report") {
  const Dataset data = Fixture("ranking_small.jsonl");
  const JudgeModel m = Train(data, Quick(ModelKind::kPl, 0.1));
  const EvalReport r = Evaluate(m, data, EvalOptions{});
  CHECK(r.accuracy.has_value());
  CHECK(r.kendall_tau.has_value());
  CHECK(r.mean_loss.has_value());
  CHECK(*r.mean_loss > 0.0);
}

TEST_CASE("evaluation rejects mismatched models") {
  const Dataset data = Fixture("absolute_small.jsonl");
  const JudgeModel wrong_dim = MakeIdentityModel(ModelKind::kLs, 5);
  CHECK(ErrorOf([&] { Evaluate(wrong_dim, data, EvalOptions{}); }).find("dimension") !=
        std::string::npos);
  CHECK_THROWS_AS(Evaluate(MakeIdentityModel(ModelKind::kBtl, 4), data, EvalOptions{}), Error);
  CHECK_THROWS_AS(Evaluate(MakeIdentityModel(ModelKind::kMn, 4, {1, 2, 3}), data, EvalOptions{}),
                  Error);
  CHECK_THROWS_AS(Predict(wrong_dim, data, EvalOptions{}), Error);
}

TEST_CASE("LS predictions come back in input order") {
  const Dataset inputs = Fixture("absolute_unlabeled.jsonl");
  const JudgeModel m = MakeIdentityModel(ModelKind::kLs, 4);
  const auto lines = Lines(Predict(m, inputs, EvalOptions{}));
  REQUIRE(lines.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    const Json j = Json::parse(lines[i]);
    CHECK(j["id"] == inputs.absolute[i].id);
    CHECK(j["score"].get<double>() == inputs.absolute[i].base_score);
  }
  // Unlabeled inputs cannot be evaluated.
  CHECK_THROWS_AS(Evaluate(m, inputs, EvalOptions{}), Error);
}

TEST_CASE("MN prediction records are distributions") {
  const Dataset data = Fixture("absolute_small.jsonl");
  const JudgeModel m = Train(data, Quick(ModelKind::kMn, 1.0));
  for (const auto& line : Lines(Predict(m, data, EvalOptions{}))) {
    const Json j = Json::parse(line);
    double sum = 0.0, best = -1.0;
    std::string best_key;
    for (const auto& [key, value] : j["distribution"].items()) {
      sum += value.get<double>();
      if (value.get<double>() > best) {
        best = value.get<double>();
        best_key = key;
      }
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
    CHECK(LabelKey(j["label"].get<double>()) == best_key);
  }
}

TEST_CASE("BTL2 tie at one half prefers the second response") {
  Dataset data;
  data.header.dimension = 2;
  data.header.task = Task::kPairwise;
  PairwiseExample ex;
  ex.id = "tie";
  ex.form = PairForm::kTwoHeaded;
  ex.embedding_a = ex.embedding_b = {0.5, -0.5};
  ex.base_score_a = ex.base_score_b = 3.0;
  data.pairwise.push_back(ex);
  const Json j = Json::parse(Predict(MakeIdentityModel(ModelKind::kBtl2, 2), data, EvalOptions{}));
  CHECK(j["prob_first"].get<double>() == 0.5);
  CHECK(j["preferred"] == "second");
}

TEST_CASE("PL prediction records") {
  const Dataset data = Fixture("ranking_small.jsonl");
  JudgeModel m = MakeIdentityModel(ModelKind::kPl, 4);
  for (const auto& line : Lines(Predict(m, data, EvalOptions{}))) {
    const Json j = Json::parse(line);
    CHECK(j["distribution"].size() == 4);
    CHECK(j["choice"].get<size_t>() < 4);
  }
}

TEST_CASE("size ablation with defaults") {
  testing::LsGenerator g;
  g.n = 300;
  g.d = 4;
  g.sigma = 0.5;
  const Dataset all = testing::MakeLsDataset(g, 41);
  const SplitResult split = Split(all, 0.3, 1);
  AblationOptions ao;
  ao.train = Quick(ModelKind::kLs);
  ao.train.sgd.epochs = 20;
  const auto rows = AblateSize(split.train, split.test, ao, DefaultSizeFractions());
  CHECK(rows.size() == 7 * 10);

  std::set<std::string> reference;
  double first_mean = 0.0, last_mean = 0.0;
  for (const auto& r : rows) {
    if (r.x == 0.01) first_mean += *r.report.mean_loss / 10.0;
    if (r.x == 1.0) {
      last_mean += *r.report.mean_loss / 10.0;
      CHECK(r.train_size == split.train.size());
    }
  }
  // Fraction 1.0 draws the full set every time.
  for (int i = 0; i < 10; ++i) {
    const Dataset sub = Subsample(split.train, 1.0, DeriveSeed(ao.train.seed + i, "subsample"));
    std::set<std::string> ids;
    for (const auto& ex : sub.absolute) ids.insert(ex.id);
    if (i == 0) reference = ids;
    CHECK(ids == reference);
  }
  CHECK(last_mean <= first_mean);

  const auto lines = Lines(FormatAblationTable(rows, "fraction"));
  CHECK(lines.size() == 1 + 70 + 7);
  CHECK(lines[0].rfind("row\tfraction\tseed\ttrain_size", 0) == 0);
  CHECK(lines[71].rfind("mean\t0.01\tmean", 0) == 0);
  CHECK_THROWS_AS(AblateSize(split.train, split.test, ao, {0.0}), Error);
  CHECK_THROWS_AS(AblateSize(split.train, split.test, ao, {1.5}), Error);
}

TEST_CASE("gamma ablation") {
  const Dataset train = Fixture("gamma_train.jsonl");
  const Dataset test = Fixture("gamma_test.jsonl");
  AblationOptions ao;
  ao.train = Quick(ModelKind::kLs);
  ao.n_seeds = 1;
  const std::vector<double> grid = {1e-4, 1e-3, 1e-2, 1e-1, 1, 10, 1e6};
  const auto rows = AblateGamma(train, test, ao, grid);
  REQUIRE(rows.size() == 7);
  for (size_t i = 0; i < 7; ++i) {
    CHECK(rows[i].x == grid[i]);
    CHECK(rows[i].gamma == grid[i]);
  }
  CHECK(rows.back().theta_norm < 1e-2);
}

TEST_CASE("feature ablation with defaults") {
  const Dataset train = Fixture("drop_train.jsonl");
  const Dataset test = Fixture("drop_test.jsonl");
  AblationOptions ao;
  ao.train = Quick(ModelKind::kLs, 0.1);
  ao.n_seeds = 1;
  const auto rows = AblateFeatures(train, test, ao, DefaultDropFractions());
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].dimension == 16);
  CHECK(rows[1].dimension == 8);
  CHECK(rows[2].dimension == 4);
  CHECK(rows[3].dimension == 2);

  // Drop 0 is a plain train and evaluate with the same seed.
  const JudgeModel plain = Train(train, ao.train);
  const EvalReport report = Evaluate(plain, test, ao.eval);
  CHECK(SerializeReport(rows[0].report) == SerializeReport(report));
  CHECK(rows[0].theta_norm == std::sqrt(ThetaSquaredNorm(plain.layout(), plain.Flatten())));
}

TEST_CASE("ablation tables average run rows per grid value") {
  AblationRow a, b;
  a.x = b.x = 0.5;
  a.report.mse = 1.0;
  b.report.mse = 3.0;
  a.seed = 0;
  b.seed = 1;
  const auto lines = Lines(FormatAblationTable({a, b}, "drop"));
  REQUIRE(lines.size() == 4);
  std::vector<std::string> header, mean;
  std::istringstream hs(lines[0]), ms(lines[3]);
  for (std::string c; std::getline(hs, c, '\t');) header.push_back(c);
  for (std::string c; std::getline(ms, c, '\t');) mean.push_back(c);
  REQUIRE(header.size() == mean.size());
  const size_t mse_col = std::find(header.begin(), header.end(), "mse") - header.begin();
  const size_t f1_col = std::find(header.begin(), header.end(), "f1") - header.begin();
  CHECK(mean[mse_col] == "2");
  CHECK(mean[f1_col] == "NA");
}

TEST_CASE("training summary lists the chosen gamma") {
  const JudgeModel m = Train(Fixture("absolute_small.jsonl"), Quick(ModelKind::kLs));
  const std::string s = TrainingSummary(m);
  CHECK(s.find("<- chosen") != std::string::npos);
  CHECK(s.find("kind: ls") != std::string::npos);
}
