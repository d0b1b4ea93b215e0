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


#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "qjudge/error.hpp"
#include "qjudge/training.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace qjudge;

namespace {

constexpr ModelKind kAllKinds[] = {ModelKind::kLs, ModelKind::kMn,
                                   ModelKind::kBtl, ModelKind::kBtl2,
                                   ModelKind::kPl};

Dataset SmallData(ModelKind kind, size_t n, uint64_t seed, size_t d = 4) {
  switch (kind) {
    case ModelKind::kLs: {
      testing::LsGenerator g;
      g.n = n;
      g.d = d;
      g.sigma = 0.5;
      return testing::MakeLsDataset(g, seed);
    }
    case ModelKind::kMn:
      return testing::MakeMnDataset(n, d, {1, 2, 3}, seed);
    case ModelKind::kBtl: {
      testing::BtlGenerator g;
      g.n = n;
      g.d = d;
      return testing::MakeBtlDataset(g, seed);
    }
    case ModelKind::kBtl2:
      return testing::MakeBtl2Dataset(n, d, seed);
    case ModelKind::kPl:
      return testing::MakePlDataset(n, d, 3, seed);
  }
  return {};
}

double ThetaNorm(const JudgeModel& m) {
  const auto flat = m.Flatten();
  return std::sqrt(ThetaSquaredNorm(m.layout(), flat));
}

SgdConfig FullBatch(size_t n, double lr, int epochs) {
  SgdConfig c;
  c.batch_size = static_cast<int>(n);
  c.learning_rate = lr;
  c.epochs = epochs;
  c.lr_decay = LrDecay::kNone;
  return c;
}

}  // namespace

TEST_CASE("noiseless LS reaches a tiny training MSE with default settings") {
  testing::LsGenerator g;
  g.feature_scale = 3.0;
  for (uint64_t seed = 0; seed < 3; ++seed) {
    const Design d = BuildDesign(ModelKind::kLs, testing::MakeLsDataset(g, seed));
    SgdConfig config;
    config.shuffle_seed = seed;
    const JudgeModel m = SgdFit(d, 0.0, config);
    CHECK(MeanLoss(d, m.Flatten()) < 1e-3);
  }
}

TEST_CASE("LS fit converges to the ridge closed form") {
  testing::LsGenerator g;
  g.n = 60;
  g.d = 3;
  g.sigma = 0.3;
  const Dataset data = testing::MakeLsDataset(g, 4);
  const Design d = BuildDesign(ModelKind::kLs, data);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (const auto& ex : data.absolute) {
    auto r = ex.embedding;
    r.push_back(ex.base_score);
    rows.push_back(r);
    y.push_back(*ex.human_score);
  }
  for (double gamma : {0.0, 0.5, 20.0}) {
    const auto expected = testing::RidgeClosedForm(rows, y, gamma);
    const JudgeModel m = SgdFit(d, gamma, FullBatch(60, 0.05, 4000));
    const auto got = m.Flatten();
    REQUIRE(got.size() == expected.size());
    for (size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - expected[i]) < 1e-6);
  }
}

TEST_CASE("overwhelming penalty drives theta to zero for every kind") {
  for (ModelKind kind : kAllKinds) {
    const Design d = BuildDesign(kind, SmallData(kind, 100, 3));
    const JudgeModel m = SgdFit(d, 1e6, SgdConfig{});
    CHECK(ThetaNorm(m) < 1e-2);
  }
}

TEST_CASE("fits are bit-identical for a fixed seed") {
  for (ModelKind kind : kAllKinds) {
    const Design d = BuildDesign(kind, SmallData(kind, 150, 5));
    SgdConfig c;
    c.epochs = 20;
    c.shuffle_seed = 17;
    const auto a = SgdFit(d, 0.1, c).Flatten();
    CHECK(a == SgdFit(d, 0.1, c).Flatten());
    c.shuffle_seed = 18;
    CHECK(a != SgdFit(d, 0.1, c).Flatten());
  }
}

TEST_CASE("returned point is the best seen and metadata describes it") {
  for (ModelKind kind : kAllKinds) {
    const Design d = BuildDesign(kind, SmallData(kind, 80, 6));
    SgdConfig c;
    c.epochs = 15;
    c.learning_rate = 0.3;  // noisy enough that the last epoch is not always best
    const JudgeModel m = SgdFit(d, 0.01, c);
    const auto p = m.Flatten();
    CHECK(m.metadata.training_loss == Loss(d, p, 0.01));
    CHECK(m.metadata.training_loss <= Loss(d, IdentityParams(d.layout()), 0.01));
    CHECK(m.metadata.best_epoch >= 0);
    CHECK(m.metadata.best_epoch <= 15);
    CHECK(m.metadata.epochs == 15);
    CHECK(m.metadata.training_size == 80);
    CHECK(m.metadata.final_gradient_norm == doctest::Approx(GradientNorm(d, p, 0.01)));
    CHECK(m.gamma == 0.01);
  }
}

TEST_CASE("zero initialization is available") {
  const Design d = BuildDesign(ModelKind::kPl, SmallData(ModelKind::kPl, 30, 1));
  SgdConfig c;
  c.init = InitPoint::kZeros;
  c.epochs = 1;
  c.learning_rate = 1e-12;
  const auto p = SgdFit(d, 0.0, c).Flatten();
  for (double x : p) CHECK(std::fabs(x) < 1e-9);
}

TEST_CASE("divergence is reported with the epoch and a hint") {
  testing::LsGenerator g;
  g.feature_scale = 30.0;
  const Design d = BuildDesign(ModelKind::kLs, testing::MakeLsDataset(g, 1));
  SgdConfig c;
  c.learning_rate = 50.0;
  try {
    SgdFit(d, 0.0, c);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kRuntime);
    const std::string msg = e.what();
    CHECK(msg.find("epoch") != std::string::npos);
    CHECK(msg.find("--lr") != std::string::npos);
  }
}

TEST_CASE("invalid fits are rejected") {
  const Dataset abs = SmallData(ModelKind::kLs, 5, 1);
  CHECK_THROWS_AS(SgdFit(ModelKind::kBtl, abs, 0.0, SgdConfig{}), Error);
  Dataset empty = abs;
  empty.absolute.clear();
  CHECK_THROWS_AS(SgdFit(ModelKind::kLs, empty, 0.0, SgdConfig{}), Error);
  CHECK_THROWS_AS(SgdFit(ModelKind::kLs, abs, -1.0, SgdConfig{}), Error);
  SgdConfig bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(SgdFit(ModelKind::kLs, abs, 0.0, bad), Error);
  bad = SgdConfig{};
  bad.epochs = 0;
  CHECK_THROWS_AS(SgdFit(ModelKind::kLs, abs, 0.0, bad), Error);
  bad = SgdConfig{};
  bad.batch_size = 0;
  CHECK_THROWS_AS(SgdFit(ModelKind::kLs, abs, 0.0, bad), Error);
}

TEST_CASE("regularization path is monotone on converged fits") {
  for (ModelKind kind : {ModelKind::kLs, ModelKind::kBtl}) {
    const Design d = BuildDesign(kind, SmallData(kind, 40, 8, 3));
    double previous = INFINITY;
    for (double gamma : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      const JudgeModel m = SgdFit(d, gamma, FullBatch(40, kind == ModelKind::kLs ? 0.03 : 0.5, 20000));
      CHECK(m.metadata.final_gradient_norm < 1e-6);
      const double norm = ThetaNorm(m);
      CHECK(norm <= previous + 1e-3);
      previous = norm;
    }
  }
}

TEST_CASE("folds partition the rows into near-equal parts") {
  const auto folds = MakeFolds(23, 5, 3);
  REQUIRE(folds.size() == 5);
  std::set<size_t> all;
  for (const auto& f : folds) {
    CHECK((f.size() == 4 || f.size() == 5));
    for (size_t i : f) CHECK(all.insert(i).second);
  }
  CHECK(all.size() == 23);
  CHECK(MakeFolds(23, 5, 3) == folds);
  CHECK(MakeFolds(23, 5, 4) != folds);
  CHECK_THROWS_AS(MakeFolds(3, 5, 1), Error);
  CHECK_THROWS_AS(MakeFolds(10, 1, 1), Error);
}

TEST_CASE("cross-validation records every fold and picks the best mean") {
  const Design d = BuildDesign(ModelKind::kLs, SmallData(ModelKind::kLs, 100, 9));
  SgdConfig c;
  c.epochs = 30;
  const std::vector<double> grid = {1e-4, 1e-2, 1.0, 100.0};
  const CvResult cv = CrossValidateGamma(d, grid, 5, c, 21);
  REQUIRE(cv.record.fold_losses.size() == 4);
  size_t count = 0;
  double best = INFINITY;
  for (const auto& row : cv.record.fold_losses) {
    CHECK(row.size() == 5);
    count += row.size();
    double mean = 0.0;
    for (double l : row) mean += l / 5.0;
    best = std::min(best, mean);
  }
  CHECK(count == 20);
  const size_t chosen = std::find(grid.begin(), grid.end(), cv.record.chosen_gamma) - grid.begin();
  REQUIRE(chosen < grid.size());
  double chosen_mean = 0.0;
  for (double l : cv.record.fold_losses[chosen]) chosen_mean += l / 5.0;
  CHECK(chosen_mean == doctest::Approx(best).epsilon(1e-14));
  CHECK(cv.record.folds == 5);
  CHECK(cv.model.gamma == cv.record.chosen_gamma);
  REQUIRE(cv.model.metadata.cv.has_value());
  CHECK(cv.model.metadata.cv->chosen_gamma == cv.record.chosen_gamma);
  // The returned model is the refit on every row.
  CHECK(cv.model.Flatten() == SgdFit(d, cv.record.chosen_gamma, c).Flatten());
}

TEST_CASE("ties in mean validation loss go to the larger gamma") {
  // A vanishing learning rate leaves every fit exactly at the identity point,
  // so all grid values tie.
  const Design d = BuildDesign(ModelKind::kLs, SmallData(ModelKind::kLs, 40, 2));
  const std::vector<double> grid = {0.1, 10.0, 1.0};
  SgdConfig c;
  c.epochs = 2;
  c.learning_rate = 1e-300;
  const CvResult cv = CrossValidateGamma(d, grid, 4, c, 1);
  CHECK(cv.record.fold_losses[0] == cv.record.fold_losses[1]);
  CHECK(cv.record.fold_losses[1] == cv.record.fold_losses[2]);
  CHECK(cv.record.chosen_gamma == 10.0);
}

TEST_CASE("a single-point grid is chosen and still refit") {
  const Design d = BuildDesign(ModelKind::kBtl, SmallData(ModelKind::kBtl, 50, 3));
  SgdConfig c;
  c.epochs = 10;
  const std::vector<double> grid = {0.3};
  const CvResult cv = CrossValidateGamma(d, grid, 5, c, 2);
  CHECK(cv.record.chosen_gamma == 0.3);
  CHECK(cv.model.metadata.training_size == 50);
  CHECK(cv.model.Flatten() == SgdFit(d, 0.3, c).Flatten());
}

TEST_CASE("cross-validation argument errors") {
  const Design d = BuildDesign(ModelKind::kLs, SmallData(ModelKind::kLs, 4, 3));
  const std::vector<double> grid = {1.0};
  const std::vector<double> empty;
  const std::vector<double> negative = {-1.0};
  CHECK_THROWS_AS(CrossValidateGamma(d, empty, 2, SgdConfig{}, 1), Error);
  CHECK_THROWS_AS(CrossValidateGamma(d, grid, 5, SgdConfig{}, 1), Error);
  CHECK_THROWS_AS(CrossValidateGamma(d, grid, 1, SgdConfig{}, 1), Error);
  CHECK_THROWS_AS(CrossValidateGamma(d, negative, 2, SgdConfig{}, 1), Error);
}

TEST_CASE("validation labels never reach the fold fits") {
  const Design d = BuildDesign(ModelKind::kLs, SmallData(ModelKind::kLs, 60, 4));
  SgdConfig c;
  c.epochs = 10;
  const std::vector<double> grid = {0.01, 1.0};
  const uint64_t seed = 5;
  const auto folds = MakeFolds(d.size(), 3, seed);
  for (size_t f = 0; f < folds.size(); ++f) {
    // Reverse the labels within fold f only.
    Design permuted = d;
    const auto& idx = folds[f];
    for (size_t i = 0; i < idx.size(); ++i) {
      permuted.rows[idx[i]].target = d.rows[idx[idx.size() - 1 - i]].target;
    }
    std::vector<size_t> train_idx;
    for (size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    const CvResult a = CrossValidateGamma(d, grid, 3, c, seed);
    const CvResult b = CrossValidateGamma(permuted, grid, 3, c, seed);
    for (size_t gi = 0; gi < grid.size(); ++gi) {
      // The fold-f fit depends on the training rows alone.
      const JudgeModel fit = SgdFit(SubDesign(d, train_idx), grid[gi], c);
      const JudgeModel fit_permuted = SgdFit(SubDesign(permuted, train_idx), grid[gi], c);
      CHECK(fit.Flatten() == fit_permuted.Flatten());
      CHECK(a.record.fold_losses[gi][f] == MeanLoss(SubDesign(d, idx), fit.Flatten()));
      CHECK(b.record.fold_losses[gi][f] == MeanLoss(SubDesign(permuted, idx), fit.Flatten()));
    }
  }
}

TEST_CASE("heavy noise and few examples favour regularization") {
  int above_smallest = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    testing::LsGenerator g;
    g.n = 30;
    g.d = 16;
    g.sigma = 3.0;
    const Design d = BuildDesign(ModelKind::kLs, testing::MakeLsDataset(g, 500 + seed));
    SgdConfig c;
    c.shuffle_seed = seed;
    c.learning_rate = 0.05;
    const auto grid = DefaultGammaGrid();
    const CvResult cv = CrossValidateGamma(d, grid, 5, c, seed);
    if (cv.record.chosen_gamma > grid.front()) ++above_smallest;
  }
  CHECK(above_smallest > 10);
}

TEST_CASE("optimality margin") {
  const Design d = BuildDesign(ModelKind::kLs, SmallData(ModelKind::kLs, 100, 12));
  JudgeModel identity = MakeIdentityModel(ModelKind::kLs, 4);
  CHECK(EvaluateOptimalityMargin(d, identity) == 0.0);

  const JudgeModel fit = SgdFit(d, 0.0, FullBatch(100, 0.05, 3000));
  CHECK(fit.metadata.final_gradient_norm < 1e-6);
  CHECK(EvaluateOptimalityMargin(d, fit) >= -1e-6);

  SgdConfig lazy;
  lazy.epochs = 1;
  lazy.learning_rate = 1e-9;
  const double margin = EvaluateOptimalityMargin(d, SgdFit(d, 0.0, lazy));
  CHECK(std::isfinite(margin));
  CHECK(std::fabs(margin) < 1e-3);

  CHECK_THROWS_AS(EvaluateOptimalityMargin(d, MakeIdentityModel(ModelKind::kBtl, 4)), Error);
}
