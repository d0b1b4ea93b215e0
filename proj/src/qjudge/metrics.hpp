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

#ifndef QJUDGE_METRICS_HPP_
#define QJUDGE_METRICS_HPP_

#include <span>
#include <vector>

namespace qjudge {

struct RegressionMetrics {
  double mse = 0.0;
  double mae = 0.0;
};

RegressionMetrics ComputeRegressionMetrics(std::span<const double> predictions,
                                           std::span<const double> truths);

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision with no predicted positives is 0; f1 with precision + recall = 0
// is 0.
ClassificationMetrics ComputeClassificationMetrics(
    std::span<const double> predicted, std::span<const double> truths,
    double positive_label);

// Sample Pearson correlation. Throws a validation error when either input
// has zero variance.
double PearsonR(std::span<const double> xs, std::span<const double> ys);

// Fractional ranks starting at 1; tied values share the mean of their
// positions.
std::vector<double> AverageRanks(std::span<const double> values);

double SpearmanRho(std::span<const double> xs, std::span<const double> ys);

// Kendall tau-b in O(n log n). Throws when every pair is tied in either list.
double KendallTau(std::span<const double> xs, std::span<const double> ys);

// counts[i][j]: examples with truth score_set[i] predicted as score_set[j].
std::vector<std::vector<long>> ConfusionMatrix(
    std::span<const double> predicted, std::span<const double> truths,
    std::span<const double> score_set);

// Member of score_set closest to `value`, ties toward the lower label.
double NearestLabel(double value, std::span<const double> score_set);

}  // namespace qjudge

#endif  // QJUDGE_METRICS_HPP_
