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

#include "qjudge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>

#include "qjudge/error.hpp"

namespace qjudge {
namespace {

void CheckLengths(size_t a, size_t b, size_t min_len, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": length mismatch (" +
                          std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a < min_len) {
    throw ValidationError(std::string(what) + ": need at least " +
                          std::to_string(min_len) + " values");
  }
}

// Number of tied pairs summed over runs of equal values in a sorted range.
template <typename It, typename Eq>
int64_t TiedPairs(It first, It last, Eq eq) {
  int64_t total = 0;
  while (first != last) {
    It run = first;
    int64_t len = 0;
    while (run != last && eq(*run, *first)) {
      ++run;
      ++len;
    }
    total += len * (len - 1) / 2;
    first = run;
  }
  return total;
}

// Stable merge sort of `v` counting pairs i < j with v[i] > v[j].
int64_t SortCountingInversions(std::vector<double>& v,
                               std::vector<double>& scratch, size_t lo,
                               size_t hi) {
  if (hi - lo < 2) return 0;
  const size_t mid = lo + (hi - lo) / 2;
  int64_t swaps = SortCountingInversions(v, scratch, lo, mid) +
                  SortCountingInversions(v, scratch, mid, hi);
  size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, v.begin() + lo);
  return swaps;
}

}  // namespace

RegressionMetrics ComputeRegressionMetrics(std::span<const double> predictions,
                                           std::span<const double> truths) {
  CheckLengths(predictions.size(), truths.size(), 1, "regression metrics");
  RegressionMetrics m;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const double diff = predictions[i] - truths[i];
    m.mse += diff * diff;
    m.mae += std::abs(diff);
  }
  const double n = static_cast<double>(predictions.size());
  m.mse /= n;
  m.mae /= n;
  return m;
}

ClassificationMetrics ComputeClassificationMetrics(
    std::span<const double> predicted, std::span<const double> truths,
    double positive_label) {
  CheckLengths(predicted.size(), truths.size(), 1, "classification metrics");
  long tp = 0, fp = 0, fn = 0, correct = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == positive_label;
    const bool true_pos = truths[i] == positive_label;
    if (predicted[i] == truths[i]) ++correct;
    if (pred_pos && true_pos) ++tp;
    if (pred_pos && !true_pos) ++fp;
    if (!pred_pos && true_pos) ++fn;
  }
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(correct) / predicted.size();
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

double PearsonR(std::span<const double> xs, std::span<const double> ys) {
  CheckLengths(xs.size(), ys.size(), 2, "pearson_r");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ValidationError("correlation undefined for constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) ranks[order[k]] = mean_rank;
    i = j;
  }
  return ranks;
}

double SpearmanRho(std::span<const double> xs, std::span<const double> ys) {
  CheckLengths(xs.size(), ys.size(), 2, "spearman_rho");
  return PearsonR(AverageRanks(xs), AverageRanks(ys));
}

double KendallTau(std::span<const double> xs, std::span<const double> ys) {
  CheckLengths(xs.size(), ys.size(), 2, "kendall_tau");
  const size_t n = xs.size();
  std::vector<std::pair<double, double>> pts(n);
  for (size_t i = 0; i < n; ++i) pts[i] = {xs[i], ys[i]};
  std::sort(pts.begin(), pts.end());

  const int64_t n0 = static_cast<int64_t>(n) * (static_cast<int64_t>(n) - 1) / 2;
  const int64_t tied_x = TiedPairs(
      pts.begin(), pts.end(),
      [](const auto& a, const auto& b) { return a.first == b.first; });
  const int64_t tied_xy =
      TiedPairs(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first == b.first && a.second == b.second;
      });

  std::vector<double> y(n), scratch(n);
  for (size_t i = 0; i < n; ++i) y[i] = pts[i].second;
  const int64_t discordant = SortCountingInversions(y, scratch, 0, n);
  const int64_t tied_y = TiedPairs(y.begin(), y.end(), std::equal_to<>());

  if (n0 == tied_x || n0 == tied_y) {
    throw ValidationError("kendall_tau undefined: all pairs tied");
  }
  const int64_t numerator = n0 - tied_x - tied_y + tied_xy - 2 * discordant;
  return static_cast<double>(numerator) /
         std::sqrt(static_cast<double>(n0 - tied_x) *
                   static_cast<double>(n0 - tied_y));
}

std::vector<std::vector<long>> ConfusionMatrix(
    std::span<const double> predicted, std::span<const double> truths,
    std::span<const double> score_set) {
  CheckLengths(predicted.size(), truths.size(), 0, "confusion_matrix");
  auto index_of = [&](double label) {
    auto it = std::find(score_set.begin(), score_set.end(), label);
    if (it == score_set.end()) {
      throw ValidationError("confusion_matrix: label " + std::to_string(label) +
                            " not in score set");
    }
    return static_cast<size_t>(it - score_set.begin());
  };
  std::vector<std::vector<long>> counts(score_set.size(),
                                        std::vector<long>(score_set.size(), 0));
  for (size_t i = 0; i < predicted.size(); ++i) {
    ++counts[index_of(truths[i])][index_of(predicted[i])];
  }
  return counts;
}

double NearestLabel(double value, std::span<const double> score_set) {
  if (score_set.empty()) throw ValidationError("empty score set");
  double best = score_set[0];
  for (double label : score_set) {
    if (std::abs(label - value) < std::abs(best - value)) best = label;
  }
  return best;
}

}  // namespace qjudge
