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

// On-disk datasets: line-delimited JSON, header first, one example per line.
//
//   {"dimension": 4, "task": "absolute", "score_set": [1, 2, 3], "source": ""}
//   {"id": "a0", "embedding": [...], "base_score": 2.0,
//    "base_probs": {"1": 0.2, "2": 0.5, "3": 0.3}, "human_score": 3.0}
//
// Pairwise lines carry "form": "relative" (embedding, base_prob_first) or
// "two_headed" (embedding_a, embedding_b, base_score_a, base_score_b).
// Ranking lines carry "items": [{"embedding", "base_score"}, ...] and
// "human_ranking", a permutation of item indices from best to worst.
//
// Human labels are optional on load so that unlabeled files can be fed to
// prediction; training and evaluation reject unlabeled examples.

#ifndef QJUDGE_DATASET_HPP_
#define QJUDGE_DATASET_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qjudge {

enum class Task { kAbsolute, kPairwise, kRanking };

std::string_view TaskName(Task task);
Task ParseTask(std::string_view name);

// Canonical string form of a score label: integral values print without a
// fractional part ("4"), others in shortest round-trip form ("2.5").
std::string LabelKey(double label);

struct DatasetHeader {
  size_t dimension = 0;
  Task task = Task::kAbsolute;
  std::vector<double> score_set;  // empty when not declared
  std::string source;
};

struct AbsoluteExample {
  std::string id;
  std::vector<double> embedding;
  double base_score = 0.0;
  // Keyed by LabelKey(label).
  std::optional<std::map<std::string, double>> base_probs;
  std::optional<double> human_score;
};

enum class PairForm { kRelative, kTwoHeaded };

struct PairwiseExample {
  std::string id;
  PairForm form = PairForm::kRelative;
  // relative form
  std::vector<double> embedding;
  double base_prob_first = 0.5;
  // two_headed form
  std::vector<double> embedding_a;
  std::vector<double> embedding_b;
  double base_score_a = 1.0;
  double base_score_b = 1.0;

  std::optional<int> human_pref;
};

struct RankedItem {
  std::vector<double> embedding;
  double base_score = 1.0;
};

struct RankingExample {
  std::string id;
  std::vector<RankedItem> items;
  // Item indices from best to worst; empty when unlabeled.
  std::vector<size_t> human_ranking;
};

// A loaded dataset. Only the vector matching header.task is populated.
struct Dataset {
  DatasetHeader header;
  std::vector<AbsoluteExample> absolute;
  std::vector<PairwiseExample> pairwise;
  std::vector<RankingExample> ranking;

  size_t size() const;
};

// Throws a validation Error naming the line number and the offending field.
Dataset LoadDataset(const std::string& path);
Dataset ParseDataset(std::string_view text);

void WriteDataset(const Dataset& dataset, const std::string& path);
std::string SerializeDataset(const Dataset& dataset);

// Validates the type invariants of every example against the header.
void ValidateDataset(const Dataset& dataset);

// Dense base-probability vector over the header score set; labels missing
// from base_probs get probability 0. Throws if base_probs is absent.
std::vector<double> BaseProbVector(const AbsoluteExample& example,
                                   const std::vector<double>& score_set);

struct SplitResult {
  Dataset train;
  Dataset test;
};

// Seeded partition. The test part holds round(test_fraction * n) examples,
// clamped to [1, n - 1]; both parts keep the original relative order.
SplitResult Split(const Dataset& dataset, double test_fraction, uint64_t seed);

// Seeded sample without replacement of max(1, round(fraction * n)) examples,
// returned in sampled (permuted) order.
Dataset Subsample(const Dataset& dataset, double fraction, uint64_t seed);

// Expands one ranking into its K(K-1)/2 pairs in two_headed form. For every
// item pair the slot of the better item is decided by a seeded coin, and
// human_pref is 1 exactly when slot a holds the better item.
std::vector<PairwiseExample> ExpandRankingToPairs(const RankingExample& ranking,
                                                  uint64_t seed);

// Expands every ranking of a ranking dataset; the result is a pairwise
// dataset with per-example coin seeds derived from `seed`.
Dataset ExpandRankingsToPairs(const Dataset& dataset, uint64_t seed);

// Removes one seeded subset of round(drop_fraction * d) feature indices from
// every embedding. Returns the surviving indices through `kept` if given.
Dataset DropFeatures(const Dataset& dataset, double drop_fraction,
                     uint64_t seed, std::vector<size_t>* kept = nullptr);

// Selects examples by position, preserving the order of `indices`.
Dataset SelectExamples(const Dataset& dataset,
                       const std::vector<size_t>& indices);

}  // namespace qjudge

#endif  // QJUDGE_DATASET_HPP_
