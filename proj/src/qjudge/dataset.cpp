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

#include "qjudge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qjudge/error.hpp"
#include "qjudge/random.hpp"

namespace qjudge {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr double kProbSumTolerance = 1e-6;

std::string FormatReal(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

// Error context for one input line.
class LineContext {
 public:
  explicit LineContext(size_t line) : line_(line) {}

  [[noreturn]] void Fail(std::string_view field,
                         const std::string& what) const {
    std::ostringstream os;
    os << "line " << line_;
    if (!field.empty()) os << ": field '" << field << "'";
    os << ": " << what;
    throw ValidationError(os.str());
  }

  const Json& Require(const Json& obj, std::string_view field) const {
    auto it = obj.find(field);
    if (it == obj.end()) Fail(field, "missing");
    return *it;
  }

  double Real(const Json& obj, std::string_view field) const {
    const Json& v = Require(obj, field);
    if (!v.is_number()) Fail(field, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) Fail(field, "non-finite value");
    return x;
  }

  std::string String(const Json& obj, std::string_view field) const {
    const Json& v = Require(obj, field);
    if (!v.is_string()) Fail(field, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> Vector(const Json& obj, std::string_view field,
                             size_t dimension) const {
    const Json& v = Require(obj, field);
    if (!v.is_array()) Fail(field, "expected an array of numbers");
    if (v.size() != dimension) {
      Fail(field, "dimension mismatch (expected " + std::to_string(dimension) +
                      ", got " + std::to_string(v.size()) + ")");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const Json& x : v) {
      if (!x.is_number()) Fail(field, "expected an array of numbers");
      double value = x.get<double>();
      if (!std::isfinite(value)) Fail(field, "non-finite value");
      out.push_back(value);
    }
    return out;
  }

  void OnlyKeys(const Json& obj,
                std::initializer_list<std::string_view> allowed) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) ==
          allowed.end()) {
        Fail(it.key(), "unexpected field");
      }
    }
  }

 private:
  size_t line_;
};

bool InScoreSet(double value, const std::vector<double>& score_set) {
  return std::find(score_set.begin(), score_set.end(), value) !=
         score_set.end();
}

void CheckBaseProbs(const std::map<std::string, double>& probs,
                    const std::vector<double>& score_set,
                    const LineContext& ctx) {
  double sum = 0.0;
  for (const auto& [key, p] : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      ctx.Fail("base_probs", "probability for label " + key +
                                 " outside [0, 1]");
    }
    if (!score_set.empty()) {
      bool known = std::any_of(score_set.begin(), score_set.end(),
                               [&](double s) { return LabelKey(s) == key; });
      if (!known) ctx.Fail("base_probs", "label " + key + " not in score_set");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance) {
    ctx.Fail("base_probs", "probabilities sum to " + FormatReal(sum));
  }
}

void CheckEmbedding(const std::vector<double>& embedding, size_t dimension,
                    std::string_view field, const LineContext& ctx) {
  if (embedding.size() != dimension) {
    ctx.Fail(field, "dimension mismatch (expected " +
                        std::to_string(dimension) + ", got " +
                        std::to_string(embedding.size()) + ")");
  }
  for (double x : embedding) {
    if (!std::isfinite(x)) ctx.Fail(field, "non-finite value");
  }
}

void CheckAbsolute(const AbsoluteExample& ex, const DatasetHeader& header,
                   const LineContext& ctx) {
  CheckEmbedding(ex.embedding, header.dimension, "embedding", ctx);
  if (!std::isfinite(ex.base_score)) ctx.Fail("base_score", "non-finite");
  if (ex.base_probs) CheckBaseProbs(*ex.base_probs, header.score_set, ctx);
  if (ex.human_score) {
    if (!std::isfinite(*ex.human_score)) ctx.Fail("human_score", "non-finite");
    if (!header.score_set.empty() &&
        !InScoreSet(*ex.human_score, header.score_set)) {
      ctx.Fail("human_score",
               "value " + FormatReal(*ex.human_score) + " not in score_set");
    }
  }
}

void CheckPairwise(const PairwiseExample& ex, const DatasetHeader& header,
                   const LineContext& ctx) {
  if (ex.form == PairForm::kRelative) {
    CheckEmbedding(ex.embedding, header.dimension, "embedding", ctx);
    if (!(ex.base_prob_first >= 0.0 && ex.base_prob_first <= 1.0)) {
      ctx.Fail("base_prob_first", "outside [0, 1]");
    }
  } else {
    CheckEmbedding(ex.embedding_a, header.dimension, "embedding_a", ctx);
    CheckEmbedding(ex.embedding_b, header.dimension, "embedding_b", ctx);
    if (!(ex.base_score_a > 0.0) || !std::isfinite(ex.base_score_a)) {
      ctx.Fail("base_score_a", "must be positive");
    }
    if (!(ex.base_score_b > 0.0) || !std::isfinite(ex.base_score_b)) {
      ctx.Fail("base_score_b", "must be positive");
    }
  }
  if (ex.human_pref && *ex.human_pref != 0 && *ex.human_pref != 1) {
    ctx.Fail("human_pref", "must be 0 or 1");
  }
}

void CheckRanking(const RankingExample& ex, const DatasetHeader& header,
                  const LineContext& ctx) {
  if (ex.items.size() < 2) ctx.Fail("items", "need at least 2 items");
  for (const RankedItem& item : ex.items) {
    CheckEmbedding(item.embedding, header.dimension, "items.embedding", ctx);
    if (!(item.base_score > 0.0) || !std::isfinite(item.base_score)) {
      ctx.Fail("items.base_score", "must be positive");
    }
  }
  if (!ex.human_ranking.empty()) {
    std::vector<bool> seen(ex.items.size(), false);
    if (ex.human_ranking.size() != ex.items.size()) {
      ctx.Fail("human_ranking", "not a permutation of the item indices");
    }
    for (size_t r : ex.human_ranking) {
      if (r >= ex.items.size() || seen[r]) {
        ctx.Fail("human_ranking", "not a permutation of the item indices");
      }
      seen[r] = true;
    }
  }
}

DatasetHeader ParseHeader(const Json& obj) {
  LineContext ctx(1);
  if (!obj.is_object()) ctx.Fail("", "header is not an object");
  ctx.OnlyKeys(obj, {"dimension", "task", "score_set", "source"});
  DatasetHeader header;
  const Json& dim = ctx.Require(obj, "dimension");
  if (!dim.is_number_integer() || dim.get<int64_t>() <= 0) {
    ctx.Fail("dimension", "must be a positive integer");
  }
  header.dimension = dim.get<size_t>();
  std::string task = ctx.String(obj, "task");
  if (task != "absolute" && task != "pairwise" && task != "ranking") {
    ctx.Fail("task", "unknown task tag '" + task + "'");
  }
  header.task = ParseTask(task);
  if (auto it = obj.find("score_set"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) ctx.Fail("score_set", "expected an array");
    for (const Json& s : *it) {
      if (!s.is_number()) ctx.Fail("score_set", "expected numeric labels");
      header.score_set.push_back(s.get<double>());
    }
    if (header.score_set.size() < 2) {
      ctx.Fail("score_set", "need at least 2 labels");
    }
    for (size_t i = 1; i < header.score_set.size(); ++i) {
      if (!(header.score_set[i] > header.score_set[i - 1])) {
        ctx.Fail("score_set", "labels must be strictly increasing");
      }
    }
  }
  if (auto it = obj.find("source"); it != obj.end()) {
    if (!it->is_string()) ctx.Fail("source", "expected a string");
    header.source = it->get<std::string>();
  }
  return header;
}

AbsoluteExample ParseAbsolute(const Json& obj, const DatasetHeader& header,
                              const LineContext& ctx) {
  ctx.OnlyKeys(obj,
               {"id", "embedding", "base_score", "base_probs", "human_score"});
  AbsoluteExample ex;
  ex.id = ctx.String(obj, "id");
  ex.embedding = ctx.Vector(obj, "embedding", header.dimension);
  ex.base_score = ctx.Real(obj, "base_score");
  if (auto it = obj.find("base_probs"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) ctx.Fail("base_probs", "expected an object");
    std::map<std::string, double> probs;
    for (auto p = it->begin(); p != it->end(); ++p) {
      if (!p->is_number()) ctx.Fail("base_probs", "expected numbers");
      probs[p.key()] = p->get<double>();
    }
    ex.base_probs = std::move(probs);
  }
  if (auto it = obj.find("human_score"); it != obj.end() && !it->is_null()) {
    ex.human_score = ctx.Real(obj, "human_score");
  }
  CheckAbsolute(ex, header, ctx);
  return ex;
}

PairwiseExample ParsePairwise(const Json& obj, const DatasetHeader& header,
                              const LineContext& ctx) {
  PairwiseExample ex;
  std::string form = ctx.String(obj, "form");
  if (form == "relative") {
    ctx.OnlyKeys(obj, {"id", "form", "embedding", "base_prob_first",
                       "human_pref"});
    ex.form = PairForm::kRelative;
    ex.embedding = ctx.Vector(obj, "embedding", header.dimension);
    ex.base_prob_first = ctx.Real(obj, "base_prob_first");
  } else if (form == "two_headed") {
    ctx.OnlyKeys(obj, {"id", "form", "embedding_a", "embedding_b",
                       "base_score_a", "base_score_b", "human_pref"});
    ex.form = PairForm::kTwoHeaded;
    ex.embedding_a = ctx.Vector(obj, "embedding_a", header.dimension);
    ex.embedding_b = ctx.Vector(obj, "embedding_b", header.dimension);
    ex.base_score_a = ctx.Real(obj, "base_score_a");
    ex.base_score_b = ctx.Real(obj, "base_score_b");
  } else {
    ctx.Fail("form", "unknown pair form '" + form + "'");
  }
  ex.id = ctx.String(obj, "id");
  if (auto it = obj.find("human_pref"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) ctx.Fail("human_pref", "must be 0 or 1");
    ex.human_pref = it->get<int>();
  }
  CheckPairwise(ex, header, ctx);
  return ex;
}

RankingExample ParseRanking(const Json& obj, const DatasetHeader& header,
                            const LineContext& ctx) {
  ctx.OnlyKeys(obj, {"id", "items", "human_ranking"});
  RankingExample ex;
  ex.id = ctx.String(obj, "id");
  const Json& items = ctx.Require(obj, "items");
  if (!items.is_array()) ctx.Fail("items", "expected an array");
  for (const Json& item : items) {
    if (!item.is_object()) ctx.Fail("items", "expected objects");
    ctx.OnlyKeys(item, {"embedding", "base_score"});
    RankedItem r;
    r.embedding = ctx.Vector(item, "embedding", header.dimension);
    r.base_score = ctx.Real(item, "base_score");
    ex.items.push_back(std::move(r));
  }
  if (auto it = obj.find("human_ranking"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) ctx.Fail("human_ranking", "expected an array");
    for (const Json& r : *it) {
      if (!r.is_number_integer() || r.get<int64_t>() < 0) {
        ctx.Fail("human_ranking", "expected item indices");
      }
      ex.human_ranking.push_back(r.get<size_t>());
    }
  }
  CheckRanking(ex, header, ctx);
  return ex;
}

OrderedJson RealArray(const std::vector<double>& values) {
  OrderedJson arr = OrderedJson::array();
  for (double v : values) arr.push_back(v);
  return arr;
}

OrderedJson HeaderJson(const DatasetHeader& header) {
  OrderedJson h;
  h["dimension"] = header.dimension;
  h["task"] = std::string(TaskName(header.task));
  if (!header.score_set.empty()) h["score_set"] = RealArray(header.score_set);
  h["source"] = header.source;
  return h;
}

OrderedJson ExampleJson(const AbsoluteExample& ex) {
  OrderedJson j;
  j["id"] = ex.id;
  j["embedding"] = RealArray(ex.embedding);
  j["base_score"] = ex.base_score;
  if (ex.base_probs) {
    OrderedJson probs = OrderedJson::object();
    for (const auto& [key, p] : *ex.base_probs) probs[key] = p;
    j["base_probs"] = probs;
  }
  if (ex.human_score) j["human_score"] = *ex.human_score;
  return j;
}

OrderedJson ExampleJson(const PairwiseExample& ex) {
  OrderedJson j;
  j["id"] = ex.id;
  if (ex.form == PairForm::kRelative) {
    j["form"] = "relative";
    j["embedding"] = RealArray(ex.embedding);
    j["base_prob_first"] = ex.base_prob_first;
  } else {
    j["form"] = "two_headed";
    j["embedding_a"] = RealArray(ex.embedding_a);
    j["embedding_b"] = RealArray(ex.embedding_b);
    j["base_score_a"] = ex.base_score_a;
    j["base_score_b"] = ex.base_score_b;
  }
  if (ex.human_pref) j["human_pref"] = *ex.human_pref;
  return j;
}

OrderedJson ExampleJson(const RankingExample& ex) {
  OrderedJson j;
  j["id"] = ex.id;
  OrderedJson items = OrderedJson::array();
  for (const RankedItem& item : ex.items) {
    OrderedJson it;
    it["embedding"] = RealArray(item.embedding);
    it["base_score"] = item.base_score;
    items.push_back(std::move(it));
  }
  j["items"] = std::move(items);
  if (!ex.human_ranking.empty()) j["human_ranking"] = ex.human_ranking;
  return j;
}

// Applies `fn` to the populated example vector.
template <typename Fn>
decltype(auto) VisitExamples(const Dataset& dataset, Fn&& fn) {
  switch (dataset.header.task) {
    case Task::kAbsolute:
      return fn(dataset.absolute);
    case Task::kPairwise:
      return fn(dataset.pairwise);
    case Task::kRanking:
      break;
  }
  return fn(dataset.ranking);
}

template <typename T>
void AppendAll(Dataset& out, const std::vector<T>& src) {
  if constexpr (std::is_same_v<T, AbsoluteExample>) {
    out.absolute.insert(out.absolute.end(), src.begin(), src.end());
  } else if constexpr (std::is_same_v<T, PairwiseExample>) {
    out.pairwise.insert(out.pairwise.end(), src.begin(), src.end());
  } else {
    out.ranking.insert(out.ranking.end(), src.begin(), src.end());
  }
}

void DropFromVector(std::vector<double>& v, const std::vector<size_t>& kept) {
  if (v.empty()) return;
  std::vector<double> out;
  out.reserve(kept.size());
  for (size_t idx : kept) out.push_back(v[idx]);
  v = std::move(out);
}

}  // namespace

std::string_view TaskName(Task task) {
  switch (task) {
    case Task::kAbsolute:
      return "absolute";
    case Task::kPairwise:
      return "pairwise";
    case Task::kRanking:
      return "ranking";
  }
  return "absolute";
}

Task ParseTask(std::string_view name) {
  if (name == "absolute") return Task::kAbsolute;
  if (name == "pairwise") return Task::kPairwise;
  if (name == "ranking") return Task::kRanking;
  throw ValidationError("unknown task tag '" + std::string(name) + "'");
}

std::string LabelKey(double label) {
  if (std::isfinite(label) && label == std::floor(label) &&
      std::abs(label) < 1e15) {
    return std::to_string(static_cast<int64_t>(label));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), label);
  return std::string(buf, res.ptr);
}

size_t Dataset::size() const {
  return VisitExamples(*this, [](const auto& v) { return v.size(); });
}

Dataset ParseDataset(std::string_view text) {
  Dataset dataset;
  bool have_header = false;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    LineContext ctx(line_no);
    Json obj = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) ctx.Fail("", "malformed JSON");
    if (!have_header) {
      if (line_no != 1) ctx.Fail("", "header must be the first line");
      dataset.header = ParseHeader(obj);
      have_header = true;
      continue;
    }
    if (!obj.is_object()) ctx.Fail("", "record is not an object");
    switch (dataset.header.task) {
      case Task::kAbsolute:
        dataset.absolute.push_back(ParseAbsolute(obj, dataset.header, ctx));
        break;
      case Task::kPairwise:
        dataset.pairwise.push_back(ParsePairwise(obj, dataset.header, ctx));
        break;
      case Task::kRanking:
        dataset.ranking.push_back(ParseRanking(obj, dataset.header, ctx));
        break;
    }
  }
  if (!have_header) throw ValidationError("line 1: missing header");
  return dataset;
}

Dataset LoadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseDataset(buffer.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string SerializeDataset(const Dataset& dataset) {
  std::string out = HeaderJson(dataset.header).dump();
  out += '\n';
  VisitExamples(dataset, [&](const auto& examples) {
    for (const auto& ex : examples) {
      out += ExampleJson(ex).dump();
      out += '\n';
    }
  });
  return out;
}

void WriteDataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset '" + path + "'");
  out << SerializeDataset(dataset);
  if (!out) throw IoError("write failed for '" + path + "'");
}

void ValidateDataset(const Dataset& dataset) {
  // Record i sits on line i + 2.
  size_t line = 2;
  VisitExamples(dataset, [&](const auto& examples) {
    for (const auto& ex : examples) {
      LineContext ctx(line++);
      using T = std::decay_t<decltype(ex)>;
      if constexpr (std::is_same_v<T, AbsoluteExample>) {
        CheckAbsolute(ex, dataset.header, ctx);
      } else if constexpr (std::is_same_v<T, PairwiseExample>) {
        CheckPairwise(ex, dataset.header, ctx);
      } else {
        CheckRanking(ex, dataset.header, ctx);
      }
    }
  });
}

std::vector<double> BaseProbVector(const AbsoluteExample& example,
                                   const std::vector<double>& score_set) {
  if (!example.base_probs) {
    throw ValidationError("example '" + example.id +
                          "': missing field 'base_probs'");
  }
  std::vector<double> p;
  p.reserve(score_set.size());
  for (double label : score_set) {
    auto it = example.base_probs->find(LabelKey(label));
    p.push_back(it == example.base_probs->end() ? 0.0 : it->second);
  }
  return p;
}

Dataset SelectExamples(const Dataset& dataset,
                       const std::vector<size_t>& indices) {
  Dataset out;
  out.header = dataset.header;
  VisitExamples(dataset, [&](const auto& examples) {
    using T = typename std::decay_t<decltype(examples)>::value_type;
    std::vector<T> picked;
    picked.reserve(indices.size());
    for (size_t i : indices) picked.push_back(examples.at(i));
    AppendAll(out, picked);
  });
  return out;
}

SplitResult Split(const Dataset& dataset, double test_fraction,
                  uint64_t seed) {
  const size_t n = dataset.size();
  if (n == 0) throw ValidationError("split: empty dataset");
  if (n < 2) throw ValidationError("split: need at least 2 examples");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("split: test fraction must lie in (0, 1)");
  }
  size_t test_n = static_cast<size_t>(std::llround(test_fraction * n));
  test_n = std::clamp<size_t>(test_n, 1, n - 1);
  std::vector<size_t> perm = RandomPermutation(n, seed);
  std::vector<bool> in_test(n, false);
  for (size_t i = 0; i < test_n; ++i) in_test[perm[i]] = true;
  std::vector<size_t> train_idx, test_idx;
  for (size_t i = 0; i < n; ++i) {
    (in_test[i] ? test_idx : train_idx).push_back(i);
  }
  return {SelectExamples(dataset, train_idx), SelectExamples(dataset, test_idx)};
}

Dataset Subsample(const Dataset& dataset, double fraction, uint64_t seed) {
  const size_t n = dataset.size();
  if (n == 0) throw ValidationError("subsample: empty dataset");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("subsample: fraction must lie in (0, 1]");
  }
  size_t m = std::max<size_t>(
      1, static_cast<size_t>(std::llround(fraction * static_cast<double>(n))));
  m = std::min(m, n);
  std::vector<size_t> perm = RandomPermutation(n, seed);
  perm.resize(m);
  return SelectExamples(dataset, perm);
}

std::vector<PairwiseExample> ExpandRankingToPairs(const RankingExample& ranking,
                                                  uint64_t seed) {
  const size_t k = ranking.items.size();
  if (k < 2) {
    throw ValidationError("expand pairs: ranking '" + ranking.id +
                          "' has fewer than 2 items");
  }
  if (ranking.human_ranking.size() != k) {
    throw ValidationError("expand pairs: ranking '" + ranking.id +
                          "' has no valid human_ranking");
  }
  std::vector<size_t> position(k);
  for (size_t r = 0; r < k; ++r) position.at(ranking.human_ranking[r]) = r;

  Rng rng(seed);
  std::vector<PairwiseExample> pairs;
  pairs.reserve(k * (k - 1) / 2);
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      const size_t better = position[i] < position[j] ? i : j;
      const size_t worse = better == i ? j : i;
      const bool better_first = rng.Coin();
      const size_t a = better_first ? better : worse;
      const size_t b = better_first ? worse : better;
      PairwiseExample pair;
      pair.id = ranking.id + "/" + std::to_string(a) + "-" + std::to_string(b);
      pair.form = PairForm::kTwoHeaded;
      pair.embedding_a = ranking.items[a].embedding;
      pair.embedding_b = ranking.items[b].embedding;
      pair.base_score_a = ranking.items[a].base_score;
      pair.base_score_b = ranking.items[b].base_score;
      pair.human_pref = better_first ? 1 : 0;
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

Dataset ExpandRankingsToPairs(const Dataset& dataset, uint64_t seed) {
  if (dataset.header.task != Task::kRanking) {
    throw ValidationError("expand pairs: dataset task is not 'ranking'");
  }
  Dataset out;
  out.header = dataset.header;
  out.header.task = Task::kPairwise;
  for (size_t i = 0; i < dataset.ranking.size(); ++i) {
    auto pairs =
        ExpandRankingToPairs(dataset.ranking[i], DeriveSeed(seed, "pairs", i));
    out.pairwise.insert(out.pairwise.end(), pairs.begin(), pairs.end());
  }
  return out;
}

Dataset DropFeatures(const Dataset& dataset, double drop_fraction,
                     uint64_t seed, std::vector<size_t>* kept) {
  const size_t d = dataset.header.dimension;
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
    throw ValidationError("drop features: fraction must lie in [0, 1)");
  }
  const size_t dropped =
      static_cast<size_t>(std::llround(drop_fraction * static_cast<double>(d)));
  if (dropped >= d) {
    throw ValidationError("drop features: no surviving feature (d = " +
                          std::to_string(d) + ")");
  }
  std::vector<size_t> perm = RandomPermutation(d, seed);
  std::vector<size_t> surviving(perm.begin() + dropped, perm.end());
  std::sort(surviving.begin(), surviving.end());

  Dataset out = dataset;
  out.header.dimension = surviving.size();
  if (dropped > 0) {
    for (auto& ex : out.absolute) DropFromVector(ex.embedding, surviving);
    for (auto& ex : out.pairwise) {
      DropFromVector(ex.embedding, surviving);
      DropFromVector(ex.embedding_a, surviving);
      DropFromVector(ex.embedding_b, surviving);
    }
    for (auto& ex : out.ranking) {
      for (auto& item : ex.items) DropFromVector(item.embedding, surviving);
    }
  }
  if (kept) *kept = std::move(surviving);
  return out;
}

}  // namespace qjudge
