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

#include "qjudge/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qjudge/dataset.hpp"
#include "qjudge/error.hpp"

namespace qjudge {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

OrderedJson CvJson(const CvRecord& cv) {
  OrderedJson j;
  j["grid"] = cv.grid;
  j["fold_losses"] = cv.fold_losses;
  j["chosen_gamma"] = cv.chosen_gamma;
  j["folds"] = cv.folds;
  return j;
}

std::vector<double> RealVector(const Json& j, const char* field) {
  if (!j.is_array()) {
    throw ValidationError(std::string("model: field '") + field +
                          "' must be an array");
  }
  std::vector<double> out;
  for (const Json& x : j) {
    if (!x.is_number()) {
      throw ValidationError(std::string("model: field '") + field +
                            "' must hold numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

const Json& Field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw ValidationError(std::string("model: missing field '") + name + "'");
  }
  return *it;
}

}  // namespace

std::string_view KindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLs:
      return "ls";
    case ModelKind::kMn:
      return "mn";
    case ModelKind::kBtl:
      return "btl";
    case ModelKind::kBtl2:
      return "btl2";
    case ModelKind::kPl:
      return "pl";
  }
  return "ls";
}

ModelKind ParseKind(std::string_view name) {
  if (name == "ls") return ModelKind::kLs;
  if (name == "mn") return ModelKind::kMn;
  if (name == "btl") return ModelKind::kBtl;
  if (name == "btl2") return ModelKind::kBtl2;
  if (name == "pl") return ModelKind::kPl;
  throw ValidationError("unknown model kind '" + std::string(name) + "'");
}

ParamLayout ParamLayout::For(ModelKind kind, size_t dimension,
                             size_t num_classes) {
  ParamLayout layout;
  layout.kind = kind;
  layout.dimension = dimension;
  switch (kind) {
    case ModelKind::kMn:
      layout.num_thetas = num_classes;
      layout.num_biases = num_classes;
      break;
    case ModelKind::kPl:
      layout.num_thetas = 1;
      layout.num_biases = 0;
      break;
    default:
      layout.num_thetas = 1;
      layout.num_biases = 1;
      break;
  }
  return layout;
}

ParamLayout JudgeModel::layout() const {
  return ParamLayout::For(kind, dimension, score_set.size());
}

std::vector<double> JudgeModel::Flatten() const {
  std::vector<double> flat;
  flat.reserve(layout().size());
  for (const auto& t : theta) flat.insert(flat.end(), t.begin(), t.end());
  flat.insert(flat.end(), bias.begin(), bias.end());
  return flat;
}

void JudgeModel::Assign(std::span<const double> params) {
  const ParamLayout l = layout();
  if (params.size() != l.size()) {
    throw ValidationError("model: parameter vector has length " +
                          std::to_string(params.size()) + ", expected " +
                          std::to_string(l.size()));
  }
  theta.assign(l.num_thetas, {});
  for (size_t t = 0; t < l.num_thetas; ++t) {
    auto first = params.begin() + t * l.theta_size();
    theta[t].assign(first, first + l.theta_size());
  }
  bias.assign(params.begin() + l.penalized_size(), params.end());
}

void JudgeModel::Validate() const {
  if (dimension == 0) throw ValidationError("model: dimension must be positive");
  if (kind == ModelKind::kMn && score_set.size() < 2) {
    throw ValidationError("model: MN judge needs a score_set of 2+ labels");
  }
  const ParamLayout l = layout();
  if (theta.size() != l.num_thetas) {
    throw ValidationError("model: expected " + std::to_string(l.num_thetas) +
                          " theta vector(s), found " +
                          std::to_string(theta.size()));
  }
  for (const auto& t : theta) {
    if (t.size() != l.theta_size()) {
      throw ValidationError("model: theta length " + std::to_string(t.size()) +
                            " != dimension + 1 = " +
                            std::to_string(l.theta_size()));
    }
  }
  if (bias.size() != l.num_biases) {
    throw ValidationError("model: expected " + std::to_string(l.num_biases) +
                          " bias term(s), found " +
                          std::to_string(bias.size()));
  }
  if (!(gamma >= 0.0)) throw ValidationError("model: gamma must be >= 0");
}

std::vector<double> IdentityParams(const ParamLayout& layout) {
  std::vector<double> params(layout.size(), 0.0);
  for (size_t t = 0; t < layout.num_thetas; ++t) {
    params[t * layout.theta_size() + layout.dimension] = 1.0;
  }
  return params;
}

JudgeModel MakeIdentityModel(ModelKind kind, size_t dimension,
                             std::vector<double> score_set) {
  JudgeModel model;
  model.kind = kind;
  model.dimension = dimension;
  model.score_set = std::move(score_set);
  if (kind == ModelKind::kMn && model.score_set.size() < 2) {
    throw ValidationError("model: MN judge needs a score_set of 2+ labels");
  }
  model.Assign(IdentityParams(model.layout()));
  model.Validate();
  return model;
}

double ThetaSquaredNorm(const ParamLayout& layout,
                        std::span<const double> params) {
  double sum = 0.0;
  for (size_t i = 0; i < layout.penalized_size(); ++i) {
    sum += params[i] * params[i];
  }
  return sum;
}

std::string SerializeModel(const JudgeModel& model) {
  model.Validate();
  OrderedJson j;
  j["kind"] = std::string(KindName(model.kind));
  j["dimension"] = model.dimension;
  j["score_set"] = model.score_set;
  j["gamma"] = model.gamma;
  if (model.kind == ModelKind::kMn) {
    OrderedJson theta = OrderedJson::object();
    OrderedJson bias = OrderedJson::object();
    for (size_t s = 0; s < model.score_set.size(); ++s) {
      theta[LabelKey(model.score_set[s])] = model.theta[s];
      bias[LabelKey(model.score_set[s])] = model.bias[s];
    }
    j["theta"] = std::move(theta);
    j["bias"] = std::move(bias);
  } else {
    j["theta"] = model.theta[0];
    if (model.kind != ModelKind::kPl) j["bias"] = model.bias[0];
  }
  const TrainingMetadata& m = model.metadata;
  OrderedJson meta;
  meta["seed"] = m.seed;
  meta["training_size"] = m.training_size;
  meta["epochs"] = m.epochs;
  meta["best_epoch"] = m.best_epoch;
  meta["training_loss"] = m.training_loss;
  meta["final_gradient_norm"] = m.final_gradient_norm;
  if (m.cv) meta["cv"] = CvJson(*m.cv);
  j["metadata"] = std::move(meta);
  return j.dump();
}

JudgeModel ParseModel(std::string_view text) {
  Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("model: malformed JSON record");
  }
  JudgeModel model;
  const Json& kind = Field(j, "kind");
  if (!kind.is_string()) throw ValidationError("model: 'kind' must be a string");
  model.kind = ParseKind(kind.get<std::string>());
  const Json& dim = Field(j, "dimension");
  if (!dim.is_number_integer() || dim.get<int64_t>() <= 0) {
    throw ValidationError("model: 'dimension' must be a positive integer");
  }
  model.dimension = dim.get<size_t>();
  if (auto it = j.find("score_set"); it != j.end()) {
    model.score_set = RealVector(*it, "score_set");
  }
  const Json& gamma = Field(j, "gamma");
  if (!gamma.is_number()) throw ValidationError("model: 'gamma' must be numeric");
  model.gamma = gamma.get<double>();

  const Json& theta = Field(j, "theta");
  if (model.kind == ModelKind::kMn) {
    const Json& bias = Field(j, "bias");
    if (!theta.is_object() || !bias.is_object()) {
      throw ValidationError("model: MN 'theta' and 'bias' must be label maps");
    }
    for (double label : model.score_set) {
      const std::string key = LabelKey(label);
      if (!theta.contains(key) || !bias.contains(key)) {
        throw ValidationError("model: MN parameters missing label " + key);
      }
      model.theta.push_back(RealVector(theta[key], "theta"));
      if (!bias[key].is_number()) {
        throw ValidationError("model: MN bias must be numeric");
      }
      model.bias.push_back(bias[key].get<double>());
    }
    if (theta.size() != model.score_set.size() ||
        bias.size() != model.score_set.size()) {
      throw ValidationError("model: MN parameters have labels outside score_set");
    }
  } else {
    model.theta.push_back(RealVector(theta, "theta"));
    if (model.kind != ModelKind::kPl) {
      const Json& bias = Field(j, "bias");
      if (!bias.is_number()) throw ValidationError("model: 'bias' must be numeric");
      model.bias.push_back(bias.get<double>());
    } else if (j.contains("bias")) {
      throw ValidationError("model: PL judge carries no bias");
    }
  }

  if (auto it = j.find("metadata"); it != j.end() && it->is_object()) {
    const Json& meta = *it;
    TrainingMetadata& m = model.metadata;
    m.seed = meta.value("seed", uint64_t{0});
    m.training_size = meta.value("training_size", size_t{0});
    m.epochs = meta.value("epochs", 0);
    m.best_epoch = meta.value("best_epoch", 0);
    m.training_loss = meta.value("training_loss", 0.0);
    m.final_gradient_norm = meta.value("final_gradient_norm", 0.0);
    if (auto cv = meta.find("cv"); cv != meta.end() && cv->is_object()) {
      CvRecord rec;
      rec.grid = RealVector(Field(*cv, "grid"), "cv.grid");
      for (const Json& row : Field(*cv, "fold_losses")) {
        rec.fold_losses.push_back(RealVector(row, "cv.fold_losses"));
      }
      rec.chosen_gamma = Field(*cv, "chosen_gamma").get<double>();
      rec.folds = Field(*cv, "folds").get<int>();
      m.cv = std::move(rec);
    }
  }
  model.Validate();
  return model;
}

void SaveModel(const JudgeModel& model, const std::string& path) {
  std::string text = SerializeModel(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model '" + path + "'");
  out << text << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

JudgeModel LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseModel(buffer.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace qjudge
