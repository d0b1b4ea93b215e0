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

// qjudge command-line tool. Talks to the library only through the C API.
//
//   qjudge train --data train.jsonl --kind ls --gamma auto --out model.json
//   qjudge evaluate --model model.json --test-data test.jsonl --out report.json
//   qjudge predict --model model.json --data inputs.jsonl --out preds.jsonl
//   qjudge ablate-size --data train.jsonl --kind ls --out size.tsv
//   qjudge ablate-gamma --data train.jsonl --kind mn --grid 1e-4,1,100 ...
//   qjudge ablate-features --data train.jsonl --kind btl2 --drop 0,0.5 ...
//   qjudge rerun --config model.json.config.json
//
// Every command writes <out>.config.json holding the fully resolved argument
// vector; `rerun` replays it. Exit codes: 0 success, 2 validation error,
// 1 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qjudge/qjudge.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;
constexpr double kDefaultTestFraction = 0.2;

// Thrown to unwind with a specific exit code.
struct ExitError {
  int code;
  std::string message;
};

[[noreturn]] void Raise(qj_status status) {
  throw ExitError{status == QJ_ERR_VALIDATION ? kExitValidation : kExitRuntime,
                  qj_last_error()};
}

void Check(qj_status status) {
  if (status != QJ_OK) Raise(status);
}

[[noreturn]] void Invalid(const std::string& message) {
  throw ExitError{kExitValidation, message};
}

struct DatasetDeleter {
  void operator()(qj_dataset* d) const { qj_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(qj_model* m) const { qj_model_free(m); }
};
struct StringDeleter {
  void operator()(char* s) const { qj_string_free(s); }
};
using DatasetPtr = std::unique_ptr<qj_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<qj_model, ModelDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

DatasetPtr LoadData(const std::string& path) {
  qj_dataset* d = nullptr;
  Check(qj_dataset_load(path.c_str(), &d));
  return DatasetPtr(d);
}

ModelPtr LoadModelFile(const std::string& path) {
  qj_model* m = nullptr;
  Check(qj_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ExitError{kExitRuntime, "cannot write '" + path + "'"};
  out << text;
  if (!out) throw ExitError{kExitRuntime, "write failed for '" + path + "'"};
}

std::vector<double> ParseCsv(const std::string& csv, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      Invalid(std::string(flag) + ": cannot parse '" + item + "' as a number");
    }
  }
  if (values.empty()) Invalid(std::string(flag) + ": empty list");
  return values;
}

std::string FormatCsv(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    if (i) out += ',';
    out += buf;
  }
  return out;
}

// Flags shared by every subcommand, bound to one struct.
struct Flags {
  std::string data, test_data, model, out;
  std::string kind = "ls";
  std::string gamma = "auto";
  int folds = 5;
  uint64_t seed = 0;
  int n_seeds = 0;  // 0: the subcommand default
  std::string fractions, grid, drop;
  bool expand_pairs = false;
  double lr = 0.01;
  int epochs = 200;
  int batch_size = 64;
  bool clip = false;
  bool per_example = false;
  std::string config;
};

qj_train_options TrainOptions(const Flags& f, std::vector<double>& grid_store) {
  qj_train_options o;
  qj_train_options_init(&o);
  Check(qj_parse_kind(f.kind.c_str(), &o.kind));
  if (f.gamma == "auto") {
    o.gamma_auto = 1;
  } else {
    o.gamma_auto = 0;
    o.gamma = ParseCsv(f.gamma, "--gamma").at(0);
  }
  if (!f.grid.empty()) {
    grid_store = ParseCsv(f.grid, "--grid");
    o.grid = grid_store.data();
    o.grid_len = grid_store.size();
  }
  o.folds = f.folds;
  o.seed = f.seed;
  o.learning_rate = f.lr;
  o.epochs = f.epochs;
  o.batch_size = f.batch_size;
  o.expand_pairs = f.expand_pairs ? 1 : 0;
  return o;
}

qj_eval_options EvalOptions(const Flags& f) {
  qj_eval_options o;
  qj_eval_options_init(&o);
  o.clip_to_score_set = f.clip ? 1 : 0;
  o.per_example = f.per_example ? 1 : 0;
  o.expand_pairs = f.expand_pairs ? 1 : 0;
  o.seed = f.seed;
  return o;
}

// Resolved argument vector of a command, written next to its outputs.
void WriteResolvedConfig(const std::string& command, const Flags& f,
                         const std::vector<std::string>& args) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["args"] = args;
  j["library_version"] = qj_version();
  WriteText(f.out + ".config.json", j.dump(2) + "\n");
}

std::vector<std::string> CommonTrainArgs(const Flags& f, bool with_gamma = true) {
  std::vector<std::string> args = {"--kind", f.kind};
  if (with_gamma) args.insert(args.end(), {"--gamma", f.gamma});
  std::vector<std::string> rest = {
          "--folds", std::to_string(f.folds),
          "--seed", std::to_string(f.seed),
          "--lr", FormatCsv({f.lr}),
          "--epochs", std::to_string(f.epochs),
          "--batch-size", std::to_string(f.batch_size)};
  args.insert(args.end(), rest.begin(), rest.end());
  return args;
}

void RequireOut(const Flags& f) {
  if (f.out.empty()) Invalid("--out is required");
}

int RunTrain(const Flags& f) {
  RequireOut(f);
  if (f.gamma != "auto" && !f.grid.empty()) {
    Invalid("--grid cannot be combined with a fixed --gamma");
  }
  std::vector<double> grid;
  const qj_train_options options = TrainOptions(f, grid);
  DatasetPtr data = LoadData(f.data);
  qj_model* raw = nullptr;
  Check(qj_train(data.get(), &options, &raw));
  ModelPtr model(raw);
  Check(qj_model_save(model.get(), f.out.c_str()));
  char* summary = nullptr;
  Check(qj_model_summary(model.get(), &summary));
  StringPtr summary_ptr(summary);
  WriteText(f.out + ".summary.txt", summary);
  std::cout << summary;

  std::vector<std::string> args = {"--data", f.data, "--out", f.out};
  auto common = CommonTrainArgs(f);
  args.insert(args.end(), common.begin(), common.end());
  if (!grid.empty()) args.insert(args.end(), {"--grid", FormatCsv(grid)});
  if (f.expand_pairs) args.push_back("--expand-pairs");
  WriteResolvedConfig("train", f, args);
  return kExitOk;
}

int RunEvaluate(const Flags& f) {
  RequireOut(f);
  if (f.model.empty()) Invalid("--model is required");
  if (f.test_data.empty()) Invalid("--test-data is required");
  ModelPtr model = LoadModelFile(f.model);
  DatasetPtr test = LoadData(f.test_data);
  const qj_eval_options options = EvalOptions(f);
  char* report = nullptr;
  Check(qj_evaluate(model.get(), test.get(), &options, &report));
  StringPtr report_ptr(report);
  WriteText(f.out, std::string(report) + "\n");
  std::cout << report << '\n';

  std::vector<std::string> args = {"--model", f.model, "--test-data",
                                   f.test_data, "--out", f.out,
                                   "--seed", std::to_string(f.seed)};
  if (f.clip) args.push_back("--clip-to-score-set");
  if (f.per_example) args.push_back("--per-example");
  if (f.expand_pairs) args.push_back("--expand-pairs");
  WriteResolvedConfig("evaluate", f, args);
  return kExitOk;
}

int RunPredict(const Flags& f) {
  RequireOut(f);
  if (f.model.empty()) Invalid("--model is required");
  ModelPtr model = LoadModelFile(f.model);
  DatasetPtr inputs = LoadData(f.data);
  const qj_eval_options options = EvalOptions(f);
  char* records = nullptr;
  Check(qj_predict(model.get(), inputs.get(), &options, &records));
  StringPtr records_ptr(records);
  WriteText(f.out, records);

  std::vector<std::string> args = {"--model", f.model, "--data", f.data,
                                   "--out", f.out, "--seed",
                                   std::to_string(f.seed)};
  if (f.clip) args.push_back("--clip-to-score-set");
  if (f.expand_pairs) args.push_back("--expand-pairs");
  WriteResolvedConfig("predict", f, args);
  return kExitOk;
}

enum class Study { kSize, kGamma, kFeatures };

int RunAblation(const Flags& f, Study study) {
  RequireOut(f);
  if (study == Study::kGamma && f.gamma != "auto") {
    Invalid("ablate-gamma sweeps --grid; --gamma is not accepted");
  }
  if (f.gamma != "auto" && !f.grid.empty()) {
    Invalid("--grid cannot be combined with a fixed --gamma");
  }
  Flags train_flags = f;
  if (study == Study::kGamma) train_flags.grid.clear();
  std::vector<double> grid_store;
  const qj_train_options train_options = TrainOptions(train_flags, grid_store);
  const qj_eval_options eval_options = EvalOptions(f);

  DatasetPtr data = LoadData(f.data);
  DatasetPtr train, test;
  if (!f.test_data.empty()) {
    train = std::move(data);
    test = LoadData(f.test_data);
  } else {
    qj_dataset* tr = nullptr;
    qj_dataset* te = nullptr;
    Check(qj_dataset_split(data.get(), kDefaultTestFraction,
                           qj_derive_seed(f.seed, "split", 0), &tr, &te));
    train.reset(tr);
    test.reset(te);
  }

  const int default_seeds = study == Study::kSize ? 10 : 1;
  const int n_seeds = f.n_seeds > 0 ? f.n_seeds : default_seeds;
  std::vector<double> values;
  const char* name = "";
  qj_status status = QJ_OK;
  char* table = nullptr;
  switch (study) {
    case Study::kSize:
      name = "ablate-size";
      if (!f.fractions.empty()) values = ParseCsv(f.fractions, "--fractions");
      status = qj_ablate_size(train.get(), test.get(), &train_options,
                              &eval_options, values.empty() ? nullptr : values.data(),
                              values.size(), n_seeds, &table);
      break;
    case Study::kGamma:
      name = "ablate-gamma";
      if (!f.grid.empty()) values = ParseCsv(f.grid, "--grid");
      status = qj_ablate_gamma(train.get(), test.get(), &train_options,
                               &eval_options, values.empty() ? nullptr : values.data(),
                               values.size(), n_seeds, &table);
      break;
    case Study::kFeatures:
      name = "ablate-features";
      if (!f.drop.empty()) values = ParseCsv(f.drop, "--drop");
      status = qj_ablate_features(train.get(), test.get(), &train_options,
                                  &eval_options, values.empty() ? nullptr : values.data(),
                                  values.size(), n_seeds, &table);
      break;
  }
  Check(status);
  StringPtr table_ptr(table);
  WriteText(f.out, table);
  std::cout << table;

  std::vector<std::string> args = {"--data", f.data, "--out", f.out,
                                   "--n-seeds", std::to_string(n_seeds)};
  if (!f.test_data.empty()) args.insert(args.end(), {"--test-data", f.test_data});
  auto common = CommonTrainArgs(f, study != Study::kGamma);
  args.insert(args.end(), common.begin(), common.end());
  if (study == Study::kSize && !values.empty()) {
    args.insert(args.end(), {"--fractions", FormatCsv(values)});
  }
  if (study == Study::kGamma && !values.empty()) {
    args.insert(args.end(), {"--grid", FormatCsv(values)});
  } else if (!grid_store.empty()) {
    args.insert(args.end(), {"--grid", FormatCsv(grid_store)});
  }
  if (study == Study::kFeatures && !values.empty()) {
    args.insert(args.end(), {"--drop", FormatCsv(values)});
  }
  if (f.expand_pairs) args.push_back("--expand-pairs");
  if (f.clip) args.push_back("--clip-to-score-set");
  WriteResolvedConfig(name, f, args);
  return kExitOk;
}

int Dispatch(const std::vector<std::string>& argv);

int RunRerun(const Flags& f) {
  std::ifstream in(f.config);
  if (!in) throw ExitError{kExitRuntime, "cannot open '" + f.config + "'"};
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("command") || !j.contains("args")) {
    Invalid("'" + f.config + "' is not a resolved config file");
  }
  std::vector<std::string> argv = {"qjudge", j["command"].get<std::string>()};
  for (const auto& a : j["args"]) argv.push_back(a.get<std::string>());
  return Dispatch(argv);
}

int Dispatch(const std::vector<std::string>& argv) {
  CLI::App app{"qjudge: train and evaluate quantitative LLM judges"};
  app.require_subcommand(1);
  Flags f;

  auto add_data = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--data", f.data, "Dataset file (JSON lines)");
    if (required) opt->required();
    opt->check(CLI::ExistingFile);
  };
  auto add_training = [&](CLI::App* cmd) {
    cmd->add_option("--kind", f.kind, "Judge kind")
        ->required()
        ->check(CLI::IsMember({"ls", "mn", "btl", "btl2", "pl"}));
    cmd->add_option("--folds", f.folds, "Cross-validation folds")
        ->check(CLI::Range(2, 1000000));
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--lr", f.lr, "SGD learning rate")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--epochs", f.epochs, "SGD epochs")
        ->check(CLI::Range(1, 100000000));
    cmd->add_option("--batch-size", f.batch_size, "SGD minibatch size")
        ->check(CLI::Range(1, 100000000));
    cmd->add_flag("--expand-pairs", f.expand_pairs,
                  "Expand rankings into pairs (btl2)");
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", f.out, "Output path")->required();
  };

  CLI::App* train = app.add_subcommand("train", "Fit a judge");
  add_data(train, true);
  add_training(train);
  auto* train_gamma =
      train->add_option("--gamma", f.gamma, "Regularization strength or 'auto'");
  auto* train_grid =
      train->add_option("--grid", f.grid, "Gamma grid for --gamma auto (csv)");
  (void)train_gamma;
  (void)train_grid;
  add_out(train);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a model on test data");
  evaluate->add_option("--model", f.model, "Model file")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--test-data", f.test_data, "Test dataset")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--seed", f.seed, "Seed for pair expansion");
  evaluate->add_flag("--clip-to-score-set", f.clip,
                     "Clip LS predictions to the score range");
  evaluate->add_flag("--per-example", f.per_example,
                     "Include per-example predictions");
  evaluate->add_flag("--expand-pairs", f.expand_pairs,
                     "Expand rankings into pairs (btl2)");
  add_out(evaluate);

  CLI::App* predict = app.add_subcommand("predict", "Predict on unlabeled data");
  predict->add_option("--model", f.model, "Model file")
      ->required()
      ->check(CLI::ExistingFile);
  add_data(predict, true);
  predict->add_option("--seed", f.seed, "Seed for pair expansion");
  predict->add_flag("--clip-to-score-set", f.clip,
                    "Clip LS predictions to the score range");
  predict->add_flag("--expand-pairs", f.expand_pairs,
                    "Expand rankings into pairs (btl2)");
  add_out(predict);

  auto add_ablation = [&](const char* name, const char* help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_data(cmd, true);
    cmd->add_option("--test-data", f.test_data,
                    "Fixed test set (default: seeded 80/20 split of --data)")
        ->check(CLI::ExistingFile);
    add_training(cmd);
    cmd->add_option("--n-seeds", f.n_seeds, "Repetitions per grid point")
        ->check(CLI::Range(1, 1000000));
    cmd->add_flag("--clip-to-score-set", f.clip,
                  "Clip LS predictions to the score range");
    add_out(cmd);
    return cmd;
  };
  CLI::App* ablate_size =
      add_ablation("ablate-size", "Metrics as a function of training-set size");
  ablate_size->add_option("--fractions", f.fractions, "Training fractions (csv)");
  ablate_size->add_option("--gamma", f.gamma, "Regularization strength or 'auto'");
  ablate_size->add_option("--grid", f.grid, "Gamma grid for --gamma auto (csv)");
  CLI::App* ablate_gamma =
      add_ablation("ablate-gamma", "Metrics as a function of gamma");
  ablate_gamma->add_option("--grid", f.grid, "Gamma values (csv)");
  CLI::App* ablate_features =
      add_ablation("ablate-features", "Metrics under random feature dropping");
  ablate_features->add_option("--drop", f.drop, "Drop fractions (csv)");
  ablate_features->add_option("--gamma", f.gamma, "Regularization strength or 'auto'");
  ablate_features->add_option("--grid", f.grid, "Gamma grid for --gamma auto (csv)");

  CLI::App* rerun = app.add_subcommand("rerun", "Replay a resolved config file");
  rerun->add_option("--config", f.config, "Resolved config (<out>.config.json)")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<std::string> args(argv.rbegin(), argv.rend() - 1);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (app.get_subcommands().size() == 1) {
      std::cerr << app.get_subcommands()[0]->help();
    }
    return kExitValidation;
  }

  if (train->parsed()) return RunTrain(f);
  if (evaluate->parsed()) return RunEvaluate(f);
  if (predict->parsed()) return RunPredict(f);
  if (ablate_size->parsed()) return RunAblation(f, Study::kSize);
  if (ablate_gamma->parsed()) return RunAblation(f, Study::kGamma);
  if (ablate_features->parsed()) return RunAblation(f, Study::kFeatures);
  if (rerun->parsed()) return RunRerun(f);
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    return Dispatch(args);
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
