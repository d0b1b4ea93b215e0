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


// Drives the qjudge executable end to end and checks files and exit codes.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

std::string Data(const char* name) {
  return std::string(QJUDGE_TEST_DATA_DIR) + "/" + name;
}

std::string Scratch(const std::string& name) {
  fs::create_directories(QJUDGE_SCRATCH_DIR);
  return std::string(QJUDGE_SCRATCH_DIR) + "/" + name;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with `args`, capturing combined output into *log.
int Run(const std::string& args, std::string* log = nullptr) {
  const std::string log_path = Scratch("last_run.log");
  const std::string cmd =
      std::string("\"") + QJUDGE_CLI_PATH + "\" " + args + " > \"" + log_path + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  if (log) *log = ReadFile(log_path);
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

int CountPrefixed(const std::string& text, const std::string& prefix) {
  int n = 0;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    if (line.rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("train writes model, summary and resolved config") {
  const std::string out = Scratch("ls_model.json");
  std::string log;
  REQUIRE(Run("train --data " + Data("drop_train.jsonl") +
                  " --kind ls --gamma auto --grid 0.01,1,100 --epochs 20 --out " + out,
              &log) == 0);
  CHECK(fs::exists(out));
  CHECK(ReadFile(out + ".summary.txt").find("kind: ls") != std::string::npos);
  const std::string config = ReadFile(out + ".config.json");
  CHECK(config.find("\"command\": \"train\"") != std::string::npos);
  CHECK(config.find("--seed") != std::string::npos);
  CHECK(log.find("gamma") != std::string::npos);
}

TEST_CASE("evaluate and predict") {
  const std::string model = Scratch("mn_model.json");
  REQUIRE(Run("train --data " + Data("absolute_small.jsonl") +
              " --kind mn --gamma 0.1 --epochs 20 --out " + model) == 0);

  const std::string report = Scratch("mn_report.json");
  REQUIRE(Run("evaluate --model " + model + " --test-data " +
              Data("absolute_small.jsonl") + " --out " + report) == 0);
  const std::string r = ReadFile(report);
  CHECK(r.find("\"mse\"") != std::string::npos);
  CHECK(r.find("\"kendall_tau\"") != std::string::npos);

  const std::string preds = Scratch("mn_preds.jsonl");
  REQUIRE(Run("predict --model " + model + " --data " +
              Data("absolute_unlabeled.jsonl") + " --out " + preds) == 0);
  CHECK(CountPrefixed(ReadFile(preds), "{\"id\"") == 3);
}

TEST_CASE("two-headed pairs expanded from rankings") {
  const std::string model = Scratch("btl2_model.json");
  CHECK(Run("train --data " + Data("ranking_small.jsonl") +
            " --kind btl2 --expand-pairs --gamma 0.1 --epochs 10 --out " + model) == 0);
  const std::string report = Scratch("btl2_report.json");
  CHECK(Run("evaluate --model " + model + " --test-data " +
            Data("ranking_small.jsonl") + " --expand-pairs --out " + report) == 0);
  CHECK(ReadFile(report).find("\"accuracy\"") != std::string::npos);
}

TEST_CASE("validation failures exit with 2") {
  const std::string out = Scratch("bad.json");
  std::string log;
  CHECK(Run("train --data " + Data("drop_train.jsonl") + " --kind nope --out " + out) == 2);
  CHECK(Run("train --bogus-flag", &log) == 2);
  CHECK(Run("train --data " + Data("drop_train.jsonl") +
                " --kind ls --gamma 1 --grid 0.1,1 --out " + out,
            &log) == 2);
  CHECK(log.find("--grid") != std::string::npos);
  // LS data carries no base_probs, so MN cannot be fit on it.
  CHECK(Run("train --data " + Data("drop_train.jsonl") +
                " --kind mn --gamma 1 --out " + out,
            &log) == 2);

  const std::string model = Scratch("pl_model.json");
  REQUIRE(Run("train --data " + Data("ranking_small.jsonl") +
              " --kind pl --gamma 1 --epochs 5 --out " + model) == 0);
  CHECK(Run("evaluate --model " + model + " --test-data " + Data("drop_test.jsonl") +
                " --out " + out,
            &log) == 2);
  CHECK(Run("ablate-gamma --data " + Data("gamma_train.jsonl") +
            " --kind ls --gamma 1 --out " + out) == 2);
}

TEST_CASE("runtime and I/O failures exit with 1") {
  std::string log;
  CHECK(Run("train --data " + Data("drop_train.jsonl") +
                " --kind ls --gamma 0 --lr 10000 --out " + Scratch("diverged.json"),
            &log) == 1);
  CHECK(log.find("--lr") != std::string::npos);
  CHECK(Run("train --data " + Data("drop_train.jsonl") +
            " --kind ls --gamma 0 --epochs 2 --out /nonexistent-dir/m.json") == 1);
}

TEST_CASE("missing input files are rejected while parsing arguments") {
  CHECK(Run("train --data /nonexistent-dir/data.jsonl --kind ls --out " +
            Scratch("x.json")) == 2);
}

TEST_CASE("rerun reproduces outputs byte for byte") {
  const std::string out = Scratch("rerun_model.json");
  REQUIRE(Run("train --data " + Data("pairwise_relative.jsonl") +
              " --kind btl --epochs 20 --seed 7 --out " + out) == 0);
  const std::string model = ReadFile(out);
  const std::string summary = ReadFile(out + ".summary.txt");
  const std::string config = ReadFile(out + ".config.json");
  fs::remove(out);
  REQUIRE(Run("rerun --config " + out + ".config.json") == 0);
  CHECK(ReadFile(out) == model);
  CHECK(ReadFile(out + ".summary.txt") == summary);
  CHECK(ReadFile(out + ".config.json") == config);

  const std::string table = Scratch("rerun_ablate.tsv");
  REQUIRE(Run("ablate-size --data " + Data("drop_train.jsonl") +
              " --kind ls --gamma 0.1 --epochs 5 --fractions 0.5,1 --n-seeds 2 --out " +
              table) == 0);
  const std::string first = ReadFile(table);
  REQUIRE(Run("rerun --config " + table + ".config.json") == 0);
  CHECK(ReadFile(table) == first);
}

TEST_CASE("ablation tables") {
  std::string table;
  const std::string out = Scratch("ablation.tsv");
  REQUIRE(Run("ablate-size --data " + Data("drop_train.jsonl") + " --test-data " +
              Data("drop_test.jsonl") +
              " --kind ls --gamma 0.1 --epochs 5 --n-seeds 2 --out " + out) == 0);
  table = ReadFile(out);
  CHECK(CountPrefixed(table, "run\t") == 14);
  CHECK(CountPrefixed(table, "mean\t") == 7);

  REQUIRE(Run("ablate-gamma --data " + Data("gamma_train.jsonl") + " --test-data " +
              Data("gamma_test.jsonl") + " --kind ls --epochs 5 --out " + out) == 0);
  table = ReadFile(out);
  // One run and one mean per point of the default seven-point grid.
  CHECK(CountPrefixed(table, "run\t") == 7);
  CHECK(CountPrefixed(table, "mean\t") == 7);

  REQUIRE(Run("ablate-features --data " + Data("drop_train.jsonl") +
              " --kind ls --gamma 0.1 --epochs 5 --drop 0,0.5 --n-seeds 3 --out " +
              out) == 0);
  table = ReadFile(out);
  CHECK(CountPrefixed(table, "run\t") == 6);
  CHECK(CountPrefixed(table, "mean\t") == 2);
}

TEST_CASE("help exits cleanly") {
  std::string log;
  CHECK(Run("--help", &log) == 0);
  CHECK(log.find("ablate-features") != std::string::npos);
}
