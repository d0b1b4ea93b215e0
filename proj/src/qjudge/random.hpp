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

// Seeded randomness. std::mt19937_64 has a standardized output sequence, but
// the std:: distributions do not, so index sampling and shuffling are done
// here to keep every sampling operation reproducible across toolchains.

#ifndef QJUDGE_RANDOM_HPP_
#define QJUDGE_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace qjudge {

// Derives an independent sub-seed from a master seed, a purpose tag and an
// index. All sub-seeds of a run (split, subsample, SGD, folds, pair slots)
// come from here.
uint64_t DeriveSeed(uint64_t master, std::string_view purpose,
                    uint64_t index = 0);

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  size_t UniformIndex(size_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  bool Coin() { return (Next() >> 63) != 0; }

  template <typename T>
  void Shuffle(std::vector<T>& values) {
    for (size_t i = values.size(); i > 1; --i) {
      size_t j = UniformIndex(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Returns a uniformly random permutation of 0..n-1.
std::vector<size_t> RandomPermutation(size_t n, uint64_t seed);

}  // namespace qjudge

#endif  // QJUDGE_RANDOM_HPP_
