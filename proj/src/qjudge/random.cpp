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

#include "qjudge/random.hpp"

#include <limits>
#include <numeric>

namespace qjudge {
namespace {

uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a, enough to separate purpose tags.
uint64_t HashTag(std::string_view tag) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

uint64_t DeriveSeed(uint64_t master, std::string_view purpose,
                    uint64_t index) {
  uint64_t state = master;
  uint64_t a = SplitMix64(state);
  state = a ^ HashTag(purpose);
  uint64_t b = SplitMix64(state);
  state = b ^ (index * 0xd1b54a32d192ed03ULL);
  return SplitMix64(state);
}

size_t Rng::UniformIndex(size_t n) {
  const uint64_t bound = static_cast<uint64_t>(n);
  const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % bound;
  uint64_t draw;
  do {
    draw = Next();
  } while (draw >= limit);
  return static_cast<size_t>(draw % bound);
}

std::vector<size_t> RandomPermutation(size_t n, uint64_t seed) {
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  Rng rng(seed);
  rng.Shuffle(perm);
  return perm;
}

}  // namespace qjudge
