// Copyright 2026 The splitrank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace splitrank {

// Seeded RNG with hand-rolled distributions. std::mt19937_64 output is
// pinned by the standard; the transforms below avoid the
// implementation-defined std::*_distribution classes so that a fixed seed
// yields identical streams on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  uint32_t next_u32() { return static_cast<uint32_t>(engine_() >> 32); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  float uniform_f(float lo, float hi) { return static_cast<float>(uniform(lo, hi)); }

  // Uniform integer in [0, n). n must be > 0; modulo bias is irrelevant at
  // the n values used here (≪ 2^32).
  uint64_t below(uint64_t n) { return engine_() % n; }

  bool chance(double p) { return uniform() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent child stream; used to give each sub-task its own
  // seed while everything still flows from one root seed.
  uint64_t fork() { return engine_() ^ 0x9e3779b97f4a7c15ULL; }

 private:
  std::mt19937_64 engine_;
};

// Sampler over ranks 0..n-1 with P(rank r) ∝ 1/(r+1)^exponent.
class ZipfSampler {
 public:
  ZipfSampler(size_t n, double exponent);

  size_t sample(Rng& rng) const;

  double probability(size_t rank) const { return pmf_[rank]; }

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

inline ZipfSampler::ZipfSampler(size_t n, double exponent) {
  pmf_.resize(n);
  cdf_.resize(n);
  double total = 0.0;
  for (size_t r = 0; r < n; ++r) {
    pmf_[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    total += pmf_[r];
  }
  double acc = 0.0;
  for (size_t r = 0; r < n; ++r) {
    pmf_[r] /= total;
    acc += pmf_[r];
    cdf_[r] = acc;
  }
  cdf_[n - 1] = 1.0;
}

inline size_t ZipfSampler::sample(Rng& rng) const {
  double u = rng.uniform();
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return cdf_.size() - 1;
  return static_cast<size_t>(it - cdf_.begin());
}

}  // namespace splitrank
