// Copyright 2026 The ptln Authors
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

namespace ptln {

// mt19937_64 with hand-rolled draw routines. std:: distributions are not
// pinned across standard library versions; every sampling decision in this
// project must replay bit-identically from a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n), bias removed by rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double uniform01() {
    // 53 random bits into [0,1)
    return (engine_() >> 11) * (1.0 / 9007199254740992.0);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller, one value per call (the spare is discarded to keep the
  // draw count predictable).
  double gaussian(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t n = v.size(); n > 1; --n) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(n));
      std::swap(v[n - 1], v[j]);
    }
  }

  // k distinct values from [0, n) by weightless reservoir-free selection;
  // order of the result follows the draw order.
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> pool(n);
    for (int x = 0; x < n; ++x) pool[x] = x;
    shuffle(pool);
    pool.resize(std::min(n, k));
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ptln
