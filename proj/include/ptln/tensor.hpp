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
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ptln {

using Vec = std::vector<double>;

// Dense row-major matrix. Rows are the entity axis (users/items), columns
// the embedding axis; all model tables fit comfortably in memory at the
// scales this library targets.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  std::span<double> row(int r) {
    assert(r >= 0 && r < rows);
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    assert(r >= 0 && r < rows);
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  void set_zero() { std::fill(data.begin(), data.end(), 0.0); }

  bool operator==(const Mat& o) const = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
  return s;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t d = 0; d < x.size(); ++d) y[d] += alpha * x[d];
}

inline Vec hadamard(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  Vec out(a.size());
  for (std::size_t d = 0; d < a.size(); ++d) out[d] = a[d] * b[d];
  return out;
}

inline double squared_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

inline bool all_finite(std::span<const double> a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

// Numerically stable softmax; the output sums to 1 up to rounding.
inline Vec softmax(std::span<const double> scores) {
  assert(!scores.empty());
  double mx = scores[0];
  for (double s : scores) mx = std::max(mx, s);
  Vec out(scores.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    out[t] = std::exp(scores[t] - mx);
    sum += out[t];
  }
  for (double& w : out) w /= sum;
  return out;
}

}  // namespace ptln
