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

#include <thread>
#include <vector>

namespace ptln {

// Static-partition parallel loop. Each index must write only to its own
// output slot; callers reduce the slots sequentially afterwards, so results
// are identical for any thread count.
template <typename F>
void parallel_for(int n, int num_threads, F&& fn) {
  if (n <= 0) return;
  if (num_threads <= 1 || n == 1) {
    for (int idx = 0; idx < n; ++idx) fn(idx);
    return;
  }
  const int workers = std::min(num_threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([=, &fn]() {
      for (int idx = w; idx < n; idx += workers) fn(idx);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ptln
