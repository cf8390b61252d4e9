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
#include <vector>

#include "ptln/types.hpp"

namespace ptln {

// orders[u][k-1] holds the users at shortest trust-path distance exactly k
// from u (u itself excluded). Layers are pairwise disjoint by construction
// and each layer is sorted ascending.
struct OrderNeighborhoods {
  int depth = 0;
  std::vector<std::vector<std::vector<int>>> orders;

  const std::vector<int>& friends(int u, int order_k) const { return orders[u][order_k - 1]; }
};

// Breadth-first layering of the directed trust graph up to depth K.
inline OrderNeighborhoods khop_friends(const Dataset& ds, int depth) {
  OrderNeighborhoods out;
  out.depth = depth;
  out.orders.assign(ds.num_users, {});
  std::vector<int> dist(ds.num_users);
  for (int u = 0; u < ds.num_users; ++u) {
    out.orders[u].assign(depth, {});
    std::fill(dist.begin(), dist.end(), -1);
    dist[u] = 0;
    std::vector<int> frontier = {u};
    for (int k = 1; k <= depth && !frontier.empty(); ++k) {
      std::vector<int> next;
      for (int node : frontier) {
        for (int t : ds.social_out[node]) {
          if (dist[t] == -1) {
            dist[t] = k;
            next.push_back(t);
          }
        }
      }
      std::sort(next.begin(), next.end());
      out.orders[u][k - 1] = next;
      frontier = std::move(next);
    }
  }
  return out;
}

}  // namespace ptln
