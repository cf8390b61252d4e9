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

#include <set>
#include <vector>

#include "ptln/params.hpp"
#include "ptln/rng.hpp"
#include "ptln/types.hpp"

namespace test_util {

// Random valid dataset: sorted deduplicated lists, no self-loops.
inline ptln::Dataset random_dataset(ptln::Rng& rng, int max_users = 8, int max_items = 10,
                                    double edge_prob = 0.3, double pos_prob = 0.35) {
  ptln::Dataset ds;
  ds.num_users = rng.uniform_int(2, max_users);
  ds.num_items = rng.uniform_int(2, max_items);
  ds.positives.resize(ds.num_users);
  ds.social_out.resize(ds.num_users);
  for (int u = 0; u < ds.num_users; ++u) {
    for (int v = 0; v < ds.num_items; ++v)
      if (rng.bernoulli(pos_prob)) ds.positives[u].push_back(v);
    for (int t = 0; t < ds.num_users; ++t)
      if (t != u && rng.bernoulli(edge_prob)) ds.social_out[u].push_back(t);
  }
  return ds;
}

// Replaces the near-zero init with larger values so nonlinear paths are
// exercised.
inline void randomize_params(ptln::ModelParams& params, ptln::Rng& rng, double stddev = 0.5) {
  ptln::for_each_tensor(params, [&](const std::string&, std::vector<double>& t) {
    for (double& x : t) x = rng.gaussian(0.0, stddev);
  });
}

inline std::vector<int> all_users(const ptln::Dataset& ds) {
  std::vector<int> batch(ds.num_users);
  for (int u = 0; u < ds.num_users; ++u) batch[u] = u;
  return batch;
}

}  // namespace test_util
