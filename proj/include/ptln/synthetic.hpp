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
#include <stdexcept>
#include <vector>

#include "ptln/rng.hpp"
#include "ptln/types.hpp"

namespace ptln {

// Planted-cluster benchmark. Users and items are partitioned into
// num_clusters groups; a user's positives come from the preferred item
// block, social edges follow the two edge probabilities.
//
// With hop2_signal, each cluster additionally gets a small cold subset
// whose taste is carried by its 2-hop neighborhood: cold users trust only
// interaction-less relay users, relays trust core users of the next
// cluster, and the cold users' few positives come from that cluster's
// block. A depth-1 propagation sees only the uninformative relays; a
// depth-2 propagation reaches the users whose taste matches.
struct SyntheticSpec {
  int num_users = 40;
  int num_items = 80;
  int num_clusters = 2;
  double intra_cluster_edge_prob = 0.15;
  double inter_cluster_edge_prob = 0.0;
  int items_per_user = 12;
  bool hop2_signal = false;
  std::uint64_t seed = 7;
};

inline void validate(const SyntheticSpec& spec) {
  if (spec.num_users < 1 || spec.num_items < 1) throw std::invalid_argument("synthetic: empty user/item space");
  if (spec.num_clusters < 1 || spec.num_clusters > spec.num_users)
    throw std::invalid_argument("synthetic: cluster count must be in [1, num_users]");
  if (spec.num_clusters > spec.num_items)
    throw std::invalid_argument("synthetic: need at least one item per cluster");
  if (spec.intra_cluster_edge_prob < 0.0 || spec.intra_cluster_edge_prob > 1.0 ||
      spec.inter_cluster_edge_prob < 0.0 || spec.inter_cluster_edge_prob > 1.0)
    throw std::invalid_argument("synthetic: edge probabilities must be in [0,1]");
  if (spec.items_per_user < 0) throw std::invalid_argument("synthetic: items_per_user must be >= 0");
}

struct SyntheticResult {
  Dataset dataset;
  std::vector<int> user_cluster;
  std::vector<int> cold_users;   // nonempty only with hop2_signal
  std::vector<int> relay_users;  // nonempty only with hop2_signal
};

namespace detail {

// Geometric within-block item popularity; the skew is what makes held-out
// items recoverable from other users' interactions. Cold users draw with a
// much sharper skew so their held-out item is nearly always one the target
// cluster's core users interact with heavily.
inline constexpr double kPopularitySkew = 0.8;
inline constexpr double kColdSkew = 0.5;
inline constexpr int kColdPositives = 2;

// Weighted sampling without replacement from [block_lo, block_hi).
inline std::vector<int> draw_block_items(int block_lo, int block_hi, int count, Rng& rng,
                                         double skew = kPopularitySkew) {
  const int block = block_hi - block_lo;
  count = std::min(count, block);
  std::vector<double> weight(block);
  double pw = 1.0;
  for (int j = 0; j < block; ++j, pw *= skew) weight[j] = pw;
  std::vector<int> picked;
  picked.reserve(count);
  for (int n = 0; n < count; ++n) {
    double total = 0.0;
    for (double w : weight) total += w;
    double r = rng.uniform01() * total;
    int choice = -1;
    for (int j = 0; j < block; ++j) {
      if (weight[j] <= 0.0) continue;
      r -= weight[j];
      if (r <= 0.0) {
        choice = j;
        break;
      }
    }
    if (choice < 0) {  // numeric tail: last remaining item
      for (int j = block - 1; j >= 0; --j)
        if (weight[j] > 0.0) {
          choice = j;
          break;
        }
    }
    picked.push_back(block_lo + choice);
    weight[choice] = 0.0;
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace detail

inline SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  const int num_c = spec.num_clusters;
  auto user_lo = [&](int c) { return static_cast<int>(static_cast<long>(c) * spec.num_users / num_c); };
  auto item_lo = [&](int c) { return static_cast<int>(static_cast<long>(c) * spec.num_items / num_c); };

  SyntheticResult out;
  Dataset& ds = out.dataset;
  ds.num_users = spec.num_users;
  ds.num_items = spec.num_items;
  ds.positives.assign(spec.num_users, {});
  ds.social_out.assign(spec.num_users, {});
  out.user_cluster.assign(spec.num_users, 0);

  // role per user: 0 core, 1 cold, 2 relay; cold user at cluster offset j
  // pairs with the relay at offset n_cold + j
  std::vector<int> role(spec.num_users, 0);
  std::vector<int> relay_of(spec.num_users, -1);
  for (int c = 0; c < num_c; ++c) {
    const int lo = user_lo(c), hi = user_lo(c + 1);
    for (int u = lo; u < hi; ++u) out.user_cluster[u] = c;
    if (!spec.hop2_signal) continue;
    const int count = hi - lo;
    int n_cold = std::max(1, count / 5);
    n_cold = std::min(n_cold, (count - 1) / 3);  // leave a core majority
    for (int j = 0; j < n_cold; ++j) {
      role[lo + j] = 1;
      relay_of[lo + j] = lo + n_cold + j;
      out.cold_users.push_back(lo + j);
      role[lo + n_cold + j] = 2;
      out.relay_users.push_back(lo + n_cold + j);
    }
  }

  Rng rng(spec.seed);

  // social edges: core-core by the cluster probabilities
  for (int u = 0; u < spec.num_users; ++u) {
    if (role[u] != 0) continue;
    for (int t = 0; t < spec.num_users; ++t) {
      if (t == u || role[t] != 0) continue;
      const double p = out.user_cluster[u] == out.user_cluster[t] ? spec.intra_cluster_edge_prob
                                                                  : spec.inter_cluster_edge_prob;
      if (p > 0.0 && rng.bernoulli(p)) ds.social_out[u].push_back(t);
    }
  }
  if (spec.hop2_signal) {
    // cold -> its own dedicated relay (one per cold user, so relays pool no
    // signal across cold users); relay -> sampled core users of the next
    // cluster
    for (int u : out.cold_users) ds.social_out[u].push_back(relay_of[u]);
    for (int r : out.relay_users) {
      const int target = (out.user_cluster[r] + 1) % num_c;
      std::vector<int> target_core;
      for (int t = user_lo(target); t < user_lo(target + 1); ++t)
        if (role[t] == 0) target_core.push_back(t);
      std::vector<int> chosen_idx = rng.sample_without_replacement(
          static_cast<int>(target_core.size()), std::min<int>(6, static_cast<int>(target_core.size())));
      for (int idx : chosen_idx) ds.social_out[r].push_back(target_core[idx]);
    }
  }
  for (auto& row : ds.social_out) std::sort(row.begin(), row.end());

  // positives
  for (int u = 0; u < spec.num_users; ++u) {
    if (role[u] == 2) continue;  // relays stay interaction-less
    int block = out.user_cluster[u];
    int count = spec.items_per_user;
    double skew = detail::kPopularitySkew;
    if (role[u] == 1) {
      block = (out.user_cluster[u] + 1) % num_c;  // the 2-hop neighborhood's cluster
      count = detail::kColdPositives;
      skew = detail::kColdSkew;
    }
    ds.positives[u] = detail::draw_block_items(item_lo(block), item_lo(block + 1), count, rng, skew);
  }
  return out;
}

}  // namespace ptln
