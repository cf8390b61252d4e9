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

#include <stdexcept>
#include <vector>

#include "ptln/graph.hpp"
#include "ptln/params.hpp"
#include "ptln/tensor.hpp"
#include "ptln/types.hpp"

namespace ptln {

// Softmax attention over one order's friends. Scores are the attention
// vector dotted with the element-wise product of the user's and the
// friend's initial embeddings. Weights are positive and sum to 1.
inline Vec order_attention(std::span<const double> u_emb, const std::vector<std::span<const double>>& friend_embs,
                           std::span<const double> w_attn) {
  if (friend_embs.empty()) throw std::invalid_argument("order_attention: empty friend list");
  Vec scores(friend_embs.size());
  for (std::size_t t = 0; t < friend_embs.size(); ++t) scores[t] = dot(w_attn, hadamard(u_emb, friend_embs[t]));
  return softmax(scores);
}

// f = sum_t weight_t * friend_t, over the initial friend embeddings.
inline Vec aggregate_influence(const Vec& weights, const std::vector<std::span<const double>>& friend_embs) {
  if (weights.size() != friend_embs.size()) throw std::invalid_argument("aggregate_influence: length mismatch");
  if (friend_embs.empty()) return {};
  Vec f(friend_embs[0].size(), 0.0);
  for (std::size_t t = 0; t < weights.size(); ++t) axpy(weights[t], friend_embs[t], f);
  return f;
}

// One order's updated user embedding: initial + influence + order bias.
// With the order-bias ablation the bias is treated as zero.
inline Vec update_user(std::span<const double> u0, std::span<const double> influence,
                       std::span<const double> order_bias, bool order_bias_on) {
  Vec out(u0.begin(), u0.end());
  axpy(1.0, influence, out);
  if (order_bias_on) axpy(1.0, order_bias, out);
  return out;
}

// Per-order intermediates of one (user, aspect) propagation pass, retained
// so that the regularizer and the backward pass can reuse them.
struct AspectForward {
  Vec initial;                        // embedding before propagation
  std::vector<Vec> weights;           // [order-1] attention weights (empty order -> empty)
  std::vector<Vec> per_order;         // [order-1] updated embedding of that order
  Vec propagated;                     // sum over orders (+ initial when configured)
};

inline AspectForward propagate_user_aspect(const ModelParams& params, const OrderNeighborhoods& nbhd,
                                           Aspect aspect, int u, const Config& cfg) {
  const Mat& table = params.aspect_table(aspect);
  const Vec& w_attn = params.w_attn[static_cast<int>(aspect)];
  const auto& biases = params.order_bias[static_cast<int>(aspect)];

  AspectForward fwd;
  const auto u0 = table.row(u);
  fwd.initial.assign(u0.begin(), u0.end());
  fwd.weights.resize(cfg.k);
  fwd.per_order.resize(cfg.k);
  fwd.propagated.assign(cfg.d1, 0.0);

  for (int k = 1; k <= cfg.k; ++k) {
    const std::vector<int>& friends = nbhd.friends(u, k);
    if (friends.empty()) {
      // No influence to absorb at this order: the order's embedding is the
      // initial one, bias excluded.
      fwd.per_order[k - 1] = fwd.initial;
    } else {
      std::vector<std::span<const double>> friend_embs;
      friend_embs.reserve(friends.size());
      for (int t : friends) friend_embs.push_back(table.row(t));
      if (cfg.friend_attention_on) {
        fwd.weights[k - 1] = order_attention(u0, friend_embs, w_attn);
      } else {
        fwd.weights[k - 1].assign(friends.size(), 1.0 / static_cast<double>(friends.size()));
      }
      const Vec influence = aggregate_influence(fwd.weights[k - 1], friend_embs);
      fwd.per_order[k - 1] = update_user(u0, influence, biases[k - 1], cfg.order_bias_on);
    }
    axpy(1.0, fwd.per_order[k - 1], fwd.propagated);
  }
  if (cfg.include_initial_once) axpy(1.0, fwd.initial, fwd.propagated);
  return fwd;
}

// Final propagated embedding of one (user, aspect) pair.
inline Vec propagate_aspect(const ModelParams& params, const Dataset&, const OrderNeighborhoods& nbhd,
                            Aspect aspect, int u, const Config& cfg) {
  return propagate_user_aspect(params, nbhd, aspect, u, cfg).propagated;
}

}  // namespace ptln
