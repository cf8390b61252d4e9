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

#include <array>
#include <string>
#include <vector>

#include "ptln/rng.hpp"
#include "ptln/tensor.hpp"
#include "ptln/types.hpp"

namespace ptln {

inline const char* aspect_name(Aspect a) {
  switch (a) {
    case Aspect::kCommon: return "common";
    case Aspect::kSocial: return "social";
    case Aspect::kItem: return "item";
  }
  return "?";
}

// Every trainable tensor of the model. Single-writer during training;
// otherwise treated as an immutable value.
struct ModelParams {
  int num_users = 0;
  int num_items = 0;
  int d1 = 0;
  int d2 = 0;
  int k = 0;

  Mat c, s, i;  // user aspect tables, M x D1
  Mat q;        // item table, N x D1
  Mat g;        // friend-role table, M x D1

  std::array<Vec, kNumAspects> w_attn;                    // propagation attention, D1 each
  std::array<std::vector<Vec>, kNumAspects> order_bias;   // [aspect][order-1], D1 each

  Mat w_alpha, w_beta;   // gate matrices, D2 x D1
  Vec b_alpha, b_beta;   // gate biases, D2
  Vec h_alpha, h_beta;   // gate output vectors, D2
  Vec h_item, h_social;  // prediction weight vectors, D1

  Vec theta_alpha, theta_beta;  // regularizer scalars, one per order

  bool operator==(const ModelParams& o) const = default;

  Mat& aspect_table(Aspect a) {
    switch (a) {
      case Aspect::kCommon: return c;
      case Aspect::kSocial: return s;
      case Aspect::kItem: return i;
    }
    return c;
  }
  const Mat& aspect_table(Aspect a) const { return const_cast<ModelParams*>(this)->aspect_table(a); }
};

// Visits every trainable tensor exactly once as a flat double range. The
// L2 term, the optimizer, serialization and the gradient checker all walk
// parameters through this registry, so "every tensor exactly once" is
// enforced in a single place.
template <typename ParamsT, typename F>
void for_each_tensor(ParamsT& p, F&& f) {
  f(std::string("c"), p.c.data);
  f(std::string("s"), p.s.data);
  f(std::string("i"), p.i.data);
  f(std::string("q"), p.q.data);
  f(std::string("g"), p.g.data);
  for (Aspect a : kAllAspects) f(std::string("w_attn.") + aspect_name(a), p.w_attn[static_cast<int>(a)]);
  for (Aspect a : kAllAspects)
    for (std::size_t ord = 0; ord < p.order_bias[static_cast<int>(a)].size(); ++ord)
      f(std::string("order_bias.") + aspect_name(a) + "." + std::to_string(ord + 1), p.order_bias[static_cast<int>(a)][ord]);
  f(std::string("w_alpha"), p.w_alpha.data);
  f(std::string("w_beta"), p.w_beta.data);
  f(std::string("b_alpha"), p.b_alpha);
  f(std::string("b_beta"), p.b_beta);
  f(std::string("h_alpha"), p.h_alpha);
  f(std::string("h_beta"), p.h_beta);
  f(std::string("h_item"), p.h_item);
  f(std::string("h_social"), p.h_social);
  f(std::string("theta_alpha"), p.theta_alpha);
  f(std::string("theta_beta"), p.theta_beta);
}

inline std::size_t parameter_count(const ModelParams& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](const std::string&, const std::vector<double>& t) { n += t.size(); });
  return n;
}

inline bool params_finite(const ModelParams& p) {
  bool ok = true;
  for_each_tensor(p, [&](const std::string&, const std::vector<double>& t) { ok = ok && all_finite(t); });
  return ok;
}

// Embeddings and gate weights ~ N(0, 0.01^2); gate biases and order biases
// zero; theta scalars 1. Deterministic given the seed.
inline ModelParams init_params(const Config& cfg, int num_users, int num_items, std::uint64_t seed) {
  ModelParams p;
  p.num_users = num_users;
  p.num_items = num_items;
  p.d1 = cfg.d1;
  p.d2 = cfg.d2;
  p.k = cfg.k;

  p.c = Mat(num_users, cfg.d1);
  p.s = Mat(num_users, cfg.d1);
  p.i = Mat(num_users, cfg.d1);
  p.q = Mat(num_items, cfg.d1);
  p.g = Mat(num_users, cfg.d1);
  for (Aspect a : kAllAspects) {
    p.w_attn[static_cast<int>(a)] = Vec(cfg.d1, 0.0);
    p.order_bias[static_cast<int>(a)].assign(cfg.k, Vec(cfg.d1, 0.0));
  }
  p.w_alpha = Mat(cfg.d2, cfg.d1);
  p.w_beta = Mat(cfg.d2, cfg.d1);
  p.b_alpha = Vec(cfg.d2, 0.0);
  p.b_beta = Vec(cfg.d2, 0.0);
  p.h_alpha = Vec(cfg.d2, 0.0);
  p.h_beta = Vec(cfg.d2, 0.0);
  p.h_item = Vec(cfg.d1, 0.0);
  p.h_social = Vec(cfg.d1, 0.0);
  p.theta_alpha = Vec(cfg.k, 1.0);
  p.theta_beta = Vec(cfg.k, 1.0);

  Rng rng(seed);
  const double stddev = 0.01;
  auto fill = [&](std::vector<double>& t) {
    for (double& x : t) x = rng.gaussian(0.0, stddev);
  };
  fill(p.c.data);
  fill(p.s.data);
  fill(p.i.data);
  fill(p.q.data);
  fill(p.g.data);
  for (Aspect a : kAllAspects) fill(p.w_attn[static_cast<int>(a)]);
  fill(p.w_alpha.data);
  fill(p.w_beta.data);
  fill(p.h_alpha);
  fill(p.h_beta);
  fill(p.h_item);
  fill(p.h_social);
  return p;
}

}  // namespace ptln
