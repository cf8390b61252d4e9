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

#include "ptln/graph.hpp"
#include "ptln/parallel.hpp"
#include "ptln/params.hpp"
#include "ptln/propagation.hpp"
#include "ptln/rng.hpp"
#include "ptln/tensor.hpp"
#include "ptln/transfer.hpp"
#include "ptln/types.hpp"

namespace ptln {

// Forward state of one batch user, retained through the loss and gradient
// computations of a step.
struct UserForward {
  int user = -1;
  std::array<AspectForward, kNumAspects> aspects;
  // Dropout masks with the 1/keep scaling folded in; empty means identity.
  std::array<Vec, kNumAspects> mask;
  // Propagated embeddings after dropout; these enter the gates and the
  // prediction heads.
  std::array<Vec, kNumAspects> dropped;
  GateOutput gates;
  Vec p_item, p_social;
};

// Everything the loss terms of one step consume. Cached tensors are
// consistent with the referenced ModelParams; rebuild after every update.
struct BatchContext {
  const ModelParams& params;
  const Dataset& data;
  const Config& cfg;
  std::vector<int> batch;
  std::vector<UserForward> users;
  bool training = false;

  // Number of single-pair score evaluations performed by the efficient
  // losses; stays at |batch positives| per call by construction.
  mutable std::size_t score_evaluations = 0;
};

// Builds the per-user forward state for a batch. When `training` and
// dropout is active, masks are drawn from `dropout_rng` in batch order
// before any parallel work, so the result is thread-count independent.
inline BatchContext build_batch_context(const ModelParams& params, const Dataset& data,
                                        const OrderNeighborhoods& nbhd, const std::vector<int>& batch,
                                        const Config& cfg, bool training = false, Rng* dropout_rng = nullptr) {
  BatchContext ctx{params, data, cfg, batch, {}, training};
  ctx.users.resize(batch.size());

  const bool use_dropout = training && cfg.dropout_keep < 1.0 && dropout_rng != nullptr;
  if (use_dropout) {
    const double keep = cfg.dropout_keep;
    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
      for (int a = 0; a < kNumAspects; ++a) {
        Vec m(cfg.d1);
        for (int d = 0; d < cfg.d1; ++d) m[d] = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
        ctx.users[bi].mask[a] = std::move(m);
      }
    }
  }

  parallel_for(static_cast<int>(batch.size()), cfg.threads, [&](int bi) {
    UserForward& uf = ctx.users[bi];
    uf.user = batch[bi];
    for (Aspect a : kAllAspects) {
      const int ai = static_cast<int>(a);
      uf.aspects[ai] = propagate_user_aspect(params, nbhd, a, uf.user, cfg);
      if (use_dropout) {
        uf.dropped[ai] = hadamard(uf.aspects[ai].propagated, uf.mask[ai]);
      } else {
        uf.dropped[ai] = uf.aspects[ai].propagated;
      }
    }
    uf.gates = gates_for_user(uf.dropped[static_cast<int>(Aspect::kCommon)],
                              uf.dropped[static_cast<int>(Aspect::kItem)],
                              uf.dropped[static_cast<int>(Aspect::kSocial)], params);
    fuse(uf.dropped[static_cast<int>(Aspect::kCommon)], uf.dropped[static_cast<int>(Aspect::kItem)],
         uf.dropped[static_cast<int>(Aspect::kSocial)], uf.gates, uf.p_item, uf.p_social);
  });
  return ctx;
}

namespace detail {

// Gram matrix sum_r row_r row_r^T of an entity table, D1 x D1.
inline Mat gram(const Mat& table) {
  Mat out(table.cols, table.cols);
  for (int r = 0; r < table.rows; ++r) {
    const auto row = table.row(r);
    for (int d = 0; d < table.cols; ++d)
      for (int e = 0; e < table.cols; ++e) out.at(d, e) += row[d] * row[e];
  }
  return out;
}

inline Mat gram_of_users(const BatchContext& ctx, bool social) {
  const int d1 = ctx.cfg.d1;
  Mat out(d1, d1);
  for (const UserForward& uf : ctx.users) {
    const Vec& p = social ? uf.p_social : uf.p_item;
    for (int d = 0; d < d1; ++d)
      for (int e = 0; e < d1; ++e) out.at(d, e) += p[d] * p[e];
  }
  return out;
}

// Shared shape of Eqs.-12/13-style losses: an all-pair quadratic term
// factorized through two Gram matrices plus a correction over observed
// positives. Never touches unobserved pairs one by one.
inline double loss_efficient(const BatchContext& ctx, double c_neg, bool social) {
  const int d1 = ctx.cfg.d1;
  const Vec& h = social ? ctx.params.h_social : ctx.params.h_item;
  const Mat& columns = social ? ctx.params.g : ctx.params.q;

  const Mat user_gram = gram_of_users(ctx, social);
  const Mat column_gram = gram(columns);
  double all_pair = 0.0;
  for (int d = 0; d < d1; ++d)
    for (int e = 0; e < d1; ++e) all_pair += h[d] * h[e] * user_gram.at(d, e) * c_neg * column_gram.at(d, e);

  double positive = 0.0;
  for (const UserForward& uf : ctx.users) {
    const Vec& p = social ? uf.p_social : uf.p_item;
    const auto& pos = social ? ctx.data.social_out[uf.user] : ctx.data.positives[uf.user];
    for (int col : pos) {
      const double r_hat = social ? predict_social(p, columns.row(col), h) : predict_item(p, columns.row(col), h);
      ++ctx.score_evaluations;
      positive += (1.0 - c_neg) * r_hat * r_hat - 2.0 * r_hat;
    }
  }
  return all_pair + positive;
}

// The straight whole-data weighted squared loss, O(|B| * columns * D1).
// Small instances only; serves as the oracle for the factorized form.
inline double loss_naive(const BatchContext& ctx, double c_neg, bool social) {
  const Vec& h = social ? ctx.params.h_social : ctx.params.h_item;
  const Mat& columns = social ? ctx.params.g : ctx.params.q;
  double total = 0.0;
  for (const UserForward& uf : ctx.users) {
    const Vec& p = social ? uf.p_social : uf.p_item;
    const auto& pos = social ? ctx.data.social_out[uf.user] : ctx.data.positives[uf.user];
    for (int col = 0; col < columns.rows; ++col) {
      double r_hat = 0.0;
      for (int d = 0; d < static_cast<int>(p.size()); ++d) r_hat += h[d] * p[d] * columns.at(col, d);
      const bool observed = std::binary_search(pos.begin(), pos.end(), col);
      if (observed)
        total += (r_hat - 1.0) * (r_hat - 1.0);
      else
        total += c_neg * r_hat * r_hat;
    }
  }
  return total;
}

}  // namespace detail

inline double loss_item_efficient(const BatchContext& ctx, double c_neg) {
  return detail::loss_efficient(ctx, c_neg, /*social=*/false);
}
inline double loss_item_naive(const BatchContext& ctx, double c_neg) {
  return detail::loss_naive(ctx, c_neg, /*social=*/false);
}
inline double loss_social_efficient(const BatchContext& ctx, double c_neg) {
  return detail::loss_efficient(ctx, c_neg, /*social=*/true);
}
inline double loss_social_naive(const BatchContext& ctx, double c_neg) {
  return detail::loss_naive(ctx, c_neg, /*social=*/true);
}

inline std::size_t batch_item_positive_count(const BatchContext& ctx) {
  std::size_t n = 0;
  for (const UserForward& uf : ctx.users) n += ctx.data.positives[uf.user].size();
  return n;
}
inline std::size_t batch_social_positive_count(const BatchContext& ctx) {
  std::size_t n = 0;
  for (const UserForward& uf : ctx.users) n += ctx.data.social_out[uf.user].size();
  return n;
}

// Reconstruction regularizer: per batch user and order, the residual of
// rebuilding each domain-specific embedding from the scaled common one.
inline double loss_regularization(const BatchContext& ctx, const Vec& theta_alpha, const Vec& theta_beta) {
  double total = 0.0;
  for (const UserForward& uf : ctx.users) {
    const auto& common = uf.aspects[static_cast<int>(Aspect::kCommon)].per_order;
    const auto& item = uf.aspects[static_cast<int>(Aspect::kItem)].per_order;
    const auto& social = uf.aspects[static_cast<int>(Aspect::kSocial)].per_order;
    for (int k = 0; k < ctx.cfg.k; ++k) {
      for (int d = 0; d < ctx.cfg.d1; ++d) {
        const double ri = item[k][d] - theta_alpha[k] * common[k][d];
        const double rs = social[k][d] - theta_beta[k] * common[k][d];
        total += ri * ri + rs * rs;
      }
    }
  }
  return total;
}

// ||Theta||^2 over every trainable tensor, via the parameter registry.
inline double l2_squared(const ModelParams& p) {
  double total = 0.0;
  for_each_tensor(p, [&](const std::string&, const std::vector<double>& t) { total += squared_norm(t); });
  return total;
}

// Overall objective. The regularizer toggle drops the lambda2 term.
inline double loss_total(const BatchContext& ctx, const Config& cfg) {
  double total = loss_item_efficient(ctx, cfg.neg_weight_item);
  if (cfg.lambda1 != 0.0) total += cfg.lambda1 * loss_social_efficient(ctx, cfg.neg_weight_social);
  if (cfg.regularizer_on && cfg.lambda2 != 0.0)
    total += cfg.lambda2 * loss_regularization(ctx, ctx.params.theta_alpha, ctx.params.theta_beta);
  if (cfg.lambda3 != 0.0) total += cfg.lambda3 * l2_squared(ctx.params);
  return total;
}

}  // namespace ptln
