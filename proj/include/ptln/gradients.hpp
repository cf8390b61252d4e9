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
#include <string>
#include <vector>

#include "ptln/objective.hpp"
#include "ptln/params.hpp"
#include "ptln/tensor.hpp"

namespace ptln {

// Gradient of loss_total with respect to every parameter tensor. Member
// names mirror ModelParams so the tensor registry walks both in lockstep.
// Embedding-table rows untouched by the batch stay absent (flag false,
// row zero); with lambda3 > 0 the L2 term reaches every row, so all rows
// are touched.
struct GradientSet {
  Mat c, s, i;
  Mat q;
  Mat g;
  std::array<Vec, kNumAspects> w_attn;
  std::array<std::vector<Vec>, kNumAspects> order_bias;
  Mat w_alpha, w_beta;
  Vec b_alpha, b_beta;
  Vec h_alpha, h_beta;
  Vec h_item, h_social;
  Vec theta_alpha, theta_beta;

  std::vector<std::uint8_t> touched_c, touched_s, touched_i, touched_q, touched_g;

  Mat& aspect_table(Aspect a) {
    switch (a) {
      case Aspect::kCommon: return c;
      case Aspect::kSocial: return s;
      case Aspect::kItem: return i;
    }
    return c;
  }
  std::vector<std::uint8_t>& aspect_touched(Aspect a) {
    switch (a) {
      case Aspect::kCommon: return touched_c;
      case Aspect::kSocial: return touched_s;
      case Aspect::kItem: return touched_i;
    }
    return touched_c;
  }
};

inline GradientSet make_zero_gradients(const ModelParams& p) {
  GradientSet grad;
  grad.c = Mat(p.num_users, p.d1);
  grad.s = Mat(p.num_users, p.d1);
  grad.i = Mat(p.num_users, p.d1);
  grad.q = Mat(p.num_items, p.d1);
  grad.g = Mat(p.num_users, p.d1);
  for (int a = 0; a < kNumAspects; ++a) {
    grad.w_attn[a] = Vec(p.d1, 0.0);
    grad.order_bias[a].assign(p.k, Vec(p.d1, 0.0));
  }
  grad.w_alpha = Mat(p.d2, p.d1);
  grad.w_beta = Mat(p.d2, p.d1);
  grad.b_alpha = Vec(p.d2, 0.0);
  grad.b_beta = Vec(p.d2, 0.0);
  grad.h_alpha = Vec(p.d2, 0.0);
  grad.h_beta = Vec(p.d2, 0.0);
  grad.h_item = Vec(p.d1, 0.0);
  grad.h_social = Vec(p.d1, 0.0);
  grad.theta_alpha = Vec(p.k, 0.0);
  grad.theta_beta = Vec(p.k, 0.0);
  grad.touched_c.assign(p.num_users, 0);
  grad.touched_s.assign(p.num_users, 0);
  grad.touched_i.assign(p.num_users, 0);
  grad.touched_q.assign(p.num_items, 0);
  grad.touched_g.assign(p.num_users, 0);
  return grad;
}

namespace detail {

// Backward of s = h^T ReLU(W x + b) given ds; the pre-activations are
// recomputed, which is cheaper than storing them per gate per user.
inline void gate_backward(std::span<const double> x, const Mat& w, const Vec& b, const Vec& h, double ds,
                          Mat& dw, Vec& db, Vec& dh, Vec& dx) {
  for (int r = 0; r < w.rows; ++r) {
    const double z = dot(w.row(r), x) + b[r];
    if (z > 0.0) {
      dh[r] += ds * z;
      const double dz = ds * h[r];
      db[r] += dz;
      auto dwr = dw.row(r);
      for (int d = 0; d < w.cols; ++d) {
        dwr[d] += dz * x[d];
        dx[d] += dz * w.row(r)[d];
      }
    }
  }
}

// Backward of one whole-data loss (item or social domain), scaled by
// `scale`. Fills the per-user feature gradients and accumulates into the
// column table and prediction vector gradients.
inline void whole_data_backward(const BatchContext& ctx, bool social, double c_neg, double scale,
                                std::vector<Vec>& dp_users, Mat& d_columns,
                                std::vector<std::uint8_t>& touched_columns, Vec& dh) {
  const int d1 = ctx.cfg.d1;
  const Vec& h = social ? ctx.params.h_social : ctx.params.h_item;
  const Mat& columns = social ? ctx.params.g : ctx.params.q;

  const Mat user_gram = gram_of_users(ctx, social);
  const Mat column_gram = gram(columns);

  // all-pair quadratic term
  Mat g_user(d1, d1);   // h_d h_e c Q_de
  Mat g_column(d1, d1); // h_d h_e A_de
  for (int d = 0; d < d1; ++d)
    for (int e = 0; e < d1; ++e) {
      g_user.at(d, e) = h[d] * h[e] * c_neg * column_gram.at(d, e);
      g_column.at(d, e) = h[d] * h[e] * user_gram.at(d, e);
    }
  for (std::size_t bi = 0; bi < ctx.users.size(); ++bi) {
    const Vec& p = social ? ctx.users[bi].p_social : ctx.users[bi].p_item;
    Vec& dp = dp_users[bi];
    for (int d = 0; d < d1; ++d) {
      double acc = 0.0;
      for (int e = 0; e < d1; ++e) acc += g_user.at(d, e) * p[e];
      dp[d] += scale * 2.0 * acc;
    }
  }
  for (int col = 0; col < columns.rows; ++col) {
    const auto q_row = columns.row(col);
    auto d_row = d_columns.row(col);
    for (int d = 0; d < d1; ++d) {
      double acc = 0.0;
      for (int e = 0; e < d1; ++e) acc += g_column.at(d, e) * q_row[e];
      d_row[d] += scale * 2.0 * c_neg * acc;
    }
    touched_columns[col] = 1;
  }
  for (int d = 0; d < d1; ++d) {
    double acc = 0.0;
    for (int e = 0; e < d1; ++e) acc += h[e] * user_gram.at(d, e) * c_neg * column_gram.at(d, e);
    dh[d] += scale * 2.0 * acc;
  }

  // observed-positive correction term
  for (std::size_t bi = 0; bi < ctx.users.size(); ++bi) {
    const UserForward& uf = ctx.users[bi];
    const Vec& p = social ? uf.p_social : uf.p_item;
    const auto& pos = social ? ctx.data.social_out[uf.user] : ctx.data.positives[uf.user];
    for (int col : pos) {
      const auto q_row = columns.row(col);
      double r_hat = 0.0;
      for (int d = 0; d < d1; ++d) r_hat += h[d] * p[d] * q_row[d];
      const double dr = scale * (2.0 * (1.0 - c_neg) * r_hat - 2.0);
      auto d_row = d_columns.row(col);
      for (int d = 0; d < d1; ++d) {
        dp_users[bi][d] += dr * h[d] * q_row[d];
        d_row[d] += dr * h[d] * p[d];
        dh[d] += dr * p[d] * q_row[d];
      }
    }
  }
}

}  // namespace detail

// Exact reverse-mode gradients of loss_total over the batch captured in
// ctx. The dropout masks inside ctx are part of the differentiated
// function, so results are deterministic given the context.
inline GradientSet compute_gradients(const BatchContext& ctx, const OrderNeighborhoods& nbhd) {
  if (ctx.users.empty()) throw std::invalid_argument("compute_gradients: empty batch");
  const Config& cfg = ctx.cfg;
  const ModelParams& params = ctx.params;
  const int d1 = cfg.d1;

  GradientSet grad = make_zero_gradients(params);

  std::vector<Vec> dp_item(ctx.users.size(), Vec(d1, 0.0));
  std::vector<Vec> dp_social(ctx.users.size(), Vec(d1, 0.0));
  detail::whole_data_backward(ctx, /*social=*/false, cfg.neg_weight_item, 1.0, dp_item, grad.q,
                              grad.touched_q, grad.h_item);
  if (cfg.lambda1 != 0.0)
    detail::whole_data_backward(ctx, /*social=*/true, cfg.neg_weight_social, cfg.lambda1, dp_social, grad.g,
                                grad.touched_g, grad.h_social);

  const int c_idx = static_cast<int>(Aspect::kCommon);
  const int s_idx = static_cast<int>(Aspect::kSocial);
  const int i_idx = static_cast<int>(Aspect::kItem);
  const double reg_scale = (cfg.regularizer_on && cfg.lambda2 != 0.0) ? cfg.lambda2 : 0.0;

  for (std::size_t bi = 0; bi < ctx.users.size(); ++bi) {
    const UserForward& uf = ctx.users[bi];
    const int u = uf.user;
    const GateOutput& gates = uf.gates;
    const Vec& pd_c = uf.dropped[c_idx];
    const Vec& pd_s = uf.dropped[s_idx];
    const Vec& pd_i = uf.dropped[i_idx];

    // fusion backward
    std::array<Vec, kNumAspects> d_dropped;
    for (int a = 0; a < kNumAspects; ++a) d_dropped[a].assign(d1, 0.0);
    double d_alpha_item = 0.0, d_beta_social = 0.0;
    for (int d = 0; d < d1; ++d) {
      d_dropped[i_idx][d] += gates.alpha_item * dp_item[bi][d];
      d_dropped[c_idx][d] += gates.alpha_common * dp_item[bi][d];
      d_dropped[s_idx][d] += gates.beta_social * dp_social[bi][d];
      d_dropped[c_idx][d] += gates.beta_common * dp_social[bi][d];
      d_alpha_item += dp_item[bi][d] * (pd_i[d] - pd_c[d]);
      d_beta_social += dp_social[bi][d] * (pd_s[d] - pd_c[d]);
    }

    // two-way softmax backward: alpha_item = sigmoid(score_i - score_c)
    const double d_score_i = d_alpha_item * gates.alpha_item * gates.alpha_common;
    const double d_score_s = d_beta_social * gates.beta_social * gates.beta_common;
    detail::gate_backward(pd_c, params.w_alpha, params.b_alpha, params.h_alpha, -d_score_i, grad.w_alpha,
                          grad.b_alpha, grad.h_alpha, d_dropped[c_idx]);
    detail::gate_backward(pd_i, params.w_alpha, params.b_alpha, params.h_alpha, d_score_i, grad.w_alpha,
                          grad.b_alpha, grad.h_alpha, d_dropped[i_idx]);
    detail::gate_backward(pd_c, params.w_beta, params.b_beta, params.h_beta, -d_score_s, grad.w_beta,
                          grad.b_beta, grad.h_beta, d_dropped[c_idx]);
    detail::gate_backward(pd_s, params.w_beta, params.b_beta, params.h_beta, d_score_s, grad.w_beta,
                          grad.b_beta, grad.h_beta, d_dropped[s_idx]);

    // dropout backward (masks carry the 1/keep scaling already)
    std::array<Vec, kNumAspects> d_propagated;
    for (int a = 0; a < kNumAspects; ++a) {
      if (uf.mask[a].empty())
        d_propagated[a] = d_dropped[a];
      else
        d_propagated[a] = hadamard(d_dropped[a], uf.mask[a]);
    }

    // per-order seeds: each order receives the propagated-sum gradient,
    // plus the reconstruction-regularizer residuals
    std::array<std::vector<Vec>, kNumAspects> dz;
    for (int a = 0; a < kNumAspects; ++a) dz[a].assign(cfg.k, d_propagated[a]);
    if (reg_scale != 0.0) {
      const auto& common = uf.aspects[c_idx].per_order;
      const auto& item = uf.aspects[i_idx].per_order;
      const auto& social = uf.aspects[s_idx].per_order;
      for (int k = 0; k < cfg.k; ++k) {
        double d_theta_a = 0.0, d_theta_b = 0.0;
        for (int d = 0; d < d1; ++d) {
          const double ri = item[k][d] - params.theta_alpha[k] * common[k][d];
          const double rs = social[k][d] - params.theta_beta[k] * common[k][d];
          dz[i_idx][k][d] += reg_scale * 2.0 * ri;
          dz[s_idx][k][d] += reg_scale * 2.0 * rs;
          dz[c_idx][k][d] -= reg_scale * 2.0 * (params.theta_alpha[k] * ri + params.theta_beta[k] * rs);
          d_theta_a -= reg_scale * 2.0 * ri * common[k][d];
          d_theta_b -= reg_scale * 2.0 * rs * common[k][d];
        }
        grad.theta_alpha[k] += d_theta_a;
        grad.theta_beta[k] += d_theta_b;
      }
    }

    // propagation backward per aspect
    for (Aspect aspect : kAllAspects) {
      const int a = static_cast<int>(aspect);
      const AspectForward& fwd = uf.aspects[a];
      const Mat& table = params.aspect_table(aspect);
      const Vec& w_attn = params.w_attn[a];
      Mat& d_table = grad.aspect_table(aspect);
      auto& touched = grad.aspect_touched(aspect);

      Vec d_initial(d1, 0.0);
      if (cfg.include_initial_once) axpy(1.0, d_propagated[a], d_initial);

      for (int k = 1; k <= cfg.k; ++k) {
        const Vec& dzk = dz[a][k - 1];
        const std::vector<int>& friends = nbhd.friends(u, k);
        axpy(1.0, dzk, d_initial);
        if (friends.empty()) continue;
        if (cfg.order_bias_on) axpy(1.0, dzk, grad.order_bias[a][k - 1]);

        const Vec& weights = fwd.weights[k - 1];
        // aggregation backward
        Vec dw(weights.size());
        for (std::size_t t = 0; t < friends.size(); ++t) {
          auto d_friend = d_table.row(friends[t]);
          const auto friend_emb = table.row(friends[t]);
          axpy(weights[t], dzk, d_friend);
          touched[friends[t]] = 1;
          dw[t] = dot(dzk, friend_emb);
        }
        if (cfg.friend_attention_on) {
          // softmax backward then similarity-score backward
          double mean = 0.0;
          for (std::size_t t = 0; t < weights.size(); ++t) mean += weights[t] * dw[t];
          for (std::size_t t = 0; t < friends.size(); ++t) {
            const double de = weights[t] * (dw[t] - mean);
            const auto friend_emb = table.row(friends[t]);
            auto d_friend = d_table.row(friends[t]);
            for (int d = 0; d < d1; ++d) {
              grad.w_attn[a][d] += de * fwd.initial[d] * friend_emb[d];
              d_initial[d] += de * w_attn[d] * friend_emb[d];
              d_friend[d] += de * w_attn[d] * fwd.initial[d];
            }
          }
        }
      }
      axpy(1.0, d_initial, d_table.row(u));
      touched[u] = 1;
    }
  }

  // whole-model L2 term
  if (cfg.lambda3 != 0.0) {
    const double w = 2.0 * cfg.lambda3;
    std::vector<std::vector<double>*> param_tensors, grad_tensors;
    for_each_tensor(params, [&](const std::string&, const std::vector<double>& t) {
      param_tensors.push_back(const_cast<std::vector<double>*>(&t));
    });
    for_each_tensor(grad, [&](const std::string&, std::vector<double>& t) { grad_tensors.push_back(&t); });
    for (std::size_t n = 0; n < param_tensors.size(); ++n) {
      const auto& src = *param_tensors[n];
      auto& dst = *grad_tensors[n];
      for (std::size_t x = 0; x < src.size(); ++x) dst[x] += w * src[x];
    }
    std::fill(grad.touched_c.begin(), grad.touched_c.end(), 1);
    std::fill(grad.touched_s.begin(), grad.touched_s.end(), 1);
    std::fill(grad.touched_i.begin(), grad.touched_i.end(), 1);
    std::fill(grad.touched_q.begin(), grad.touched_q.end(), 1);
    std::fill(grad.touched_g.begin(), grad.touched_g.end(), 1);
  }

  for_each_tensor(grad, [](const std::string& name, const std::vector<double>& t) {
    if (!all_finite(t)) throw std::runtime_error("non-finite gradient in tensor " + name);
  });
  return grad;
}

// Spec-shaped entry point: builds the forward context itself. Dropout is
// active only when training == true, keep < 1 and a generator is supplied.
inline GradientSet compute_gradients(const ModelParams& params, const std::vector<int>& batch,
                                     const Dataset& data, const OrderNeighborhoods& nbhd, const Config& cfg,
                                     bool training = false, Rng* dropout_rng = nullptr) {
  if (batch.empty()) throw std::invalid_argument("compute_gradients: empty batch");
  const BatchContext ctx = build_batch_context(params, data, nbhd, batch, cfg, training, dropout_rng);
  return compute_gradients(ctx, nbhd);
}

}  // namespace ptln
