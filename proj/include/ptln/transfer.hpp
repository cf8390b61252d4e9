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

#include <cmath>
#include <stdexcept>

#include "ptln/params.hpp"
#include "ptln/tensor.hpp"

namespace ptln {

// Two-way gates deciding how much common vs domain-specific knowledge
// enters each domain's feature embedding. Each pair sums to 1.
struct GateOutput {
  double alpha_common = 0.5;
  double alpha_item = 0.5;
  double beta_common = 0.5;
  double beta_social = 0.5;
};

// Two-layer attention score: h^T ReLU(W x + b).
inline double gate_scores(std::span<const double> x, const Mat& w, std::span<const double> b,
                          std::span<const double> h) {
  if (w.cols != static_cast<int>(x.size()) || w.rows != static_cast<int>(b.size()) || b.size() != h.size())
    throw std::invalid_argument("gate_scores: dimension mismatch");
  double out = 0.0;
  for (int r = 0; r < w.rows; ++r) {
    const double z = dot(w.row(r), x) + b[r];
    if (z > 0.0) out += h[r] * z;
  }
  return out;
}

inline GateOutput gates_for_user(std::span<const double> c_u, std::span<const double> i_u,
                                 std::span<const double> s_u, const ModelParams& p) {
  GateOutput gates;
  const double score_c_alpha = gate_scores(c_u, p.w_alpha, p.b_alpha, p.h_alpha);
  const double score_i = gate_scores(i_u, p.w_alpha, p.b_alpha, p.h_alpha);
  // Two-way softmax as a sigmoid of the score difference.
  gates.alpha_common = 1.0 / (1.0 + std::exp(score_i - score_c_alpha));
  gates.alpha_item = 1.0 - gates.alpha_common;

  const double score_c_beta = gate_scores(c_u, p.w_beta, p.b_beta, p.h_beta);
  const double score_s = gate_scores(s_u, p.w_beta, p.b_beta, p.h_beta);
  gates.beta_common = 1.0 / (1.0 + std::exp(score_s - score_c_beta));
  gates.beta_social = 1.0 - gates.beta_common;
  return gates;
}

// Convex fusion of domain-specific and common knowledge.
inline void fuse(std::span<const double> c_u, std::span<const double> i_u, std::span<const double> s_u,
                 const GateOutput& gates, Vec& p_item, Vec& p_social) {
  p_item.resize(c_u.size());
  p_social.resize(c_u.size());
  for (std::size_t d = 0; d < c_u.size(); ++d) {
    p_item[d] = gates.alpha_item * i_u[d] + gates.alpha_common * c_u[d];
    p_social[d] = gates.beta_social * s_u[d] + gates.beta_common * c_u[d];
  }
}

// Weighted inner product of the element-wise product (neural-MF output head).
inline double predict_item(std::span<const double> p_item, std::span<const double> q_v,
                           std::span<const double> h_item) {
  if (p_item.size() != q_v.size() || q_v.size() != h_item.size())
    throw std::invalid_argument("predict_item: dimension mismatch");
  double s = 0.0;
  for (std::size_t d = 0; d < p_item.size(); ++d) s += h_item[d] * p_item[d] * q_v[d];
  return s;
}

inline double predict_social(std::span<const double> p_social, std::span<const double> g_t,
                             std::span<const double> h_social) {
  if (p_social.size() != g_t.size() || g_t.size() != h_social.size())
    throw std::invalid_argument("predict_social: dimension mismatch");
  double s = 0.0;
  for (std::size_t d = 0; d < p_social.size(); ++d) s += h_social[d] * p_social[d] * g_t[d];
  return s;
}

}  // namespace ptln
