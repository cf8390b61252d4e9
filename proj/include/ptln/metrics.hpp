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
#include <climits>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptln/graph.hpp"
#include "ptln/parallel.hpp"
#include "ptln/params.hpp"
#include "ptln/propagation.hpp"
#include "ptln/tensor.hpp"
#include "ptln/transfer.hpp"
#include "ptln/types.hpp"

namespace ptln {

struct MetricsAtN {
  double precision = 0.0;
  double recall = 0.0;
  double ndcg = 0.0;
  double mrr = 0.0;
};

// Top-N metrics of a single ranked list against a sorted relevant set.
// Binary relevance; DCG gain 1/log2(rank+1).
inline MetricsAtN metrics_at(const std::vector<int>& ranked, const std::vector<int>& relevant_sorted, int n) {
  if (n < 1) throw std::invalid_argument("metrics_at: cutoff must be >= 1");
  if (relevant_sorted.empty()) throw std::invalid_argument("metrics_at: empty relevant set");
  int hits = 0;
  int first_hit_rank = 0;
  double dcg = 0.0;
  const int limit = std::min<int>(n, static_cast<int>(ranked.size()));
  for (int r = 1; r <= limit; ++r) {
    if (std::binary_search(relevant_sorted.begin(), relevant_sorted.end(), ranked[r - 1])) {
      ++hits;
      dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
      if (first_hit_rank == 0) first_hit_rank = r;
    }
  }
  double idcg = 0.0;
  const int ideal = std::min<int>(n, static_cast<int>(relevant_sorted.size()));
  for (int r = 1; r <= ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);

  MetricsAtN out;
  out.precision = static_cast<double>(hits) / static_cast<double>(n);
  out.recall = static_cast<double>(hits) / static_cast<double>(relevant_sorted.size());
  out.ndcg = dcg / idcg;
  out.mrr = first_hit_rank > 0 ? 1.0 / static_cast<double>(first_hit_rank) : 0.0;
  return out;
}

// Items ordered by score descending, ties broken by ascending item index;
// the user's train positives are excluded from the candidate set.
inline std::vector<int> rank_from_scores(const Vec& scores, const std::vector<int>& exclude_sorted) {
  std::vector<int> order;
  order.reserve(scores.size());
  for (int v = 0; v < static_cast<int>(scores.size()); ++v)
    if (!std::binary_search(exclude_sorted.begin(), exclude_sorted.end(), v)) order.push_back(v);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

// Item-domain scores of one user at inference (no dropout).
inline Vec score_items_for_user(const ModelParams& params, const OrderNeighborhoods& nbhd, int u,
                                const Config& cfg) {
  const Vec c_u = propagate_user_aspect(params, nbhd, Aspect::kCommon, u, cfg).propagated;
  const Vec s_u = propagate_user_aspect(params, nbhd, Aspect::kSocial, u, cfg).propagated;
  const Vec i_u = propagate_user_aspect(params, nbhd, Aspect::kItem, u, cfg).propagated;
  const GateOutput gates = gates_for_user(c_u, i_u, s_u, params);
  Vec p_item, p_social;
  fuse(c_u, i_u, s_u, gates, p_item, p_social);
  Vec scores(params.num_items);
  for (int v = 0; v < params.num_items; ++v) scores[v] = predict_item(p_item, params.q.row(v), params.h_item);
  return scores;
}

inline std::vector<int> rank_items(const ModelParams& params, int u, const Dataset& train,
                                   const OrderNeighborhoods& nbhd, const Config& cfg) {
  return rank_from_scores(score_items_for_user(params, nbhd, u, cfg), train.positives[u]);
}

inline std::vector<int> rank_items(const ModelParams& params, int u, const Dataset& train, const Config& cfg) {
  return rank_items(params, u, train, khop_friends(train, cfg.k), cfg);
}

struct MetricsReport {
  std::vector<int> cutoffs;
  int users_evaluated = 0;
  std::vector<MetricsAtN> overall;  // one per cutoff

  struct Slice {
    std::string label;
    int min_count = 0;
    int max_count = INT_MAX;
    int users = 0;
    std::vector<MetricsAtN> metrics;  // one per cutoff
  };
  std::vector<Slice> slices;  // present only when slicing was requested
};

// Interaction-count buckets for the cold-start analysis.
inline std::vector<MetricsReport::Slice> default_slices(const std::vector<int>& cutoffs) {
  std::vector<MetricsReport::Slice> slices;
  slices.push_back({"0-4", 0, 4, 0, std::vector<MetricsAtN>(cutoffs.size())});
  slices.push_back({"5-16", 5, 16, 0, std::vector<MetricsAtN>(cutoffs.size())});
  slices.push_back({"17+", 17, INT_MAX, 0, std::vector<MetricsAtN>(cutoffs.size())});
  return slices;
}

// Ranks every non-train item for each user with held-out positives and
// averages the top-N metrics; optionally sliced by train positive count.
inline MetricsReport evaluate(const ModelParams& params, const Dataset& train,
                              const std::vector<std::vector<int>>& test, const std::vector<int>& cutoffs,
                              bool with_slices, const Config& cfg) {
  if (cutoffs.empty()) throw std::invalid_argument("evaluate: no cutoffs");
  if (params.num_users != train.num_users || params.num_items != train.num_items)
    throw std::invalid_argument("evaluate: params/dataset dimension mismatch");

  std::vector<int> eligible;
  for (int u = 0; u < train.num_users; ++u)
    if (u < static_cast<int>(test.size()) && !test[u].empty()) eligible.push_back(u);
  if (eligible.empty()) throw std::runtime_error("evaluate: no users with held-out positives");

  const OrderNeighborhoods nbhd = khop_friends(train, cfg.k);
  std::vector<std::vector<MetricsAtN>> per_user(eligible.size());
  parallel_for(static_cast<int>(eligible.size()), cfg.threads, [&](int idx) {
    const int u = eligible[idx];
    const std::vector<int> ranked = rank_items(params, u, train, nbhd, cfg);
    std::vector<MetricsAtN> rows(cutoffs.size());
    for (std::size_t ci = 0; ci < cutoffs.size(); ++ci) rows[ci] = metrics_at(ranked, test[u], cutoffs[ci]);
    per_user[idx] = std::move(rows);
  });

  MetricsReport report;
  report.cutoffs = cutoffs;
  report.users_evaluated = static_cast<int>(eligible.size());
  report.overall.assign(cutoffs.size(), MetricsAtN{});
  if (with_slices) report.slices = default_slices(cutoffs);

  auto accumulate = [&](std::vector<MetricsAtN>& into, const std::vector<MetricsAtN>& row) {
    for (std::size_t ci = 0; ci < row.size(); ++ci) {
      into[ci].precision += row[ci].precision;
      into[ci].recall += row[ci].recall;
      into[ci].ndcg += row[ci].ndcg;
      into[ci].mrr += row[ci].mrr;
    }
  };
  auto divide = [&](std::vector<MetricsAtN>& rows, int count) {
    if (count == 0) return;
    for (auto& m : rows) {
      m.precision /= count;
      m.recall /= count;
      m.ndcg /= count;
      m.mrr /= count;
    }
  };

  for (std::size_t idx = 0; idx < eligible.size(); ++idx) {
    accumulate(report.overall, per_user[idx]);
    if (with_slices) {
      const int interactions = static_cast<int>(train.positives[eligible[idx]].size());
      for (auto& slice : report.slices) {
        if (interactions >= slice.min_count && interactions <= slice.max_count) {
          ++slice.users;
          accumulate(slice.metrics, per_user[idx]);
          break;
        }
      }
    }
  }
  divide(report.overall, report.users_evaluated);
  for (auto& slice : report.slices) divide(slice.metrics, slice.users);
  return report;
}

// Plain-text table, metric rows by cutoff columns.
inline std::string render_metrics_text(const MetricsReport& report) {
  std::string out;
  char buf[128];
  auto table = [&](const std::vector<MetricsAtN>& rows) {
    const char* names[4] = {"precision", "recall", "ndcg", "mrr"};
    for (int metric = 0; metric < 4; ++metric) {
      std::snprintf(buf, sizeof(buf), "%-10s", names[metric]);
      out += buf;
      for (std::size_t ci = 0; ci < report.cutoffs.size(); ++ci) {
        const MetricsAtN& m = rows[ci];
        const double value = metric == 0 ? m.precision : metric == 1 ? m.recall : metric == 2 ? m.ndcg : m.mrr;
        std::snprintf(buf, sizeof(buf), " %10.6f", value);
        out += buf;
      }
      out += '\n';
    }
  };

  std::snprintf(buf, sizeof(buf), "users evaluated: %d\n", report.users_evaluated);
  out += buf;
  out += "metric    ";
  for (int n : report.cutoffs) {
    std::snprintf(buf, sizeof(buf), "       N=%-3d", n);
    out += buf;
  }
  out += '\n';
  table(report.overall);
  for (const auto& slice : report.slices) {
    std::snprintf(buf, sizeof(buf), "\nslice train_count=%s (users: %d)\n", slice.label.c_str(), slice.users);
    out += buf;
    table(slice.metrics);
  }
  return out;
}

}  // namespace ptln
