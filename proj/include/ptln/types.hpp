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

#include <cstdint>
#include <string>
#include <vector>

namespace ptln {

// Implicit-feedback dataset over dense index spaces.
//
// positives[u]  : items u interacted with (rows of the interaction matrix).
// social_out[u] : users u trusts (rows of the social matrix). Edges are
//                 directed; propagation follows outgoing edges.
// Both lists are sorted ascending and deduplicated; social lists carry no
// self-loops.
struct Dataset {
  int num_users = 0;
  int num_items = 0;
  std::vector<std::vector<int>> positives;
  std::vector<std::vector<int>> social_out;

  bool operator==(const Dataset& o) const = default;
};

// The three user-embedding roles. kCommon is shared between the social and
// item domains; the other two are domain-specific.
enum class Aspect : int { kCommon = 0, kSocial = 1, kItem = 2 };
inline constexpr int kNumAspects = 3;
inline constexpr Aspect kAllAspects[kNumAspects] = {Aspect::kCommon, Aspect::kSocial, Aspect::kItem};

struct Config {
  int d1 = 64;  // embedding size
  int d2 = 32;  // attention network size
  int k = 2;    // propagation depth

  // Uniform weights of unobserved pairs in the whole-data losses, one per
  // domain, in (0,1].
  double neg_weight_item = 0.1;
  double neg_weight_social = 0.1;

  double lambda1 = 1.0;    // social-loss weight
  double lambda2 = 0.1;    // reconstruction-regularizer weight
  double lambda3 = 1e-5;   // L2 weight over every trainable tensor

  double learning_rate = 0.01;
  // Keep probability (not drop probability) of the dropout applied to the
  // propagated aspect embeddings during training.
  double dropout_keep = 0.7;
  int batch_size = 128;
  int epochs = 100;
  std::uint64_t seed = 42;
  int threads = 1;
  std::string optimizer = "adam";  // "adam" | "sgd"

  // Ablation toggles.
  bool order_bias_on = true;
  bool friend_attention_on = true;
  bool regularizer_on = true;

  // When set, the final user embedding adds the initial embedding once on
  // top of the per-order sum. Off by default: the per-order sum alone.
  bool include_initial_once = false;

  // Early stopping: carve val_fraction of each user's train positives into a
  // validation slice and stop after `patience` epochs without NDCG@10
  // improvement. patience == 0 disables it.
  double val_fraction = 0.0;
  int patience = 0;

  bool valid_dims() const {
    return d1 >= 1 && d2 >= 1 && k >= 1 && neg_weight_item > 0.0 && neg_weight_item <= 1.0 &&
           neg_weight_social > 0.0 && neg_weight_social <= 1.0 && lambda1 >= 0.0 && lambda2 >= 0.0 &&
           lambda3 >= 0.0 && dropout_keep > 0.0 && dropout_keep <= 1.0 && batch_size >= 1 && epochs >= 0;
  }
};

struct Violation {
  enum class Kind { kItemOutOfRange, kUserOutOfRange, kDuplicate, kUnsorted, kSelfLoop };
  Kind kind;
  int user;    // row the violation was found in
  int value;   // offending index (or -1)
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

inline void check_lists(const std::vector<std::vector<int>>& lists, int bound, bool forbid_self,
                        Violation::Kind range_kind, ValidationReport& report) {
  for (int u = 0; u < static_cast<int>(lists.size()); ++u) {
    const auto& row = lists[u];
    for (std::size_t p = 0; p < row.size(); ++p) {
      const int x = row[p];
      if (x < 0 || x >= bound) {
        report.violations.push_back({range_kind, u, x, "index " + std::to_string(x) + " out of range in row " + std::to_string(u)});
      }
      if (p > 0) {
        if (row[p] == row[p - 1])
          report.violations.push_back({Violation::Kind::kDuplicate, u, x, "duplicate index " + std::to_string(x) + " in row " + std::to_string(u)});
        else if (row[p] < row[p - 1])
          report.violations.push_back({Violation::Kind::kUnsorted, u, x, "row " + std::to_string(u) + " not sorted ascending"});
      }
      if (forbid_self && x == u)
        report.violations.push_back({Violation::Kind::kSelfLoop, u, x, "self-loop at user " + std::to_string(u)});
    }
  }
}

}  // namespace detail

// Report-style check of the Dataset invariants: in-range indices, sorted
// deduplicated lists, no social self-loops. Empty report iff valid.
inline ValidationReport validate(const Dataset& ds) {
  ValidationReport report;
  if (static_cast<int>(ds.positives.size()) != ds.num_users)
    report.violations.push_back({Violation::Kind::kUserOutOfRange, -1, static_cast<int>(ds.positives.size()),
                                 "positives has " + std::to_string(ds.positives.size()) + " rows, expected " + std::to_string(ds.num_users)});
  if (static_cast<int>(ds.social_out.size()) != ds.num_users)
    report.violations.push_back({Violation::Kind::kUserOutOfRange, -1, static_cast<int>(ds.social_out.size()),
                                 "social_out has " + std::to_string(ds.social_out.size()) + " rows, expected " + std::to_string(ds.num_users)});
  detail::check_lists(ds.positives, ds.num_items, /*forbid_self=*/false, Violation::Kind::kItemOutOfRange, report);
  detail::check_lists(ds.social_out, ds.num_users, /*forbid_self=*/true, Violation::Kind::kUserOutOfRange, report);
  return report;
}

inline std::size_t total_positives(const Dataset& ds) {
  std::size_t n = 0;
  for (const auto& row : ds.positives) n += row.size();
  return n;
}

inline std::size_t total_social_edges(const Dataset& ds) {
  std::size_t n = 0;
  for (const auto& row : ds.social_out) n += row.size();
  return n;
}

}  // namespace ptln
