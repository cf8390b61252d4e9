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
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ptln/rng.hpp"
#include "ptln/types.hpp"

namespace ptln {

// Dense index -> raw ID, per entity class. Raw IDs are assigned dense
// indices in lexicographic order, so the mapping is independent of row
// order in the input files.
struct IdMaps {
  std::vector<std::string> users;
  std::vector<std::string> items;
  bool empty() const { return users.empty() && items.empty(); }
};

struct SplitSpec {
  double holdout_fraction = 0.2;
  std::uint64_t seed = 13;
  int min_train = 1;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits on tabs when the line has any, otherwise on commas.
inline std::vector<std::string> split_row(const std::string& line) {
  const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

inline double parse_rating(const std::string& field, const std::string& path, int line_no) {
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size())
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed rating '" + field + "'");
  return value;
}

}  // namespace detail

// Rows of (user_id, item_id, rating); rows at or above the threshold
// become positives, the rest are discarded. Extra trailing fields
// (timestamps) are ignored.
inline std::vector<std::pair<std::string, std::string>> load_interactions(const std::string& path,
                                                                          double rating_threshold) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open interactions file: " + path);
  std::vector<std::pair<std::string, std::string>> positives;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_row(line);
    if (fields.size() < 3 || fields[0].empty() || fields[1].empty())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected (user, item, rating) row");
    const double rating = detail::parse_rating(fields[2], path, line_no);
    if (rating >= rating_threshold) positives.emplace_back(fields[0], fields[1]);
  }
  if (positives.empty())
    throw std::runtime_error(path + ": no interactions at or above rating threshold");
  return positives;
}

struct SocialEdges {
  std::vector<std::pair<std::string, std::string>> edges;  // directed, u trusts t
  int self_loops_dropped = 0;
};

// Rows of (user_id, friend_id). Self-loops are dropped with a warning
// count; symmetrize adds the reverse of every edge.
inline SocialEdges load_social(const std::string& path, bool symmetrize) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open social file: " + path);
  SocialEdges out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_row(line);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected (user, friend) row");
    if (fields[0] == fields[1]) {
      ++out.self_loops_dropped;
      continue;
    }
    out.edges.emplace_back(fields[0], fields[1]);
    if (symmetrize) out.edges.emplace_back(fields[1], fields[0]);
  }
  return out;
}

struct IngestedData {
  Dataset dataset;  // all positives, unsplit
  IdMaps ids;
  int self_loops_dropped = 0;
};

// Densifies raw IDs into index spaces. Users appearing only in the social
// file keep an index: they carry no interactions but still propagate.
inline IngestedData build_dataset(const std::vector<std::pair<std::string, std::string>>& interactions,
                                  const SocialEdges& social) {
  std::set<std::string> user_ids, item_ids;
  for (const auto& [u, v] : interactions) {
    user_ids.insert(u);
    item_ids.insert(v);
  }
  for (const auto& [u, t] : social.edges) {
    user_ids.insert(u);
    user_ids.insert(t);
  }

  IngestedData out;
  out.self_loops_dropped = social.self_loops_dropped;
  out.ids.users.assign(user_ids.begin(), user_ids.end());
  out.ids.items.assign(item_ids.begin(), item_ids.end());
  std::map<std::string, int> user_index, item_index;
  for (int u = 0; u < static_cast<int>(out.ids.users.size()); ++u) user_index[out.ids.users[u]] = u;
  for (int v = 0; v < static_cast<int>(out.ids.items.size()); ++v) item_index[out.ids.items[v]] = v;

  Dataset& ds = out.dataset;
  ds.num_users = static_cast<int>(out.ids.users.size());
  ds.num_items = static_cast<int>(out.ids.items.size());
  std::vector<std::set<int>> pos(ds.num_users), soc(ds.num_users);
  for (const auto& [u, v] : interactions) pos[user_index[u]].insert(item_index[v]);
  for (const auto& [u, t] : social.edges) soc[user_index[u]].insert(user_index[t]);
  ds.positives.reserve(ds.num_users);
  ds.social_out.reserve(ds.num_users);
  for (int u = 0; u < ds.num_users; ++u) {
    ds.positives.emplace_back(pos[u].begin(), pos[u].end());
    ds.social_out.emplace_back(soc[u].begin(), soc[u].end());
  }
  return out;
}

struct SplitResult {
  Dataset train;
  std::vector<std::vector<int>> test;  // held-out positives per user
};

// Per-user random holdout. ceil(fraction * |positives|) items move to
// test unless that would leave fewer than min_train in train; social
// edges stay in train. Deterministic given the seed.
inline SplitResult split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.holdout_fraction > 0.0 && spec.holdout_fraction < 1.0))
    throw std::invalid_argument("split: holdout_fraction must be in (0,1)");
  if (spec.min_train < 1) throw std::invalid_argument("split: min_train must be >= 1");

  SplitResult out;
  out.train = ds;
  out.test.assign(ds.num_users, {});
  Rng rng(spec.seed);
  for (int u = 0; u < ds.num_users; ++u) {
    const auto& items = ds.positives[u];
    const int count = static_cast<int>(items.size());
    int n_test = static_cast<int>(std::ceil(spec.holdout_fraction * count));
    n_test = std::min(n_test, std::max(0, count - spec.min_train));
    if (n_test <= 0) continue;
    std::vector<int> shuffled = items;
    rng.shuffle(shuffled);
    std::vector<int> test_items(shuffled.begin(), shuffled.begin() + n_test);
    std::sort(test_items.begin(), test_items.end());
    std::vector<int> train_items(shuffled.begin() + n_test, shuffled.end());
    std::sort(train_items.begin(), train_items.end());
    out.train.positives[u] = std::move(train_items);
    out.test[u] = std::move(test_items);
  }
  return out;
}

}  // namespace ptln
