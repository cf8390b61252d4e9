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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ptln/ingest.hpp"
#include "ptln/metrics.hpp"
#include "ptln/params.hpp"
#include "ptln/training.hpp"
#include "ptln/types.hpp"

namespace ptln {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kDatasetSchema = "ptln.dataset.v1";
inline constexpr const char* kIdMapSchema = "ptln.idmap.v1";
inline constexpr const char* kParamsSchema = "ptln.params.v1";
inline constexpr const char* kManifestSchema = "ptln.manifest.v1";
inline constexpr const char* kMetricsSchema = "ptln.metrics.v1";

// --- hashing ---------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fingerprint_files(const std::vector<fs::path>& paths, const std::string& salt = "") {
  std::uint64_t h = fnv1a64(salt);
  for (const auto& p : paths) h = fnv1a64(read_file(p), h);
  return to_hex(h);
}

// Write-then-rename so readers never observe a half-written file.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

// --- json mappings ---------------------------------------------------

inline json mat_to_json(const Mat& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"values", m.data}};
}

inline Mat mat_from_json(const json& j) {
  Mat m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.data = j.at("values").get<std::vector<double>>();
  if (static_cast<int>(m.data.size()) != m.rows * m.cols)
    throw std::runtime_error("matrix value count does not match rows*cols");
  return m;
}

inline json config_to_json(const Config& c) {
  return json{{"d1", c.d1},
              {"d2", c.d2},
              {"k", c.k},
              {"neg_weight_item", c.neg_weight_item},
              {"neg_weight_social", c.neg_weight_social},
              {"lambda1", c.lambda1},
              {"lambda2", c.lambda2},
              {"lambda3", c.lambda3},
              {"learning_rate", c.learning_rate},
              {"dropout_keep", c.dropout_keep},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"threads", c.threads},
              {"optimizer", c.optimizer},
              {"order_bias_on", c.order_bias_on},
              {"friend_attention_on", c.friend_attention_on},
              {"regularizer_on", c.regularizer_on},
              {"include_initial_once", c.include_initial_once},
              {"val_fraction", c.val_fraction},
              {"patience", c.patience}};
}

inline Config config_from_json(const json& j) {
  Config c;
  j.at("d1").get_to(c.d1);
  j.at("d2").get_to(c.d2);
  j.at("k").get_to(c.k);
  j.at("neg_weight_item").get_to(c.neg_weight_item);
  j.at("neg_weight_social").get_to(c.neg_weight_social);
  j.at("lambda1").get_to(c.lambda1);
  j.at("lambda2").get_to(c.lambda2);
  j.at("lambda3").get_to(c.lambda3);
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("dropout_keep").get_to(c.dropout_keep);
  j.at("batch_size").get_to(c.batch_size);
  j.at("epochs").get_to(c.epochs);
  j.at("seed").get_to(c.seed);
  j.at("threads").get_to(c.threads);
  j.at("optimizer").get_to(c.optimizer);
  j.at("order_bias_on").get_to(c.order_bias_on);
  j.at("friend_attention_on").get_to(c.friend_attention_on);
  j.at("regularizer_on").get_to(c.regularizer_on);
  j.at("include_initial_once").get_to(c.include_initial_once);
  j.at("val_fraction").get_to(c.val_fraction);
  j.at("patience").get_to(c.patience);
  return c;
}

inline json params_to_json(const ModelParams& p) {
  json biases = json::object();
  json attn = json::object();
  for (Aspect a : kAllAspects) {
    attn[aspect_name(a)] = p.w_attn[static_cast<int>(a)];
    biases[aspect_name(a)] = p.order_bias[static_cast<int>(a)];
  }
  return json{{"num_users", p.num_users},
              {"num_items", p.num_items},
              {"d1", p.d1},
              {"d2", p.d2},
              {"k", p.k},
              {"c", mat_to_json(p.c)},
              {"s", mat_to_json(p.s)},
              {"i", mat_to_json(p.i)},
              {"q", mat_to_json(p.q)},
              {"g", mat_to_json(p.g)},
              {"w_attn", attn},
              {"order_bias", biases},
              {"w_alpha", mat_to_json(p.w_alpha)},
              {"w_beta", mat_to_json(p.w_beta)},
              {"b_alpha", p.b_alpha},
              {"b_beta", p.b_beta},
              {"h_alpha", p.h_alpha},
              {"h_beta", p.h_beta},
              {"h_item", p.h_item},
              {"h_social", p.h_social},
              {"theta_alpha", p.theta_alpha},
              {"theta_beta", p.theta_beta}};
}

inline ModelParams params_from_json(const json& j) {
  ModelParams p;
  j.at("num_users").get_to(p.num_users);
  j.at("num_items").get_to(p.num_items);
  j.at("d1").get_to(p.d1);
  j.at("d2").get_to(p.d2);
  j.at("k").get_to(p.k);
  p.c = mat_from_json(j.at("c"));
  p.s = mat_from_json(j.at("s"));
  p.i = mat_from_json(j.at("i"));
  p.q = mat_from_json(j.at("q"));
  p.g = mat_from_json(j.at("g"));
  for (Aspect a : kAllAspects) {
    j.at("w_attn").at(aspect_name(a)).get_to(p.w_attn[static_cast<int>(a)]);
    j.at("order_bias").at(aspect_name(a)).get_to(p.order_bias[static_cast<int>(a)]);
  }
  p.w_alpha = mat_from_json(j.at("w_alpha"));
  p.w_beta = mat_from_json(j.at("w_beta"));
  j.at("b_alpha").get_to(p.b_alpha);
  j.at("b_beta").get_to(p.b_beta);
  j.at("h_alpha").get_to(p.h_alpha);
  j.at("h_beta").get_to(p.h_beta);
  j.at("h_item").get_to(p.h_item);
  j.at("h_social").get_to(p.h_social);
  j.at("theta_alpha").get_to(p.theta_alpha);
  j.at("theta_beta").get_to(p.theta_beta);
  return p;
}

// --- processed dataset directory --------------------------------------

struct ProcessedDataset {
  Dataset train;
  std::vector<std::vector<int>> test;
  IdMaps ids;  // empty for synthetic data (indices are the IDs)
};

inline void save_processed(const fs::path& dir, const ProcessedDataset& pd) {
  fs::create_directories(dir);
  json j{{"schema", kDatasetSchema},
         {"num_users", pd.train.num_users},
         {"num_items", pd.train.num_items},
         {"train_positives", pd.train.positives},
         {"test_positives", pd.test},
         {"social_out", pd.train.social_out}};
  write_file_atomic(dir / "dataset.json", j.dump(2) + "\n");
  if (!pd.ids.empty()) {
    json ids{{"schema", kIdMapSchema}, {"users", pd.ids.users}, {"items", pd.ids.items}};
    write_file_atomic(dir / "id_maps.json", ids.dump(2) + "\n");
  }
}

inline ProcessedDataset load_processed(const fs::path& dir) {
  const json j = json::parse(read_file(dir / "dataset.json"));
  if (j.at("schema").get<std::string>() != kDatasetSchema)
    throw std::runtime_error("unexpected dataset schema in " + (dir / "dataset.json").string());
  ProcessedDataset pd;
  j.at("num_users").get_to(pd.train.num_users);
  j.at("num_items").get_to(pd.train.num_items);
  j.at("train_positives").get_to(pd.train.positives);
  j.at("test_positives").get_to(pd.test);
  j.at("social_out").get_to(pd.train.social_out);
  if (fs::exists(dir / "id_maps.json")) {
    const json ids = json::parse(read_file(dir / "id_maps.json"));
    ids.at("users").get_to(pd.ids.users);
    ids.at("items").get_to(pd.ids.items);
  }
  return pd;
}

// --- checkpoints -------------------------------------------------------

inline void save_checkpoint(const fs::path& path, const ModelParams& params, const Config& cfg) {
  json j{{"schema", kParamsSchema}, {"config", config_to_json(cfg)}, {"params", params_to_json(params)}};
  write_file_atomic(path, j.dump() + "\n");
}

inline std::pair<ModelParams, Config> load_checkpoint(const fs::path& path) {
  const json j = json::parse(read_file(path));
  if (j.at("schema").get<std::string>() != kParamsSchema)
    throw std::runtime_error("unexpected checkpoint schema in " + path.string());
  return {params_from_json(j.at("params")), config_from_json(j.at("config"))};
}

// --- reports and logs --------------------------------------------------

inline json metrics_to_json(const MetricsReport& report) {
  auto rows_to_json = [](const std::vector<MetricsAtN>& rows) {
    json out = json::object();
    std::vector<double> precision, recall, ndcg, mrr;
    for (const auto& m : rows) {
      precision.push_back(m.precision);
      recall.push_back(m.recall);
      ndcg.push_back(m.ndcg);
      mrr.push_back(m.mrr);
    }
    out["precision"] = precision;
    out["recall"] = recall;
    out["ndcg"] = ndcg;
    out["mrr"] = mrr;
    return out;
  };
  json j{{"schema", kMetricsSchema},
         {"cutoffs", report.cutoffs},
         {"users_evaluated", report.users_evaluated},
         {"overall", rows_to_json(report.overall)}};
  if (!report.slices.empty()) {
    json slices = json::array();
    for (const auto& s : report.slices) {
      slices.push_back(json{{"label", s.label}, {"users", s.users}, {"metrics", rows_to_json(s.metrics)}});
    }
    j["slices"] = slices;
  }
  return j;
}

inline json epoch_to_json(const EpochStats& e) {
  json j{{"epoch", e.epoch},        {"loss_item", e.loss_item}, {"loss_social", e.loss_social},
         {"loss_reg", e.loss_reg},  {"loss_l2", e.loss_l2},     {"loss_total", e.loss_total},
         {"wall_ms", e.wall_ms}};
  if (e.val_ndcg10 >= 0.0) j["val_ndcg10"] = e.val_ndcg10;
  return j;
}

// --- experiment manifest -----------------------------------------------

struct Manifest {
  std::string command;
  std::map<std::string, std::string> args;
  std::string dataset_fingerprint;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
  std::map<std::string, double> timings_ms;
  json extra = json::object();
};

inline void write_manifest(const fs::path& dir, const Manifest& m) {
  fs::create_directories(dir);
  json j{{"schema", kManifestSchema},
         {"command", m.command},
         {"args", m.args},
         {"dataset_fingerprint", m.dataset_fingerprint},
         {"seed", m.seed},
         {"artifacts", m.artifacts},
         {"timings_ms", m.timings_ms}};
  if (!m.extra.empty()) j["extra"] = m.extra;
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace ptln
