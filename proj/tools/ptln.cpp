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
//
// Command-line driver: prepare/synth build processed dataset directories,
// train fits a model and writes a checkpoint, eval produces metric
// reports, grid sweeps config overrides.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ptln/gradients.hpp"
#include "ptln/io.hpp"
#include "ptln/synthetic.hpp"
#include "ptln/training.hpp"

namespace {

using ptln::json;
namespace fs = std::filesystem;

class StageTimer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string resolve_out_dir(std::string flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("PTLN_OUT_DIR"); env != nullptr && *env != '\0') return env;
  throw std::runtime_error("no output directory: pass --out or set PTLN_OUT_DIR");
}

std::vector<int> parse_cutoffs(const std::string& text) {
  std::vector<int> cutoffs;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const int n = std::stoi(part);
    if (n < 1) throw std::runtime_error("cutoffs must be >= 1");
    cutoffs.push_back(n);
  }
  if (cutoffs.empty()) throw std::runtime_error("empty cutoff list");
  return cutoffs;
}

struct TrainFlags {
  ptln::Config cfg;
  bool no_order_bias = false;
  bool no_attention = false;
  bool no_reg = false;

  ptln::Config effective() const {
    ptln::Config out = cfg;
    out.order_bias_on = !no_order_bias;
    out.friend_attention_on = !no_attention;
    out.regularizer_on = !no_reg;
    return out;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--d1", flags.cfg.d1, "embedding size");
  cmd->add_option("--d2", flags.cfg.d2, "attention network size");
  cmd->add_option("--k", flags.cfg.k, "propagation depth");
  cmd->add_option("--lr", flags.cfg.learning_rate, "learning rate");
  cmd->add_option("--dropout-keep", flags.cfg.dropout_keep, "dropout keep probability in (0,1]");
  cmd->add_option("--lambda1", flags.cfg.lambda1, "social loss weight");
  cmd->add_option("--lambda2", flags.cfg.lambda2, "reconstruction regularizer weight");
  cmd->add_option("--lambda3", flags.cfg.lambda3, "L2 weight");
  cmd->add_option("--neg-weight-item", flags.cfg.neg_weight_item, "negative-pair weight, item domain");
  cmd->add_option("--neg-weight-social", flags.cfg.neg_weight_social, "negative-pair weight, social domain");
  cmd->add_option("--epochs", flags.cfg.epochs, "training epochs");
  cmd->add_option("--batch", flags.cfg.batch_size, "batch size (users)");
  cmd->add_option("--seed", flags.cfg.seed, "random seed");
  cmd->add_option("--optimizer", flags.cfg.optimizer, "adam or sgd");
  cmd->add_option("--threads", flags.cfg.threads, "worker thread count");
  cmd->add_option("--val-fraction", flags.cfg.val_fraction, "validation holdout fraction (early stopping)");
  cmd->add_option("--patience", flags.cfg.patience, "early-stopping patience in epochs (0 = off)");
  cmd->add_flag("--no-order-bias", flags.no_order_bias, "disable order bias");
  cmd->add_flag("--no-attention", flags.no_attention, "uniform friend weights instead of attention");
  cmd->add_flag("--no-reg", flags.no_reg, "disable the reconstruction regularizer");
  cmd->add_flag("--include-initial-once", flags.cfg.include_initial_once,
                "add the initial embedding once on top of the per-order sum");
}

std::map<std::string, std::string> config_args(const ptln::Config& cfg) {
  std::map<std::string, std::string> args;
  const json j = ptln::config_to_json(cfg);
  for (const auto& [key, value] : j.items()) args[key] = value.dump();
  return args;
}

// --- subcommands -------------------------------------------------------

int run_prepare(const std::string& interactions_path, const std::string& social_path,
                const std::string& out_flag, double threshold, double holdout, int min_train,
                std::uint64_t split_seed, bool symmetrize) {
  StageTimer total;
  const fs::path out_dir = resolve_out_dir(out_flag);

  const auto interactions = ptln::load_interactions(interactions_path, threshold);
  const auto social = ptln::load_social(social_path, symmetrize);
  const auto ingested = ptln::build_dataset(interactions, social);
  if (ingested.self_loops_dropped > 0)
    std::cerr << "warning: dropped " << ingested.self_loops_dropped << " self-loop(s)\n";
  const auto report = ptln::validate(ingested.dataset);
  if (!report.ok()) throw std::runtime_error("ingested dataset invalid: " + report.violations.front().message);

  const auto sr = ptln::split(ingested.dataset, ptln::SplitSpec{holdout, split_seed, min_train});
  ptln::save_processed(out_dir, ptln::ProcessedDataset{sr.train, sr.test, ingested.ids});

  ptln::Manifest manifest;
  manifest.command = "prepare";
  manifest.args = {{"interactions", interactions_path},
                   {"social", social_path},
                   {"threshold", std::to_string(threshold)},
                   {"holdout", std::to_string(holdout)},
                   {"min_train", std::to_string(min_train)},
                   {"split_seed", std::to_string(split_seed)},
                   {"symmetrize", symmetrize ? "true" : "false"}};
  manifest.seed = split_seed;
  manifest.dataset_fingerprint = ptln::fingerprint_files(
      {interactions_path, social_path},
      std::to_string(threshold) + "|" + std::to_string(symmetrize) + "|" + std::to_string(holdout) + "|" +
          std::to_string(min_train) + "|" + std::to_string(split_seed));
  manifest.artifacts = {"dataset.json", "id_maps.json"};
  manifest.extra["num_users"] = ingested.dataset.num_users;
  manifest.extra["num_items"] = ingested.dataset.num_items;
  manifest.extra["self_loops_dropped"] = ingested.self_loops_dropped;
  manifest.timings_ms["total"] = total.ms();
  ptln::write_manifest(out_dir, manifest);
  std::cout << "prepared dataset: " << ingested.dataset.num_users << " users, "
            << ingested.dataset.num_items << " items -> " << out_dir.string() << "\n";
  return 0;
}

int run_synth(const ptln::SyntheticSpec& spec, const std::string& out_flag, double holdout, int min_train,
              std::uint64_t split_seed) {
  StageTimer total;
  const fs::path out_dir = resolve_out_dir(out_flag);

  const auto synth = ptln::generate_synthetic(spec);
  const auto sr = ptln::split(synth.dataset, ptln::SplitSpec{holdout, split_seed, min_train});
  ptln::save_processed(out_dir, ptln::ProcessedDataset{sr.train, sr.test, {}});

  ptln::Manifest manifest;
  manifest.command = "synth";
  manifest.args = {{"users", std::to_string(spec.num_users)},
                   {"items", std::to_string(spec.num_items)},
                   {"clusters", std::to_string(spec.num_clusters)},
                   {"intra_p", std::to_string(spec.intra_cluster_edge_prob)},
                   {"inter_p", std::to_string(spec.inter_cluster_edge_prob)},
                   {"items_per_user", std::to_string(spec.items_per_user)},
                   {"hop2_signal", spec.hop2_signal ? "true" : "false"},
                   {"seed", std::to_string(spec.seed)},
                   {"holdout", std::to_string(holdout)},
                   {"min_train", std::to_string(min_train)},
                   {"split_seed", std::to_string(split_seed)}};
  manifest.seed = spec.seed;
  std::string spec_key;
  for (const auto& [key, value] : manifest.args) spec_key += key + "=" + value + ";";
  manifest.dataset_fingerprint = ptln::to_hex(ptln::fnv1a64(spec_key));
  manifest.artifacts = {"dataset.json"};
  manifest.extra["user_cluster"] = synth.user_cluster;
  manifest.extra["cold_users"] = synth.cold_users;
  manifest.extra["relay_users"] = synth.relay_users;
  manifest.timings_ms["total"] = total.ms();
  ptln::write_manifest(out_dir, manifest);
  std::cout << "synthetic dataset: " << spec.num_users << " users, " << spec.num_items << " items -> "
            << out_dir.string() << "\n";
  return 0;
}

int run_train(const std::string& dataset_dir, const std::string& out_flag, const TrainFlags& flags) {
  StageTimer total;
  const fs::path out_dir = resolve_out_dir(out_flag);
  const ptln::Config cfg = flags.effective();
  if (!cfg.valid_dims()) throw std::runtime_error("invalid training configuration");

  const ptln::ProcessedDataset pd = ptln::load_processed(dataset_dir);
  StageTimer fit_timer;
  const ptln::FitResult result = ptln::fit(pd.train, cfg);
  const double fit_ms = fit_timer.ms();

  fs::create_directories(out_dir);
  ptln::save_checkpoint(out_dir / "checkpoint.json", result.params, cfg);
  std::string log_lines;
  for (const auto& stats : result.log) log_lines += ptln::epoch_to_json(stats).dump() + "\n";
  ptln::write_file_atomic(out_dir / "train_log.jsonl", log_lines);

  ptln::Manifest manifest;
  manifest.command = "train";
  manifest.args = config_args(cfg);
  manifest.args["dataset_dir"] = dataset_dir;
  manifest.seed = cfg.seed;
  manifest.dataset_fingerprint = ptln::fingerprint_files({fs::path(dataset_dir) / "dataset.json"});
  manifest.artifacts = {"checkpoint.json", "train_log.jsonl"};
  manifest.extra["config"] = ptln::config_to_json(cfg);
  manifest.extra["epochs_run"] = result.log.size();
  manifest.timings_ms["fit"] = fit_ms;
  manifest.timings_ms["total"] = total.ms();
  ptln::write_manifest(out_dir, manifest);

  if (!result.log.empty())
    std::cout << "trained " << result.log.size() << " epoch(s), final loss "
              << result.log.back().loss_total << " -> " << (out_dir / "checkpoint.json").string() << "\n";
  else
    std::cout << "wrote initialized checkpoint -> " << (out_dir / "checkpoint.json").string() << "\n";
  return 0;
}

int run_eval(const std::string& dataset_dir, const std::string& checkpoint_path, const std::string& out_flag,
             const std::string& cutoffs_text, bool slices, int threads) {
  StageTimer total;
  const fs::path out_dir = resolve_out_dir(out_flag);
  const std::vector<int> cutoffs = parse_cutoffs(cutoffs_text);

  const ptln::ProcessedDataset pd = ptln::load_processed(dataset_dir);
  auto [params, cfg] = ptln::load_checkpoint(checkpoint_path);
  if (params.num_users != pd.train.num_users || params.num_items != pd.train.num_items) {
    throw std::runtime_error("dimension mismatch: checkpoint tensors c/s/i/g cover " +
                             std::to_string(params.num_users) + " users and q covers " +
                             std::to_string(params.num_items) + " items, dataset has " +
                             std::to_string(pd.train.num_users) + " users and " +
                             std::to_string(pd.train.num_items) + " items");
  }
  cfg.threads = threads > 0 ? threads : cfg.threads;

  const ptln::MetricsReport report = ptln::evaluate(params, pd.train, pd.test, cutoffs, slices, cfg);
  fs::create_directories(out_dir);
  ptln::write_file_atomic(out_dir / "report.txt", ptln::render_metrics_text(report));
  ptln::write_file_atomic(out_dir / "report.json", ptln::metrics_to_json(report).dump(2) + "\n");

  ptln::Manifest manifest;
  manifest.command = "eval";
  manifest.args = {{"dataset_dir", dataset_dir},
                   {"checkpoint", checkpoint_path},
                   {"cutoffs", cutoffs_text},
                   {"slices", slices ? "true" : "false"},
                   {"threads", std::to_string(cfg.threads)}};
  manifest.seed = cfg.seed;
  manifest.dataset_fingerprint = ptln::fingerprint_files({fs::path(dataset_dir) / "dataset.json"});
  manifest.artifacts = {"report.txt", "report.json"};
  manifest.timings_ms["total"] = total.ms();
  ptln::write_manifest(out_dir, manifest);

  std::cout << ptln::render_metrics_text(report);
  return 0;
}

void apply_overrides(ptln::Config& cfg, const json& cell) {
  for (const auto& [key, value] : cell.items()) {
    if (key == "d1") value.get_to(cfg.d1);
    else if (key == "d2") value.get_to(cfg.d2);
    else if (key == "k") value.get_to(cfg.k);
    else if (key == "lr" || key == "learning_rate") value.get_to(cfg.learning_rate);
    else if (key == "dropout_keep") value.get_to(cfg.dropout_keep);
    else if (key == "lambda1") value.get_to(cfg.lambda1);
    else if (key == "lambda2") value.get_to(cfg.lambda2);
    else if (key == "lambda3") value.get_to(cfg.lambda3);
    else if (key == "neg_weight_item") value.get_to(cfg.neg_weight_item);
    else if (key == "neg_weight_social") value.get_to(cfg.neg_weight_social);
    else if (key == "epochs") value.get_to(cfg.epochs);
    else if (key == "batch" || key == "batch_size") value.get_to(cfg.batch_size);
    else if (key == "seed") value.get_to(cfg.seed);
    else if (key == "optimizer") value.get_to(cfg.optimizer);
    else if (key == "threads") value.get_to(cfg.threads);
    else if (key == "order_bias_on") value.get_to(cfg.order_bias_on);
    else if (key == "friend_attention_on") value.get_to(cfg.friend_attention_on);
    else if (key == "regularizer_on") value.get_to(cfg.regularizer_on);
    else if (key == "include_initial_once") value.get_to(cfg.include_initial_once);
    else if (key == "val_fraction") value.get_to(cfg.val_fraction);
    else if (key == "patience") value.get_to(cfg.patience);
    else throw std::runtime_error("unknown grid key: " + key);
  }
}

int run_grid(const std::string& dataset_dir, const std::string& grid_path, const std::string& out_flag,
             const TrainFlags& base_flags) {
  StageTimer total;
  const fs::path out_dir = resolve_out_dir(out_flag);
  const json grid = json::parse(ptln::read_file(grid_path));
  if (!grid.is_array() || grid.empty()) throw std::runtime_error("grid file must be a non-empty JSON array");

  const ptln::ProcessedDataset pd = ptln::load_processed(dataset_dir);
  fs::create_directories(out_dir);

  const std::vector<int> cutoffs = {5, 10, 15};
  json cells = json::array();
  std::string summary_text = "cell  status  ndcg@10   recall@10 overrides\n";
  int best_cell = -1;
  double best_ndcg = -1.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    json cell_out{{"cell", n}, {"overrides", grid[n]}};
    char line[256];
    try {
      ptln::Config cfg = base_flags.effective();
      apply_overrides(cfg, grid[n]);
      if (!cfg.valid_dims()) throw std::runtime_error("invalid configuration");
      const ptln::FitResult result = ptln::fit(pd.train, cfg);
      const ptln::MetricsReport report =
          ptln::evaluate(result.params, pd.train, pd.test, cutoffs, /*with_slices=*/false, cfg);
      const fs::path cell_dir = out_dir / ("cell_" + std::to_string(n));
      fs::create_directories(cell_dir);
      ptln::save_checkpoint(cell_dir / "checkpoint.json", result.params, cfg);
      ptln::write_file_atomic(cell_dir / "report.json", ptln::metrics_to_json(report).dump(2) + "\n");
      const double ndcg10 = report.overall[1].ndcg;
      cell_out["status"] = "ok";
      cell_out["metrics"] = ptln::metrics_to_json(report);
      if (ndcg10 > best_ndcg) {
        best_ndcg = ndcg10;
        best_cell = static_cast<int>(n);
      }
      std::snprintf(line, sizeof(line), "%-5zu ok      %.6f  %.6f  %s\n", n, ndcg10,
                    report.overall[1].recall, grid[n].dump().c_str());
    } catch (const std::exception& e) {
      cell_out["status"] = "error";
      cell_out["error"] = e.what();
      std::snprintf(line, sizeof(line), "%-5zu error   -         -         %s\n", n, e.what());
    }
    summary_text += line;
    cells.push_back(cell_out);
  }
  if (best_cell >= 0) {
    char line[128];
    std::snprintf(line, sizeof(line), "best: cell %d by ndcg@10 = %.6f\n", best_cell, best_ndcg);
    summary_text += line;
  }
  json summary{{"schema", "ptln.grid.v1"}, {"cells", cells}, {"best_cell", best_cell}, {"best_ndcg10", best_ndcg}};
  ptln::write_file_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
  ptln::write_file_atomic(out_dir / "summary.txt", summary_text);

  ptln::Manifest manifest;
  manifest.command = "grid";
  manifest.args = {{"dataset_dir", dataset_dir}, {"grid", grid_path}};
  manifest.seed = base_flags.cfg.seed;
  manifest.dataset_fingerprint = ptln::fingerprint_files({fs::path(dataset_dir) / "dataset.json"});
  manifest.artifacts = {"summary.txt", "summary.json"};
  manifest.timings_ms["total"] = total.ms();
  ptln::write_manifest(out_dir, manifest);

  std::cout << summary_text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"social-aware recommender with k-hop propagation and transfer gates"};
  app.require_subcommand(1);

  // prepare
  std::string interactions_path, social_path, out_flag;
  double threshold = 4.0, holdout = 0.2;
  int min_train = 1;
  std::uint64_t split_seed = 13;
  bool symmetrize = false;
  auto* prepare = app.add_subcommand("prepare", "ingest raw rating/social files into a dataset directory");
  prepare->add_option("--interactions", interactions_path, "rating file: user,item,rating rows")->required();
  prepare->add_option("--social", social_path, "social file: user,friend rows")->required();
  prepare->add_option("--out", out_flag, "output directory (or PTLN_OUT_DIR)");
  prepare->add_option("--threshold", threshold, "minimum rating kept as a positive");
  prepare->add_option("--holdout", holdout, "per-user test fraction");
  prepare->add_option("--min-train", min_train, "minimum train positives kept per user");
  prepare->add_option("--split-seed", split_seed, "seed of the holdout shuffle");
  prepare->add_flag("--symmetrize", symmetrize, "add the reverse of every social edge");

  // synth
  ptln::SyntheticSpec spec;
  std::string synth_out;
  double synth_holdout = 0.2;
  int synth_min_train = 1;
  std::uint64_t synth_split_seed = 13;
  auto* synth = app.add_subcommand("synth", "generate a planted-cluster synthetic dataset directory");
  synth->add_option("--users", spec.num_users, "number of users");
  synth->add_option("--items", spec.num_items, "number of items");
  synth->add_option("--clusters", spec.num_clusters, "number of planted clusters");
  synth->add_option("--intra-p", spec.intra_cluster_edge_prob, "within-cluster trust edge probability");
  synth->add_option("--inter-p", spec.inter_cluster_edge_prob, "cross-cluster trust edge probability");
  synth->add_option("--items-per-user", spec.items_per_user, "positives drawn per user");
  synth->add_flag("--hop2-signal", spec.hop2_signal, "plant cold users whose taste sits at 2 hops");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory (or PTLN_OUT_DIR)");
  synth->add_option("--holdout", synth_holdout, "per-user test fraction");
  synth->add_option("--min-train", synth_min_train, "minimum train positives kept per user");
  synth->add_option("--split-seed", synth_split_seed, "seed of the holdout shuffle");

  // train
  std::string train_dataset_dir, train_out;
  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "fit a model on a prepared dataset directory");
  train->add_option("dataset_dir", train_dataset_dir, "prepared dataset directory")->required();
  train->add_option("--out", train_out, "output directory (or PTLN_OUT_DIR)");
  add_train_flags(train, train_flags);

  // eval
  std::string eval_dataset_dir, eval_checkpoint, eval_out, cutoffs_text = "5,10,15";
  bool slices = false;
  int eval_threads = 0;
  auto* eval = app.add_subcommand("eval", "rank held-out items and report top-N metrics");
  eval->add_option("dataset_dir", eval_dataset_dir, "prepared dataset directory")->required();
  eval->add_option("checkpoint", eval_checkpoint, "checkpoint file from train")->required();
  eval->add_option("--out", eval_out, "output directory (or PTLN_OUT_DIR)");
  eval->add_option("--cutoffs", cutoffs_text, "comma-separated top-N cutoffs");
  eval->add_flag("--slices", slices, "add interaction-count slices (cold-start view)");
  eval->add_option("--threads", eval_threads, "worker thread count");

  // grid
  std::string grid_dataset_dir, grid_file, grid_out;
  TrainFlags grid_flags;
  auto* grid = app.add_subcommand("grid", "train/eval every config override cell of a grid file");
  grid->add_option("dataset_dir", grid_dataset_dir, "prepared dataset directory")->required();
  grid->add_option("grid_file", grid_file, "JSON array of config overrides")->required();
  grid->add_option("--out", grid_out, "output directory (or PTLN_OUT_DIR)");
  add_train_flags(grid, grid_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed())
      return run_prepare(interactions_path, social_path, out_flag, threshold, holdout, min_train, split_seed,
                         symmetrize);
    if (synth->parsed()) return run_synth(spec, synth_out, synth_holdout, synth_min_train, synth_split_seed);
    if (train->parsed()) return run_train(train_dataset_dir, train_out, train_flags);
    if (eval->parsed())
      return run_eval(eval_dataset_dir, eval_checkpoint, eval_out, cutoffs_text, slices, eval_threads);
    if (grid->parsed()) return run_grid(grid_dataset_dir, grid_file, grid_out, grid_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
