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
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptln/gradients.hpp"
#include "ptln/ingest.hpp"
#include "ptln/metrics.hpp"
#include "ptln/objective.hpp"
#include "ptln/params.hpp"
#include "ptln/rng.hpp"

namespace ptln {

// SGD or Adam over the gradient set. Adam moments mirror the parameter
// shapes; embedding-table moments update lazily on touched rows only.
struct Optimizer {
  enum class Kind { kSgd, kAdam };
  Kind kind = Kind::kAdam;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  GradientSet moment1, moment2;

  static Optimizer make(const Config& cfg, const ModelParams& params) {
    Optimizer opt;
    if (cfg.optimizer == "sgd")
      opt.kind = Kind::kSgd;
    else if (cfg.optimizer == "adam")
      opt.kind = Kind::kAdam;
    else
      throw std::invalid_argument("unknown optimizer: " + cfg.optimizer);
    opt.learning_rate = cfg.learning_rate;
    if (opt.kind == Kind::kAdam) {
      opt.moment1 = make_zero_gradients(params);
      opt.moment2 = make_zero_gradients(params);
    }
    return opt;
  }

  void apply(ModelParams& params, const GradientSet& grad) {
    ++step;
    if (kind == Kind::kSgd) {
      apply_sgd(params, grad);
    } else {
      apply_adam(params, grad);
    }
  }

 private:
  void apply_sgd(ModelParams& params, const GradientSet& grad) {
    sgd_table(params.c, grad.c, grad.touched_c);
    sgd_table(params.s, grad.s, grad.touched_s);
    sgd_table(params.i, grad.i, grad.touched_i);
    sgd_table(params.q, grad.q, grad.touched_q);
    sgd_table(params.g, grad.g, grad.touched_g);
    visit_globals(params, grad, [&](Vec& p, const Vec& gr, Vec&, Vec&) {
      for (std::size_t x = 0; x < p.size(); ++x) p[x] -= learning_rate * gr[x];
    });
  }

  void sgd_table(Mat& p, const Mat& g, const std::vector<std::uint8_t>& touched) {
    for (int r = 0; r < p.rows; ++r) {
      if (!touched[r]) continue;
      auto prow = p.row(r);
      auto grow = g.row(r);
      for (int d = 0; d < p.cols; ++d) prow[d] -= learning_rate * grow[d];
    }
  }

  void apply_adam(ModelParams& params, const GradientSet& grad) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    auto update = [&](double& p, double g, double& m, double& v) {
      m = beta1 * m + (1.0 - beta1) * g;
      v = beta2 * v + (1.0 - beta2) * g * g;
      p -= learning_rate * (m / bc1) / (std::sqrt(v / bc2) + epsilon);
    };
    auto table = [&](Mat& p, const Mat& g, const std::vector<std::uint8_t>& touched, Mat& m, Mat& v) {
      for (int r = 0; r < p.rows; ++r) {
        if (!touched[r]) continue;
        auto prow = p.row(r);
        auto grow = g.row(r);
        auto mrow = m.row(r);
        auto vrow = v.row(r);
        for (int d = 0; d < p.cols; ++d) update(prow[d], grow[d], mrow[d], vrow[d]);
      }
    };
    table(params.c, grad.c, grad.touched_c, moment1.c, moment2.c);
    table(params.s, grad.s, grad.touched_s, moment1.s, moment2.s);
    table(params.i, grad.i, grad.touched_i, moment1.i, moment2.i);
    table(params.q, grad.q, grad.touched_q, moment1.q, moment2.q);
    table(params.g, grad.g, grad.touched_g, moment1.g, moment2.g);
    visit_globals(params, grad, [&](Vec& p, const Vec& gr, Vec& m, Vec& v) {
      for (std::size_t x = 0; x < p.size(); ++x) update(p[x], gr[x], m[x], v[x]);
    });
  }

  static bool is_table(const std::string& name) {
    return name == "c" || name == "s" || name == "i" || name == "q" || name == "g";
  }

  // Walks the non-table tensors of params/grad/moments in registry order.
  template <typename F>
  void visit_globals(ModelParams& params, const GradientSet& grad, F&& f) {
    std::vector<Vec*> ps, m1s, m2s;
    std::vector<const Vec*> gs;
    for_each_tensor(params, [&](const std::string& name, Vec& t) {
      if (!is_table(name)) ps.push_back(&t);
    });
    for_each_tensor(grad, [&](const std::string& name, const Vec& t) {
      if (!is_table(name)) gs.push_back(&t);
    });
    if (kind == Kind::kAdam) {
      for_each_tensor(moment1, [&](const std::string& name, Vec& t) {
        if (!is_table(name)) m1s.push_back(&t);
      });
      for_each_tensor(moment2, [&](const std::string& name, Vec& t) {
        if (!is_table(name)) m2s.push_back(&t);
      });
    }
    Vec dummy;
    for (std::size_t n = 0; n < ps.size(); ++n)
      f(*ps[n], *gs[n], kind == Kind::kAdam ? *m1s[n] : dummy, kind == Kind::kAdam ? *m2s[n] : dummy);
  }
};

struct EpochStats {
  int epoch = 0;
  double loss_item = 0.0;
  double loss_social = 0.0;
  double loss_reg = 0.0;
  double loss_l2 = 0.0;
  double loss_total = 0.0;
  double wall_ms = 0.0;
  double val_ndcg10 = -1.0;  // negative when no validation slice
};

// One pass over all users in seeded-shuffle order. The rng drives both the
// batch order and the per-step dropout masks.
inline EpochStats train_epoch(ModelParams& params, Optimizer& opt, const Dataset& data,
                              const OrderNeighborhoods& nbhd, const Config& cfg, Rng& rng) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> order(data.num_users);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  EpochStats stats;
  int batches = 0;
  for (int begin = 0; begin < data.num_users; begin += cfg.batch_size) {
    const int end = std::min(data.num_users, begin + cfg.batch_size);
    const std::vector<int> batch(order.begin() + begin, order.begin() + end);
    const BatchContext ctx = build_batch_context(params, data, nbhd, batch, cfg, /*training=*/true, &rng);

    const double item = loss_item_efficient(ctx, cfg.neg_weight_item);
    const double social = loss_social_efficient(ctx, cfg.neg_weight_social);
    const double reg = loss_regularization(ctx, params.theta_alpha, params.theta_beta);
    const double l2 = l2_squared(params);
    stats.loss_item += item;
    stats.loss_social += social;
    stats.loss_reg += reg;
    stats.loss_l2 += l2;
    stats.loss_total += item + cfg.lambda1 * social + (cfg.regularizer_on ? cfg.lambda2 * reg : 0.0) +
                        cfg.lambda3 * l2;

    const GradientSet grad = compute_gradients(ctx, nbhd);
    opt.apply(params, grad);
    if (!params_finite(params)) throw std::runtime_error("non-finite parameters after optimizer step");
    ++batches;
  }
  if (batches > 0) {
    stats.loss_item /= batches;
    stats.loss_social /= batches;
    stats.loss_reg /= batches;
    stats.loss_l2 /= batches;
    stats.loss_total /= batches;
  }
  stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

struct FitResult {
  ModelParams params;
  std::vector<EpochStats> log;
};

// Full training run: neighborhoods once, then epochs. With patience > 0
// and val_fraction > 0 a validation slice is carved from train, NDCG@10
// is monitored and the best parameters are returned.
inline FitResult fit(const Dataset& data, const Config& cfg) {
  if (!cfg.valid_dims()) throw std::invalid_argument("fit: invalid config");
  const ValidationReport report = validate(data);
  if (!report.ok()) throw std::invalid_argument("fit: invalid dataset: " + report.violations.front().message);

  const bool use_validation = cfg.patience > 0 && cfg.val_fraction > 0.0;
  Dataset train = data;
  std::vector<std::vector<int>> val;
  if (use_validation) {
    SplitResult carved = split(data, SplitSpec{cfg.val_fraction, cfg.seed ^ 0xa5a5a5a5ULL, 1});
    train = std::move(carved.train);
    val = std::move(carved.test);
  }

  FitResult result;
  result.params = init_params(cfg, data.num_users, data.num_items, cfg.seed);
  const OrderNeighborhoods nbhd = khop_friends(train, cfg.k);
  Optimizer opt = Optimizer::make(cfg, result.params);
  Rng rng(cfg.seed ^ 0x517cc1b727220a95ULL);

  double best_ndcg = -1.0;
  int stale = 0;
  ModelParams best_params = result.params;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochStats stats = train_epoch(result.params, opt, train, nbhd, cfg, rng);
    stats.epoch = epoch;
    if (use_validation) {
      const MetricsReport val_report = evaluate(result.params, train, val, {10}, /*with_slices=*/false, cfg);
      stats.val_ndcg10 = val_report.overall[0].ndcg;
      if (stats.val_ndcg10 > best_ndcg) {
        best_ndcg = stats.val_ndcg10;
        best_params = result.params;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        result.log.push_back(stats);
        break;
      }
    }
    result.log.push_back(stats);
  }
  if (use_validation && best_ndcg >= 0.0) result.params = std::move(best_params);
  return result;
}

}  // namespace ptln
