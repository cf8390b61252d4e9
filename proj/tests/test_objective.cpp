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
#include <cmath>
#include <set>

#include "catch_amalgamated.hpp"
#include "ptln/objective.hpp"
#include "test_util.hpp"

using namespace ptln;

namespace {

struct Instance {
  Dataset ds;
  Config cfg;
  ModelParams params;
  OrderNeighborhoods nbhd;
  std::vector<int> batch;
};

Instance random_instance(Rng& rng, double param_scale = 0.5) {
  Instance inst;
  inst.ds = test_util::random_dataset(rng);
  inst.cfg.d1 = rng.uniform_int(2, 4);
  inst.cfg.d2 = rng.uniform_int(2, 3);
  inst.cfg.k = rng.uniform_int(1, 2);
  inst.cfg.dropout_keep = 1.0;
  inst.params = init_params(inst.cfg, inst.ds.num_users, inst.ds.num_items, rng.next_u64());
  test_util::randomize_params(inst.params, rng, param_scale);
  inst.nbhd = khop_friends(inst.ds, inst.cfg.k);
  // nonempty random batch
  for (int u = 0; u < inst.ds.num_users; ++u)
    if (rng.bernoulli(0.6)) inst.batch.push_back(u);
  if (inst.batch.empty()) inst.batch.push_back(rng.uniform_int(0, inst.ds.num_users - 1));
  return inst;
}

}  // namespace

TEST_CASE("all losses vanish at zero parameters", "[objective]") {
  Rng rng(1);
  Instance inst = random_instance(rng);
  for_each_tensor(inst.params, [](const std::string&, Vec& t) { std::fill(t.begin(), t.end(), 0.0); });
  const auto ctx = build_batch_context(inst.params, inst.ds, inst.nbhd, inst.batch, inst.cfg);
  CHECK(loss_item_efficient(ctx, 0.5) == 0.0);
  CHECK(loss_social_efficient(ctx, 0.5) == 0.0);
  CHECK(loss_regularization(ctx, inst.params.theta_alpha, inst.params.theta_beta) == 0.0);
  CHECK(l2_squared(inst.params) == 0.0);
  CHECK(loss_total(ctx, inst.cfg) == 0.0);
}

TEST_CASE("efficient plus positive count equals naive", "[objective]") {
  Rng rng(22);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance inst = random_instance(rng);
    const auto ctx = build_batch_context(inst.params, inst.ds, inst.nbhd, inst.batch, inst.cfg);
    for (double c_neg : {0.01, 0.5, 1.0}) {
      const double item_eff = loss_item_efficient(ctx, c_neg) + batch_item_positive_count(ctx);
      const double item_naive = loss_item_naive(ctx, c_neg);
      CHECK(std::abs(item_eff - item_naive) <= 1e-9 * std::max(1.0, std::abs(item_naive)));

      const double social_eff = loss_social_efficient(ctx, c_neg) + batch_social_positive_count(ctx);
      const double social_naive = loss_social_naive(ctx, c_neg);
      CHECK(std::abs(social_eff - social_naive) <= 1e-9 * std::max(1.0, std::abs(social_naive)));
    }
  }
}

TEST_CASE("naive loss at zero scores counts the positives", "[objective]") {
  Rng rng(5);
  Instance inst = random_instance(rng);
  std::fill(inst.params.h_item.begin(), inst.params.h_item.end(), 0.0);  // every score is 0
  const auto ctx = build_batch_context(inst.params, inst.ds, inst.nbhd, inst.batch, inst.cfg);
  CHECK(loss_item_naive(ctx, 0.5) ==
        Catch::Approx(static_cast<double>(batch_item_positive_count(ctx))).margin(1e-12));
}

TEST_CASE("a perfect fit zeroes the naive loss", "[objective]") {
  // one user, one positive: score 1 on the positive and 0 elsewhere
  Dataset ds;
  ds.num_users = 1;
  ds.num_items = 3;
  ds.positives = {{0}};
  ds.social_out = {{}};
  Config cfg;
  cfg.d1 = 1;
  cfg.d2 = 1;
  cfg.k = 1;
  ModelParams p = init_params(cfg, 1, 3, 0);
  p.c.data = {1.0};
  p.i.data = {1.0};
  p.s.data = {1.0};
  p.h_item = {1.0};
  p.q.data = {1.0, 0.0, 0.0};
  const auto nbhd = khop_friends(ds, cfg.k);
  const auto ctx = build_batch_context(p, ds, nbhd, {0}, cfg);
  REQUIRE(predict_item(ctx.users[0].p_item, p.q.row(0), p.h_item) == 1.0);
  CHECK(loss_item_naive(ctx, 0.5) == 0.0);
}

TEST_CASE("zero negative weight reduces the naive loss to positives only", "[objective]") {
  Rng rng(6);
  const Instance inst = random_instance(rng);
  const auto ctx = build_batch_context(inst.params, inst.ds, inst.nbhd, inst.batch, inst.cfg);
  double expected = 0.0;
  for (const auto& uf : ctx.users)
    for (int v : inst.ds.positives[uf.user]) {
      const double r = predict_item(uf.p_item, inst.params.q.row(v), inst.params.h_item);
      expected += (r - 1.0) * (r - 1.0);
    }
  CHECK(loss_item_naive(ctx, 0.0) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("social domain mirrors the item contracts", "[objective]") {
  // a user with no friends contributes only the all-pair quadratic term
  Dataset ds;
  ds.num_users = 2;
  ds.num_items = 2;
  ds.positives = {{0}, {}};
  ds.social_out = {{}, {}};
  Config cfg;
  cfg.d1 = 2;
  cfg.d2 = 2;
  cfg.k = 1;
  ModelParams p = init_params(cfg, 2, 2, 9);
  Rng rng(9);
  test_util::randomize_params(p, rng);
  const auto nbhd = khop_friends(ds, cfg.k);
  const auto ctx = build_batch_context(p, ds, nbhd, {0}, cfg);
  const double c_neg = 0.3;
  double quad = 0.0;
  for (int t = 0; t < 2; ++t) {
    const double x = predict_social(ctx.users[0].p_social, p.g.row(t), p.h_social);
    quad += c_neg * x * x;
  }
  CHECK(loss_social_efficient(ctx, c_neg) == Catch::Approx(quad).margin(1e-10));
}

TEST_CASE("exact reconstruction zeroes the regularizer", "[objective]") {
  Rng rng(12);
  Dataset ds = test_util::random_dataset(rng, 5, 6, 0.4, 0.3);
  Config cfg;
  cfg.d1 = 3;
  cfg.d2 = 2;
  cfg.k = 2;
  ModelParams p = init_params(cfg, ds.num_users, ds.num_items, 3);
  test_util::randomize_params(p, rng);
  // identical tables, attention vectors and biases make the three aspects
  // propagate identically
  p.s = p.c;
  p.i = p.c;
  p.w_attn[1] = p.w_attn[0];
  p.w_attn[2] = p.w_attn[0];
  p.order_bias[1] = p.order_bias[0];
  p.order_bias[2] = p.order_bias[0];
  std::fill(p.theta_alpha.begin(), p.theta_alpha.end(), 1.0);
  std::fill(p.theta_beta.begin(), p.theta_beta.end(), 1.0);
  const auto nbhd = khop_friends(ds, cfg.k);
  const auto ctx = build_batch_context(p, ds, nbhd, test_util::all_users(ds), cfg);
  CHECK(loss_regularization(ctx, p.theta_alpha, p.theta_beta) == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("zero theta turns the regularizer into plain norms", "[objective]") {
  Rng rng(13);
  const Instance inst = random_instance(rng);
  const auto ctx = build_batch_context(inst.params, inst.ds, inst.nbhd, inst.batch, inst.cfg);
  const Vec zeros(inst.cfg.k, 0.0);
  double expected = 0.0;
  for (const auto& uf : ctx.users)
    for (int k = 0; k < inst.cfg.k; ++k) {
      expected += squared_norm(uf.aspects[static_cast<int>(Aspect::kItem)].per_order[k]);
      expected += squared_norm(uf.aspects[static_cast<int>(Aspect::kSocial)].per_order[k]);
    }
  CHECK(loss_regularization(ctx, zeros, zeros) == Catch::Approx(expected).margin(1e-9));
}

TEST_CASE("regularizer arithmetic on a friendless user", "[objective]") {
  // per-order embeddings equal the initial ones when there are no friends
  Dataset ds;
  ds.num_users = 1;
  ds.num_items = 1;
  ds.positives = {{}};
  ds.social_out = {{}};
  Config cfg;
  cfg.d1 = 2;
  cfg.d2 = 2;
  cfg.k = 1;
  ModelParams p = init_params(cfg, 1, 1, 0);
  p.i.data = {1.0, 0.0};
  p.c.data = {0.0, 1.0};
  p.s.data = {0.0, 0.0};
  p.theta_alpha = {2.0};
  p.theta_beta = {0.0};
  const auto nbhd = khop_friends(ds, cfg.k);
  const auto ctx = build_batch_context(p, ds, nbhd, {0}, cfg);
  // || (1,0) - 2*(0,1) ||^2 = 5, social term zero
  CHECK(loss_regularization(ctx, p.theta_alpha, p.theta_beta) == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("regularizer is nonnegative and zero only at exact reconstruction", "[objective]") {
  Rng rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance inst = random_instance(rng);
    const auto ctx = build_batch_context(inst.params, inst.ds, inst.nbhd, inst.batch, inst.cfg);
    const double reg = loss_regularization(ctx, inst.params.theta_alpha, inst.params.theta_beta);
    CHECK(reg >= 0.0);
    // random parameters leave residuals with probability one
    CHECK(reg > 0.0);
  }
}

TEST_CASE("total objective composes its four terms", "[objective]") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    Instance inst = random_instance(rng);
    inst.cfg.lambda1 = 0.7;
    inst.cfg.lambda2 = 0.3;
    inst.cfg.lambda3 = 0.05;
    inst.cfg.neg_weight_item = 0.4;
    inst.cfg.neg_weight_social = 0.2;
    const auto ctx = build_batch_context(inst.params, inst.ds, inst.nbhd, inst.batch, inst.cfg);
    const double assembled =
        loss_item_efficient(ctx, 0.4) + 0.7 * loss_social_efficient(ctx, 0.2) +
        0.3 * loss_regularization(ctx, inst.params.theta_alpha, inst.params.theta_beta) +
        0.05 * l2_squared(inst.params);
    CHECK(loss_total(ctx, inst.cfg) == Catch::Approx(assembled).margin(1e-10));

    Config bare = inst.cfg;
    bare.lambda1 = bare.lambda2 = bare.lambda3 = 0.0;
    CHECK(loss_total(ctx, bare) == Catch::Approx(loss_item_efficient(ctx, 0.4)).margin(1e-12));

    Config no_reg = inst.cfg;
    no_reg.regularizer_on = false;
    CHECK(loss_total(ctx, no_reg) ==
          Catch::Approx(assembled -
                        0.3 * loss_regularization(ctx, inst.params.theta_alpha, inst.params.theta_beta))
              .margin(1e-10));
  }
}

TEST_CASE("registry walks every trainable tensor exactly once", "[objective]") {
  Config cfg;
  cfg.d1 = 5;
  cfg.d2 = 3;
  cfg.k = 2;
  const int m = 7, n = 9;
  const ModelParams p = init_params(cfg, m, n, 1);

  std::set<std::string> names;
  std::size_t scalars = 0;
  for_each_tensor(p, [&](const std::string& name, const Vec& t) {
    CHECK(names.insert(name).second);  // no tensor visited twice
    scalars += t.size();
  });
  // tables + attention + order biases + gates + heads + thetas
  const std::size_t expected = static_cast<std::size_t>(4 * m + n) * cfg.d1     // c,s,i,g + q
                               + 3 * cfg.d1                                     // w_attn
                               + 3 * cfg.k * cfg.d1                             // order biases
                               + 2 * cfg.d2 * cfg.d1 + 2 * cfg.d2 + 2 * cfg.d2  // gate nets
                               + 2 * cfg.d1                                     // prediction heads
                               + 2 * cfg.k;                                     // thetas
  CHECK(scalars == expected);
  CHECK(parameter_count(p) == expected);

  // the L2 term sums exactly these scalars
  ModelParams ones = p;
  for_each_tensor(ones, [](const std::string&, Vec& t) { std::fill(t.begin(), t.end(), 1.0); });
  CHECK(l2_squared(ones) == Catch::Approx(static_cast<double>(expected)).margin(1e-9));
}

TEST_CASE("efficient losses evaluate exactly one score per positive", "[objective]") {
  Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = random_instance(rng);
    const auto ctx = build_batch_context(inst.params, inst.ds, inst.nbhd, inst.batch, inst.cfg);

    ctx.score_evaluations = 0;
    loss_item_efficient(ctx, 0.5);
    CHECK(ctx.score_evaluations == batch_item_positive_count(ctx));

    ctx.score_evaluations = 0;
    loss_social_efficient(ctx, 0.5);
    CHECK(ctx.score_evaluations == batch_social_positive_count(ctx));
  }
}
