// Copyright 2026 The satd Authors.
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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "satd/model.hpp"
#include "support/synthetic.hpp"

namespace satd {
namespace {

Vocab numbered_vocab(std::size_t n) {
  Vocab v;
  for (std::size_t i = 0; i < n; ++i) v.add("w" + std::to_string(i));
  return v;
}

ModelConfig small_config() {
  ModelConfig c;
  c.region_sizes = {1, 2, 3};
  c.feature_maps = 3;
  c.num_tasks = 2;
  c.max_len = 8;
  c.embedding_dim = 4;
  return c;
}

std::vector<TokenId> ids_of(std::initializer_list<TokenId> prefix, std::size_t max_len) {
  std::vector<TokenId> ids(max_len, kPad);
  std::copy(prefix.begin(), prefix.end(), ids.begin());
  return ids;
}

template <typename Scalar>
ModelParams<Scalar> make_params(const ModelConfig& c, std::uint64_t seed) {
  const auto v = numbered_vocab(10);
  return init_params<Scalar>(c, random_init<Scalar>(v, c.embedding_dim, seed, c.embedding_mode), seed + 1);
}

TEST(ModelConfig, Validation) {
  auto c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.region_sizes = {2, 1};
  EXPECT_THROW(c.validate(), InputError);
  c = small_config();
  c.region_sizes = {};
  EXPECT_THROW(c.validate(), InputError);
  c = small_config();
  c.region_sizes = {1, 9};
  EXPECT_THROW(c.validate(), InputError);
  c = small_config();
  c.dropout_rate = 1.0;
  EXPECT_THROW(c.validate(), InputError);
  c = small_config();
  c.feature_maps = 0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(InitParams, Shapes) {
  const auto c = small_config();
  const auto p = make_params<float>(c, 3);
  ASSERT_EQ(p.convs.size(), 3u);
  for (std::size_t g = 0; g < 3; ++g) {
    EXPECT_EQ(p.convs[g].height, c.region_sizes[g]);
    EXPECT_EQ(p.convs[g].weight.size(), c.feature_maps * c.region_sizes[g] * c.embedding_dim);
    EXPECT_EQ(p.convs[g].bias.size(), c.feature_maps);
  }
  ASSERT_EQ(p.heads.size(), 2u);
  EXPECT_EQ(p.heads[0].weight.size(), c.num_classes * c.feature_width());
  EXPECT_EQ(p.heads[0].bias.size(), c.num_classes);
  EXPECT_THROW(init_params<float>(c, random_init<float>(numbered_vocab(3), 7, 1), 1), InputError);
}

TEST(Forward, ShapesAndNormalization) {
  const auto c = small_config();
  const auto p = make_params<double>(c, 5);
  const auto ids = ids_of({2, 3, 4, 5}, c.max_len);
  const auto cache = infer(p, c, ids, 1);
  EXPECT_EQ(cache.length, 4u);
  EXPECT_EQ(cache.conv_length, 4u);
  EXPECT_EQ(cache.features.size(), c.feature_width());
  EXPECT_EQ(cache.logits.size(), c.num_classes);
  EXPECT_NEAR(std::accumulate(cache.probs.begin(), cache.probs.end(), 0.0), 1.0, 1e-12);
  for (std::size_t g = 0; g < 3; ++g)
    EXPECT_EQ(cache.maps[g].size(), c.feature_maps * cache.map_length(c.region_sizes[g]));
  for (double x : cache.features) EXPECT_GE(x, 0.0);
  for (double m : cache.mask) EXPECT_EQ(m, 1.0);
}

TEST(Forward, ShortInputPadsToLargestRegion) {
  const auto c = small_config();
  const auto p = make_params<double>(c, 5);
  const auto cache = infer(p, c, ids_of({7}, c.max_len), 0);
  EXPECT_EQ(cache.length, 1u);
  EXPECT_EQ(cache.conv_length, 3u);
  EXPECT_EQ(cache.map_length(3), 1u);
  EXPECT_EQ(cache.map_length(1), 3u);
}

TEST(Forward, RejectsBadInput) {
  const auto c = small_config();
  const auto p = make_params<float>(c, 5);
  EXPECT_THROW(infer(p, c, std::vector<TokenId>(c.max_len, kPad), 0), InputError);
  EXPECT_THROW(infer(p, c, std::vector<TokenId>(c.max_len + 1, 2), 0), InputError);
  EXPECT_THROW(infer(p, c, ids_of({2}, c.max_len), 2), InputError);
}

TEST(Forward, DropoutMaskIsInverted) {
  auto c = small_config();
  c.feature_maps = 50;
  const auto p = make_params<double>(c, 5);
  Rng stream(9);
  const auto cache = forward(p, c, ids_of({2, 3}, c.max_len), 0, true, stream);
  std::size_t kept = 0;
  for (double m : cache.mask) {
    EXPECT_TRUE(m == 0.0 || m == 2.0) << m;
    kept += m > 0;
  }
  EXPECT_GT(kept, 0u);
  EXPECT_LT(kept, cache.mask.size());

  Rng a(4), b(4);
  EXPECT_EQ(forward(p, c, ids_of({2, 3}, c.max_len), 0, true, a).probs,
            forward(p, c, ids_of({2, 3}, c.max_len), 0, true, b).probs);
}

TEST(Forward, HeadsShareFeatures) {
  const auto c = small_config();
  const auto p = make_params<double>(c, 5);
  const auto ids = ids_of({2, 3, 4}, c.max_len);
  const auto a = infer(p, c, ids, 0);
  const auto b = infer(p, c, ids, 1);
  EXPECT_EQ(a.features, b.features);
  EXPECT_NE(a.logits, b.logits);
}

TEST(WeightedLoss, Example) {
  const std::vector<double> probs = {0.5, 0.2, 0.1, 0.1, 0.1};
  const std::array<double, kNumLabels> w = {2.0, 1, 1, 1, 1};
  EXPECT_NEAR(weighted_loss<double>(probs, DebtLabel::code_design, w), 2 * std::log(2.0), 1e-12);
  const std::vector<double> zero = {0, 0, 0, 0, 1};
  EXPECT_TRUE(std::isfinite(weighted_loss<double>(zero, DebtLabel::code_design, w)));
}

TEST(Backward, MatchesFiniteDifferences) {
  for (auto mode : {EmbeddingMode::static_, EmbeddingMode::non_static}) {
    auto c = small_config();
    c.embedding_mode = mode;
    auto p = make_params<double>(c, 11);
    const std::array<double, kNumLabels> w = {1.5, 0.5, 2.0, 1.0, 0.25};
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto ids = ids_of({2, 5, 7, 3, 9}, c.max_len);
      const auto r = testing::gradient_check(p, c, ids, s % 2, label_from_index(s), w, 40 + s);
      EXPECT_LT(r.worst, 1e-6) << r.worst_group;
    }
  }
}

TEST(Backward, StaticModeHasNoEmbeddingGradient) {
  const auto c = small_config();
  const auto p = make_params<double>(c, 2);
  const std::array<double, kNumLabels> w = {1, 1, 1, 1, 1};
  const auto g = backward(p, c, infer(p, c, ids_of({2, 3}, c.max_len), 0), DebtLabel::test, w);
  EXPECT_TRUE(g.embedding_rows.empty());
  for (double x : g.heads[1].weight) EXPECT_EQ(x, 0.0);
}

TEST(Backward, PadRowNeverReceivesGradient) {
  auto c = small_config();
  c.embedding_mode = EmbeddingMode::non_static;
  const auto p = make_params<double>(c, 2);
  const std::array<double, kNumLabels> w = {1, 1, 1, 1, 1};
  const auto g = backward(p, c, infer(p, c, ids_of({4}, c.max_len), 0), DebtLabel::test, w);
  EXPECT_FALSE(g.embedding_rows.contains(kPad));
  EXPECT_TRUE(g.embedding_rows.contains(4));
}

TEST(Optimizer, SgdStepAndPadRow) {
  auto c = small_config();
  c.embedding_mode = EmbeddingMode::non_static;
  auto p = make_params<double>(c, 2);
  const auto before = p;
  const std::array<double, kNumLabels> w = {1, 1, 1, 1, 1};
  const auto g = backward(p, c, infer(p, c, ids_of({4, 5}, c.max_len), 0), DebtLabel::test, w);
  Optimizer<double> opt(OptimizerKind::sgd);
  opt.step(p, g, 0.1);
  for (std::size_t i = 0; i < p.heads[0].weight.size(); ++i)
    EXPECT_NEAR(p.heads[0].weight[i], before.heads[0].weight[i] - 0.1 * g.heads[0].weight[i], 1e-15);
  EXPECT_EQ(p.heads[1].weight, before.heads[1].weight);
  for (double x : p.embedding.row(kPad)) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(p.embedding.row(6)[0], before.embedding.row(6)[0]);
}

TEST(Optimizer, AdadeltaFirstStep) {
  auto c = small_config();
  auto p = make_params<double>(c, 2);
  const auto before = p;
  Gradients<double> g;
  g.reset(p);
  g.heads[0].bias[0] = 3.0;
  Optimizer<double> opt;
  opt.step(p, g, 1.0);
  const double eg = 0.05 * 9.0;
  const double expected = -std::sqrt(1e-6) / std::sqrt(eg + 1e-6) * 3.0;
  EXPECT_NEAR(p.heads[0].bias[0] - before.heads[0].bias[0], expected, 1e-12);
  EXPECT_EQ(p.heads[0].bias[1], before.heads[0].bias[1]);
  EXPECT_EQ(p.heads[1].bias, before.heads[1].bias);
}

TEST(Optimizer, NonFiniteGradientIsComputeError) {
  const auto c = small_config();
  auto p = make_params<double>(c, 2);
  Gradients<double> g;
  g.reset(p);
  g.convs[1].weight[0] = std::nan("");
  Optimizer<double> opt;
  EXPECT_THROW(opt.step(p, g, 1.0), ComputeError);
}

TEST(Predict, ArgmaxTiesGoLow) {
  const std::vector<double> probs = {0.1, 0.3, 0.3, 0.2, 0.1};
  EXPECT_EQ(argmax_class<double>(probs), 1u);
}

TEST(Params, CastRoundTrip) {
  const auto c = small_config();
  const auto p = make_params<float>(c, 8);
  const auto q = p.cast<double>().cast<float>();
  EXPECT_EQ(p.embedding.data, q.embedding.data);
  EXPECT_EQ(p.convs[2].weight, q.convs[2].weight);
  EXPECT_EQ(p.heads[1].bias, q.heads[1].bias);
  EXPECT_TRUE(all_finite(p));
}

}  // namespace
}  // namespace satd
