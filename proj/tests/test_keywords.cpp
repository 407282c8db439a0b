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

#include <numeric>

#include "satd/keywords.hpp"
#include "support/synthetic.hpp"

namespace satd {
namespace {

namespace st = satd::testing;

Model tiny_model(std::size_t feature_maps, std::vector<std::size_t> sizes) {
  Model m;
  m.config.region_sizes = std::move(sizes);
  m.config.feature_maps = feature_maps;
  m.config.max_len = 8;
  m.config.embedding_dim = 4;
  for (const char* w : {"needs", "an", "extra", "hack"}) m.vocab.add(w);
  m.params = init_params<float>(m.config, random_init<float>(m.vocab, 4, 1), 2);
  return m;
}

ForwardCache<float> hand_cache(std::size_t F, std::size_t length) {
  ForwardCache<float> c;
  c.length = length;
  c.argmax.assign(F, 0);
  c.features.assign(F, 0.0f);
  return c;
}

TEST(Backtrack, WindowReadout) {
  const auto m = tiny_model(1, {1, 3});
  const std::vector<std::string> tokens = {"needs", "an", "extra", "hack"};
  auto c = hand_cache(2, 4);
  c.argmax = {3, 0};
  EXPECT_EQ(backtrack(c, m.config, 0, std::span<const std::string>(tokens)), (std::vector<std::string>{"hack"}));
  EXPECT_EQ(backtrack(c, m.config, 1, std::span<const std::string>(tokens)),
            (std::vector<std::string>{"needs", "an", "extra"}));
  c.argmax[1] = 2;
  EXPECT_EQ(backtrack(c, m.config, 1, std::span<const std::string>(tokens)),
            (std::vector<std::string>{"extra", "hack"}));
  EXPECT_THROW(backtrack(c, m.config, 2, std::span<const std::string>(tokens)), InputError);
}

TEST(Backtrack, ShortInputDropsPadding) {
  const auto m = tiny_model(1, {1, 3});
  const std::vector<std::string> tokens = {"hack"};
  auto c = hand_cache(2, 1);
  c.argmax = {0, 0};
  EXPECT_EQ(join_phrase(backtrack(c, m.config, 1, std::span<const std::string>(tokens))), "hack");
}

TEST(Contributions, ZeroFeaturesScoreZero) {
  const auto m = tiny_model(2, {1, 2});
  auto c = hand_cache(4, 2);
  for (float s : feature_contributions(m, c, 0)) EXPECT_EQ(s, 0.0f);
  for (float s : centered_contributions(m, c, 3)) EXPECT_EQ(s, 0.0f);
  EXPECT_THROW(feature_contributions(m, c, 5), InputError);
  c.task = 9;
  EXPECT_THROW(feature_contributions(m, c, 0), InputError);
}

TEST(Contributions, SingleActiveFeatureIsMaximal) {
  auto m = tiny_model(2, {1, 2});
  const std::size_t F = m.config.feature_width();
  m.params.heads[0].weight[1 * F + 2] = 0.7f;
  auto c = hand_cache(F, 2);
  c.features[2] = 1.5f;
  const auto s = feature_contributions(m, c, 1);
  const auto best = std::max_element(s.begin(), s.end()) - s.begin();
  EXPECT_EQ(best, 2);
  EXPECT_FLOAT_EQ(s[2], 1.05f);
  EXPECT_EQ(std::count(s.begin(), s.end(), s[2]), 1);
}

TEST(Contributions, SumPlusBiasIsLogit) {
  const auto m = tiny_model(3, {1, 2, 3});
  const std::vector<TokenId> ids = {2, 3, 4, 5, kPad, kPad, kPad, kPad};
  for (std::size_t cls = 0; cls < kNumLabels; ++cls) {
    const auto cache = infer(m.params, m.config, std::span<const TokenId>(ids), 2);
    const auto s = feature_contributions(m, std::span<const TokenId>(ids), 2, cls);
    const double sum = std::accumulate(s.begin(), s.end(), 0.0) + m.params.heads[2].bias[cls];
    EXPECT_NEAR(sum, cache.logits[cls], 1e-5);
  }
}

TEST(Contributions, CenteringIgnoresUniformColumnShift) {
  auto m = tiny_model(2, {1, 2});
  const std::vector<TokenId> ids = {2, 3, 4, kPad, kPad, kPad, kPad, kPad};
  const auto cache = infer(m.params, m.config, std::span<const TokenId>(ids), 0);
  const auto before = centered_contributions(m, cache, 1);
  const std::size_t F = m.config.feature_width();
  for (std::size_t c = 0; c < kNumLabels; ++c) m.params.heads[0].weight[c * F + 1] -= 2.0f;
  const auto after = centered_contributions(m, cache, 1);
  for (std::size_t f = 0; f < F; ++f) EXPECT_NEAR(before[f], after[f], 1e-5);
}

class PlantedKeywords : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    st::SyntheticSpec spec;
    spec.samples = 400;
    spec.satd_fraction = 0.4;
    spec.noise_vocab = 120;
    corpus_ = new LabeledCorpus(st::planted_corpus(SourceKind::comment, spec, 21));
    const std::array<LabeledCorpus, 1> one = {*corpus_};
    auto vocab = build_vocab(std::span<const LabeledCorpus>(one), 1);
    TrainConfig cfg;
    cfg.model.region_sizes = {1, 2, 3};
    cfg.model.feature_maps = 30;
    cfg.model.embedding_dim = 32;
    cfg.model.max_len = 24;
    cfg.model.num_tasks = 1;
    cfg.model.embedding_mode = EmbeddingMode::non_static;
    cfg.epochs = 5;
    cfg.seed = 4;
    auto emb = random_init<float>(vocab, 32, 8);
    model_ = new Model(train_multitask(one, cfg, std::move(vocab), std::move(emb)).model);
  }
  static void TearDownTestSuite() {
    delete model_;
    delete corpus_;
  }
  static LabeledCorpus* corpus_;
  static Model* model_;
};

LabeledCorpus* PlantedKeywords::corpus_ = nullptr;
Model* PlantedKeywords::model_ = nullptr;

TEST_F(PlantedKeywords, PlantedTokenRanksHigh) {
  const auto rep = extract_keywords(*model_, *corpus_, 0);
  const auto& list = rep.by_class[class_index(DebtLabel::test)];
  ASSERT_FALSE(list.empty());
  const auto top = phrases_of(std::vector<KeywordEntry>(list.begin(), list.begin() + std::min<std::ptrdiff_t>(5, std::ssize(list))));
  EXPECT_TRUE(std::find(top.begin(), top.end(), "flaky") != top.end()) << "top: " << join_phrase(top);
  EXPECT_TRUE(std::is_sorted(list.begin(), list.end(), keyword_before));
  EXPECT_TRUE(rep.by_class[class_index(DebtLabel::code_design)].size() > 0);
}

TEST_F(PlantedKeywords, MinFrequencyFilters) {
  KeywordOptions opt;
  opt.min_frequency = corpus_->size() + 1;
  const auto rep = extract_keywords(*model_, *corpus_, 0, opt);
  for (const auto& list : rep.by_class) EXPECT_TRUE(list.empty());
  EXPECT_THROW(extract_keywords(*model_, *corpus_, 1), InputError);
}

TEST_F(PlantedKeywords, Deterministic) {
  const auto a = extract_keywords(*model_, *corpus_, 0);
  const auto b = extract_keywords(*model_, *corpus_, 0);
  for (std::size_t c = 0; c < kNumDebtTypes; ++c) EXPECT_EQ(a.by_class[c], b.by_class[c]);
}

TEST(KeywordReport, MergedSumsAcrossClasses) {
  KeywordReport r;
  r.by_class[0] = {{"hack", 2.0, 3}, {"later", 1.0, 1}};
  r.by_class[2] = {{"hack", 0.5, 1}};
  const auto m = r.merged();
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].phrase, "hack");
  EXPECT_DOUBLE_EQ(m[0].score, 2.5);
  EXPECT_EQ(m[0].frequency, 4u);
}

TEST(SharedMatrix, IdenticalAndDisjoint) {
  const std::vector<std::vector<std::string>> lists = {
      {"a", "b", "c", "d"}, {"a", "b", "c", "d"}, {"w", "x", "y", "z"}, {"b", "a", "q", "r"}};
  const auto m = shared_keyword_matrix(lists, 0.5);
  EXPECT_EQ(m[0][0], 2u);
  EXPECT_EQ(m[0][1], 2u);
  EXPECT_EQ(m[0][2], 0u);
  EXPECT_EQ(m[0][3], 2u);
  EXPECT_EQ(m[3][0], m[0][3]);
  const auto full = shared_keyword_matrix(lists, 1.0);
  EXPECT_EQ(full[0][1], 4u);
}

TEST(SharedMatrix, Errors) {
  const std::vector<std::vector<std::string>> with_empty = {{"a"}, {}};
  EXPECT_THROW(shared_keyword_matrix(with_empty, 0.5), InputError);
  const std::vector<std::vector<std::string>> ok = {{"a"}, {"a"}};
  EXPECT_THROW(shared_keyword_matrix(ok, 0.0), InputError);
  EXPECT_THROW(shared_keyword_matrix(ok, 1.5), InputError);
}

}  // namespace
}  // namespace satd
