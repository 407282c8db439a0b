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

#include "satd/baselines.hpp"
#include "support/synthetic.hpp"

namespace satd {
namespace {

namespace st = satd::testing;

LabeledCorpus corpus_of(std::vector<std::pair<std::vector<std::string>, DebtLabel>> rows) {
  std::vector<Record> recs;
  for (std::size_t i = 0; i < rows.size(); ++i)
    recs.push_back(st::make_record("r" + std::to_string(i), SourceKind::comment, rows[i].first, rows[i].second));
  return LabeledCorpus(SourceKind::comment, recs);
}

TEST(Random, DegenerateDistribution) {
  ClassCounts counts{};
  counts[class_index(DebtLabel::test)] = 12;
  for (auto l : random_predictions(counts, 50, 3)) EXPECT_EQ(l, DebtLabel::test);
  EXPECT_THROW(random_predictions(ClassCounts{}, 5, 1), InputError);
}

TEST(Random, DeterministicAndProportional) {
  ClassCounts counts{};
  counts[class_index(DebtLabel::code_design)] = 10;
  counts[class_index(DebtLabel::non_satd)] = 90;
  EXPECT_EQ(random_predictions(counts, 100, 7), random_predictions(counts, 100, 7));
  const auto many = random_predictions(counts, 20000, 8);
  const auto n = std::count(many.begin(), many.end(), DebtLabel::code_design);
  EXPECT_NEAR(static_cast<double>(n) / 20000.0, 0.1, 0.01);
}

TEST(Random, ExpectedF1NearPrevalence) {
  st::SyntheticSpec spec;
  spec.samples = 1000;
  const auto train = st::planted_corpus(SourceKind::comment, spec, 1);
  const auto test = st::planted_corpus(SourceKind::comment, spec, 2);
  double sum = 0;
  const int runs = 50;
  for (int s = 0; s < runs; ++s) sum += random_classifier(train, test, static_cast<std::uint64_t>(s)).macro_f1();
  // Each debt type has prevalence 0.025, so its expected F1 is about 0.025.
  EXPECT_NEAR(sum / runs, 0.025, 0.01);
  EXPECT_EQ(random_classifier(train, test, 4), random_classifier(train, test, 4));
}

TEST(Tfidf, IdfArithmetic) {
  const std::vector<std::vector<std::string>> docs = {{"a", "b"}, {"a"}, {"a", "a"}, {"a", "c"}};
  const auto m = tfidf_fit(docs);
  EXPECT_NEAR(m.idf[m.vocabulary.at("a")], 1.0, 1e-12);
  EXPECT_NEAR(m.idf[m.vocabulary.at("b")], std::log(5.0 / 2.0) + 1.0, 1e-12);
  EXPECT_NEAR(m.idf[m.vocabulary.at("b")], 1.9163, 1e-4);
  EXPECT_THROW(tfidf_fit(std::vector<std::vector<std::string>>{}), InputError);
}

TEST(Tfidf, RowsAreUnitLength) {
  const std::vector<std::vector<std::string>> docs = {{"a", "b"}, {"a"}, {"c"}};
  const auto m = tfidf_fit(docs);
  const std::vector<std::string> doc = {"a", "b", "b", "zzz"};
  const auto row = tfidf_transform(m, doc);
  ASSERT_EQ(row.size(), 2u);
  double sq = 0;
  for (auto [_, v] : row) sq += v * v;
  EXPECT_NEAR(sq, 1.0, 1e-12);
  EXPECT_TRUE(tfidf_transform(m, std::vector<std::string>{"zzz"}).empty());
}

TEST(LogReg, SeparableToySet) {
  const auto train = corpus_of({{{"hack", "here"}, DebtLabel::code_design},
                                {{"hack", "there"}, DebtLabel::code_design},
                                {{"ugly", "hack"}, DebtLabel::code_design},
                                {{"nice", "code"}, DebtLabel::non_satd},
                                {{"clean", "code"}, DebtLabel::non_satd},
                                {{"good", "code"}, DebtLabel::non_satd}});
  LogRegConfig cfg;
  cfg.l2 = 0.01;
  cfg.iterations = 300;
  cfg.step = 1.0;
  const auto m = tfidf_logreg(train, train, cfg);
  EXPECT_EQ(m.tp[class_index(DebtLabel::code_design)] + m.tp[class_index(DebtLabel::non_satd)], 6u);
}

TEST(LogReg, ObjectiveDecreasesAndZeroInputUsesBias) {
  std::vector<SparseRow> xs = {{{0, 1.0}}, {{1, 1.0}}, {{0, 1.0}}};
  std::vector<DebtLabel> ys = {DebtLabel::test, DebtLabel::non_satd, DebtLabel::test};
  const auto m = logreg_train(xs, ys, 2);
  ASSERT_EQ(m.loss_history.size(), 501u);
  for (std::size_t i = 1; i < m.loss_history.size(); ++i) EXPECT_LE(m.loss_history[i], m.loss_history[i - 1] + 1e-12);
  const auto biggest = std::max_element(m.bias.begin(), m.bias.end()) - m.bias.begin();
  EXPECT_EQ(class_index(logreg_predict(m, SparseRow{})), static_cast<std::size_t>(biggest));
  EXPECT_EQ(logreg_predict(m, SparseRow{}), DebtLabel::test);
}

TEST(LogReg, Errors) {
  std::vector<SparseRow> xs = {{{0, 1.0}}, {{0, 1.0}}};
  EXPECT_THROW(logreg_train(xs, std::vector<DebtLabel>{DebtLabel::test, DebtLabel::test}, 1), InputError);
  EXPECT_THROW(logreg_train(xs, std::vector<DebtLabel>{DebtLabel::test}, 1), InputError);
  LogRegConfig wild;
  wild.step = 1e300;
  EXPECT_THROW(logreg_train(xs, std::vector<DebtLabel>{DebtLabel::test, DebtLabel::non_satd}, 1, wild), ComputeError);
}

}  // namespace
}  // namespace satd
