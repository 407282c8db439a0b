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
#include <sstream>

#include "satd/embedding.hpp"

namespace satd {
namespace {

using Lists = std::vector<std::vector<std::string>>;

TEST(Vocab, OrderingRule) {
  const Lists docs = {{"a", "b", "a"}, {"a"}};
  const auto v = build_vocab(docs, 1);
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.word(kPad), "<pad>");
  EXPECT_EQ(v.word(kUnk), "<unk>");
  EXPECT_EQ(v.lookup("a"), 2);
  EXPECT_EQ(v.lookup("b"), 3);
  EXPECT_EQ(v.word(2), "a");
}

TEST(Vocab, MinCountAndTies) {
  const Lists docs = {{"a", "b", "a", "a", "d", "c"}};
  const auto v = build_vocab(docs, 2);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
  EXPECT_EQ(v.lookup("b"), kUnk);
  const auto all = build_vocab(docs, 1);
  EXPECT_EQ(all.lookup("b"), 3);
  EXPECT_EQ(all.lookup("c"), 4);
  EXPECT_EQ(all.lookup("d"), 5);
}

// A literal "<pad>" in text must not become padding.
TEST(Vocab, ReservedWordsNeverCollide) {
  const Lists docs = {{"<pad>", "<unk>", "x"}};
  const auto v = build_vocab(docs, 1);
  EXPECT_EQ(v.lookup("<pad>"), kUnk);
  EXPECT_EQ(v.lookup("<unk>"), kUnk);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_THROW(Vocab().add("<pad>"), InputError);
}

TEST(Vocab, EmptyInputIsAnError) {
  EXPECT_THROW(build_vocab(Lists{}, 1), InputError);
}

TEST(Vocab, HashTracksContents) {
  const auto a = build_vocab(Lists{{"x", "y"}}, 1);
  const auto b = build_vocab(Lists{{"x", "y"}}, 1);
  const auto c = build_vocab(Lists{{"x", "z"}}, 1);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
}

TEST(RandomInit, DeterministicPadZeroBounded) {
  const auto v = build_vocab(Lists{{"a", "b", "c"}}, 1);
  const auto m1 = random_init<float>(v, 8, 42);
  const auto m2 = random_init<float>(v, 8, 42);
  EXPECT_EQ(m1.data, m2.data);
  EXPECT_EQ(m1.rows, v.size());
  for (float x : m1.row(kPad)) EXPECT_EQ(x, 0.0f);
  for (std::size_t i = m1.dim; i < m1.data.size(); ++i) {
    EXPECT_GE(m1.data[i], -0.25f);
    EXPECT_LE(m1.data[i], 0.25f);
  }
  EXPECT_THROW(random_init<float>(v, 0, 1), InputError);
}

TEST(RandomInit, MeanNearZero) {
  Vocab v;
  for (int i = 0; i < 2000; ++i) v.add("w" + std::to_string(i));
  const auto m = random_init<double>(v, 50, 7);
  double sum = 0;
  const std::size_t n = m.data.size() - m.dim;
  for (std::size_t i = m.dim; i < m.data.size(); ++i) sum += m.data[i];
  const double mean = sum / static_cast<double>(n);
  const double sigma = 0.5 / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
  EXPECT_LT(std::abs(mean), 3 * sigma);
}

TEST(LoadVec, CopiesKnownRows) {
  Vocab v;
  v.add("foo");
  v.add("missing");
  std::istringstream in("2 3\nfoo 1 2 3\nbar 4 5 6\n");
  const auto m = load_vec<float>(in, v, 3, 1);
  const auto foo = m.row(static_cast<std::size_t>(v.lookup("foo")));
  EXPECT_EQ(std::vector<float>(foo.begin(), foo.end()), (std::vector<float>{1, 2, 3}));
  for (float x : m.row(static_cast<std::size_t>(v.lookup("missing")))) {
    EXPECT_GE(x, -0.25f);
    EXPECT_LE(x, 0.25f);
  }
  for (float x : m.row(kPad)) EXPECT_EQ(x, 0.0f);
}

TEST(LoadVec, Errors) {
  Vocab v;
  v.add("foo");
  std::istringstream dim("2 3\nfoo 1 2 3\n");
  EXPECT_THROW(load_vec<float>(dim, v, 300, 1), InputError);
  std::istringstream bad("1 3\nfoo 1 x 3\n");
  try {
    load_vec<float>(bad, v, 3, 1);
    FAIL() << "malformed line accepted";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::istringstream empty("");
  EXPECT_THROW(load_vec<float>(empty, v, 3, 1), InputError);
  EXPECT_THROW(load_vec_file<float>("/nonexistent/file.vec", v, 3, 1), InputError);
}

TEST(Encode, PadTruncateUnknown) {
  Vocab v;
  v.add("fix");
  v.add("typo");
  const std::vector<std::string> t = {"fix", "typo"};
  const auto e = encode(t, v, 4);
  EXPECT_EQ(e.ids, (std::vector<TokenId>{2, 3, 0, 0}));
  EXPECT_EQ(e.length, 2u);
  const std::vector<std::string> u = {"what"};
  EXPECT_EQ(encode(u, v, 2).ids, (std::vector<TokenId>{kUnk, kPad}));
  const std::vector<std::string> many(10, "fix");
  const auto tr = encode(many, v, 4);
  EXPECT_EQ(tr.length, 4u);
  EXPECT_EQ(tr.ids, (std::vector<TokenId>{2, 2, 2, 2}));
}

}  // namespace
}  // namespace satd
