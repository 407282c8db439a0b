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

// Reference classifiers: prevalence-matched random guessing and TF-IDF
// features with multinomial logistic regression.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "satd/common.hpp"
#include "satd/corpus.hpp"
#include "satd/metrics.hpp"
#include "satd/rng.hpp"

namespace satd {

// Samples each test label from the training class distribution.
inline std::vector<DebtLabel> random_predictions(const ClassCounts& train_counts, std::size_t n, std::uint64_t seed) {
  std::size_t total = 0;
  for (auto c : train_counts) total += c;
  if (total == 0) throw InputError("random classifier needs a non-empty training set");
  Rng rng(seed);
  std::vector<DebtLabel> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto pick = rng.below(total);
    std::size_t c = 0;
    while (pick >= train_counts[c]) pick -= train_counts[c++];
    out.push_back(label_from_index(c));
  }
  return out;
}

inline Metrics random_classifier(const LabeledCorpus& train, const LabeledCorpus& test, std::uint64_t seed) {
  if (train.empty()) throw InputError("random classifier needs a non-empty training set");
  const auto pred = random_predictions(train.class_counts(), test.size(), seed);
  Metrics m;
  for (std::size_t i = 0; i < test.size(); ++i) m.add(*test.records()[i].label, pred[i]);
  return m;
}

// ---------------------------------------------------------------------------
// TF-IDF

using SparseRow = std::vector<std::pair<std::size_t, double>>;  // sorted by column

// Smoothed idf: ln((1 + N) / (1 + df)) + 1; raw term counts; L2 rows.
struct TfidfModel {
  std::map<std::string, std::size_t> vocabulary;
  std::vector<double> idf;
  std::size_t documents = 0;

  std::size_t columns() const { return idf.size(); }
};

inline TfidfModel tfidf_fit(std::span<const std::vector<std::string>> docs) {
  if (docs.empty()) throw InputError("cannot fit TF-IDF on an empty training set");
  TfidfModel m;
  m.documents = docs.size();
  std::map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    std::vector<std::string> uniq(d.begin(), d.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[t];
  }
  const double n = static_cast<double>(m.documents);
  for (const auto& [term, count] : df) {
    m.vocabulary.emplace(term, m.idf.size());
    m.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return m;
}

// Terms outside the fitted vocabulary are dropped.
inline SparseRow tfidf_transform(const TfidfModel& m, std::span<const std::string> doc) {
  std::map<std::size_t, double> tf;
  for (const auto& t : doc)
    if (auto it = m.vocabulary.find(t); it != m.vocabulary.end()) tf[it->second] += 1.0;
  SparseRow row;
  double norm = 0;
  for (auto [col, count] : tf) {
    const double v = count * m.idf[col];
    row.emplace_back(col, v);
    norm += v * v;
  }
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (auto& e : row) e.second /= norm;
  }
  return row;
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogRegConfig {
  double l2 = 1.0;  // penalty (l2 / 2N) * ||W||^2 on top of mean cross-entropy
  std::size_t iterations = 500;
  double step = 0.1;
};

struct LogRegModel {
  std::size_t classes = kNumLabels;
  std::size_t features = 0;
  std::vector<double> weight;  // classes x features
  std::vector<double> bias;
  std::vector<double> loss_history;  // objective before each update, then final

  std::vector<double> scores(const SparseRow& x) const {
    std::vector<double> s(bias);
    for (std::size_t c = 0; c < classes; ++c)
      for (auto [col, v] : x) s[c] += weight[c * features + col] * v;
    return s;
  }
};

namespace detail {

inline double logreg_objective(const LogRegModel& m, std::span<const SparseRow> xs, std::span<const DebtLabel> ys,
                               double l2, std::vector<std::vector<double>>* probs) {
  const double n = static_cast<double>(xs.size());
  double loss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto s = m.scores(xs[i]);
    const double mx = *std::max_element(s.begin(), s.end());
    double z = 0;
    for (auto& v : s) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    loss -= s[class_index(ys[i])] - log_z;
    if (probs) {
      auto& p = (*probs)[i];
      p.resize(m.classes);
      for (std::size_t c = 0; c < m.classes; ++c) p[c] = std::exp(s[c] - log_z);
    }
  }
  double sq = 0;
  for (double w : m.weight) sq += w * w;
  return loss / n + l2 / (2.0 * n) * sq;
}

}  // namespace detail

// Full-batch gradient descent on the L2-penalized mean cross-entropy.
inline LogRegModel logreg_train(std::span<const SparseRow> xs, std::span<const DebtLabel> ys, std::size_t features,
                                const LogRegConfig& config = {}) {
  if (xs.size() != ys.size()) throw InputError("vectors and labels differ in length");
  std::array<bool, kNumLabels> seen{};
  for (auto y : ys) seen[class_index(y)] = true;
  if (std::count(seen.begin(), seen.end(), true) < 2)
    throw InputError("logistic regression needs at least two classes in the training data");

  LogRegModel m;
  m.features = features;
  m.weight.assign(m.classes * features, 0.0);
  m.bias.assign(m.classes, 0.0);
  const double n = static_cast<double>(xs.size());
  std::vector<std::vector<double>> probs(xs.size());
  std::vector<double> gw(m.weight.size());
  std::vector<double> gb(m.classes);

  for (std::size_t it = 0; it <= config.iterations; ++it) {
    const double obj = detail::logreg_objective(m, xs, ys, config.l2, it < config.iterations ? &probs : nullptr);
    if (!std::isfinite(obj))
      throw ComputeError("logistic regression diverged at iteration " + std::to_string(it) +
                         "; try a smaller step size");
    m.loss_history.push_back(obj);
    if (it == config.iterations) break;

    for (std::size_t j = 0; j < gw.size(); ++j) gw[j] = config.l2 / n * m.weight[j];
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t c = 0; c < m.classes; ++c) {
        const double d = (probs[i][c] - (class_index(ys[i]) == c ? 1.0 : 0.0)) / n;
        gb[c] += d;
        for (auto [col, v] : xs[i]) gw[c * features + col] += d * v;
      }
    for (std::size_t j = 0; j < gw.size(); ++j) m.weight[j] -= config.step * gw[j];
    for (std::size_t c = 0; c < m.classes; ++c) m.bias[c] -= config.step * gb[c];
  }
  return m;
}

inline DebtLabel logreg_predict(const LogRegModel& m, const SparseRow& x) {
  const auto s = m.scores(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < s.size(); ++c)
    if (s[c] > s[best]) best = c;
  return label_from_index(best);
}

// Fits TF-IDF and logistic regression on `train`, scores `test`.
inline Metrics tfidf_logreg(const LabeledCorpus& train, const LabeledCorpus& test, const LogRegConfig& config = {}) {
  std::vector<std::vector<std::string>> docs;
  std::vector<DebtLabel> ys;
  for (const auto& r : train.records()) {
    docs.push_back(r.tokens);
    ys.push_back(*r.label);
  }
  const auto tfidf = tfidf_fit(docs);
  std::vector<SparseRow> xs;
  for (const auto& d : docs) xs.push_back(tfidf_transform(tfidf, d));
  const auto model = logreg_train(xs, ys, tfidf.columns(), config);
  Metrics m;
  for (const auto& r : test.records()) m.add(*r.label, logreg_predict(model, tfidf_transform(tfidf, r.tokens)));
  return m;
}

}  // namespace satd
