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

// Keyword extraction by backtracking pooled features.
//
// Each pooled feature X_f is weighted by the output-layer weight of the
// target class, W[c, f]. The strongest features are traced back through
// their max-pooling position to the word window that produced them, and
// those n-grams are accumulated per source and debt type.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "satd/checkpoint.hpp"
#include "satd/corpus.hpp"
#include "satd/model.hpp"
#include "satd/train_eval.hpp"

namespace satd {

struct KeywordEntry {
  std::string phrase;  // space-joined token n-gram
  double score = 0;
  std::size_t frequency = 0;

  friend bool operator==(const KeywordEntry&, const KeywordEntry&) = default;
};

// Score descending, then frequency descending, then phrase.
inline bool keyword_before(const KeywordEntry& a, const KeywordEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.frequency != b.frequency) return a.frequency > b.frequency;
  return a.phrase < b.phrase;
}

struct KeywordReport {
  SourceKind source = SourceKind::comment;
  std::array<std::vector<KeywordEntry>, kNumDebtTypes> by_class;
  double top_fraction = 1.0;

  // All debt types folded into one ranked list for the source.
  std::vector<KeywordEntry> merged() const {
    std::map<std::string, KeywordEntry> acc;
    for (const auto& list : by_class)
      for (const auto& e : list) {
        auto& m = acc[e.phrase];
        m.phrase = e.phrase;
        m.score += e.score;
        m.frequency += e.frequency;
      }
    std::vector<KeywordEntry> out;
    for (auto& [_, e] : acc) out.push_back(std::move(e));
    std::sort(out.begin(), out.end(), keyword_before);
    return out;
  }
};

// score_f = X_f * W_task[target_class, f], from an inference-mode cache.
inline std::vector<float> feature_contributions(const Model& model, const ForwardCache<float>& cache,
                                                std::size_t target_class) {
  if (cache.task >= model.params.heads.size()) throw InputError("task out of range");
  if (target_class >= model.config.num_classes) throw InputError("class out of range");
  const std::size_t F = model.config.feature_width();
  const float* w = model.params.heads[cache.task].weight.data() + target_class * F;
  std::vector<float> scores(F);
  for (std::size_t f = 0; f < F; ++f) scores[f] = cache.features[f] * w[f];
  return scores;
}

// X_f * (W[target_class, f] - mean_c W[c, f]): the feature's push on the
// target class relative to the average class. Unlike the raw product it
// does not move when a head column shifts uniformly, which leaves the
// softmax unchanged.
inline std::vector<float> centered_contributions(const Model& model, const ForwardCache<float>& cache,
                                                 std::size_t target_class) {
  auto scores = feature_contributions(model, cache, target_class);
  const std::size_t F = model.config.feature_width();
  const std::size_t C = model.config.num_classes;
  const float* w = model.params.heads[cache.task].weight.data();
  for (std::size_t f = 0; f < F; ++f) {
    float mean = 0;
    for (std::size_t c = 0; c < C; ++c) mean += w[c * F + f];
    mean /= static_cast<float>(C);
    scores[f] -= cache.features[f] * mean;
  }
  return scores;
}

inline std::vector<float> feature_contributions(const Model& model, std::span<const TokenId> ids, std::size_t task,
                                                std::size_t target_class) {
  if (task >= model.config.num_tasks) throw InputError("task out of range");
  return feature_contributions(model, infer(model.params, model.config, ids, task), target_class);
}

// Word window [p, p + h) behind pooled feature f, with padding positions
// dropped. `tokens` is the record's token sequence.
template <typename Scalar>
std::vector<std::string> backtrack(const ForwardCache<Scalar>& cache, const ModelConfig& config, std::size_t f,
                                   std::span<const std::string> tokens) {
  if (f >= config.feature_width()) throw InputError("feature index " + std::to_string(f) + " out of range");
  const std::size_t h = config.region_sizes[f / config.feature_maps];
  const std::size_t p = cache.argmax[f];
  const std::size_t end = std::min({p + h, cache.length, tokens.size()});
  std::vector<std::string> phrase;
  for (std::size_t i = p; i < end; ++i) phrase.push_back(tokens[i]);
  return phrase;
}

inline std::string join_phrase(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s.push_back(' ');
    s += w;
  }
  return s;
}

struct KeywordOptions {
  std::size_t per_sample_top = 3;
  std::size_t min_frequency = 2;
  bool use_predicted = false;  // default: use the gold labels
  bool centered = true;        // rank by centered_contributions
};

inline KeywordReport extract_keywords(const Model& model, const LabeledCorpus& corpus, std::size_t task,
                                      const KeywordOptions& options = {}) {
  if (task >= model.config.num_tasks) throw InputError("task out of range");
  struct Acc {
    double score = 0;
    std::size_t frequency = 0;
  };
  std::array<std::map<std::string, Acc>, kNumDebtTypes> acc;
  const std::size_t F = model.config.feature_width();
  std::vector<std::size_t> order(F);

  for (const auto& r : corpus.records()) {
    const auto e = encode_record(r, model.vocab, model.config.max_len);
    const auto cache = infer(model.params, model.config, std::span<const TokenId>(e.ids), task);
    const DebtLabel target = options.use_predicted ? label_from_index(argmax_class<float>(cache.probs)) : *r.label;
    if (!is_satd(target)) continue;

    const auto scores = options.centered ? centered_contributions(model, cache, class_index(target))
                                         : feature_contributions(model, cache, class_index(target));
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t top = std::min(options.per_sample_top, F);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](std::size_t a, std::size_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });

    std::set<std::string> seen;
    auto& bucket = acc[class_index(target)];
    for (std::size_t i = 0; i < top; ++i) {
      const std::size_t f = order[i];
      if (!(scores[f] > 0)) break;  // only features that push toward the class
      const auto phrase = join_phrase(backtrack(cache, model.config, f, std::span<const std::string>(r.tokens)));
      if (phrase.empty()) continue;
      auto& a = bucket[phrase];
      a.score += scores[f];
      if (seen.insert(phrase).second) ++a.frequency;
    }
  }

  KeywordReport report;
  report.source = corpus.source();
  for (std::size_t c = 0; c < kNumDebtTypes; ++c) {
    for (const auto& [phrase, a] : acc[c])
      if (a.frequency >= options.min_frequency) report.by_class[c].push_back({phrase, a.score, a.frequency});
    std::sort(report.by_class[c].begin(), report.by_class[c].end(), keyword_before);
  }
  return report;
}

// Shared-phrase counts between ranked keyword lists. Every list is cut to
// floor(top_fraction * mean list length) entries; entry (i, j) counts
// phrases present in both cut lists and the diagonal holds the cutoff.
inline std::vector<std::vector<std::size_t>> shared_keyword_matrix(std::span<const std::vector<std::string>> lists,
                                                                   double top_fraction) {
  if (!(top_fraction > 0 && top_fraction <= 1)) throw InputError("top fraction must be in (0, 1]");
  if (lists.empty()) throw InputError("no keyword lists given");
  std::size_t total = 0;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    if (lists[i].empty()) throw InputError("keyword list " + std::to_string(i) + " is empty");
    total += lists[i].size();
  }
  const double mean = static_cast<double>(total) / static_cast<double>(lists.size());
  const auto cutoff = static_cast<std::size_t>(std::floor(top_fraction * mean + 1e-9));

  std::vector<std::set<std::string>> cut;
  for (const auto& l : lists) cut.emplace_back(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(std::min(cutoff, l.size())));

  const std::size_t n = lists.size();
  std::vector<std::vector<std::size_t>> m(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = cutoff;
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t shared = 0;
      for (const auto& p : cut[i]) shared += cut[j].contains(p);
      m[i][j] = m[j][i] = shared;
    }
  }
  return m;
}

inline std::vector<std::string> phrases_of(const std::vector<KeywordEntry>& entries) {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.phrase);
  return out;
}

}  // namespace satd
