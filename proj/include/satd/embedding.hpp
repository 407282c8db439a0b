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

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "satd/common.hpp"
#include "satd/corpus.hpp"
#include "satd/rng.hpp"

namespace satd {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr std::string_view kPadWord = "<pad>";
inline constexpr std::string_view kUnkWord = "<unk>";

enum class EmbeddingMode : std::uint8_t { static_, non_static };

inline std::string_view to_string(EmbeddingMode m) {
  return m == EmbeddingMode::static_ ? "static" : "non_static";
}

// Word <-> index table. Indices 0 and 1 are reserved for padding and
// unknown words; corpus words start at 2.
class Vocab {
 public:
  Vocab() : words_{std::string(kPadWord), std::string(kUnkWord)} {}

  // Builds from an explicit word list (reserved entries excluded).
  explicit Vocab(const std::vector<std::string>& words) : Vocab() {
    for (const auto& w : words) add(w);
  }

  TokenId add(const std::string& word) {
    if (word == kPadWord || word == kUnkWord) throw InputError("reserved token in vocabulary: " + word);
    auto [it, inserted] = index_.emplace(word, static_cast<TokenId>(words_.size()));
    if (inserted) words_.push_back(word);
    return it->second;
  }

  TokenId lookup(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? kUnk : it->second;
  }

  bool contains(std::string_view word) const { return index_.contains(std::string(word)); }

  const std::string& word(TokenId id) const { return words_.at(static_cast<std::size_t>(id)); }

  // Including the two reserved entries.
  std::size_t size() const { return words_.size(); }

  const std::vector<std::string>& words() const { return words_; }

  // Content hash over the ordered word list.
  std::string hash() const {
    std::uint64_t h = fnv1a("satd-vocab");
    for (const auto& w : words_) {
      h = fnv1a(w, h);
      h = fnv1a(std::string_view("\n", 1), h);
    }
    return hex64(h);
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

// Orders words by descending frequency, ties lexicographically.
inline Vocab build_vocab(std::span<const std::vector<std::string>> token_lists, std::size_t min_count = 1) {
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& toks : token_lists)
    for (const auto& t : toks) ++freq[t];
  if (freq.empty()) throw InputError("cannot build a vocabulary from empty corpora");

  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [w, n] : freq)
    if (n >= min_count && w != kPadWord && w != kUnkWord) entries.emplace_back(w, n);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocab v;
  for (const auto& e : entries) v.add(e.first);
  return v;
}

inline Vocab build_vocab(std::span<const LabeledCorpus> corpora, std::size_t min_count = 1) {
  std::vector<std::vector<std::string>> lists;
  for (const auto& c : corpora)
    for (const auto& r : c.records()) lists.push_back(r.tokens);
  return build_vocab(std::span<const std::vector<std::string>>(lists), min_count);
}

// Dense V x k table, row-major. Row kPad stays zero.
template <typename Scalar>
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  EmbeddingMode mode = EmbeddingMode::static_;
  std::vector<Scalar> data;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t v, std::size_t k, EmbeddingMode m) : rows(v), dim(k), mode(m), data(v * k) {}

  std::span<Scalar> row(std::size_t i) { return {data.data() + i * dim, dim}; }
  std::span<const Scalar> row(std::size_t i) const { return {data.data() + i * dim, dim}; }

  template <typename Other>
  EmbeddingMatrix<Other> cast() const {
    EmbeddingMatrix<Other> out(rows, dim, mode);
    std::transform(data.begin(), data.end(), out.data.begin(), [](Scalar x) { return static_cast<Other>(x); });
    return out;
  }
};

inline constexpr double kInitRange = 0.25;

template <typename Scalar = float>
EmbeddingMatrix<Scalar> random_init(const Vocab& vocab, std::size_t dim, std::uint64_t seed,
                                    EmbeddingMode mode = EmbeddingMode::static_) {
  if (dim == 0) throw InputError("embedding dimension must be positive");
  EmbeddingMatrix<Scalar> m(vocab.size(), dim, mode);
  Rng rng(seed);
  for (std::size_t i = 1; i < m.rows; ++i)
    for (auto& x : m.row(i)) x = static_cast<Scalar>(rng.uniform(-kInitRange, kInitRange));
  return m;
}

// Reads fastText-style text vectors ("V D" header, then "word f1 ... fD").
// Vocabulary words missing from the file keep their random initialization.
template <typename Scalar = float>
EmbeddingMatrix<Scalar> load_vec(std::istream& in, const Vocab& vocab, std::size_t dim, std::uint64_t seed,
                                 EmbeddingMode mode = EmbeddingMode::static_) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("vector file is empty");
  std::size_t n_words = 0, file_dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> n_words >> file_dim)) throw InputError("line 1: malformed vector header");
  }
  if (file_dim != dim)
    throw InputError("vector file dimension " + std::to_string(file_dim) + " does not match expected " +
                     std::to_string(dim));

  auto m = random_init<Scalar>(vocab, dim, seed, mode);
  std::vector<float> values(dim);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0) throw InputError("line " + std::to_string(lineno) + ": malformed vector line");
    const std::string_view word(line.data(), sp);
    const char* p = line.data() + sp;
    const char* end = line.data() + line.size();
    for (std::size_t d = 0; d < dim; ++d) {
      while (p < end && *p == ' ') ++p;
      auto [next, ec] = std::from_chars(p, end, values[d]);
      if (ec != std::errc() || p == end)
        throw InputError("line " + std::to_string(lineno) + ": malformed vector line");
      p = next;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) throw InputError("line " + std::to_string(lineno) + ": malformed vector line (extra values)");

    const TokenId id = vocab.lookup(word);
    if (id == kUnk && word != kUnkWord) continue;
    if (id == kPad) continue;
    auto row = m.row(static_cast<std::size_t>(id));
    for (std::size_t d = 0; d < dim; ++d) row[d] = static_cast<Scalar>(values[d]);
  }
  return m;
}

template <typename Scalar = float>
EmbeddingMatrix<Scalar> load_vec_file(const std::string& path, const Vocab& vocab, std::size_t dim,
                                      std::uint64_t seed, EmbeddingMode mode = EmbeddingMode::static_) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return load_vec<Scalar>(in, vocab, dim, seed, mode);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

struct Encoded {
  std::vector<TokenId> ids;  // exactly max_len entries
  std::size_t length = 0;    // non-padding prefix
};

inline Encoded encode(std::span<const std::string> tokens, const Vocab& vocab, std::size_t max_len) {
  Encoded e;
  e.ids.assign(max_len, kPad);
  e.length = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < e.length; ++i) e.ids[i] = vocab.lookup(tokens[i]);
  return e;
}

}  // namespace satd
