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

// Record ingestion, cleansing, tokenization and stratified fold assignment.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "satd/common.hpp"
#include "satd/rng.hpp"

namespace satd {

// Cross-source references found in a record (issue keys, PR/issue
// numbers, commit hashes).
struct RefSet {
  std::set<std::string> issue_keys;
  std::set<std::int64_t> pr_numbers;
  std::set<std::string> commit_hashes;

  bool empty() const {
    return issue_keys.empty() && pr_numbers.empty() && commit_hashes.empty();
  }

  void merge(const RefSet& o) {
    issue_keys.insert(o.issue_keys.begin(), o.issue_keys.end());
    pr_numbers.insert(o.pr_numbers.begin(), o.pr_numbers.end());
    commit_hashes.insert(o.commit_hashes.begin(), o.commit_hashes.end());
  }

  friend bool operator==(const RefSet&, const RefSet&) = default;
};

// One classifiable text unit: a code comment, a commit message, or a
// single section (summary, description, comment) of a pull or issue.
struct Record {
  std::string id;
  SourceKind source = SourceKind::comment;
  std::string project;
  std::string author;
  // Identity of the enclosing artifact used for linking: issue key or
  // number, pull number, or commit hash. Falls back to `id` when empty.
  std::string artifact;
  std::string raw_text;
  std::string clean_text;
  std::vector<std::string> tokens;
  std::optional<DebtLabel> label;
  RefSet refs;

  const std::string& artifact_key() const { return artifact.empty() ? id : artifact; }

  friend bool operator==(const Record&, const Record&) = default;
};

// ---------------------------------------------------------------------------
// JSON Lines I/O

namespace detail {

inline std::string json_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string())
    throw InputError("line " + std::to_string(line) + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

inline RefSet parse_refs(const nlohmann::json& j, std::size_t line) {
  RefSet refs;
  if (!j.is_object())
    throw InputError("line " + std::to_string(line) + ": field 'refs' must be an object");
  try {
    if (auto it = j.find("issue_keys"); it != j.end())
      for (const auto& v : *it) refs.issue_keys.insert(v.get<std::string>());
    if (auto it = j.find("pr_numbers"); it != j.end())
      for (const auto& v : *it) refs.pr_numbers.insert(v.get<std::int64_t>());
    if (auto it = j.find("commit_hashes"); it != j.end())
      for (const auto& v : *it) refs.commit_hashes.insert(v.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError("line " + std::to_string(line) + ": bad 'refs' entry: " + e.what());
  }
  return refs;
}

}  // namespace detail

// Parses one JSON object per line. Blank lines are skipped. Aborts on the
// first malformed line, unknown source/label, or duplicate id.
inline std::vector<Record> parse_jsonl(std::istream& in) {
  std::vector<Record> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw InputError("line " + std::to_string(lineno) + ": expected a JSON object");
    for (const char* key : {"id", "source", "text"})
      if (!j.contains(key))
        throw InputError("line " + std::to_string(lineno) + ": missing required field '" + key + "'");

    Record r;
    r.id = detail::json_string(j, "id", lineno);
    const std::string src = detail::json_string(j, "source", lineno);
    auto source = parse_source(src);
    if (!source) throw InputError("line " + std::to_string(lineno) + ": unknown source \"" + src + "\"");
    r.source = *source;
    r.raw_text = detail::json_string(j, "text", lineno);
    r.project = detail::json_string(j, "project", lineno);
    r.author = detail::json_string(j, "author", lineno);
    r.artifact = detail::json_string(j, "artifact", lineno);
    r.clean_text = detail::json_string(j, "clean_text", lineno);
    if (auto it = j.find("tokens"); it != j.end() && !it->is_null()) {
      try {
        r.tokens = it->get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception&) {
        throw InputError("line " + std::to_string(lineno) + ": field 'tokens' must be an array of strings");
      }
    }
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      const std::string lab = detail::json_string(j, "label", lineno);
      auto label = parse_label(lab);
      if (!label) throw InputError("line " + std::to_string(lineno) + ": unknown label \"" + lab + "\"");
      r.label = *label;
    }
    if (auto it = j.find("refs"); it != j.end() && !it->is_null()) r.refs = detail::parse_refs(*it, lineno);

    if (!seen.insert(r.id).second)
      throw InputError("line " + std::to_string(lineno) + ": duplicate id \"" + r.id + "\"");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Record> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return parse_jsonl(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline nlohmann::json to_json(const Record& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["source"] = to_string(r.source);
  j["text"] = r.raw_text;
  if (!r.project.empty()) j["project"] = r.project;
  if (!r.author.empty()) j["author"] = r.author;
  if (!r.artifact.empty()) j["artifact"] = r.artifact;
  if (!r.clean_text.empty()) j["clean_text"] = r.clean_text;
  if (!r.tokens.empty()) j["tokens"] = r.tokens;
  if (r.label) j["label"] = to_string(*r.label);
  if (!r.refs.empty()) {
    nlohmann::json refs = nlohmann::json::object();
    if (!r.refs.issue_keys.empty()) refs["issue_keys"] = r.refs.issue_keys;
    if (!r.refs.pr_numbers.empty()) refs["pr_numbers"] = r.refs.pr_numbers;
    if (!r.refs.commit_hashes.empty()) refs["commit_hashes"] = r.refs.commit_hashes;
    j["refs"] = std::move(refs);
  }
  return j;
}

inline void write_jsonl(const std::vector<Record>& records, std::ostream& out) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Cleansing

// Removes ```fenced``` spans and Jira {code}...{code} spans, delimiters
// included. An unclosed opening delimiter swallows the rest of the text.
inline std::string strip_code_blocks(std::string_view text) {
  static constexpr std::string_view kFence = "```";
  static constexpr std::string_view kJira = "{code";
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t fence = text.find(kFence, pos);
    std::size_t jira = text.find(kJira, pos);
    // "{code" must be followed by '}' or ':' to be a marker.
    while (jira != std::string_view::npos && jira + kJira.size() < text.size() &&
           text[jira + kJira.size()] != '}' && text[jira + kJira.size()] != ':')
      jira = text.find(kJira, jira + 1);
    if (jira != std::string_view::npos && jira + kJira.size() >= text.size()) jira = std::string_view::npos;

    const std::size_t open = std::min(fence, jira);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));

    std::size_t body, close_end = std::string_view::npos;
    if (open == fence) {
      body = open + kFence.size();
      if (auto c = text.find(kFence, body); c != std::string_view::npos) close_end = c + kFence.size();
    } else {
      const std::size_t brace = text.find('}', open);
      if (brace == std::string_view::npos) break;
      body = brace + 1;
      if (auto c = text.find("{code}", body); c != std::string_view::npos) close_end = c + 6;
    }
    if (close_end == std::string_view::npos) break;
    pos = close_end;
  }
  return out;
}

// Loads a bot username list: one name per line, blank lines and lines
// starting with '#' ignored, surrounding whitespace trimmed.
inline std::unordered_set<std::string> parse_bot_list(std::istream& in) {
  std::unordered_set<std::string> bots;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    bots.insert(line.substr(b, e - b + 1));
  }
  return bots;
}

inline std::unordered_set<std::string> load_bot_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open bot list " + path);
  return parse_bot_list(in);
}

// Drops records whose author exactly matches a bot username.
inline std::vector<Record> remove_bot_records(std::vector<Record> records,
                                              const std::unordered_set<std::string>& bots) {
  if (bots.empty()) return records;
  std::erase_if(records, [&](const Record& r) { return bots.contains(r.author); });
  return records;
}

// Deletes digits, maps every other byte that is not an ASCII letter,
// apostrophe or hyphen to a space, lowercases, and collapses whitespace.
inline std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= '0' && c <= '9') continue;
    const bool keep = (c < 0x80 && std::isalpha(c)) || c == '\'' || c == '-';
    if (!keep) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find(' ', pos), text.size());
    if (end > pos) tokens.emplace_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Labeled corpora and folds

using ClassCounts = std::array<std::size_t, kNumLabels>;

// Labeled records of a single source.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;

  LabeledCorpus(SourceKind source, std::vector<Record> records)
      : source_(source), records_(std::move(records)) {
    for (const auto& r : records_) {
      if (!r.label) throw InputError("record " + r.id + " has no label");
      if (r.source != source_)
        throw InputError("record " + r.id + " has source " + std::string(to_string(r.source)) +
                         ", corpus is " + std::string(to_string(source_)));
      ++counts_[class_index(*r.label)];
    }
  }

  SourceKind source() const { return source_; }
  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const ClassCounts& class_counts() const { return counts_; }

 private:
  SourceKind source_ = SourceKind::comment;
  std::vector<Record> records_;
  ClassCounts counts_{};
};

// Groups labeled records by source. Unlabeled records are skipped.
inline std::array<LabeledCorpus, kNumSources> split_by_source(const std::vector<Record>& records) {
  std::array<std::vector<Record>, kNumSources> buckets;
  for (const auto& r : records)
    if (r.label) buckets[task_index(r.source)].push_back(r);
  std::array<LabeledCorpus, kNumSources> out;
  for (std::size_t t = 0; t < kNumSources; ++t)
    out[t] = LabeledCorpus(source_from_index(t), std::move(buckets[t]));
  return out;
}

struct FoldAssignment {
  std::size_t k = 0;
  std::map<std::string, std::size_t> assignment;
  std::vector<std::string> warnings;

  std::size_t fold_of(const std::string& id) const { return assignment.at(id); }
};

// Seeded shuffle of each class followed by a round-robin deal. The deal
// pointer carries over between classes so fold totals also stay within one.
inline FoldAssignment stratified_split(const LabeledCorpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InputError("fold count must be at least 2");
  if (corpus.empty()) throw InputError("cannot split an empty corpus");

  FoldAssignment fa;
  fa.k = k;
  Rng rng(seed);
  std::array<std::vector<std::size_t>, kNumLabels> by_class;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    by_class[class_index(*corpus.records()[i].label)].push_back(i);

  std::size_t next = 0;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < k)
      fa.warnings.push_back("class " + std::string(to_string(label_from_index(c))) + " has " +
                            std::to_string(idx.size()) + " records, fewer than " + std::to_string(k) +
                            " folds");
    rng.shuffle(idx);
    for (std::size_t i : idx) {
      fa.assignment.emplace(corpus.records()[i].id, next);
      next = (next + 1) % k;
    }
  }
  return fa;
}

}  // namespace satd
