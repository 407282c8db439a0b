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

// Cross-source linking: reference extraction, contribution flows, and
// bag-of-words similarity between debt items inside a flow.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "satd/common.hpp"
#include "satd/corpus.hpp"

namespace satd {

struct RefPatterns {
  std::string issue_key = R"(\b[A-Z][A-Z0-9]+-[0-9]+\b)";
  std::string pr_number = R"(#([0-9]+)\b)";
  std::string commit_hash = R"(\b[0-9a-f]{7,40}\b)";
};

// Compiled form of RefPatterns; build once and reuse.
class RefExtractor {
 public:
  explicit RefExtractor(const RefPatterns& p = {})
      : issue_(p.issue_key), pr_(p.pr_number), hash_(p.commit_hash) {}

  RefSet operator()(const std::string& text) const {
    RefSet refs;
    for (std::sregex_iterator it(text.begin(), text.end(), issue_), end; it != end; ++it)
      refs.issue_keys.insert(it->str());
    for (std::sregex_iterator it(text.begin(), text.end(), pr_), end; it != end; ++it) {
      const std::string digits = it->size() > 1 && (*it)[1].matched ? (*it)[1].str() : it->str();
      try {
        refs.pr_numbers.insert(std::stoll(digits.substr(digits.find_first_of("0123456789"))));
      } catch (const std::exception&) {
        // out of range or no digits: not a usable reference
      }
    }
    for (std::sregex_iterator it(text.begin(), text.end(), hash_), end; it != end; ++it) {
      const std::string h = it->str();
      // Require a digit so English words such as "defaced" are not hashes.
      if (std::any_of(h.begin(), h.end(), [](char c) { return c >= '0' && c <= '9'; })) refs.commit_hashes.insert(h);
    }
    return refs;
  }

 private:
  std::regex issue_;
  std::regex pr_;
  std::regex hash_;
};

inline RefSet extract_refs(const std::string& text, const RefPatterns& patterns = {}) {
  return RefExtractor(patterns)(text);
}

// ---------------------------------------------------------------------------
// Contribution flows

enum class FlowKind : std::uint8_t { IPCC, ICC, PCC, CC };

inline constexpr std::array<FlowKind, 4> kAllFlowKinds = {FlowKind::IPCC, FlowKind::ICC, FlowKind::PCC, FlowKind::CC};

inline std::string_view to_string(FlowKind k) {
  switch (k) {
    case FlowKind::IPCC: return "IPCC";
    case FlowKind::ICC: return "ICC";
    case FlowKind::PCC: return "PCC";
    case FlowKind::CC: return "CC";
  }
  return "?";
}

struct ContributionFlow {
  std::size_t id = 0;
  FlowKind kind = FlowKind::CC;
  std::vector<std::string> issue_ids;
  std::vector<std::string> pull_ids;
  std::vector<std::string> commit_ids;
  std::vector<std::string> comment_ids;
};

struct UnresolvedRef {
  std::string record_id;
  std::string ref;
};

struct FlowSet {
  std::vector<ContributionFlow> flows;
  std::vector<UnresolvedRef> unresolved;

  std::array<std::size_t, 4> kind_counts() const {
    std::array<std::size_t, 4> n{};
    for (const auto& f : flows) ++n[static_cast<std::size_t>(f.kind)];
    return n;
  }
};

// Commit record id -> ids of the code comment records it touched.
using CommentLinks = std::map<std::string, std::vector<std::string>>;

inline CommentLinks parse_comment_links(std::istream& in) {
  CommentLinks links;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto& dst = links[j.at("commit").get<std::string>()];
      for (const auto& c : j.at("comments")) dst.push_back(c.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw InputError("line " + std::to_string(lineno) + ": malformed commit/comment link: " + e.what());
    }
  }
  return links;
}

inline CommentLinks load_comment_links(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_comment_links(in);
}

namespace detail {

class DisjointSet {
 public:
  std::size_t add() {
    parent_.push_back(parent_.size());
    return parent_.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

inline std::string strip_hash_sign(const std::string& s) { return !s.empty() && s[0] == '#' ? s.substr(1) : s; }

}  // namespace detail

// Links pulls to issues (issue key or number in a pull section), commits
// to pulls and issues (key or number in the message), pulls to commits
// (merged hash recorded in the pull), and comments to commits (sidecar).
// Each commit seeds a flow; flows sharing a pull or issue are merged.
inline FlowSet build_flows(std::span<const Record> records, const CommentLinks& comment_links = {}) {
  detail::DisjointSet ds;
  // Node per artifact, keyed by (source, project, artifact key).
  std::map<std::tuple<SourceKind, std::string, std::string>, std::size_t> nodes;
  std::vector<std::size_t> record_node(records.size(), SIZE_MAX);
  auto node_for = [&](SourceKind s, const std::string& project, const std::string& key) {
    auto [it, inserted] = nodes.try_emplace({s, project, key}, 0);
    if (inserted) it->second = ds.add();
    return it->second;
  };
  auto find_node = [&](SourceKind s, const std::string& project, const std::string& key) -> std::optional<std::size_t> {
    auto it = nodes.find({s, project, key});
    if (it == nodes.end()) return std::nullopt;
    return it->second;
  };
  // Abbreviated hashes resolve by unique prefix.
  auto find_commit = [&](const std::string& project, const std::string& hash) -> std::optional<std::size_t> {
    auto it = nodes.lower_bound({SourceKind::commit, project, hash});
    std::optional<std::size_t> hit;
    for (; it != nodes.end(); ++it) {
      const auto& [s, p, key] = it->first;
      if (s != SourceKind::commit || p != project || key.compare(0, hash.size(), hash) != 0) break;
      if (hit) return std::nullopt;  // ambiguous
      hit = it->second;
    }
    return hit;
  };

  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    by_id.emplace(r.id, i);
    if (r.source == SourceKind::comment) continue;
    std::string key = r.artifact_key();
    if (r.source != SourceKind::commit) key = detail::strip_hash_sign(key);
    record_node[i] = node_for(r.source, r.project, key);
  }

  FlowSet out;
  auto unresolved = [&](const Record& r, std::string ref) { out.unresolved.push_back({r.id, std::move(ref)}); };

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.source != SourceKind::pull && r.source != SourceKind::commit) continue;
    const std::size_t self = record_node[i];
    for (const auto& key : r.refs.issue_keys) {
      if (auto n = find_node(SourceKind::issue, r.project, key))
        ds.unite(self, *n);
      else
        unresolved(r, key);
    }
    for (auto num : r.refs.pr_numbers) {
      const std::string key = std::to_string(num);
      if (r.source == SourceKind::commit) {
        if (auto n = find_node(SourceKind::pull, r.project, key))
          ds.unite(self, *n);
        else if (auto m = find_node(SourceKind::issue, r.project, key))
          ds.unite(self, *m);
        else
          unresolved(r, "#" + key);
      } else {
        // Issues and pulls share one number space on GitHub.
        if (auto n = find_node(SourceKind::issue, r.project, key))
          ds.unite(self, *n);
        else if (!find_node(SourceKind::pull, r.project, key))
          unresolved(r, "#" + key);
      }
    }
    if (r.source == SourceKind::pull)
      for (const auto& h : r.refs.commit_hashes) {
        if (auto n = find_commit(r.project, h))
          ds.unite(self, *n);
        else
          unresolved(r, h);
      }
  }

  // Flows in order of their first commit record.
  std::map<std::size_t, std::size_t> flow_of_root;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].source != SourceKind::commit) continue;
    const std::size_t root = ds.find(record_node[i]);
    if (flow_of_root.try_emplace(root, out.flows.size()).second) {
      ContributionFlow f;
      f.id = out.flows.size();
      out.flows.push_back(std::move(f));
    }
  }
  std::set<std::string> placed_comments;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.source == SourceKind::comment) continue;
    auto it = flow_of_root.find(ds.find(record_node[i]));
    if (it == flow_of_root.end()) continue;
    auto& f = out.flows[it->second];
    switch (r.source) {
      case SourceKind::issue: f.issue_ids.push_back(r.id); break;
      case SourceKind::pull: f.pull_ids.push_back(r.id); break;
      case SourceKind::commit: {
        f.commit_ids.push_back(r.id);
        if (auto c = comment_links.find(r.id); c != comment_links.end())
          for (const auto& cid : c->second) {
            auto rec = by_id.find(cid);
            if (rec == by_id.end() || records[rec->second].source != SourceKind::comment) {
              unresolved(r, cid);
              continue;
            }
            if (placed_comments.insert(cid).second) f.comment_ids.push_back(cid);
          }
        break;
      }
      case SourceKind::comment: break;
    }
  }
  for (auto& f : out.flows) {
    const bool issue = !f.issue_ids.empty(), pull = !f.pull_ids.empty();
    f.kind = issue && pull ? FlowKind::IPCC : issue ? FlowKind::ICC : pull ? FlowKind::PCC : FlowKind::CC;
  }
  return out;
}

// Mean number of debt items per flow, by flow kind and source.
struct FlowSatdAverages {
  std::array<std::size_t, 4> flows{};
  std::array<std::array<double, kNumSources>, 4> mean{};
};

inline FlowSatdAverages flow_satd_averages(std::span<const ContributionFlow> flows,
                                           const std::unordered_set<std::string>& satd_ids) {
  FlowSatdAverages out;
  std::array<std::array<std::size_t, kNumSources>, 4> totals{};
  for (const auto& f : flows) {
    const auto k = static_cast<std::size_t>(f.kind);
    ++out.flows[k];
    auto count = [&](const std::vector<std::string>& ids) {
      return static_cast<std::size_t>(std::count_if(ids.begin(), ids.end(), [&](const auto& id) { return satd_ids.contains(id); }));
    };
    totals[k][task_index(SourceKind::comment)] += count(f.comment_ids);
    totals[k][task_index(SourceKind::commit)] += count(f.commit_ids);
    totals[k][task_index(SourceKind::pull)] += count(f.pull_ids);
    totals[k][task_index(SourceKind::issue)] += count(f.issue_ids);
  }
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t s = 0; s < kNumSources; ++s)
      out.mean[k][s] = out.flows[k] == 0 ? 0.0 : static_cast<double>(totals[k][s]) / static_cast<double>(out.flows[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Bag-of-words similarity

using SparseVector = std::map<std::string, double>;

// 127 common English function words.
inline const std::vector<std::string>& default_stop_words() {
  static const std::vector<std::string> words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours", "yourself",
      "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself",
      "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "these",
      "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
      "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
      "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against", "between",
      "into", "through", "during", "before", "after", "above", "below", "to", "from", "up", "down", "in",
      "out", "on", "off", "over", "under", "again", "further", "then", "once", "here", "there", "when",
      "where", "why", "how", "all", "any", "both", "each", "few", "more", "most", "other", "some",
      "such", "no", "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s",
      "t", "can", "will", "just", "don", "should", "now"};
  return words;
}

inline std::unordered_set<std::string> load_stop_words(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open stop-word list " + path);
  return parse_bot_list(in);  // same format: one entry per line, '#' comments
}

// Term counts over normalized tokens with stop words removed. `binary`
// clamps every count to 1.
inline SparseVector bow_vector(const std::string& text, const std::unordered_set<std::string>& stop_words,
                               bool binary = false) {
  SparseVector v;
  for (auto& tok : tokenize(normalize(text))) {
    if (stop_words.contains(tok)) continue;
    if (binary)
      v[tok] = 1.0;
    else
      v[tok] += 1.0;
  }
  return v;
}

inline double cosine(const SparseVector& u, const SparseVector& v) {
  if (u.empty() || v.empty()) return 0.0;
  const auto& small = u.size() <= v.size() ? u : v;
  const auto& large = u.size() <= v.size() ? v : u;
  double dot = 0, nu = 0, nv = 0;
  for (const auto& [t, x] : small)
    if (auto it = large.find(t); it != large.end()) dot += x * it->second;
  for (const auto& [t, x] : u) nu += x * x;
  for (const auto& [t, x] : v) nv += x * x;
  if (nu == 0 || nv == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), 0.0, 1.0);
}

struct SimilarityPair {
  std::size_t flow = 0;
  std::string id_a, id_b;
  SourceKind source_a = SourceKind::comment, source_b = SourceKind::comment;
  double score = 0;
  bool related = false;
};

struct RelatedResult {
  std::vector<SimilarityPair> pairs;
  // related[s][t], symmetric, counts pairs above the threshold
  std::array<std::array<std::size_t, kNumSources>, kNumSources> related{};
};

struct RelatedOptions {
  double threshold = 0.5;
  bool binary = false;
};

// Scores every cross-source pair of debt items that share a flow. Pairs
// come out ordered by (flow, id_a, id_b) with id_a < id_b.
inline RelatedResult find_related(std::span<const ContributionFlow> flows, std::span<const Record> satd_records,
                                  const std::unordered_set<std::string>& stop_words, const RelatedOptions& options = {}) {
  std::unordered_map<std::string, const Record*> satd;
  for (const auto& r : satd_records) satd.emplace(r.id, &r);

  RelatedResult out;
  for (const auto& f : flows) {
    std::vector<const Record*> items;
    for (const auto* ids : {&f.issue_ids, &f.pull_ids, &f.commit_ids, &f.comment_ids})
      for (const auto& id : *ids)
        if (auto it = satd.find(id); it != satd.end()) items.push_back(it->second);
    std::sort(items.begin(), items.end(), [](const Record* a, const Record* b) { return a->id < b->id; });

    std::vector<SparseVector> vecs;
    for (const auto* r : items)
      vecs.push_back(bow_vector(r->clean_text.empty() ? r->raw_text : r->clean_text, stop_words, options.binary));
    for (std::size_t i = 0; i < items.size(); ++i)
      for (std::size_t j = i + 1; j < items.size(); ++j) {
        if (items[i]->source == items[j]->source) continue;
        SimilarityPair p;
        p.flow = f.id;
        p.id_a = items[i]->id;
        p.id_b = items[j]->id;
        p.source_a = items[i]->source;
        p.source_b = items[j]->source;
        p.score = cosine(vecs[i], vecs[j]);
        p.related = p.score > options.threshold;
        if (p.related) {
          const auto a = task_index(p.source_a), b = task_index(p.source_b);
          ++out.related[a][b];
          if (a != b) ++out.related[b][a];
        }
        out.pairs.push_back(std::move(p));
      }
  }
  return out;
}

}  // namespace satd
