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

// JSON / CSV writers for reports, plus the per-run manifest.

#pragma once

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "satd/keywords.hpp"
#include "satd/linker.hpp"
#include "satd/metrics.hpp"
#include "satd/train_eval.hpp"

namespace satd {

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline nlohmann::json to_json(const Metrics& m) {
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumLabels; ++c)
    classes[std::string(to_string(label_from_index(c)))] = {
        {"tp", m.tp[c]}, {"fp", m.fp[c]}, {"fn", m.fn[c]},
        {"precision", m.precision(c)}, {"recall", m.recall(c)}, {"f1", m.f1(c)}};
  return {{"classes", classes}, {"macro_f1", m.macro_f1()}};
}

inline nlohmann::json to_json(const MetricSummary& s) {
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumLabels; ++c)
    classes[std::string(to_string(label_from_index(c)))] = {
        {"precision", s.precision[c]}, {"recall", s.recall[c]}, {"f1", s.f1[c]}};
  return {{"classes", classes}, {"macro_f1", s.macro_f1}};
}

inline nlohmann::json to_json(const CVReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    nlohmann::json tasks = nlohmann::json::object();
    for (std::size_t t = 0; t < r.task_names.size(); ++t) tasks[r.task_names[t]] = to_json(r.folds[i][t]);
    folds.push_back({{"fold", i}, {"tasks", tasks}});
  }
  nlohmann::json mean = nlohmann::json::object(), pooled = nlohmann::json::object();
  for (std::size_t t = 0; t < r.task_names.size(); ++t) {
    mean[r.task_names[t]] = to_json(r.task_mean[t]);
    pooled[r.task_names[t]] = to_json(r.task_pooled[t]);
  }
  return {{"k", r.k},
          {"tasks", r.task_names},
          {"folds", folds},
          {"aggregate", {{"per_task", mean}, {"grand_macro_f1", r.grand_macro_f1}}},
          {"pooled", {{"per_task", pooled}, {"grand_macro_f1", r.grand_pooled_macro_f1}}}};
}

// fold,task,class,precision,recall,f1
inline void write_cv_csv(const CVReport& r, std::ostream& out) {
  out << "fold,task,class,precision,recall,f1\n";
  for (std::size_t i = 0; i < r.folds.size(); ++i)
    for (std::size_t t = 0; t < r.task_names.size(); ++t)
      for (std::size_t c = 0; c < kNumLabels; ++c) {
        const auto& m = r.folds[i][t];
        out << i << ',' << csv_field(r.task_names[t]) << ',' << to_string(label_from_index(c)) << ','
            << format_double(m.precision(c)) << ',' << format_double(m.recall(c)) << ',' << format_double(m.f1(c))
            << '\n';
      }
}

// source,class,rank,phrase,score,frequency
inline void write_keywords_csv(const std::vector<KeywordReport>& reports, std::ostream& out) {
  out << "source,class,rank,phrase,score,frequency\n";
  for (const auto& rep : reports)
    for (std::size_t c = 0; c < kNumDebtTypes; ++c)
      for (std::size_t i = 0; i < rep.by_class[c].size(); ++i) {
        const auto& e = rep.by_class[c][i];
        out << to_string(rep.source) << ',' << to_string(label_from_index(c)) << ',' << i + 1 << ','
            << csv_field(e.phrase) << ',' << format_double(e.score) << ',' << e.frequency << '\n';
      }
}

inline nlohmann::json to_json(const KeywordReport& rep) {
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumDebtTypes; ++c) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : rep.by_class[c])
      list.push_back({{"phrase", e.phrase}, {"score", e.score}, {"frequency", e.frequency}});
    classes[std::string(to_string(label_from_index(c)))] = list;
  }
  return {{"source", to_string(rep.source)}, {"top_fraction", rep.top_fraction}, {"classes", classes}};
}

inline void write_matrix_csv(const std::vector<std::string>& names, const std::vector<std::vector<std::size_t>>& m,
                             std::ostream& out) {
  out << "source";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << names[i];
    for (auto v : m[i]) out << ',' << v;
    out << '\n';
  }
}

inline void write_flows_jsonl(const FlowSet& fs, std::ostream& out) {
  for (const auto& f : fs.flows) {
    nlohmann::json j = {{"flow", f.id},         {"kind", to_string(f.kind)},   {"issues", f.issue_ids},
                        {"pulls", f.pull_ids},  {"commits", f.commit_ids},     {"comments", f.comment_ids}};
    out << j.dump() << '\n';
  }
}

// flow,source_a,id_a,source_b,id_b,score,related
inline void write_pairs_csv(const RelatedResult& rr, std::ostream& out) {
  out << "flow,source_a,id_a,source_b,id_b,score,related\n";
  for (const auto& p : rr.pairs)
    out << p.flow << ',' << to_string(p.source_a) << ',' << csv_field(p.id_a) << ',' << to_string(p.source_b) << ','
        << csv_field(p.id_b) << ',' << format_double(p.score) << ',' << (p.related ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------------------
// Run manifest

inline std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  return hex64(h);
}

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> flags;
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void write(const std::filesystem::path& dir) const {
    nlohmann::json in = nlohmann::json::array();
    for (const auto& p : inputs)
      if (std::filesystem::is_regular_file(p)) in.push_back({{"path", p.string()}, {"fnv1a64", file_hash(p)}});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    nlohmann::json j = {{"command", command}, {"flags", flags},       {"seed", seed},
                        {"inputs", in},       {"tool_version", kVersion}, {"wall_clock_seconds", secs}};
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "run_manifest.json");
    out << j.dump(2) << '\n';
  }
};

}  // namespace satd
