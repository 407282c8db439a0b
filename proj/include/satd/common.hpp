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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace satd {

inline constexpr std::string_view kVersion = "1.0.0";

// Bad user input: malformed files, unknown labels, conflicting options.
// The CLI maps it to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during training or evaluation (NaN, divergence).
// The CLI maps it to exit code 1.
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SourceKind : std::uint8_t { comment = 0, commit = 1, pull = 2, issue = 3 };

inline constexpr std::size_t kNumSources = 4;
inline constexpr std::array<SourceKind, kNumSources> kAllSources = {
    SourceKind::comment, SourceKind::commit, SourceKind::pull, SourceKind::issue};

// Class indices are part of the checkpoint format; do not reorder.
enum class DebtLabel : std::uint8_t {
  code_design = 0,
  documentation = 1,
  test = 2,
  requirement = 3,
  non_satd = 4,
};

inline constexpr std::size_t kNumLabels = 5;
inline constexpr std::size_t kNumDebtTypes = 4;  // labels 0..3
inline constexpr std::array<DebtLabel, kNumLabels> kAllLabels = {
    DebtLabel::code_design, DebtLabel::documentation, DebtLabel::test,
    DebtLabel::requirement, DebtLabel::non_satd};

constexpr std::size_t task_index(SourceKind s) { return static_cast<std::size_t>(s); }
constexpr std::size_t class_index(DebtLabel l) { return static_cast<std::size_t>(l); }
constexpr bool is_satd(DebtLabel l) { return l != DebtLabel::non_satd; }

inline std::string_view to_string(SourceKind s) {
  switch (s) {
    case SourceKind::comment: return "comment";
    case SourceKind::commit: return "commit";
    case SourceKind::pull: return "pull";
    case SourceKind::issue: return "issue";
  }
  return "?";
}

inline std::string_view to_string(DebtLabel l) {
  switch (l) {
    case DebtLabel::code_design: return "code_design";
    case DebtLabel::documentation: return "documentation";
    case DebtLabel::test: return "test";
    case DebtLabel::requirement: return "requirement";
    case DebtLabel::non_satd: return "non_satd";
  }
  return "?";
}

inline std::optional<SourceKind> parse_source(std::string_view s) {
  for (auto k : kAllSources)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline std::optional<DebtLabel> parse_label(std::string_view s) {
  for (auto l : kAllLabels)
    if (to_string(l) == s) return l;
  return std::nullopt;
}

inline DebtLabel label_from_index(std::size_t c) {
  if (c >= kNumLabels) throw std::out_of_range("class index out of range");
  return static_cast<DebtLabel>(c);
}

inline SourceKind source_from_index(std::size_t t) {
  if (t >= kNumSources) throw std::out_of_range("source index out of range");
  return static_cast<SourceKind>(t);
}

// FNV-1a, used for content hashes in manifests (not a security primitive).
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return out;
}

}  // namespace satd
