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
#include <span>

#include "satd/common.hpp"

namespace satd {

// One-vs-rest confusion counts per class. Precision, recall and F1 are 0
// whenever their denominator is 0. The macro average covers the four debt
// types only; non_satd is excluded.
struct Metrics {
  std::array<std::size_t, kNumLabels> tp{};
  std::array<std::size_t, kNumLabels> fp{};
  std::array<std::size_t, kNumLabels> fn{};

  void add(DebtLabel truth, DebtLabel predicted) {
    if (truth == predicted) {
      ++tp[class_index(truth)];
    } else {
      ++fn[class_index(truth)];
      ++fp[class_index(predicted)];
    }
  }

  Metrics& operator+=(const Metrics& o) {
    for (std::size_t c = 0; c < kNumLabels; ++c) {
      tp[c] += o.tp[c];
      fp[c] += o.fp[c];
      fn[c] += o.fn[c];
    }
    return *this;
  }

  double precision(std::size_t c) const {
    const auto d = tp[c] + fp[c];
    return d == 0 ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(d);
  }
  double recall(std::size_t c) const {
    const auto d = tp[c] + fn[c];
    return d == 0 ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(d);
  }
  double f1(std::size_t c) const {
    const double p = precision(c), r = recall(c);
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  double macro_f1() const {
    double s = 0;
    for (std::size_t c = 0; c < kNumDebtTypes; ++c) s += f1(c);
    return s / static_cast<double>(kNumDebtTypes);
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (std::size_t c = 0; c < kNumLabels; ++c) n += tp[c] + fn[c];
    return n;
  }

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

inline Metrics compute_metrics(std::span<const DebtLabel> truth, std::span<const DebtLabel> predicted) {
  if (truth.size() != predicted.size()) throw InputError("truth and prediction lengths differ");
  Metrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
  return m;
}

// Fold-averaged view of a set of Metrics.
struct MetricSummary {
  std::array<double, kNumLabels> precision{};
  std::array<double, kNumLabels> recall{};
  std::array<double, kNumLabels> f1{};
  double macro_f1 = 0;

  static MetricSummary mean_of(std::span<const Metrics> ms) {
    MetricSummary s;
    if (ms.empty()) return s;
    const double n = static_cast<double>(ms.size());
    for (const auto& m : ms) {
      for (std::size_t c = 0; c < kNumLabels; ++c) {
        s.precision[c] += m.precision(c);
        s.recall[c] += m.recall(c);
        s.f1[c] += m.f1(c);
      }
      s.macro_f1 += m.macro_f1();
    }
    for (std::size_t c = 0; c < kNumLabels; ++c) {
      s.precision[c] /= n;
      s.recall[c] /= n;
      s.f1[c] /= n;
    }
    s.macro_f1 /= n;
    return s;
  }
};

}  // namespace satd
