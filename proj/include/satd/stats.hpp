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

// Agreement and comparison statistics: Cohen's kappa, Welch's t-test and
// Cliff's delta.

#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string_view>

#include <boost/math/distributions/students_t.hpp>

#include "satd/common.hpp"

namespace satd {

template <typename Label>
double cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw InputError("rating sequences differ in length");
  if (a.empty()) throw InputError("rating sequences are empty");
  const double n = static_cast<double>(a.size());
  std::map<Label, std::pair<double, double>> marginals;
  double agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    marginals[a[i]].first += 1;
    marginals[b[i]].second += 1;
  }
  const double p_o = agree / n;
  double p_e = 0;
  for (const auto& [label, counts] : marginals) p_e += (counts.first / n) * (counts.second / n);
  if (p_e == 1.0) return p_o == 1.0 ? 1.0 : 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

enum class EffectMagnitude : std::uint8_t { negligible, small, medium, large };

inline std::string_view to_string(EffectMagnitude m) {
  switch (m) {
    case EffectMagnitude::negligible: return "negligible";
    case EffectMagnitude::small: return "small";
    case EffectMagnitude::medium: return "medium";
    case EffectMagnitude::large: return "large";
  }
  return "?";
}

inline EffectMagnitude effect_magnitude(double d) {
  const double a = std::abs(d);
  if (a >= 0.43) return EffectMagnitude::large;
  if (a >= 0.28) return EffectMagnitude::medium;
  if (a >= 0.11) return EffectMagnitude::small;
  return EffectMagnitude::negligible;
}

// (#{a > b} - #{a < b}) / (|A| |B|) over all pairs.
inline double cliffs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("Cliff's delta needs non-empty samples");
  long long dominance = 0;
  for (double x : a)
    for (double y : b) dominance += (x > y) - (x < y);
  return static_cast<double>(dominance) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

// Two-sided unequal-variance two-sample t-test.
inline double welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InputError("t-test needs at least two values per sample");
  auto moments = [](std::span<const double> s) {
    double mean = 0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    double ss = 0;
    for (double x : s) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / static_cast<double>(s.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = va / na, sb = vb / nb;
  if (sa + sb == 0.0) return ma == mb ? 1.0 : 0.0;
  const double t = (ma - mb) / std::sqrt(sa + sb);
  const double df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1) + sb * sb / (nb - 1));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

struct StatResult {
  double p_value = 1;
  double cliffs_delta = 0;
  EffectMagnitude magnitude = EffectMagnitude::negligible;
};

inline StatResult compare(std::span<const double> a, std::span<const double> b) {
  StatResult r;
  r.p_value = welch_t_test(a, b);
  r.cliffs_delta = cliffs_delta(a, b);
  r.magnitude = effect_magnitude(r.cliffs_delta);
  return r;
}

}  // namespace satd
