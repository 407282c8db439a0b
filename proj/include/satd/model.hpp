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

// Multitask convolutional sentence classifier.
//
// A shared encoder (embedding lookup, one bank of filters per region size,
// ReLU, max-over-time pooling, concatenation) feeds one linear softmax head
// per task. With num_tasks == 1 this is the plain single-task Text-CNN.
//
// Everything is templated on the scalar type: float for training and
// inference, double for finite-difference gradient checks.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "satd/common.hpp"
#include "satd/embedding.hpp"
#include "satd/rng.hpp"

namespace satd {

struct ModelConfig {
  std::vector<std::size_t> region_sizes{1, 2, 3, 4, 5};
  std::size_t feature_maps = 200;  // filters per region size
  std::size_t num_tasks = kNumSources;
  std::size_t num_classes = kNumLabels;
  double dropout_rate = 0.5;
  EmbeddingMode embedding_mode = EmbeddingMode::static_;
  std::size_t max_len = 256;
  std::size_t embedding_dim = 300;

  std::size_t feature_width() const { return feature_maps * region_sizes.size(); }
  std::size_t max_region() const { return region_sizes.empty() ? 0 : region_sizes.back(); }

  void validate() const {
    if (region_sizes.empty()) throw InputError("region sizes must not be empty");
    if (!std::is_sorted(region_sizes.begin(), region_sizes.end()) ||
        std::adjacent_find(region_sizes.begin(), region_sizes.end()) != region_sizes.end())
      throw InputError("region sizes must be strictly ascending");
    if (region_sizes.front() < 1) throw InputError("region sizes must be >= 1");
    if (max_region() > max_len) throw InputError("largest region size exceeds max_len");
    if (feature_maps < 1) throw InputError("feature map count must be positive");
    if (num_tasks < 1) throw InputError("need at least one task");
    if (num_classes < 2) throw InputError("need at least two classes");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InputError("dropout rate must be in [0, 1)");
    if (embedding_dim < 1) throw InputError("embedding dimension must be positive");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Filters of one region size: weight is m x h x k row-major.
template <typename Scalar>
struct ConvBank {
  std::size_t height = 0;
  std::vector<Scalar> weight;
  std::vector<Scalar> bias;
};

// Task-specific output layer: weight is C x F row-major.
template <typename Scalar>
struct OutputHead {
  std::vector<Scalar> weight;
  std::vector<Scalar> bias;
};

template <typename Scalar>
struct ModelParams {
  EmbeddingMatrix<Scalar> embedding;
  std::vector<ConvBank<Scalar>> convs;
  std::vector<OutputHead<Scalar>> heads;

  template <typename Other>
  ModelParams<Other> cast() const {
    auto conv = [](const std::vector<Scalar>& v) { return std::vector<Other>(v.begin(), v.end()); };
    ModelParams<Other> out;
    out.embedding = embedding.template cast<Other>();
    for (const auto& c : convs) out.convs.push_back({c.height, conv(c.weight), conv(c.bias)});
    for (const auto& h : heads) out.heads.push_back({conv(h.weight), conv(h.bias)});
    return out;
  }
};

// Uniform fan-in initialization for filters and heads; biases start at zero.
template <typename Scalar>
ModelParams<Scalar> init_params(const ModelConfig& config, EmbeddingMatrix<Scalar> embedding, std::uint64_t seed) {
  config.validate();
  if (embedding.dim != config.embedding_dim)
    throw InputError("embedding dimension " + std::to_string(embedding.dim) + " does not match config " +
                     std::to_string(config.embedding_dim));
  ModelParams<Scalar> p;
  p.embedding = std::move(embedding);
  p.embedding.mode = config.embedding_mode;
  Rng rng(seed);
  const std::size_t k = config.embedding_dim;
  const std::size_t m = config.feature_maps;
  for (std::size_t h : config.region_sizes) {
    ConvBank<Scalar> bank{h, std::vector<Scalar>(m * h * k), std::vector<Scalar>(m, Scalar(0))};
    const double bound = 1.0 / std::sqrt(static_cast<double>(h * k));
    for (auto& w : bank.weight) w = static_cast<Scalar>(rng.uniform(-bound, bound));
    p.convs.push_back(std::move(bank));
  }
  const std::size_t F = config.feature_width();
  const double bound = 1.0 / std::sqrt(static_cast<double>(F));
  for (std::size_t t = 0; t < config.num_tasks; ++t) {
    OutputHead<Scalar> head{std::vector<Scalar>(config.num_classes * F), std::vector<Scalar>(config.num_classes, Scalar(0))};
    for (auto& w : head.weight) w = static_cast<Scalar>(rng.uniform(-bound, bound));
    p.heads.push_back(std::move(head));
  }
  return p;
}

// Everything backward() and keyword backtracking need from a forward pass.
template <typename Scalar>
struct ForwardCache {
  std::size_t task = 0;
  bool training = false;
  std::vector<TokenId> ids;
  std::size_t length = 0;       // n, the non-padding prefix
  std::size_t conv_length = 0;  // max(n, largest region size)
  std::vector<Scalar> input;    // conv_length x k gathered embeddings
  // Per region size: m x (conv_length - h + 1) pre-activation maps.
  std::vector<std::vector<Scalar>> maps;
  std::vector<std::size_t> argmax;  // per pooled feature, position in its map
  std::vector<Scalar> features;     // X, pooled and concatenated (length F)
  std::vector<Scalar> mask;         // dropout scale per feature (1 at inference)
  std::vector<Scalar> logits;       // Y for the selected task
  std::vector<Scalar> probs;

  std::size_t map_length(std::size_t height) const { return conv_length - height + 1; }
};

namespace detail {

template <typename Scalar>
Scalar dot(const Scalar* a, const Scalar* b, std::size_t n) {
  Scalar s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename Scalar>
void softmax(std::span<const Scalar> logits, std::span<Scalar> out) {
  const Scalar mx = *std::max_element(logits.begin(), logits.end());
  Scalar sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
}

}  // namespace detail

inline std::size_t effective_length(std::span<const TokenId> ids) {
  std::size_t n = ids.size();
  while (n > 0 && ids[n - 1] == kPad) --n;
  return n;
}

template <typename Scalar>
ForwardCache<Scalar> forward(const ModelParams<Scalar>& params, const ModelConfig& config, std::span<const TokenId> ids,
                             std::size_t task, bool training, Rng& stream) {
  if (task >= params.heads.size()) throw InputError("task " + std::to_string(task) + " out of range");
  if (ids.size() != config.max_len)
    throw InputError("input has " + std::to_string(ids.size()) + " ids, expected max_len " + std::to_string(config.max_len));
  const std::size_t n = effective_length(ids);
  if (n == 0) throw InputError("empty input");

  const std::size_t k = params.embedding.dim;
  const std::size_t m = config.feature_maps;
  const std::size_t F = config.feature_width();
  const std::size_t C = config.num_classes;

  ForwardCache<Scalar> c;
  c.task = task;
  c.training = training;
  c.ids.assign(ids.begin(), ids.end());
  c.length = n;
  c.conv_length = std::max(n, config.max_region());
  c.input.assign(c.conv_length * k, Scalar(0));
  for (std::size_t i = 0; i < c.conv_length; ++i) {
    const auto id = static_cast<std::size_t>(ids[i]);
    if (id >= params.embedding.rows) throw InputError("token id " + std::to_string(id) + " outside embedding table");
    auto row = params.embedding.row(id);
    std::copy(row.begin(), row.end(), c.input.begin() + static_cast<std::ptrdiff_t>(i * k));
  }

  c.maps.resize(params.convs.size());
  c.argmax.assign(F, 0);
  c.features.assign(F, Scalar(0));
  for (std::size_t g = 0; g < params.convs.size(); ++g) {
    const auto& bank = params.convs[g];
    const std::size_t h = bank.height;
    const std::size_t len = c.conv_length - h + 1;
    const std::size_t span = h * k;
    auto& map = c.maps[g];
    map.resize(m * len);
    for (std::size_t j = 0; j < m; ++j) {
      const Scalar* w = bank.weight.data() + j * span;
      Scalar* out = map.data() + j * len;
      std::size_t best = 0;
      for (std::size_t p = 0; p < len; ++p) {
        out[p] = detail::dot(w, c.input.data() + p * k, span) + bank.bias[j];
        if (out[p] > out[best]) best = p;
      }
      const std::size_t f = g * m + j;
      c.argmax[f] = best;
      c.features[f] = std::max(out[best], Scalar(0));  // relu(max) == max(relu)
    }
  }

  c.mask.assign(F, Scalar(1));
  if (training && config.dropout_rate > 0) {
    const Scalar keep_scale = Scalar(1) / static_cast<Scalar>(1.0 - config.dropout_rate);
    for (auto& v : c.mask) v = stream.uniform() < config.dropout_rate ? Scalar(0) : keep_scale;
  }

  const auto& head = params.heads[task];
  c.logits.resize(C);
  for (std::size_t cls = 0; cls < C; ++cls) {
    Scalar s = head.bias[cls];
    const Scalar* w = head.weight.data() + cls * F;
    for (std::size_t f = 0; f < F; ++f) s += w[f] * c.features[f] * c.mask[f];
    c.logits[cls] = s;
  }
  c.probs.resize(C);
  detail::softmax<Scalar>(c.logits, c.probs);
  return c;
}

// Inference-mode forward pass (no dropout).
template <typename Scalar>
ForwardCache<Scalar> infer(const ModelParams<Scalar>& params, const ModelConfig& config, std::span<const TokenId> ids,
                           std::size_t task) {
  Rng unused;
  return forward(params, config, ids, task, false, unused);
}

inline constexpr double kProbFloor = 1e-12;

template <typename Scalar>
Scalar weighted_loss(std::span<const Scalar> probs, DebtLabel label, std::span<const double> class_weights) {
  const auto c = class_index(label);
  const double p = std::max(static_cast<double>(probs[c]), kProbFloor);
  return static_cast<Scalar>(-class_weights[c] * std::log(p));
}

template <typename Scalar>
struct Gradients {
  std::vector<ConvBank<Scalar>> convs;
  std::vector<OutputHead<Scalar>> heads;
  std::map<TokenId, std::vector<Scalar>> embedding_rows;  // non-static mode only
  std::size_t task = 0;

  // Shapes gradients like params, all zeros.
  void reset(const ModelParams<Scalar>& params) {
    convs.resize(params.convs.size());
    for (std::size_t g = 0; g < convs.size(); ++g) {
      convs[g].height = params.convs[g].height;
      convs[g].weight.assign(params.convs[g].weight.size(), Scalar(0));
      convs[g].bias.assign(params.convs[g].bias.size(), Scalar(0));
    }
    heads.resize(params.heads.size());
    for (std::size_t t = 0; t < heads.size(); ++t) {
      heads[t].weight.assign(params.heads[t].weight.size(), Scalar(0));
      heads[t].bias.assign(params.heads[t].bias.size(), Scalar(0));
    }
    embedding_rows.clear();
  }
};

// Reverse-mode pass for -w[label] * log p[label]. Writes into `grads`
// (reusing its storage) and returns the loss.
template <typename Scalar>
Scalar backward_into(const ModelParams<Scalar>& params, const ModelConfig& config, const ForwardCache<Scalar>& cache,
                     DebtLabel label, std::span<const double> class_weights, Gradients<Scalar>& grads) {
  const std::size_t k = params.embedding.dim;
  const std::size_t m = config.feature_maps;
  const std::size_t F = config.feature_width();
  const std::size_t C = config.num_classes;
  if (cache.task >= params.heads.size() || cache.features.size() != F || cache.probs.size() != C ||
      cache.maps.size() != params.convs.size() || cache.input.size() != cache.conv_length * k ||
      class_weights.size() < C || class_index(label) >= C)
    throw InputError("forward cache does not match model parameters");

  grads.reset(params);
  grads.task = cache.task;
  const std::size_t cls = class_index(label);
  const Scalar w = static_cast<Scalar>(class_weights[cls]);

  // dL/dY = w * (p - onehot)
  std::vector<Scalar> dlogits(C);
  for (std::size_t i = 0; i < C; ++i) dlogits[i] = w * (cache.probs[i] - (i == cls ? Scalar(1) : Scalar(0)));

  const auto& head = params.heads[cache.task];
  auto& ghead = grads.heads[cache.task];
  std::vector<Scalar> dfeat(F, Scalar(0));
  for (std::size_t i = 0; i < C; ++i) {
    ghead.bias[i] = dlogits[i];
    const Scalar* wrow = head.weight.data() + i * F;
    Scalar* grow = ghead.weight.data() + i * F;
    for (std::size_t f = 0; f < F; ++f) {
      grow[f] = dlogits[i] * cache.features[f] * cache.mask[f];
      dfeat[f] += dlogits[i] * wrow[f];
    }
  }

  const bool train_embedding = params.embedding.mode == EmbeddingMode::non_static;
  std::vector<Scalar> dinput;
  if (train_embedding) dinput.assign(cache.input.size(), Scalar(0));

  for (std::size_t g = 0; g < params.convs.size(); ++g) {
    const auto& bank = params.convs[g];
    auto& gbank = grads.convs[g];
    const std::size_t h = bank.height;
    const std::size_t len = cache.conv_length - h + 1;
    const std::size_t span = h * k;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t f = g * m + j;
      const std::size_t p = cache.argmax[f];
      // Gradient flows only through the pooled position, and only if the
      // ReLU was active there.
      if (!(cache.maps[g][j * len + p] > Scalar(0))) continue;
      const Scalar delta = dfeat[f] * cache.mask[f];
      if (delta == Scalar(0)) continue;
      gbank.bias[j] += delta;
      const Scalar* window = cache.input.data() + p * k;
      Scalar* gw = gbank.weight.data() + j * span;
      for (std::size_t i = 0; i < span; ++i) gw[i] += delta * window[i];
      if (train_embedding) {
        const Scalar* wj = bank.weight.data() + j * span;
        Scalar* din = dinput.data() + p * k;
        for (std::size_t i = 0; i < span; ++i) din[i] += delta * wj[i];
      }
    }
  }

  if (train_embedding) {
    for (std::size_t pos = 0; pos < cache.conv_length; ++pos) {
      const TokenId id = cache.ids[pos];
      if (id == kPad) continue;
      auto& row = grads.embedding_rows[id];
      if (row.empty()) row.assign(k, Scalar(0));
      for (std::size_t d = 0; d < k; ++d) row[d] += dinput[pos * k + d];
    }
  }

  return weighted_loss<Scalar>(cache.probs, label, class_weights);
}

template <typename Scalar>
Gradients<Scalar> backward(const ModelParams<Scalar>& params, const ModelConfig& config, const ForwardCache<Scalar>& cache,
                           DebtLabel label, std::span<const double> class_weights) {
  Gradients<Scalar> g;
  backward_into(params, config, cache, label, class_weights, g);
  return g;
}

// ---------------------------------------------------------------------------
// Optimizers

enum class OptimizerKind : std::uint8_t { adadelta, sgd };

template <typename Scalar>
class Optimizer {
 public:
  explicit Optimizer(OptimizerKind kind = OptimizerKind::adadelta, double rho = 0.95, double eps = 1e-6)
      : kind_(kind), rho_(rho), eps_(eps) {}

  OptimizerKind kind() const { return kind_; }

  // Applies one update. Parameter arrays whose gradient is entirely absent
  // (other tasks' heads, untouched embedding rows) are skipped, state
  // included. The padding row is forced back to zero.
  void step(ModelParams<Scalar>& params, const Gradients<Scalar>& grads, double learning_rate) {
    check_finite(grads);
    ensure_state(params);
    for (std::size_t g = 0; g < params.convs.size(); ++g) {
      update(params.convs[g].weight, grads.convs[g].weight, conv_state_[g][0], learning_rate);
      update(params.convs[g].bias, grads.convs[g].bias, conv_state_[g][1], learning_rate);
    }
    for (std::size_t t = 0; t < params.heads.size(); ++t) {
      if (!any_nonzero(grads.heads[t].weight) && !any_nonzero(grads.heads[t].bias)) continue;
      update(params.heads[t].weight, grads.heads[t].weight, head_state_[t][0], learning_rate);
      update(params.heads[t].bias, grads.heads[t].bias, head_state_[t][1], learning_rate);
    }
    if (params.embedding.mode == EmbeddingMode::non_static) {
      const std::size_t k = params.embedding.dim;
      for (const auto& [id, g] : grads.embedding_rows) {
        if (id == kPad) continue;
        const auto r = static_cast<std::size_t>(id);
        auto row = params.embedding.row(r);
        update_range(row.data(), g.data(), k, embed_state_, r * k, learning_rate);
      }
    }
    auto pad = params.embedding.row(kPad);
    std::fill(pad.begin(), pad.end(), Scalar(0));
  }

 private:
  struct State {
    std::vector<Scalar> sq_grad;
    std::vector<Scalar> sq_delta;
  };

  static bool any_nonzero(const std::vector<Scalar>& v) {
    return std::any_of(v.begin(), v.end(), [](Scalar x) { return x != Scalar(0); });
  }

  static void check_finite(const Gradients<Scalar>& grads) {
    auto bad = [](const std::vector<Scalar>& v) {
      return std::any_of(v.begin(), v.end(), [](Scalar x) { return !std::isfinite(x); });
    };
    for (std::size_t g = 0; g < grads.convs.size(); ++g)
      if (bad(grads.convs[g].weight) || bad(grads.convs[g].bias))
        throw ComputeError("non-finite gradient in convolution bank " + std::to_string(g));
    for (std::size_t t = 0; t < grads.heads.size(); ++t)
      if (bad(grads.heads[t].weight) || bad(grads.heads[t].bias))
        throw ComputeError("non-finite gradient in output head " + std::to_string(t));
    for (const auto& [id, row] : grads.embedding_rows)
      if (bad(row)) throw ComputeError("non-finite gradient in embedding row " + std::to_string(id));
  }

  void ensure_state(const ModelParams<Scalar>& params) {
    if (kind_ != OptimizerKind::adadelta || initialized_) return;
    auto make = [](std::size_t n) { return State{std::vector<Scalar>(n, Scalar(0)), std::vector<Scalar>(n, Scalar(0))}; };
    for (const auto& c : params.convs) conv_state_.push_back({make(c.weight.size()), make(c.bias.size())});
    for (const auto& h : params.heads) head_state_.push_back({make(h.weight.size()), make(h.bias.size())});
    if (params.embedding.mode == EmbeddingMode::non_static) embed_state_ = make(params.embedding.data.size());
    initialized_ = true;
  }

  void update(std::vector<Scalar>& x, const std::vector<Scalar>& g, State& s, double lr) {
    update_range(x.data(), g.data(), x.size(), s, 0, lr);
  }

  void update_range(Scalar* x, const Scalar* g, std::size_t n, State& s, std::size_t offset, double lr) {
    if (kind_ == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < n; ++i) x[i] -= static_cast<Scalar>(lr) * g[i];
      return;
    }
    const Scalar rho = static_cast<Scalar>(rho_);
    const Scalar eps = static_cast<Scalar>(eps_);
    const Scalar rate = static_cast<Scalar>(lr);
    Scalar* eg = s.sq_grad.data() + offset;
    Scalar* ed = s.sq_delta.data() + offset;
    for (std::size_t i = 0; i < n; ++i) {
      eg[i] = rho * eg[i] + (1 - rho) * g[i] * g[i];
      const Scalar delta = -std::sqrt(ed[i] + eps) / std::sqrt(eg[i] + eps) * g[i];
      ed[i] = rho * ed[i] + (1 - rho) * delta * delta;
      x[i] += rate * delta;
    }
  }

  OptimizerKind kind_;
  double rho_;
  double eps_;
  bool initialized_ = false;
  std::vector<std::array<State, 2>> conv_state_;
  std::vector<std::array<State, 2>> head_state_;
  State embed_state_;
};

// Index of the largest probability; ties go to the lowest index.
template <typename Scalar>
std::size_t argmax_class(std::span<const Scalar> probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

template <typename Scalar>
DebtLabel predict(const ModelParams<Scalar>& params, const ModelConfig& config, std::span<const TokenId> ids,
                  std::size_t task) {
  const auto cache = infer(params, config, ids, task);
  return label_from_index(argmax_class<Scalar>(cache.probs));
}

template <typename Scalar>
bool all_finite(const ModelParams<Scalar>& p) {
  auto ok = [](const std::vector<Scalar>& v) {
    return std::all_of(v.begin(), v.end(), [](Scalar x) { return std::isfinite(x); });
  };
  if (!ok(p.embedding.data)) return false;
  for (const auto& c : p.convs)
    if (!ok(c.weight) || !ok(c.bias)) return false;
  for (const auto& h : p.heads)
    if (!ok(h.weight) || !ok(h.bias)) return false;
  return true;
}

}  // namespace satd
