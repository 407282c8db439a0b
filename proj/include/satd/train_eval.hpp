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

// Stochastic multitask training, evaluation and stratified cross-validation.

#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "satd/checkpoint.hpp"
#include "satd/corpus.hpp"
#include "satd/embedding.hpp"
#include "satd/metrics.hpp"
#include "satd/model.hpp"
#include "satd/rng.hpp"

namespace satd {

enum class ClassWeightScheme : std::uint8_t { none, inverse_frequency };
enum class TaskSelection : std::uint8_t { uniform, proportional };

struct TrainConfig {
  ModelConfig model;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  double learning_rate = 1.0;
  ClassWeightScheme class_weight_scheme = ClassWeightScheme::inverse_frequency;
  TaskSelection task_selection = TaskSelection::uniform;
  OptimizerKind optimizer = OptimizerKind::adadelta;
  std::size_t log_every = 1000;
  // L2 cap on each class row of the trained head after every step; 0 turns
  // the constraint off.
  double max_norm = 3.0;

  void validate() const {
    model.validate();
    if (epochs < 1) throw InputError("epochs must be >= 1");
    if (!(learning_rate > 0)) throw InputError("learning rate must be positive");
    if (log_every < 1) throw InputError("log interval must be >= 1");
    if (!(max_norm >= 0)) throw InputError("max norm must be >= 0");
  }
};

using ClassWeights = std::array<double, kNumLabels>;

// Inverse-frequency weights N / (C_present * N_c); absent classes get 0.
inline ClassWeights class_weights(const LabeledCorpus& corpus,
                                  ClassWeightScheme scheme = ClassWeightScheme::inverse_frequency) {
  if (corpus.empty()) throw InputError("cannot weight an empty corpus");
  ClassWeights w{};
  if (scheme == ClassWeightScheme::none) {
    w.fill(1.0);
    return w;
  }
  const auto& counts = corpus.class_counts();
  std::size_t present = 0;
  for (auto n : counts) present += n > 0;
  const double total = static_cast<double>(corpus.size());
  for (std::size_t c = 0; c < kNumLabels; ++c)
    w[c] = counts[c] == 0 ? 0.0 : total / (static_cast<double>(present) * static_cast<double>(counts[c]));
  return w;
}

// Encodes a record for the model. A record with no tokens is encoded as a
// single unknown word so that every record stays classifiable.
inline Encoded encode_record(const Record& r, const Vocab& vocab, std::size_t max_len) {
  if (r.tokens.empty()) {
    Encoded e;
    e.ids.assign(max_len, kPad);
    e.ids[0] = kUnk;
    e.length = 1;
    return e;
  }
  return encode(r.tokens, vocab, max_len);
}

// Rescales every class row of `head` whose L2 norm exceeds `limit`.
template <typename Scalar>
void clip_row_norms(OutputHead<Scalar>& head, std::size_t width, double limit) {
  for (std::size_t r = 0; r * width < head.weight.size(); ++r) {
    Scalar* row = head.weight.data() + r * width;
    double sq = 0;
    for (std::size_t f = 0; f < width; ++f) sq += static_cast<double>(row[f]) * static_cast<double>(row[f]);
    if (sq <= limit * limit) continue;
    const auto scale = static_cast<Scalar>(limit / std::sqrt(sq));
    for (std::size_t f = 0; f < width; ++f) row[f] *= scale;
  }
}

struct TrainResult {
  Model model;
  std::vector<double> loss_log;  // mean loss over each window of log_every steps
  std::size_t steps = 0;
};

// Each step picks a task, draws one of its samples uniformly, and applies
// a forward/backward/update with that task's class weights. Task t trains
// head t, so corpora[t] must be the corpus for task t.
inline TrainResult train_multitask(std::span<const LabeledCorpus> corpora, const TrainConfig& config, Vocab vocab,
                                   EmbeddingMatrix<float> embedding) {
  config.validate();
  if (corpora.size() != config.model.num_tasks)
    throw InputError("got " + std::to_string(corpora.size()) + " corpora for " + std::to_string(config.model.num_tasks) +
                     " tasks");
  for (std::size_t t = 0; t < corpora.size(); ++t)
    if (corpora[t].empty()) throw InputError("training corpus for task " + std::to_string(t) + " is empty");
  if (embedding.rows != vocab.size()) throw InputError("embedding rows do not match vocabulary size");

  const std::size_t T = corpora.size();
  std::vector<std::vector<Encoded>> inputs(T);
  std::vector<ClassWeights> weights(T);
  std::size_t total = 0;
  for (std::size_t t = 0; t < T; ++t) {
    for (const auto& r : corpora[t].records()) inputs[t].push_back(encode_record(r, vocab, config.model.max_len));
    weights[t] = class_weights(corpora[t], config.class_weight_scheme);
    total += corpora[t].size();
  }

  TrainResult result;
  result.model.config = config.model;
  result.model.params = init_params(config.model, std::move(embedding), derive_seed(config.seed, 1));
  result.model.vocab = std::move(vocab);
  auto& params = result.model.params;

  Optimizer<float> opt(config.optimizer);
  Gradients<float> grads;
  Rng rng(derive_seed(config.seed, 2));
  const std::size_t steps = config.epochs * total;
  double window = 0;
  std::size_t in_window = 0;
  for (std::size_t s = 0; s < steps; ++s) {
    std::size_t task;
    if (config.task_selection == TaskSelection::uniform) {
      task = static_cast<std::size_t>(rng.below(T));
    } else {
      auto pick = rng.below(total);
      task = 0;
      while (pick >= corpora[task].size()) pick -= corpora[task].size(), ++task;
    }
    const auto i = static_cast<std::size_t>(rng.below(inputs[task].size()));
    const auto cache = forward(params, config.model, std::span<const TokenId>(inputs[task][i].ids), task, true, rng);
    const float loss =
        backward_into(params, config.model, cache, *corpora[task].records()[i].label, weights[task], grads);
    if (!std::isfinite(loss)) throw ComputeError("loss became non-finite at step " + std::to_string(s));
    opt.step(params, grads, config.learning_rate);
    if (config.max_norm > 0) clip_row_norms(params.heads[task], config.model.feature_width(), config.max_norm);

    window += loss;
    if (++in_window == config.log_every) {
      result.loss_log.push_back(window / static_cast<double>(in_window));
      window = 0;
      in_window = 0;
    }
  }
  if (in_window > 0) result.loss_log.push_back(window / static_cast<double>(in_window));
  result.steps = steps;
  if (!all_finite(params)) throw ComputeError("parameters became non-finite during training");
  return result;
}

inline std::vector<DebtLabel> predict_corpus(const Model& model, const LabeledCorpus& corpus, std::size_t task) {
  std::vector<DebtLabel> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus.records()) {
    const auto e = encode_record(r, model.vocab, model.config.max_len);
    out.push_back(predict(model.params, model.config, std::span<const TokenId>(e.ids), task));
  }
  return out;
}

inline Metrics evaluate(const Model& model, const LabeledCorpus& test, std::size_t task) {
  if (test.empty()) throw InputError("cannot evaluate on an empty test set");
  if (task >= model.config.num_tasks) throw InputError("task " + std::to_string(task) + " out of range");
  const auto predicted = predict_corpus(model, test, task);
  Metrics m;
  for (std::size_t i = 0; i < test.size(); ++i) m.add(*test.records()[i].label, predicted[i]);
  return m;
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CVReport {
  std::size_t k = 0;
  std::vector<std::string> task_names;
  std::vector<std::vector<Metrics>> folds;  // [fold][task]

  // Folds averaged per task, then tasks averaged.
  std::vector<MetricSummary> task_mean;
  double grand_macro_f1 = 0;
  // Alternative aggregation: confusion counts pooled over folds.
  std::vector<Metrics> task_pooled;
  double grand_pooled_macro_f1 = 0;

  void finalize() {
    const std::size_t T = task_names.size();
    task_mean.assign(T, {});
    task_pooled.assign(T, {});
    grand_macro_f1 = grand_pooled_macro_f1 = 0;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<Metrics> per_fold;
      for (const auto& f : folds) {
        per_fold.push_back(f[t]);
        task_pooled[t] += f[t];
      }
      task_mean[t] = MetricSummary::mean_of(per_fold);
      grand_macro_f1 += task_mean[t].macro_f1;
      grand_pooled_macro_f1 += task_pooled[t].macro_f1();
    }
    if (T > 0) {
      grand_macro_f1 /= static_cast<double>(T);
      grand_pooled_macro_f1 /= static_cast<double>(T);
    }
  }
};

// Train/test corpora for one fold, indexed by task.
struct FoldData {
  std::size_t fold = 0;
  std::vector<LabeledCorpus> train;
  std::vector<LabeledCorpus> test;
};

inline std::vector<FoldData> make_folds(std::span<const LabeledCorpus> corpora, std::size_t k, std::uint64_t seed,
                                        std::vector<std::string>* warnings = nullptr) {
  std::vector<FoldData> folds(k);
  for (std::size_t i = 0; i < k; ++i) folds[i].fold = i;
  for (const auto& corpus : corpora) {
    const auto fa = stratified_split(corpus, k, seed);
    if (warnings)
      for (const auto& w : fa.warnings) warnings->push_back(std::string(to_string(corpus.source())) + ": " + w);
    std::vector<std::vector<Record>> test(k);
    for (const auto& r : corpus.records()) test[fa.fold_of(r.id)].push_back(r);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<Record> train;
      for (std::size_t j = 0; j < k; ++j)
        if (j != i) train.insert(train.end(), test[j].begin(), test[j].end());
      folds[i].train.emplace_back(corpus.source(), std::move(train));
    }
    for (std::size_t i = 0; i < k; ++i) folds[i].test.emplace_back(corpus.source(), std::move(test[i]));
  }
  return folds;
}

// Runs `fit_and_score` on every fold, `threads` folds at a time. Results
// are stored by fold index, so the report does not depend on scheduling.
using FoldRunner = std::function<std::vector<Metrics>(const FoldData&)>;

inline CVReport run_folds(std::vector<FoldData> folds, std::vector<std::string> task_names, const FoldRunner& fit_and_score,
                          std::size_t threads = 1) {
  CVReport report;
  report.k = folds.size();
  report.task_names = std::move(task_names);
  report.folds.assign(folds.size(), {});

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < folds.size(); i = next++) {
      try {
        report.folds[i] = fit_and_score(folds[i]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, folds.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  for (const auto& f : report.folds)
    if (f.size() != report.task_names.size()) throw ComputeError("fold produced the wrong number of task metrics");
  report.finalize();
  return report;
}

inline std::vector<std::string> task_names_for(std::span<const LabeledCorpus> corpora) {
  std::vector<std::string> names;
  for (const auto& c : corpora) names.emplace_back(to_string(c.source()));
  return names;
}

// Stratified k-fold CV of the multitask model. The same initial embedding
// is copied into every fold; each fold trains with a fold-derived seed.
inline CVReport cross_validate(std::span<const LabeledCorpus> corpora, const TrainConfig& config, const Vocab& vocab,
                               const EmbeddingMatrix<float>& embedding, std::size_t k = 10, std::size_t threads = 1,
                               std::vector<std::string>* warnings = nullptr) {
  config.validate();
  auto folds = make_folds(corpora, k, config.seed, warnings);
  auto names = task_names_for(corpora);
  return run_folds(
      std::move(folds), names,
      [&](const FoldData& fold) {
        TrainConfig cfg = config;
        cfg.seed = derive_seed(config.seed, 1000 + fold.fold);
        const auto trained = train_multitask(fold.train, cfg, vocab, embedding);
        std::vector<Metrics> out;
        for (std::size_t t = 0; t < fold.test.size(); ++t)
          out.push_back(fold.test[t].empty() ? Metrics{} : evaluate(trained.model, fold.test[t], t));
        return out;
      },
      threads);
}

}  // namespace satd
