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

// satd: command-line front end.
//
// Exit codes: 0 success, 1 computational failure, 2 input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "satd/satd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitCompute = 1;
constexpr int kExitInput = 2;

std::size_t default_threads() {
  if (const char* env = std::getenv("SATD_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring SATD_THREADS=\"" << env << "\"\n";
  }
  return 1;
}

void log(const std::string& msg) { std::cerr << "[satd] " << msg << '\n'; }

// Fills clean_text and tokens when the record has not been through prep.
void ensure_tokens(satd::Record& r) {
  if (r.clean_text.empty() && r.tokens.empty()) r.clean_text = satd::normalize(satd::strip_code_blocks(r.raw_text));
  if (r.tokens.empty()) r.tokens = satd::tokenize(r.clean_text);
}

std::vector<satd::Record> load_records(const std::string& path) {
  try {
    auto recs = satd::load_jsonl(path);
    for (auto& r : recs) ensure_tokens(r);
    return recs;
  } catch (const satd::InputError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw satd::InputError(path + ": " + what);
  }
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw satd::InputError("cannot write " + p.string());
  return out;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Shared flag groups

struct ModelFlags {
  std::uint64_t seed = 1;
  std::string embeddings = "random";
  bool is_static = false;
  bool non_static = false;
  std::vector<std::size_t> region_sizes{1, 2, 3, 4, 5};
  std::size_t feature_maps = 200;
  std::size_t embedding_dim = 300;
  std::size_t max_len = 256;
  double dropout = 0.5;
  bool weighted = false;
  bool unweighted = false;
  std::size_t epochs = 20;
  double learning_rate = 1.0;
  std::string optimizer = "adadelta";
  std::string task_selection = "uniform";
  std::size_t min_count = 1;
  CLI::Option* dim_opt = nullptr;

  void add_to(CLI::App* app) {
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--embeddings", embeddings, "Word vectors (.vec text file) or 'random'");
    auto* s = app->add_flag("--static", is_static, "Freeze the embedding table (default)");
    auto* ns = app->add_flag("--non-static", non_static, "Fine-tune the embedding table");
    s->excludes(ns);
    app->add_option("--region-sizes", region_sizes, "Convolution window heights")->delimiter(',');
    app->add_option("--feature-maps", feature_maps, "Filters per region size");
    dim_opt = app->add_option("--embedding-dim", embedding_dim, "Embedding width (taken from the vector file if omitted)");
    app->add_option("--max-len", max_len, "Tokens per input; longer inputs are truncated");
    app->add_option("--dropout", dropout, "Dropout rate on pooled features");
    auto* w = app->add_flag("--weighted-loss", weighted, "Inverse-frequency class weights (default)");
    auto* nw = app->add_flag("--no-weighted-loss", unweighted, "Unweighted cross-entropy");
    w->excludes(nw);
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--learning-rate", learning_rate, "Optimizer learning rate");
    app->add_option("--optimizer", optimizer, "adadelta or sgd")->check(CLI::IsMember({"adadelta", "sgd"}));
    app->add_option("--task-selection", task_selection, "uniform or proportional")
        ->check(CLI::IsMember({"uniform", "proportional"}));
    app->add_option("--min-count", min_count, "Drop words rarer than this from the vocabulary");
  }

  satd::TrainConfig train_config(std::size_t num_tasks) const {
    satd::TrainConfig c;
    c.model.region_sizes = region_sizes;
    std::sort(c.model.region_sizes.begin(), c.model.region_sizes.end());
    c.model.feature_maps = feature_maps;
    c.model.num_tasks = num_tasks;
    c.model.dropout_rate = dropout;
    c.model.embedding_mode = non_static ? satd::EmbeddingMode::non_static : satd::EmbeddingMode::static_;
    c.model.max_len = max_len;
    c.model.embedding_dim = embedding_dim;
    c.epochs = epochs;
    c.seed = seed;
    c.learning_rate = learning_rate;
    c.class_weight_scheme = unweighted ? satd::ClassWeightScheme::none : satd::ClassWeightScheme::inverse_frequency;
    c.task_selection = task_selection == "uniform" ? satd::TaskSelection::uniform : satd::TaskSelection::proportional;
    c.optimizer = optimizer == "sgd" ? satd::OptimizerKind::sgd : satd::OptimizerKind::adadelta;
    c.validate();
    return c;
  }

  // Reads the dimension from the vector file header unless given explicitly.
  void resolve_dim() {
    if (embeddings == "random" || dim_opt->count() > 0) return;
    std::ifstream in(embeddings);
    if (!in) throw satd::InputError("cannot open " + embeddings);
    std::size_t n = 0, d = 0;
    if (!(in >> n >> d) || d == 0) throw satd::InputError(embeddings + ": line 1: malformed vector header");
    embedding_dim = d;
  }

  satd::EmbeddingMatrix<float> embedding(const satd::Vocab& vocab, satd::EmbeddingMode mode) const {
    const auto seed3 = satd::derive_seed(seed, 3);
    if (embeddings == "random") return satd::random_init<float>(vocab, embedding_dim, seed3, mode);
    return satd::load_vec_file<float>(embeddings, vocab, embedding_dim, seed3, mode);
  }
};

// Every option's effective value, defaults included.
std::map<std::string, std::string> flag_values(const CLI::App* app) {
  std::map<std::string, std::string> out;
  for (const auto* opt : app->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
      if (opt->get_type_size() == 0 && value.empty()) value = "true";
    } else {
      value = opt->get_default_str();
      if (opt->get_type_size() == 0 && value.empty()) value = "false";
    }
    out[name] = value;
  }
  return out;
}

satd::RunManifest make_manifest(const CLI::App* sub, std::uint64_t seed, std::vector<fs::path> inputs) {
  satd::RunManifest m;
  m.command = sub->get_name();
  m.flags = flag_values(sub);
  m.seed = seed;
  m.inputs = std::move(inputs);
  return m;
}

std::array<satd::LabeledCorpus, satd::kNumSources> labeled_sources(const std::vector<satd::Record>& records) {
  auto corpora = satd::split_by_source(records);
  std::size_t labeled = 0;
  for (const auto& c : corpora) labeled += c.size();
  if (labeled == 0) throw satd::InputError("no labeled records in the training data");
  return corpora;
}

satd::Vocab vocab_for(const std::vector<satd::Record>& records, std::size_t min_count) {
  std::vector<std::vector<std::string>> lists;
  for (const auto& r : records) lists.push_back(r.tokens);
  return satd::build_vocab(lists, min_count);
}

// ---------------------------------------------------------------------------
// prep

struct PrepFlags {
  std::vector<std::string> inputs;
  std::string bots;
  std::string out;
};

int cmd_prep(const CLI::App* sub, const PrepFlags& f) {
  std::vector<fs::path> paths(f.inputs.begin(), f.inputs.end());
  if (!f.bots.empty()) paths.emplace_back(f.bots);
  auto manifest = make_manifest(sub, 0, paths);

  std::vector<satd::Record> all;
  std::set<std::string> ids;
  for (const auto& path : f.inputs) {
    for (auto& r : satd::load_jsonl(path)) {
      if (!ids.insert(r.id).second) throw satd::InputError(path + ": duplicate id \"" + r.id + "\" across inputs");
      all.push_back(std::move(r));
    }
  }
  std::array<std::size_t, satd::kNumSources> in_counts{}, out_counts{};
  for (const auto& r : all) ++in_counts[satd::task_index(r.source)];

  std::size_t removed = 0;
  if (f.bots.empty()) {
    std::cerr << "warning: no --bots list given; bot removal skipped\n";
  } else {
    const auto bots = satd::load_bot_list(f.bots);
    const std::size_t before = all.size();
    all = satd::remove_bot_records(std::move(all), bots);
    removed = before - all.size();
  }

  const satd::RefExtractor extract;
  for (auto& r : all) {
    r.refs.merge(extract(r.raw_text));
    r.clean_text = satd::normalize(satd::strip_code_blocks(r.raw_text));
    r.tokens = satd::tokenize(r.clean_text);
    ++out_counts[satd::task_index(r.source)];
  }

  const fs::path out(f.out);
  fs::create_directories(out);
  {
    auto os = open_out(out / "corpus.jsonl");
    satd::write_jsonl(all, os);
  }
  json per_source = json::object();
  for (std::size_t t = 0; t < satd::kNumSources; ++t)
    per_source[std::string(satd::to_string(satd::source_from_index(t)))] = {{"in", in_counts[t]}, {"out", out_counts[t]}};
  write_json(out / "stats.json", {{"records_in", all.size() + removed},
                                  {"kept", all.size()},
                                  {"bot_removed", removed},
                                  {"bot_list", !f.bots.empty()},
                                  {"per_source", per_source}});
  std::cout << all.size() << " kept, " << removed << " bot-removed\n";
  manifest.write(out);
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct DataFlags {
  std::string data;
  std::string out;
  std::size_t threads = 1;
};

int cmd_train(const CLI::App* sub, ModelFlags mf, const DataFlags& d) {
  mf.resolve_dim();
  std::vector<fs::path> inputs{d.data};
  if (mf.embeddings != "random") inputs.emplace_back(mf.embeddings);
  auto manifest = make_manifest(sub, mf.seed, inputs);

  const auto records = load_records(d.data);
  const auto corpora = labeled_sources(records);
  for (const auto& c : corpora)
    if (c.empty())
      throw satd::InputError(std::string("no labeled ") + std::string(satd::to_string(c.source())) +
                             " records; the multitask model needs all four sources");
  const auto cfg = mf.train_config(satd::kNumSources);
  auto vocab = vocab_for(records, mf.min_count);
  auto emb = mf.embedding(vocab, cfg.model.embedding_mode);
  log("training on " + std::to_string(records.size()) + " records, vocabulary " + std::to_string(vocab.size()));
  const auto result = satd::train_multitask(corpora, cfg, std::move(vocab), std::move(emb));
  if (!satd::all_finite(result.model.params)) throw satd::ComputeError("training produced non-finite parameters");

  const fs::path out(d.out);
  fs::create_directories(out);
  satd::save_checkpoint(result.model, out / "model");
  {
    auto os = open_out(out / "train_log.csv");
    os << "window,mean_loss\n";
    for (std::size_t i = 0; i < result.loss_log.size(); ++i) os << i << ',' << satd::format_double(result.loss_log[i]) << '\n';
  }
  manifest.write(out);
  log("wrote " + (out / "model").string());
  return 0;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const CLI::App* sub, ModelFlags mf, const DataFlags& d, std::size_t folds, bool single_task) {
  mf.resolve_dim();
  std::vector<fs::path> inputs{d.data};
  if (mf.embeddings != "random") inputs.emplace_back(mf.embeddings);
  auto manifest = make_manifest(sub, mf.seed, inputs);

  const auto records = load_records(d.data);
  const auto corpora = labeled_sources(records);
  const auto vocab = vocab_for(records, mf.min_count);
  std::vector<std::string> warnings;

  satd::CVReport report;
  if (!single_task) {
    for (const auto& c : corpora)
      if (c.empty())
        throw satd::InputError(std::string("no labeled ") + std::string(satd::to_string(c.source())) +
                               " records; use --single-task for partial data");
    const auto cfg = mf.train_config(satd::kNumSources);
    const auto emb = mf.embedding(vocab, cfg.model.embedding_mode);
    report = satd::cross_validate(corpora, cfg, vocab, emb, folds, d.threads, &warnings);
  } else {
    // One Text-CNN per source; per-source reports side by side.
    const auto cfg = mf.train_config(1);
    const auto emb = mf.embedding(vocab, cfg.model.embedding_mode);
    report.k = folds;
    report.folds.assign(folds, {});
    for (const auto& c : corpora) {
      if (c.empty()) continue;
      const auto part = satd::cross_validate(std::span<const satd::LabeledCorpus>(&c, 1), cfg, vocab, emb, folds,
                                             d.threads, &warnings);
      report.task_names.push_back(part.task_names.front());
      for (std::size_t i = 0; i < folds; ++i) report.folds[i].push_back(part.folds[i].front());
    }
    report.finalize();
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  const fs::path out(d.out);
  fs::create_directories(out);
  auto j = satd::to_json(report);
  j["mode"] = single_task ? "single_task" : "multitask";
  write_json(out / "metrics.json", j);
  {
    auto os = open_out(out / "metrics.csv");
    satd::write_cv_csv(report, os);
  }
  std::cout << "grand macro-F1 " << satd::format_double(report.grand_macro_f1) << '\n';
  for (std::size_t t = 0; t < report.task_names.size(); ++t)
    std::cout << "  " << report.task_names[t] << ' ' << satd::format_double(report.task_mean[t].macro_f1) << '\n';
  manifest.write(out);
  return 0;
}

// ---------------------------------------------------------------------------
// predict

int cmd_predict(const CLI::App* sub, const std::string& model_dir, const std::string& input, const std::string& out_dir) {
  auto manifest = make_manifest(sub, 0, {fs::path(model_dir) / "manifest.json", fs::path(model_dir) / "weights.bin", input});
  const auto model = satd::load_checkpoint(model_dir);
  const auto records = load_records(input);

  const fs::path out(out_dir);
  fs::create_directories(out);
  auto os = open_out(out / "predictions.jsonl");
  for (const auto& r : records) {
    const std::size_t task = model.config.num_tasks == 1 ? 0 : satd::task_index(r.source);
    const auto e = satd::encode_record(r, model.vocab, model.config.max_len);
    const auto cache = satd::infer(model.params, model.config, std::span<const satd::TokenId>(e.ids), task);
    json probs = json::object();
    for (std::size_t c = 0; c < model.config.num_classes; ++c)
      probs[std::string(satd::to_string(satd::label_from_index(c)))] = cache.probs[c];
    const auto label = satd::label_from_index(satd::argmax_class<float>(cache.probs));
    os << json{{"id", r.id}, {"source", satd::to_string(r.source)}, {"label", satd::to_string(label)}, {"probabilities", probs}}
              .dump()
       << '\n';
  }
  manifest.write(out);
  return 0;
}

// ---------------------------------------------------------------------------
// keywords

struct KeywordFlags {
  std::string model;
  std::string data;
  std::string out;
  double top_fraction = 0.10;
  std::size_t per_sample_top = 3;
  std::size_t min_frequency = 2;
  bool predicted = false;
};

int cmd_keywords(const CLI::App* sub, const KeywordFlags& f) {
  auto manifest = make_manifest(sub, 0, {fs::path(f.model) / "manifest.json", fs::path(f.model) / "weights.bin", f.data});
  if (!(f.top_fraction > 0 && f.top_fraction <= 1)) throw satd::InputError("--top-fraction must be in (0, 1]");
  const auto model = satd::load_checkpoint(f.model);
  const auto records = load_records(f.data);
  const auto corpora = satd::split_by_source(records);

  satd::KeywordOptions opt;
  opt.per_sample_top = f.per_sample_top;
  opt.min_frequency = f.min_frequency;
  opt.use_predicted = f.predicted;

  std::vector<satd::KeywordReport> reports;
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> lists;
  for (const auto& c : corpora) {
    if (c.empty()) continue;
    const std::size_t task = model.config.num_tasks == 1 ? 0 : satd::task_index(c.source());
    auto rep = satd::extract_keywords(model, c, task, opt);
    rep.top_fraction = f.top_fraction;
    const auto merged = rep.merged();
    if (merged.empty()) {
      std::cerr << "warning: no keywords for " << satd::to_string(c.source()) << '\n';
    } else {
      names.emplace_back(satd::to_string(c.source()));
      lists.push_back(satd::phrases_of(merged));
    }
    reports.push_back(std::move(rep));
  }

  const fs::path out(f.out);
  fs::create_directories(out);
  {
    auto os = open_out(out / "keywords.csv");
    satd::write_keywords_csv(reports, os);
  }
  json all = json::array();
  for (const auto& r : reports) all.push_back(satd::to_json(r));
  json matrix = nullptr;
  if (!lists.empty()) {
    const auto m = satd::shared_keyword_matrix(lists, f.top_fraction);
    auto os = open_out(out / "shared_keywords.csv");
    satd::write_matrix_csv(names, m, os);
    matrix = {{"sources", names}, {"counts", m}};
  }
  write_json(out / "keywords.json", {{"top_fraction", f.top_fraction}, {"sources", all}, {"shared", matrix}});
  manifest.write(out);
  return 0;
}

// ---------------------------------------------------------------------------
// link

struct LinkFlags {
  std::string data;
  std::string predictions;
  std::string comment_links;
  std::string stop_words;
  std::string out;
  double threshold = 0.5;
  bool binary = false;
};

int cmd_link(const CLI::App* sub, const LinkFlags& f) {
  std::vector<fs::path> inputs{f.data};
  for (const auto* p : {&f.predictions, &f.comment_links, &f.stop_words})
    if (!p->empty()) inputs.emplace_back(*p);
  auto manifest = make_manifest(sub, 0, inputs);
  if (!(f.threshold >= 0 && f.threshold <= 1)) throw satd::InputError("--threshold must be in [0, 1]");

  const auto records = load_records(f.data);
  const auto links = f.comment_links.empty() ? satd::CommentLinks{} : satd::load_comment_links(f.comment_links);
  const auto flows = satd::build_flows(records, links);

  // Debt items: predicted labels when given, gold labels otherwise.
  std::unordered_set<std::string> satd_ids;
  if (!f.predictions.empty()) {
    std::ifstream in(f.predictions);
    if (!in) throw satd::InputError("cannot open " + f.predictions);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = json::parse(line);
        const auto label = satd::parse_label(j.at("label").get<std::string>());
        if (!label) throw satd::InputError(f.predictions + ": line " + std::to_string(lineno) + ": unknown label");
        if (satd::is_satd(*label)) satd_ids.insert(j.at("id").get<std::string>());
      } catch (const json::exception& e) {
        throw satd::InputError(f.predictions + ": line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  } else {
    for (const auto& r : records)
      if (r.label && satd::is_satd(*r.label)) satd_ids.insert(r.id);
  }
  std::vector<satd::Record> satd_records;
  for (const auto& r : records)
    if (satd_ids.contains(r.id)) satd_records.push_back(r);

  std::unordered_set<std::string> stop;
  if (f.stop_words.empty()) {
    const auto& d = satd::default_stop_words();
    stop.insert(d.begin(), d.end());
  } else {
    stop = satd::load_stop_words(f.stop_words);
  }
  satd::RelatedOptions ro;
  ro.threshold = f.threshold;
  ro.binary = f.binary;
  const auto related = satd::find_related(flows.flows, satd_records, stop, ro);
  const auto averages = satd::flow_satd_averages(flows.flows, satd_ids);

  const fs::path out(f.out);
  fs::create_directories(out);
  {
    auto os = open_out(out / "flows.jsonl");
    satd::write_flows_jsonl(flows, os);
  }
  {
    auto os = open_out(out / "pairs.csv");
    satd::write_pairs_csv(related, os);
  }
  json kinds = json::object(), avg = json::object();
  const auto counts = flows.kind_counts();
  for (auto k : satd::kAllFlowKinds) {
    const auto ki = static_cast<std::size_t>(k);
    kinds[std::string(satd::to_string(k))] = counts[ki];
    json per = json::object();
    for (std::size_t s = 0; s < satd::kNumSources; ++s)
      per[std::string(satd::to_string(satd::source_from_index(s)))] = averages.mean[ki][s];
    avg[std::string(satd::to_string(k))] = per;
  }
  json rel = json::object();
  for (std::size_t a = 0; a < satd::kNumSources; ++a)
    for (std::size_t b = a; b < satd::kNumSources; ++b)
      if (a != b)
        rel[std::string(satd::to_string(satd::source_from_index(a))) + "-" +
            std::string(satd::to_string(satd::source_from_index(b)))] = related.related[a][b];
  json unresolved = json::array();
  for (const auto& u : flows.unresolved) unresolved.push_back({{"record", u.record_id}, {"ref", u.ref}});
  write_json(out / "summary.json", {{"flows", flows.flows.size()},
                                    {"kinds", kinds},
                                    {"satd_per_flow", avg},
                                    {"pairs", related.pairs.size()},
                                    {"related", rel},
                                    {"threshold", f.threshold},
                                    {"unresolved", unresolved}});
  std::cout << flows.flows.size() << " flows, " << related.pairs.size() << " scored pairs\n";
  manifest.write(out);
  return 0;
}

// ---------------------------------------------------------------------------
// baseline

struct BaselineFlags {
  std::string method = "random";
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  satd::LogRegConfig lr;
};

int cmd_baseline(const CLI::App* sub, const BaselineFlags& b, const DataFlags& d) {
  auto manifest = make_manifest(sub, b.seed, {d.data});
  const auto records = load_records(d.data);
  const auto all = labeled_sources(records);
  std::vector<satd::LabeledCorpus> corpora;
  for (const auto& c : all)
    if (!c.empty()) corpora.push_back(c);
  std::vector<std::string> warnings;
  auto folds = satd::make_folds(corpora, b.folds, b.seed, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  const auto report = satd::run_folds(
      std::move(folds), satd::task_names_for(corpora),
      [&](const satd::FoldData& fold) {
        std::vector<satd::Metrics> out;
        for (std::size_t t = 0; t < fold.test.size(); ++t) {
          if (fold.test[t].empty() || fold.train[t].empty()) {
            out.emplace_back();
            continue;
          }
          if (b.method == "random")
            out.push_back(satd::random_classifier(fold.train[t], fold.test[t], satd::derive_seed(b.seed, 1000 * fold.fold + t)));
          else
            out.push_back(satd::tfidf_logreg(fold.train[t], fold.test[t], b.lr));
        }
        return out;
      },
      d.threads);

  const fs::path out(d.out);
  fs::create_directories(out);
  auto j = satd::to_json(report);
  j["method"] = b.method;
  write_json(out / "metrics.json", j);
  {
    auto os = open_out(out / "metrics.csv");
    satd::write_cv_csv(report, os);
  }
  std::cout << b.method << " grand macro-F1 " << satd::format_double(report.grand_macro_f1) << '\n';
  manifest.write(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-admitted technical debt detection"};
  app.set_version_flag("--version", std::string(satd::kVersion));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  PrepFlags prep;
  auto* prep_cmd = app.add_subcommand("prep", "Clean raw JSONL records");
  prep_cmd->add_option("--in", prep.inputs, "Raw JSONL file (repeatable)")->required()->check(CLI::ExistingFile);
  prep_cmd->add_option("--bots", prep.bots, "Bot account list, one name per line")->check(CLI::ExistingFile);
  prep_cmd->add_option("--out", prep.out, "Output directory")->required();

  ModelFlags train_mf;
  DataFlags train_d;
  auto* train_cmd = app.add_subcommand("train", "Train a multitask model on all labeled records");
  train_mf.add_to(train_cmd);
  train_cmd->add_option("--data", train_d.data, "Cleaned JSONL corpus")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_d.out, "Output directory")->required();

  ModelFlags eval_mf;
  DataFlags eval_d;
  eval_d.threads = default_threads();
  std::size_t eval_folds = 10;
  bool single_task = false;
  auto* eval_cmd = app.add_subcommand("eval", "Stratified k-fold cross-validation");
  eval_mf.add_to(eval_cmd);
  eval_cmd->add_option("--data", eval_d.data, "Cleaned JSONL corpus")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_d.out, "Output directory")->required();
  eval_cmd->add_option("--folds", eval_folds, "Number of folds")->check(CLI::Range(2, 1000));
  eval_cmd->add_option("--threads", eval_d.threads, "Folds trained in parallel")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--single-task", single_task, "One single-output model per source");

  std::string pred_model, pred_in, pred_out;
  auto* pred_cmd = app.add_subcommand("predict", "Label records with a trained model");
  pred_cmd->add_option("--model", pred_model, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  pred_cmd->add_option("--in", pred_in, "JSONL records")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--out", pred_out, "Output directory")->required();

  KeywordFlags kw;
  auto* kw_cmd = app.add_subcommand("keywords", "Extract per-source debt keywords");
  kw_cmd->add_option("--model", kw.model, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  kw_cmd->add_option("--data", kw.data, "Labeled JSONL corpus")->required()->check(CLI::ExistingFile);
  kw_cmd->add_option("--out", kw.out, "Output directory")->required();
  kw_cmd->add_option("--top-fraction", kw.top_fraction, "Share of the mean list length compared across sources");
  kw_cmd->add_option("--per-sample-top", kw.per_sample_top, "Features traced back per record")->check(CLI::PositiveNumber);
  kw_cmd->add_option("--min-frequency", kw.min_frequency, "Minimum records a phrase must appear in");
  kw_cmd->add_flag("--use-predicted", kw.predicted, "Attribute to the predicted class instead of the gold label");

  LinkFlags link;
  auto* link_cmd = app.add_subcommand("link", "Reconstruct contribution flows and score related debt");
  link_cmd->add_option("--data", link.data, "JSONL records from all sources")->required()->check(CLI::ExistingFile);
  link_cmd->add_option("--predictions", link.predictions, "predict output; gold labels are used if omitted")
      ->check(CLI::ExistingFile);
  link_cmd->add_option("--comment-links", link.comment_links, "JSONL {commit, comments} sidecar")->check(CLI::ExistingFile);
  link_cmd->add_option("--stop-words", link.stop_words, "Stop-word list, one per line")->check(CLI::ExistingFile);
  link_cmd->add_option("--threshold", link.threshold, "Similarity above which a pair is related");
  link_cmd->add_flag("--binary", link.binary, "Binary term presence instead of counts");
  link_cmd->add_option("--out", link.out, "Output directory")->required();

  BaselineFlags base;
  DataFlags base_d;
  base_d.threads = default_threads();
  auto* base_cmd = app.add_subcommand("baseline", "Cross-validate a reference classifier");
  base_cmd->add_option("--method", base.method, "random or lr")->check(CLI::IsMember({"random", "lr"}));
  base_cmd->add_option("--data", base_d.data, "Cleaned JSONL corpus")->required()->check(CLI::ExistingFile);
  base_cmd->add_option("--out", base_d.out, "Output directory")->required();
  base_cmd->add_option("--folds", base.folds, "Number of folds")->check(CLI::Range(2, 1000));
  base_cmd->add_option("--seed", base.seed, "Random seed");
  base_cmd->add_option("--threads", base_d.threads, "Folds run in parallel")->check(CLI::PositiveNumber);
  base_cmd->add_option("--lr-l2", base.lr.l2, "L2 penalty");
  base_cmd->add_option("--lr-iterations", base.lr.iterations, "Gradient-descent iterations");
  base_cmd->add_option("--lr-step", base.lr.step, "Gradient-descent step size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*prep_cmd) return cmd_prep(prep_cmd, prep);
    if (*train_cmd) return cmd_train(train_cmd, train_mf, train_d);
    if (*eval_cmd) return cmd_eval(eval_cmd, eval_mf, eval_d, eval_folds, single_task);
    if (*pred_cmd) return cmd_predict(pred_cmd, pred_model, pred_in, pred_out);
    if (*kw_cmd) return cmd_keywords(kw_cmd, kw);
    if (*link_cmd) return cmd_link(link_cmd, link);
    if (*base_cmd) return cmd_baseline(base_cmd, base, base_d);
  } catch (const satd::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const satd::ComputeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return kExitInput;
}
