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

// Model bundle and its on-disk checkpoint.
//
// A checkpoint is a directory holding
//   manifest.json  config, class order, vocabulary hash, array table
//   vocab.txt      one word per line in index order (reserved rows first)
//   weights.bin    little-endian float32 arrays, concatenated in table order

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "satd/common.hpp"
#include "satd/embedding.hpp"
#include "satd/model.hpp"

namespace satd {

struct Model {
  ModelConfig config;
  Vocab vocab;
  ModelParams<float> params;
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"region_sizes", c.region_sizes},
          {"feature_maps", c.feature_maps},
          {"num_tasks", c.num_tasks},
          {"num_classes", c.num_classes},
          {"dropout_rate", c.dropout_rate},
          {"embedding_mode", to_string(c.embedding_mode)},
          {"max_len", c.max_len},
          {"embedding_dim", c.embedding_dim}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.region_sizes = j.at("region_sizes").get<std::vector<std::size_t>>();
    c.feature_maps = j.at("feature_maps").get<std::size_t>();
    c.num_tasks = j.at("num_tasks").get<std::size_t>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    const auto mode = j.at("embedding_mode").get<std::string>();
    if (mode == "static")
      c.embedding_mode = EmbeddingMode::static_;
    else if (mode == "non_static")
      c.embedding_mode = EmbeddingMode::non_static;
    else
      throw InputError("unknown embedding mode \"" + mode + "\"");
    c.max_len = j.at("max_len").get<std::size_t>();
    c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad model config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace detail {

struct ArraySpec {
  std::string name;
  std::vector<std::size_t> shape;
};

inline std::vector<ArraySpec> array_layout(const ModelConfig& c, std::size_t vocab_size) {
  std::vector<ArraySpec> out;
  out.push_back({"embedding", {vocab_size, c.embedding_dim}});
  for (std::size_t h : c.region_sizes) {
    out.push_back({"conv" + std::to_string(h) + ".weight", {c.feature_maps, h, c.embedding_dim}});
    out.push_back({"conv" + std::to_string(h) + ".bias", {c.feature_maps}});
  }
  for (std::size_t t = 0; t < c.num_tasks; ++t) {
    out.push_back({"head" + std::to_string(t) + ".weight", {c.num_classes, c.feature_width()}});
    out.push_back({"head" + std::to_string(t) + ".bias", {c.num_classes}});
  }
  return out;
}

template <typename Fn>
void for_each_array(ModelParams<float>& p, Fn&& fn) {
  fn(p.embedding.data);
  for (auto& c : p.convs) {
    fn(c.weight);
    fn(c.bias);
  }
  for (auto& h : p.heads) {
    fn(h.weight);
    fn(h.bias);
  }
}

inline std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

}  // namespace detail

inline void save_checkpoint(const Model& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto layout = detail::array_layout(model.config, model.vocab.size());

  nlohmann::json arrays = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& a : layout) {
    std::size_t count = 1;
    for (auto d : a.shape) count *= d;
    arrays.push_back({{"name", a.name}, {"shape", a.shape}, {"offset", offset}});
    offset += count * sizeof(float);
  }

  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < model.config.num_classes; ++c) classes.push_back(to_string(label_from_index(c)));

  nlohmann::json manifest = {{"format", "satd-checkpoint"},
                             {"format_version", 1},
                             {"config", to_json(model.config)},
                             {"classes", classes},
                             {"vocab_size", model.vocab.size()},
                             {"vocab_hash", model.vocab.hash()},
                             {"arrays", arrays},
                             {"weights_bytes", offset}};

  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw InputError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "vocab.txt", std::ios::binary);
    for (const auto& w : model.vocab.words()) out << w << '\n';
  }
  std::ofstream out(dir / "weights.bin", std::ios::binary);
  if (!out) throw InputError("cannot write " + (dir / "weights.bin").string());
  auto params = model.params;  // for_each_array takes non-const
  detail::for_each_array(params, [&](std::vector<float>& v) {
    for (float x : v) {
      std::uint32_t bits = detail::to_le(std::bit_cast<std::uint32_t>(x));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  });
  if (!out) throw InputError("failed writing weights");
}

inline Model load_checkpoint(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw InputError("cannot open " + (dir / "manifest.json").string());
    try {
      manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed checkpoint manifest: ") + e.what());
    }
  }
  if (manifest.value("format", "") != "satd-checkpoint") throw InputError("not a satd checkpoint");

  Model model;
  model.config = model_config_from_json(manifest.at("config"));

  {
    std::ifstream in(dir / "vocab.txt", std::ios::binary);
    if (!in) throw InputError("cannot open " + (dir / "vocab.txt").string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) words.push_back(line);
    if (words.size() < 2 || words[0] != kPadWord || words[1] != kUnkWord)
      throw InputError("vocabulary file lacks reserved entries");
    model.vocab = Vocab(std::vector<std::string>(words.begin() + 2, words.end()));
  }
  if (model.vocab.hash() != manifest.value("vocab_hash", "") ||
      model.vocab.size() != manifest.value("vocab_size", std::size_t{0}))
    throw InputError("vocabulary hash mismatch");

  const auto layout = detail::array_layout(model.config, model.vocab.size());
  const auto& arrays = manifest.at("arrays");
  if (!arrays.is_array() || arrays.size() != layout.size()) throw InputError("manifest array table does not match config");
  std::size_t offset = 0;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& a = arrays[i];
    if (a.value("name", "") != layout[i].name || a.at("shape").get<std::vector<std::size_t>>() != layout[i].shape ||
        a.at("offset").get<std::size_t>() != offset)
      throw InputError("manifest entry for " + layout[i].name + " does not match config");
    std::size_t count = 1;
    for (auto d : layout[i].shape) count *= d;
    counts.push_back(count);
    offset += count * sizeof(float);
  }
  if (manifest.value("weights_bytes", std::size_t{0}) != offset) throw InputError("manifest weight size mismatch");

  std::ifstream in(dir / "weights.bin", std::ios::binary | std::ios::ate);
  if (!in) throw InputError("cannot open " + (dir / "weights.bin").string());
  if (static_cast<std::size_t>(in.tellg()) != offset)
    throw InputError("weights.bin has " + std::to_string(static_cast<std::size_t>(in.tellg())) + " bytes, manifest declares " +
                     std::to_string(offset));
  in.seekg(0);

  auto& p = model.params;
  p.embedding = EmbeddingMatrix<float>(model.vocab.size(), model.config.embedding_dim, model.config.embedding_mode);
  for (std::size_t h : model.config.region_sizes) p.convs.push_back({h, {}, {}});
  p.heads.resize(model.config.num_tasks);
  std::size_t idx = 0;
  detail::for_each_array(p, [&](std::vector<float>& v) {
    v.resize(counts[idx++]);
    for (auto& x : v) {
      std::uint32_t bits;
      in.read(reinterpret_cast<char*>(&bits), sizeof bits);
      x = std::bit_cast<float>(detail::to_le(bits));
    }
  });
  if (!in) throw InputError("failed reading weights");
  return model;
}

}  // namespace satd
