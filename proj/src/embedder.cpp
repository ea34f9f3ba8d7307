// Copyright 2026 The vfmr Authors.
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

#include "vfmr/embedder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vfmr/error.hpp"
#include "vfmr/rng.hpp"

namespace vfmr {
namespace {

using nlohmann::json;

constexpr const char* kCheckpointFormat = "vfmr-checkpoint";
constexpr int kCheckpointVersion = 1;

void apply_layer(const Layer& layer, std::span<const double> in, Vector& out) {
  out.assign(layer.bias.begin(), layer.bias.end());
  for (std::size_t r = 0; r < layer.rows; ++r) {
    const double* row = layer.weights.data() + r * layer.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < layer.cols; ++c) acc += row[c] * in[c];
    out[r] += acc;
  }
}

void activate(Activation a, Vector& v) {
  if (a == Activation::kRectifier) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
  }
}

json params_to_json(const EmbedderParams& p) {
  json layers = json::array();
  for (const Layer& layer : p.layers) {
    json w = json::array();
    for (std::size_t r = 0; r < layer.rows; ++r) {
      w.push_back(std::vector<double>(layer.weights.begin() + r * layer.cols,
                                      layer.weights.begin() + (r + 1) * layer.cols));
    }
    layers.push_back({{"w", std::move(w)}, {"b", layer.bias}});
  }
  return {{"activation", activation_name(p.activation)},
          {"frozen", p.frozen},
          {"layers", std::move(layers)}};
}

EmbedderParams params_from_json(const json& j) {
  EmbedderParams p;
  p.activation = activation_from_name(j.at("activation").get<std::string>());
  p.frozen = j.at("frozen").get<bool>();
  for (const json& lj : j.at("layers")) {
    const auto& w = lj.at("w");
    Layer layer;
    layer.rows = w.size();
    layer.cols = layer.rows == 0 ? 0 : w.at(0).size();
    layer.weights.reserve(layer.rows * layer.cols);
    for (const json& row : w) {
      if (row.size() != layer.cols) {
        throw Error(ErrorCode::kInvalidData, "ragged weight matrix in checkpoint");
      }
      for (const json& v : row) layer.weights.push_back(v.get<double>());
    }
    layer.bias = lj.at("b").get<Vector>();
    p.layers.push_back(std::move(layer));
  }
  p.validate();
  return p;
}

}  // namespace

const char* activation_name(Activation a) {
  return a == Activation::kIdentity ? "identity" : "rectifier";
}

Activation activation_from_name(std::string_view name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "rectifier" || name == "relu") return Activation::kRectifier;
  throw Error(ErrorCode::kInvalidConfig, "unknown activation: " + std::string(name));
}

std::size_t EmbedderParams::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void EmbedderParams::validate() const {
  if (layers.empty()) throw Error(ErrorCode::kInvalidConfig, "embedder has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    if (l.rows == 0 || l.cols == 0 || l.weights.size() != l.rows * l.cols ||
        l.bias.size() != l.rows) {
      throw Error(ErrorCode::kInvalidConfig,
                  "malformed layer " + std::to_string(k));
    }
    if (k > 0 && layers[k - 1].rows != l.cols) {
      throw Error(ErrorCode::kInvalidConfig,
                  "layer " + std::to_string(k) + " input does not chain");
    }
  }
}

void ModalityPair::validate() const {
  space.validate();
  voice.validate();
  face.validate();
  if (voice.output_dim() != space.dim || face.output_dim() != space.dim) {
    throw Error(ErrorCode::kInvalidConfig,
                "embedder output dim must equal the metric space dim");
  }
}

Vector forward(const EmbedderParams& params, std::span<const double> x) {
  if (x.size() != params.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature dim " + std::to_string(x.size()) + " vs embedder input " +
                    std::to_string(params.input_dim()));
  }
  Vector current(x.begin(), x.end());
  Vector next;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    apply_layer(params.layers[k], current, next);
    if (k + 1 < params.layers.size()) activate(params.activation, next);
    current.swap(next);
  }
  return current;
}

ForwardTrace forward_trace(const EmbedderParams& params,
                           std::span<const double> x) {
  if (x.size() != params.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature dim does not match embedder input");
  }
  ForwardTrace trace;
  trace.inputs.reserve(params.layers.size());
  trace.pre.reserve(params.layers.size());
  trace.inputs.emplace_back(x.begin(), x.end());
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    Vector pre;
    apply_layer(params.layers[k], trace.inputs.back(), pre);
    if (k + 1 < params.layers.size()) {
      Vector act = pre;
      activate(params.activation, act);
      trace.inputs.push_back(std::move(act));
    }
    trace.pre.push_back(std::move(pre));
  }
  return trace;
}

Embedding embed(const EmbedderParams& params, std::span<const double> x,
                const MetricSpaceConfig& space) {
  return l2_normalize_scale(forward(params, x), space);
}

EmbedderParams init_embedder(std::size_t in_dim,
                             std::span<const std::size_t> hidden_dims,
                             std::size_t out_dim, std::uint64_t seed,
                             Activation activation) {
  if (in_dim < 1 || out_dim < 1) {
    throw Error(ErrorCode::kInvalidConfig, "embedder dims must be >= 1");
  }
  std::vector<std::size_t> dims{in_dim};
  for (std::size_t h : hidden_dims) {
    if (h < 1) throw Error(ErrorCode::kInvalidConfig, "hidden dims must be >= 1");
    dims.push_back(h);
  }
  dims.push_back(out_dim);

  Rng rng(seed);
  EmbedderParams params;
  params.activation = activation;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    Layer layer(dims[k + 1], dims[k]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[k]));
    for (double& w : layer.weights) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

std::string checkpoint_to_string(const ModalityPair& pair) {
  json doc = {{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"space", {{"dim", pair.space.dim}, {"scale", pair.space.scale}}},
              {"voice", params_to_json(pair.voice)},
              {"face", params_to_json(pair.face)}};
  return doc.dump() + "\n";
}

ModalityPair checkpoint_from_string(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != kCheckpointFormat) {
      throw Error(ErrorCode::kInvalidData, "not a vfmr checkpoint");
    }
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorCode::kInvalidData, "unsupported checkpoint version");
    }
    ModalityPair pair;
    pair.space.dim = doc.at("space").at("dim").get<std::size_t>();
    pair.space.scale = doc.at("space").at("scale").get<double>();
    pair.voice = params_from_json(doc.at("voice"));
    pair.face = params_from_json(doc.at("face"));
    pair.validate();
    return pair;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidData, std::string("bad checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ModalityPair& pair, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path);
  out << checkpoint_to_string(pair);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

ModalityPair load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace vfmr
