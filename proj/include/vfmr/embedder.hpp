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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfmr/metric_space.hpp"

namespace vfmr {

enum class Activation { kIdentity, kRectifier };

const char* activation_name(Activation a);
Activation activation_from_name(std::string_view name);

// Affine map out = W * in + b, W stored row-major (rows = out, cols = in).
struct Layer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector weights;
  Vector bias;

  Layer() = default;
  Layer(std::size_t out, std::size_t in)
      : rows(out), cols(in), weights(out * in, 0.0), bias(out, 0.0) {}

  double& w(std::size_t r, std::size_t c) { return weights[r * cols + c]; }
  double w(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct EmbedderParams {
  std::vector<Layer> layers;
  Activation activation = Activation::kRectifier;  // between layers only
  bool frozen = false;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().cols; }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().rows; }
  std::size_t parameter_count() const;

  // Throws InvalidConfig if the layer chain is broken or empty.
  void validate() const;

  friend bool operator==(const EmbedderParams&, const EmbedderParams&) = default;
};

struct ModalityPair {
  EmbedderParams voice;
  EmbedderParams face;
  MetricSpaceConfig space;

  void validate() const;

  friend bool operator==(const ModalityPair& a, const ModalityPair& b) {
    return a.voice == b.voice && a.face == b.face &&
           a.space.dim == b.space.dim && a.space.scale == b.space.scale;
  }
};

// Intermediate values of one forward pass, kept for backpropagation.
// inputs[k] feeds layer k; pre[k] is layer k's affine output.
struct ForwardTrace {
  std::vector<Vector> inputs;
  std::vector<Vector> pre;

  const Vector& output() const { return pre.back(); }
};

// Unnormalized network output net(x).
Vector forward(const EmbedderParams& params, std::span<const double> x);
ForwardTrace forward_trace(const EmbedderParams& params,
                           std::span<const double> x);

// l2_normalize_scale(net(x)).
Embedding embed(const EmbedderParams& params, std::span<const double> x,
                const MetricSpaceConfig& space);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases per layer.
EmbedderParams init_embedder(std::size_t in_dim,
                             std::span<const std::size_t> hidden_dims,
                             std::size_t out_dim, std::uint64_t seed,
                             Activation activation = Activation::kRectifier);

// Checkpoint document: {format, version, space:{dim,scale},
// voice:{activation,frozen,layers:[{w:[[..]],b:[..]}]}, face:{..}}.
std::string checkpoint_to_string(const ModalityPair& pair);
ModalityPair checkpoint_from_string(std::string_view text);
void save_checkpoint(const ModalityPair& pair, const std::string& path);
ModalityPair load_checkpoint(const std::string& path);

}  // namespace vfmr
