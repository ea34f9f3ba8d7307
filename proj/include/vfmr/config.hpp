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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vfmr/embedder.hpp"
#include "vfmr/evaluation.hpp"
#include "vfmr/sampling.hpp"
#include "vfmr/synthetic.hpp"
#include "vfmr/training.hpp"

namespace vfmr {

struct EmbedderConfig {
  std::size_t embedding_dim = 128;
  double scale = 128.0;
  std::vector<std::size_t> voice_hidden;
  std::vector<std::size_t> face_hidden;
  Activation activation = Activation::kRectifier;
  bool voice_frozen = true;
  bool face_frozen = false;
};

struct SplitConfig {
  std::optional<SplitMode> mode;  // none: use the whole dataset
  double fraction = 0.8;
};

struct EvaluationConfig {
  std::string task = "match";  // match | retrieve | joint | individual
  std::size_t n = 2;
  std::size_t num_instances = 10000;
  bool stratify_gender = false;
  std::size_t m_v = 1;
  std::size_t m_f = 1;
  std::string joint_task = "match";  // what --task joint runs
  std::size_t gallery_identities = 100;
  std::size_t gallery_faces = 5;
  std::size_t queries_per_identity = 40;
  std::size_t chance_seeds = 50;
  std::size_t repeats = 10;
  std::string target_id;  // individual test; empty = every identity
};

struct PathsConfig {
  std::string dataset;
  std::string checkpoint;
  std::string loss_csv;
  std::string report_json;
  std::string report_csv;
};

// One JSON document with sections generator, embedder, training, sampler,
// evaluation, split, paths plus a global seed and thread count. Unknown keys
// are rejected. Every subsystem seed derives from `seed`.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  GeneratorConfig generator;
  EmbedderConfig embedder;
  TrainingConfig training;
  SamplerConfig sampler;
  EvaluationConfig evaluation;
  SplitConfig split;
  PathsConfig paths;

  // Re-derives generator/sampler/training seeds and thread counts from the
  // global values; called by parse and after any override.
  void derive_seeds();

  std::uint64_t voice_init_seed() const;
  std::uint64_t face_init_seed() const;
  std::uint64_t evaluation_seed() const;
  std::uint64_t split_seed() const;
};

// Empty or whitespace-only text yields the defaults.
ExperimentConfig parse_experiment_config(std::string_view json_text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

// Fresh model for the given feature dims.
ModalityPair init_model(const ExperimentConfig& cfg, std::size_t voice_dim,
                        std::size_t face_dim);

}  // namespace vfmr
